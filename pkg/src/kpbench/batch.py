"""Batch dataset corruption: the work behind the ``corrupt`` subcommand.

Lays out outputs as ``<out_root>/<corruption>/<severity>/<file_name>``
(PNG-encoded regardless of suffix, so downstream evaluation sees exactly
the pixels the corruption produced) and writes a manifest with a content
digest per generated image. Operators are pure, so the manifest is
identical across runs and worker counts; rows are sorted canonically
before writing.
"""

from __future__ import annotations

import csv
import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .corruption import CorruptionSpec, apply
from .corruption.severity import ALL_KINDS, SEVERITY_LEVELS, CorruptionKind, DatasetProfile
from .data import DatasetIndex, load_annotations, mask_targets_for
from .image import load_image, png_bytes

MANIFEST_FIELDS = ("source_id", "corruption", "severity", "seed", "output_path", "sha256")


@dataclass
class BenchConfig:
    annotations: Path
    images_root: Path
    output_root: Path
    dataset_profile: DatasetProfile = DatasetProfile.COCO
    global_seed: int = 0
    corruptions: tuple[CorruptionKind, ...] = ALL_KINDS
    severities: tuple[int, ...] = SEVERITY_LEVELS
    workers: int = 1
    overrides: dict = field(default_factory=dict)
    force: bool = False
    resume: bool = False

    def __post_init__(self):
        self.annotations = Path(self.annotations)
        self.images_root = Path(self.images_root)
        self.output_root = Path(self.output_root)
        if self.workers < 1:
            raise ValueError(f"worker count must be >= 1, got {self.workers}")
        if not self.corruptions:
            raise ValueError("no corruptions selected")
        if not self.severities:
            raise ValueError("no severities selected")


@dataclass
class _ImageJob:
    image_id: int
    file_name: str
    mask_targets: list
    config_snapshot: dict


def _job_config(config: BenchConfig) -> dict:
    return {
        "images_root": str(config.images_root),
        "output_root": str(config.output_root),
        "dataset_profile": config.dataset_profile.value,
        "global_seed": config.global_seed,
        "corruptions": [k.value for k in config.corruptions],
        "severities": list(config.severities),
        "overrides": dict(config.overrides),
        "resume": config.resume,
    }


def _run_image_job(job: _ImageJob) -> tuple[list[dict], list[str]]:
    """Corrupt one source image across all selected cells."""
    cfg = job.config_snapshot
    rows: list[dict] = []
    errors: list[str] = []
    source = Path(cfg["images_root"]) / job.file_name
    try:
        img = load_image(source)
    except Exception as exc:  # noqa: BLE001 - collected and reported per image
        return rows, [f"image {job.image_id} ({source}): {exc}"]

    for kind_name in cfg["corruptions"]:
        kind = CorruptionKind(kind_name)
        for severity in cfg["severities"]:
            out_path = Path(cfg["output_root"]) / kind.value / str(severity) / job.file_name
            spec = CorruptionSpec(
                kind=kind,
                severity=severity,
                global_seed=cfg["global_seed"],
                dataset_profile=DatasetProfile(cfg["dataset_profile"]),
                image_id=job.image_id,
                overrides=cfg["overrides"],
            )
            try:
                if cfg["resume"] and out_path.is_file():
                    data = out_path.read_bytes()
                else:
                    targets = job.mask_targets if kind is CorruptionKind.MASK else None
                    corrupted = apply(img, spec, targets)
                    data = png_bytes(corrupted)
                    out_path.parent.mkdir(parents=True, exist_ok=True)
                    out_path.write_bytes(data)
                rows.append(
                    {
                        "source_id": job.image_id,
                        "corruption": kind.value,
                        "severity": severity,
                        "seed": spec.seed(),
                        "output_path": str(out_path.relative_to(cfg["output_root"])),
                        "sha256": hashlib.sha256(data).hexdigest(),
                    }
                )
            except Exception as exc:  # noqa: BLE001
                errors.append(
                    f"image {job.image_id} {kind.value}/{severity}: {exc}"
                )
    return rows, errors


def corrupt_dataset(
    config: BenchConfig, index: Optional[DatasetIndex] = None
) -> tuple[list[dict], list[str]]:
    """Generate every selected (image, corruption, severity) cell.

    Returns (manifest rows, per-image error messages). The manifest is also
    written to ``<output_root>/manifest.csv``.
    """
    if index is None:
        index = load_annotations(config.annotations)

    manifest_path = config.output_root / "manifest.csv"
    if manifest_path.exists() and not (config.force or config.resume):
        raise FileExistsError(
            f"output already exists at {config.output_root}; pass --force to "
            "overwrite or --resume to fill in missing cells"
        )

    snapshot = _job_config(config)
    jobs = [
        _ImageJob(
            image_id=record.id,
            file_name=record.file_name,
            mask_targets=mask_targets_for(index, record.id),
            config_snapshot=snapshot,
        )
        for record in sorted(index.images, key=lambda r: r.id)
    ]

    results: list[tuple[list[dict], list[str]]] = []
    if config.workers == 1:
        results = [_run_image_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_image_job, jobs))

    rows: list[dict] = []
    errors: list[str] = []
    for job_rows, job_errors in results:
        rows.extend(job_rows)
        errors.extend(job_errors)

    rows.sort(key=lambda r: (r["corruption"], r["severity"], r["source_id"]))
    config.output_root.mkdir(parents=True, exist_ok=True)
    with open(manifest_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    return rows, errors


def read_manifest(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def verify_manifest(output_root: str | Path, rows: Sequence[dict]) -> list[str]:
    """Check every manifest row's digest against the file on disk."""
    output_root = Path(output_root)
    problems = []
    for row in rows:
        target = output_root / row["output_path"]
        if not target.is_file():
            problems.append(f"missing output {row['output_path']}")
            continue
        digest = hashlib.sha256(target.read_bytes()).hexdigest()
        if digest != row["sha256"]:
            problems.append(f"digest mismatch for {row['output_path']}")
    return problems
