"""Command-line interface: corrupt | evaluate | report | augment.

Exit codes: 0 success, 1 validation failure, 2 I/O failure, 3 partial
failure (some images failed but the run completed).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .corruption.severity import (
    ALL_KINDS,
    SEVERITY_LEVELS,
    DatasetProfile,
    parse_kind,
)
from .data import DatasetError, load_annotations, load_predictions

EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_PARTIAL = 3


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.is_file():
        _fail(EXIT_IO, f"config file not found: {p}")
    text = p.read_text()
    if p.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python 3.10
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _merged(config: dict, key: str, value, default=None):
    """CLI flag wins; then config file; then default."""
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _parse_corruptions(raw) -> tuple:
    if raw is None:
        return ALL_KINDS
    if isinstance(raw, str):
        raw = [part for part in raw.split(",") if part.strip()]
    return tuple(parse_kind(name) for name in raw)


def _parse_severities(raw) -> tuple:
    if raw is None:
        return SEVERITY_LEVELS
    if isinstance(raw, str):
        raw = [part for part in raw.split(",") if part.strip()]
    levels = tuple(int(v) for v in raw)
    for level in levels:
        if not 1 <= level <= 5:
            raise ValueError(f"severity out of range: {level} (valid range is 1..5)")
    return levels


def _load_sigmas(path: str | None):
    if not path:
        return None
    with open(path) as fh:
        raw = json.load(fh)
    if isinstance(raw, list):
        return {"*": tuple(float(v) for v in raw)}
    return {int(k): tuple(float(v) for v in values) for k, values in raw.items()}


def _sigmas_mapping(sigmas, index):
    if sigmas is None:
        return None
    if "*" in sigmas:
        return {cat_id: sigmas["*"] for cat_id in index.category_ids}
    return sigmas


@click.group()
@click.version_option(version=__version__, prog_name="kpbench")
def main():
    """Corruption-robustness benchmarking for keypoint estimation."""


@main.command()
@click.option("--config", "config_path", type=str, default=None, help="TOML or JSON config file.")
@click.option("--annotations", type=str, default=None, help="COCO keypoints ground-truth JSON.")
@click.option("--images-root", type=str, default=None, help="Directory holding the clean images.")
@click.option("--output-root", type=str, default=None, help="Directory for corrupted outputs.")
@click.option("--profile", type=str, default=None, help="Dataset profile: coco | ochuman | ap10k.")
@click.option("--seed", type=int, default=None, help="Global seed for the corruption streams.")
@click.option("--corruptions", type=str, default=None, help="Comma-separated corruption subset.")
@click.option("--severities", type=str, default=None, help="Comma-separated severity subset.")
@click.option("--workers", type=int, default=None, envvar="BENCH_WORKERS", help="Parallel workers.")
@click.option("--force", is_flag=True, help="Overwrite an existing output tree.")
@click.option("--resume", is_flag=True, help="Keep existing outputs, fill in missing cells.")
@click.option("--noise-gain", type=float, default=None, help="Gaussian-noise sigma multiplier.")
@click.option("--mask-fill", type=int, default=None, help="Mask fill value (default 0).")
def corrupt(config_path, annotations, images_root, output_root, profile, seed,
            corruptions, severities, workers, force, resume, noise_gain, mask_fill):
    """Generate the corrupted copies of a dataset's images."""
    from .batch import BenchConfig, corrupt_dataset

    config = _load_config(config_path)
    annotations = _merged(config, "annotations", annotations)
    images_root = _merged(config, "images_root", images_root)
    output_root = _merged(config, "output_root", output_root)
    if not annotations or not images_root or not output_root:
        _fail(EXIT_VALIDATION, "--annotations, --images-root and --output-root are required")

    overrides = {}
    noise_gain = _merged(config, "noise_gain", noise_gain)
    mask_fill = _merged(config, "mask_fill", mask_fill)
    if noise_gain is not None:
        overrides["noise_gain"] = float(noise_gain)
    if mask_fill is not None:
        overrides["mask_fill"] = int(mask_fill)

    try:
        bench = BenchConfig(
            annotations=Path(annotations),
            images_root=Path(images_root),
            output_root=Path(output_root),
            dataset_profile=DatasetProfile(str(_merged(config, "profile", profile, "coco")).lower()),
            global_seed=int(_merged(config, "seed", seed, 0)),
            corruptions=_parse_corruptions(_merged(config, "corruptions", corruptions)),
            severities=_parse_severities(_merged(config, "severities", severities)),
            workers=int(_merged(config, "workers", workers, 1)),
            overrides=overrides,
            force=force,
            resume=resume,
        )
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))

    try:
        index = load_annotations(bench.annotations)
    except FileNotFoundError as exc:
        _fail(EXIT_IO, str(exc))
    except (DatasetError, json.JSONDecodeError) as exc:
        _fail(EXIT_VALIDATION, str(exc))

    try:
        rows, errors = corrupt_dataset(bench, index)
    except FileExistsError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))

    click.echo(f"wrote {len(rows)} corrupted images under {bench.output_root}")
    if errors:
        for message in errors:
            click.echo(f"failed: {message}", err=True)
        _fail(EXIT_PARTIAL, f"{len(errors)} cells failed")


@main.command()
@click.argument("ground_truth", type=str)
@click.argument("predictions", type=str)
@click.option("--output", type=str, default=None, help="Where to write the metrics JSON.")
@click.option("--sigmas", "sigmas_path", type=str, default=None,
              help="JSON file with per-category OKS sigmas.")
@click.option("--max-dets", type=int, default=20, show_default=True)
@click.option("--ignore-policy", type=click.Choice(["ignore", "drop"]), default="ignore",
              show_default=True, help="Treatment of crowd / zero-keypoint instances.")
@click.option("--permissive-unmatched", is_flag=True,
              help="Unmatched detections are absorbed instead of counted as false positives.")
def evaluate(ground_truth, predictions, output, sigmas_path, max_dets,
             ignore_policy, permissive_unmatched):
    """Evaluate a COCO-format prediction file against ground truth."""
    from .evaluation import EvalParams, evaluate_predictions

    try:
        index = load_annotations(ground_truth)
        sigmas = _sigmas_mapping(_load_sigmas(sigmas_path), index)
        preds = load_predictions(predictions, index)
    except FileNotFoundError as exc:
        _fail(EXIT_IO, str(exc))
    except (DatasetError, json.JSONDecodeError, ValueError) as exc:
        _fail(EXIT_VALIDATION, str(exc))

    params = EvalParams(
        max_detections=max_dets,
        sigmas=sigmas,
        ignore_policy=ignore_policy,
        permissive_unmatched=permissive_unmatched,
    )
    metrics = evaluate_predictions(index, preds, params)
    payload = metrics.to_dict()
    for name, value in payload.items():
        click.echo(f"{name:<10} {'NA' if value is None else f'{value:.4f}'}")
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        with open(output, "w") as fh:
            json.dump(payload, fh, indent=2)
        click.echo(f"metrics written to {output}")


@main.command()
@click.option("--clean", "clean_path", type=str, required=True,
              help="Metrics JSON from the clean evaluation run.")
@click.option("--corrupted-dir", type=str, required=True,
              help="Directory holding <corruption>/<severity>.json metric files.")
@click.option("--format", "fmt", type=click.Choice(["markdown", "csv"]), default="markdown",
              show_default=True)
@click.option("--output-dir", type=str, default=None,
              help="Directory for report.md / report.csv (default: corrupted dir).")
@click.option("--allow-partial", is_flag=True, help="Tolerate missing grid cells (rendered NA).")
def report(clean_path, corrupted_dir, fmt, output_dir, allow_partial):
    """Aggregate per-cell metrics into a relative-robustness report."""
    from .evaluation import MetricSet
    from .robustness import CleanRecord, RunRecord, build_report, render

    def read_metrics(path: Path) -> MetricSet:
        with open(path) as fh:
            return MetricSet.from_dict(json.load(fh))

    corrupted = Path(corrupted_dir)
    try:
        clean = CleanRecord(metrics=read_metrics(Path(clean_path)))
    except FileNotFoundError as exc:
        _fail(EXIT_IO, str(exc))

    runs = []
    missing = []
    for kind in ALL_KINDS:
        for severity in SEVERITY_LEVELS:
            cell = corrupted / kind.value / f"{severity}.json"
            if not cell.is_file():
                missing.append(f"{kind.value}/{severity}")
                continue
            runs.append(RunRecord(corruption=kind, severity=severity, metrics=read_metrics(cell)))
    if missing and not allow_partial:
        _fail(EXIT_VALIDATION, f"missing metric cells: {', '.join(missing)}")

    try:
        result = build_report(clean, runs, allow_partial=allow_partial)
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))

    out_dir = Path(output_dir) if output_dir else corrupted
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.md").write_text(render(result, "markdown"))
    (out_dir / "report.csv").write_text(render(result, "csv"))
    click.echo(render(result, fmt), nl=False)


@main.command()
@click.option("--config", "config_path", type=str, default=None, help="TOML or JSON config file.")
@click.option("--annotations", type=str, default=None)
@click.option("--images-root", type=str, default=None)
@click.option("--output-root", type=str, default=None)
@click.option("--sets", type=str, default=None, help="Augmentation sets, e.g. A,B,C,D.")
@click.option("--copies", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--probability", type=float, default=None,
              help="Per-transform application probability (default 0.5).")
def augment(config_path, annotations, images_root, output_root, sets, copies, seed, probability):
    """Export augmented dataset copies for external training."""
    from .augment import DEFAULT_PROBABILITY, build_pipeline, export_augmented

    config = _load_config(config_path)
    annotations = _merged(config, "annotations", annotations)
    images_root = _merged(config, "images_root", images_root)
    output_root = _merged(config, "output_root", output_root)
    sets = _merged(config, "sets", sets)
    if not annotations or not images_root or not output_root or not sets:
        _fail(EXIT_VALIDATION, "--annotations, --images-root, --output-root and --sets are required")
    if isinstance(sets, str):
        sets = [part.strip() for part in sets.split(",") if part.strip()]

    try:
        pipeline = build_pipeline(
            sets, probability=float(_merged(config, "probability", probability, DEFAULT_PROBABILITY))
        )
        index = load_annotations(annotations)
    except FileNotFoundError as exc:
        _fail(EXIT_IO, str(exc))
    except (DatasetError, ValueError) as exc:
        _fail(EXIT_VALIDATION, str(exc))

    click.echo(
        f"pipeline: {len(pipeline)} transforms ("
        + ", ".join(step.transform_id for step in pipeline.steps)
        + ")"
    )
    try:
        manifest = export_augmented(
            index,
            images_root,
            pipeline,
            copies=int(copies),
            out_root=output_root,
            global_seed=int(_merged(config, "seed", seed, 0)),
        )
    except FileNotFoundError as exc:
        _fail(EXIT_IO, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    click.echo(f"wrote {len(manifest)} augmented images under {output_root}")


if __name__ == "__main__":
    main()
