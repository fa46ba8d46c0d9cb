"""COCO-format keypoint ground truth and prediction loading.

One parser covers all three dataset profiles (COCO, OCHuman, AP10K all ship
COCO-style JSON). Loading validates referential integrity and keypoint
arity, collecting every violation with the offending record id before
raising. The loaded index is immutable in practice: nothing here mutates it
after construction, so it is safe to share across workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

#: COCO-convention per-keypoint OKS constants for 17-keypoint skeletons.
DEFAULT_SIGMAS_17 = (
    0.026, 0.025, 0.025, 0.035, 0.035, 0.079, 0.079, 0.072, 0.072,
    0.062, 0.062, 0.107, 0.107, 0.087, 0.087, 0.089, 0.089,
)


class DatasetError(ValueError):
    """Raised for malformed or inconsistent dataset/prediction files."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ImageRecord:
    id: int
    file_name: str
    width: int
    height: int


@dataclass(frozen=True)
class Annotation:
    id: int
    image_id: int
    category_id: int
    keypoints: tuple[float, ...]
    num_keypoints: int
    area: float
    bbox: tuple[float, float, float, float]
    iscrowd: int = 0

    @property
    def is_ignore(self) -> bool:
        """Crowd or zero-visible-keypoint instances act as ignore regions."""
        return bool(self.iscrowd) or self.num_keypoints == 0

    def keypoint_triplets(self) -> list[tuple[float, float, float]]:
        k = self.keypoints
        return [(k[i], k[i + 1], k[i + 2]) for i in range(0, len(k), 3)]


@dataclass(frozen=True)
class Prediction:
    image_id: int
    category_id: int
    keypoints: tuple[float, ...]
    score: float

    def keypoint_xy(self) -> list[tuple[float, float]]:
        k = self.keypoints
        return [(k[i], k[i + 1]) for i in range(0, len(k), 3)]

    def extent_area(self) -> float:
        """Area of the tight bbox over all predicted keypoint locations
        (the COCO convention for sizing keypoint detections)."""
        xs = self.keypoints[0::3]
        ys = self.keypoints[1::3]
        return (max(xs) - min(xs)) * (max(ys) - min(ys))


@dataclass(frozen=True)
class CategoryMeta:
    id: int
    name: str
    keypoint_names: tuple[str, ...]
    sigmas: tuple[float, ...]

    @property
    def num_keypoints(self) -> int:
        return len(self.keypoint_names)


@dataclass
class DatasetIndex:
    images: list[ImageRecord]
    annotations: list[Annotation]
    categories: list[CategoryMeta]
    by_image: dict[int, list[Annotation]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.by_image:
            self.by_image = {img.id: [] for img in self.images}
            for ann in self.annotations:
                self.by_image.setdefault(ann.image_id, []).append(ann)
        self._images_by_id = {img.id: img for img in self.images}
        self._categories_by_id = {cat.id: cat for cat in self.categories}

    def image(self, image_id: int) -> ImageRecord:
        try:
            return self._images_by_id[image_id]
        except KeyError:
            raise KeyError(f"unknown image id {image_id}") from None

    def category(self, category_id: int) -> CategoryMeta:
        return self._categories_by_id[category_id]

    @property
    def image_ids(self) -> list[int]:
        return sorted(self._images_by_id)

    @property
    def category_ids(self) -> list[int]:
        return sorted(self._categories_by_id)

    def to_json(self) -> dict:
        """Re-serialize the evaluation-relevant fields (lossless)."""
        return {
            "images": [
                {"id": im.id, "file_name": im.file_name, "width": im.width, "height": im.height}
                for im in self.images
            ],
            "annotations": [
                {
                    "id": a.id,
                    "image_id": a.image_id,
                    "category_id": a.category_id,
                    "keypoints": list(a.keypoints),
                    "num_keypoints": a.num_keypoints,
                    "area": a.area,
                    "bbox": list(a.bbox),
                    "iscrowd": a.iscrowd,
                }
                for a in self.annotations
            ],
            "categories": [
                {"id": c.id, "name": c.name, "keypoints": list(c.keypoint_names)}
                for c in self.categories
            ],
        }


def _category_sigmas(raw_cat: dict, problems: list[str], sigmas_override=None) -> tuple:
    kp_names = raw_cat.get("keypoints") or [f"kp_{i}" for i in range(17)]
    k = len(kp_names)
    if sigmas_override is not None:
        sigmas = tuple(float(s) for s in sigmas_override)
    elif "sigmas" in raw_cat:
        sigmas = tuple(float(s) for s in raw_cat["sigmas"])
    elif k == len(DEFAULT_SIGMAS_17):
        sigmas = DEFAULT_SIGMAS_17
    else:
        problems.append(
            f"category {raw_cat.get('id')}: no OKS sigmas for {k} keypoints; "
            "provide them via the category's 'sigmas' field or a sigmas file"
        )
        sigmas = tuple(0.05 for _ in range(k))
    if len(sigmas) != k:
        problems.append(
            f"category {raw_cat.get('id')}: {len(sigmas)} sigmas for {k} keypoints"
        )
    if any(s <= 0 for s in sigmas):
        problems.append(f"category {raw_cat.get('id')}: sigmas must be > 0")
    return tuple(kp_names), sigmas


def load_annotations(path: str | Path, sigmas: Optional[dict] = None) -> DatasetIndex:
    """Load and validate a COCO keypoints JSON file.

    ``sigmas`` optionally maps category id -> per-keypoint OKS constants,
    overriding the file's values / the 17-keypoint defaults.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"annotations file not found: {path}")
    with open(path) as fh:
        raw = json.load(fh)
    for key in ("images", "annotations", "categories"):
        if key not in raw:
            raise DatasetError(f"missing top-level key {key!r}")

    problems: list[str] = []

    categories = []
    for raw_cat in raw["categories"]:
        kp_names, cat_sigmas = _category_sigmas(
            raw_cat, problems, (sigmas or {}).get(raw_cat.get("id"))
        )
        categories.append(
            CategoryMeta(
                id=int(raw_cat["id"]),
                name=str(raw_cat.get("name", "")),
                keypoint_names=kp_names,
                sigmas=cat_sigmas,
            )
        )
    cat_by_id = {c.id: c for c in categories}

    images = []
    seen_image_ids = set()
    for raw_img in raw["images"]:
        rec = ImageRecord(
            id=int(raw_img["id"]),
            file_name=str(raw_img["file_name"]),
            width=int(raw_img["width"]),
            height=int(raw_img["height"]),
        )
        if rec.width < 1 or rec.height < 1:
            problems.append(f"image {rec.id}: non-positive dimensions {rec.width}x{rec.height}")
        if rec.id in seen_image_ids:
            problems.append(f"image {rec.id}: duplicate image id")
        seen_image_ids.add(rec.id)
        images.append(rec)

    annotations = []
    seen_ann_ids = set()
    for raw_ann in raw["annotations"]:
        ann_id = raw_ann.get("id")
        if ann_id in seen_ann_ids:
            problems.append(f"annotation {ann_id}: duplicate annotation id")
        seen_ann_ids.add(ann_id)
        image_id = raw_ann.get("image_id")
        category_id = raw_ann.get("category_id")
        if image_id not in seen_image_ids:
            problems.append(f"annotation {ann_id}: unknown image_id {image_id}")
        cat = cat_by_id.get(category_id)
        if cat is None:
            problems.append(f"annotation {ann_id}: unknown category_id {category_id}")

        kps = tuple(float(v) for v in raw_ann.get("keypoints", ()))
        if cat is not None and len(kps) != 3 * cat.num_keypoints:
            problems.append(
                f"annotation {ann_id}: expected {3 * cat.num_keypoints} keypoint "
                f"values, got {len(kps)}"
            )
        visibilities = kps[2::3]
        if any(v not in (0.0, 1.0, 2.0) for v in visibilities):
            problems.append(f"annotation {ann_id}: visibility flags must be 0, 1, or 2")
        declared = raw_ann.get("num_keypoints")
        visible = sum(1 for v in visibilities if v > 0)
        num_keypoints = int(declared) if declared is not None else visible
        if declared is not None and int(declared) != visible:
            problems.append(
                f"annotation {ann_id}: num_keypoints={declared} but {visible} "
                "keypoints have v > 0"
            )
        area = float(raw_ann.get("area", 0.0))
        iscrowd = int(raw_ann.get("iscrowd", 0))
        if area <= 0 and not (iscrowd or num_keypoints == 0):
            problems.append(f"annotation {ann_id}: area must be > 0 for evaluated instances")
        bbox = tuple(float(v) for v in raw_ann.get("bbox", (0.0, 0.0, 0.0, 0.0)))
        annotations.append(
            Annotation(
                id=int(ann_id) if ann_id is not None else -1,
                image_id=int(image_id) if image_id is not None else -1,
                category_id=int(category_id) if category_id is not None else -1,
                keypoints=kps,
                num_keypoints=num_keypoints,
                area=area,
                bbox=bbox,
                iscrowd=iscrowd,
            )
        )

    if problems:
        raise DatasetError(problems)
    return DatasetIndex(images=images, annotations=annotations, categories=categories)


def load_predictions(path: str | Path, index: DatasetIndex) -> list[Prediction]:
    """Load a COCO results JSON (flat array) and validate it against ``index``."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"predictions file not found: {path}")
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise DatasetError("predictions file must contain a JSON array")

    problems: list[str] = []
    predictions: list[Prediction] = []
    known_images = set(idx.id for idx in index.images)
    for pos, raw_det in enumerate(raw):
        image_id = raw_det.get("image_id")
        category_id = raw_det.get("category_id")
        if image_id not in known_images:
            problems.append(f"prediction #{pos}: unknown image_id {image_id}")
            continue
        try:
            cat = index.category(category_id)
        except KeyError:
            problems.append(f"prediction #{pos}: unknown category_id {category_id}")
            continue
        kps = tuple(float(v) for v in raw_det.get("keypoints", ()))
        if len(kps) != 3 * cat.num_keypoints:
            problems.append(
                f"prediction #{pos}: expected {3 * cat.num_keypoints} keypoint "
                f"values, got {len(kps)}"
            )
            continue
        score = float(raw_det.get("score", math.nan))
        if not math.isfinite(score):
            problems.append(f"prediction #{pos}: score must be finite, got {score}")
            continue
        predictions.append(
            Prediction(
                image_id=int(image_id),
                category_id=int(category_id),
                keypoints=kps,
                score=score,
            )
        )
    if problems:
        raise DatasetError(problems)
    return predictions


def mask_targets_for(index: DatasetIndex, image_id: int) -> list[tuple[float, float, float]]:
    """All keypoint (x, y, v) triplets annotated on one image, concatenated."""
    index.image(image_id)
    targets: list[tuple[float, float, float]] = []
    for ann in index.by_image.get(image_id, ()):
        targets.extend(ann.keypoint_triplets())
    return targets
