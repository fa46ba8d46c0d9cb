"""OKS-based keypoint detection metrics (COCO protocol).

Implements the full evaluation chain for one (dataset, prediction set)
pair: per-image greedy matching at 10 OKS thresholds, 101-point
precision interpolation, and the mAP/mAR summary family. Protocol details
(greedy tie handling, ignore regions, per-area matching, maxDets=20) follow
the COCO keypoint convention exactly, because the robustness arithmetic
downstream is only comparable against numbers produced by that protocol.

Detections are ordered by score descending with a content-based tiebreak
(keypoints tuple), which makes every summary metric invariant under
permutations of the prediction list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .data import Annotation, DatasetIndex, Prediction

#: spacing(1); part of the pinned OKS formula.
OKS_EPS = 2.220446049250313e-16

DEFAULT_THRESHOLDS = tuple((10 + i) / 20.0 for i in range(10))
DEFAULT_AREA_RANGES = (
    ("all", (0.0, 1e10)),
    ("medium", (32.0**2, 96.0**2)),
    ("large", (96.0**2, 1e10)),
)


@dataclass(frozen=True)
class EvalParams:
    oks_thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    area_ranges: tuple[tuple[str, tuple[float, float]], ...] = DEFAULT_AREA_RANGES
    max_detections: int = 20
    sigmas: Optional[dict[int, tuple[float, ...]]] = None  # category id -> sigmas
    ignore_policy: str = "ignore"  # "ignore" | "drop" for crowd / zero-kp gts
    permissive_unmatched: bool = False  # unmatched detections absorb instead of FP

    def __post_init__(self):
        thr = self.oks_thresholds
        if any(not 0 < t <= 1 for t in thr) or any(b <= a for a, b in zip(thr, thr[1:])):
            raise ValueError("oks_thresholds must be strictly increasing values in (0, 1]")
        if self.max_detections < 1:
            raise ValueError("max_detections must be >= 1")
        if self.ignore_policy not in ("ignore", "drop"):
            raise ValueError(f"unknown ignore_policy {self.ignore_policy!r}")

    def sigmas_for(self, index: DatasetIndex, category_id: int) -> np.ndarray:
        if self.sigmas and category_id in self.sigmas:
            return np.asarray(self.sigmas[category_id], dtype=np.float64)
        return np.asarray(index.category(category_id).sigmas, dtype=np.float64)


@dataclass(frozen=True)
class MetricSet:
    mAP: Optional[float]
    ap50: Optional[float]
    ap75: Optional[float]
    ap_medium: Optional[float]
    ap_large: Optional[float]
    mAR: Optional[float]
    ar50: Optional[float]
    ar75: Optional[float]
    ar_medium: Optional[float]
    ar_large: Optional[float]

    FIELDS = ("mAP", "ap50", "ap75", "ap_medium", "ap_large",
              "mAR", "ar50", "ar75", "ar_medium", "ar_large")

    def to_dict(self) -> dict[str, Optional[float]]:
        return {name: getattr(self, name) for name in self.FIELDS}

    @classmethod
    def from_dict(cls, data: dict) -> "MetricSet":
        return cls(**{name: data.get(name) for name in cls.FIELDS})


def compute_oks(gt: Annotation, det: Prediction, sigmas: Sequence[float]) -> float:
    """Object keypoint similarity between a ground-truth instance (with at
    least one visible keypoint) and a detection."""
    if gt.num_keypoints == 0:
        raise ValueError(
            f"annotation {gt.id} has no visible keypoints; it is an ignore "
            "region and must not enter compute_oks"
        )
    gk = np.asarray(gt.keypoints, dtype=np.float64).reshape(-1, 3)
    dk = np.asarray(det.keypoints, dtype=np.float64).reshape(-1, 3)
    if gk.shape != dk.shape:
        raise ValueError("keypoint arity mismatch between annotation and prediction")
    visible = gk[:, 2] > 0
    d2 = (dk[visible, 0] - gk[visible, 0]) ** 2 + (dk[visible, 1] - gk[visible, 1]) ** 2
    k2 = (2.0 * np.asarray(sigmas, dtype=np.float64)[visible]) ** 2
    # scalar exp + fsum keep the value bit-reproducible across platforms
    exponents = (-d2 / (2.0 * (gt.area + OKS_EPS) * k2)).tolist()
    return math.fsum(math.exp(e) for e in exponents) / len(exponents)


def _ignore_region_similarity(gt: Annotation, det: Prediction, sigmas: np.ndarray) -> float:
    """Proximity of a detection to a zero-visible-keypoint ignore region:
    Gaussian of each predicted keypoint's distance outside the doubled gt
    bbox, averaged over all keypoints (COCO convention)."""
    bx, by, bw, bh = gt.bbox
    x0, x1 = bx - bw, bx + 2.0 * bw
    y0, y1 = by - bh, by + 2.0 * bh
    dk = np.asarray(det.keypoints, dtype=np.float64).reshape(-1, 3)
    dx = np.maximum(0.0, x0 - dk[:, 0]) + np.maximum(0.0, dk[:, 0] - x1)
    dy = np.maximum(0.0, y0 - dk[:, 1]) + np.maximum(0.0, dk[:, 1] - y1)
    k2 = (2.0 * sigmas) ** 2
    exponents = (-(dx**2 + dy**2) / (2.0 * (gt.area + OKS_EPS) * k2)).tolist()
    return math.fsum(math.exp(e) for e in exponents) / len(exponents)


def _similarity(gt: Annotation, det: Prediction, sigmas: np.ndarray) -> float:
    if gt.num_keypoints > 0:
        return compute_oks(gt, det, sigmas)
    return _ignore_region_similarity(gt, det, sigmas)


def canonical_detections(dets: Sequence[Prediction]) -> list[Prediction]:
    """Score-descending, ties broken by keypoint content (input-order free)."""
    return sorted(dets, key=lambda d: (-d.score, d.keypoints))


@dataclass
class ImageEval:
    """Match outcome for one (image, category, area range): row t of each
    array corresponds to oks_thresholds[t]."""

    det_scores: list[float]
    det_matched: np.ndarray  # (T, D) gt annotation id or 0
    det_ignored: np.ndarray  # (T, D) bool
    gt_ignored: np.ndarray  # (G,) bool
    n_positive: int


@dataclass
class MatchLedger:
    """Per (image, category, area-range-name) match fragments, plus the
    image order used when concatenating score lists."""

    fragments: dict[tuple[int, int, str], ImageEval] = field(default_factory=dict)
    image_order: list[int] = field(default_factory=list)


def match_image(
    gts: Sequence[Annotation],
    dets: Sequence[Prediction],
    threshold: float,
    params: EvalParams,
    sigmas: Optional[Sequence[float]] = None,
    area_range: tuple[float, float] = (0.0, 1e10),
) -> ImageEval:
    """Greedy matching for a single image at a single threshold (exposed for
    inspection/testing; evaluation uses the all-thresholds path)."""
    if sigmas is None:
        sigmas = _default_sigmas_for(gts, dets)
    fragment = _evaluate_image(list(gts), list(dets), (threshold,), area_range,
                               np.asarray(sigmas, dtype=np.float64), params)
    return fragment


def _default_sigmas_for(gts, dets) -> np.ndarray:
    from .data import DEFAULT_SIGMAS_17

    items = list(gts) + list(dets)
    if not items or len(items[0].keypoints) == 3 * len(DEFAULT_SIGMAS_17):
        return np.asarray(DEFAULT_SIGMAS_17)
    return np.full(len(items[0].keypoints) // 3, 0.05)


def _evaluate_image(
    gts: list[Annotation],
    dets: list[Prediction],
    thresholds: Sequence[float],
    area_range: tuple[float, float],
    sigmas: np.ndarray,
    params: EvalParams,
) -> ImageEval:
    lo, hi = area_range
    dets = canonical_detections(dets)[: params.max_detections]

    gt_ignored = np.array(
        [g.is_ignore or g.area < lo or g.area > hi for g in gts], dtype=bool
    )
    order = sorted(range(len(gts)), key=lambda i: bool(gt_ignored[i]))

    T, D, G = len(thresholds), len(dets), len(gts)
    det_matched = np.zeros((T, D), dtype=np.int64)
    det_ignored = np.zeros((T, D), dtype=bool)

    if G and D:
        oks = np.empty((D, G), dtype=np.float64)
        for di, det in enumerate(dets):
            for gi, gt in enumerate(gts):
                oks[di, gi] = _similarity(gt, det, sigmas)
        iscrowd = [bool(g.iscrowd) for g in gts]
        for ti, threshold in enumerate(thresholds):
            gt_taken = np.zeros(G, dtype=np.int64)
            for di in range(D):
                best = min(threshold, 1.0 - 1e-10)
                match = -1
                for gi in order:
                    if gt_taken[gi] and not iscrowd[gi]:
                        continue
                    if match > -1 and not gt_ignored[match] and gt_ignored[gi]:
                        break
                    if oks[di, gi] < best:
                        continue
                    best = oks[di, gi]
                    match = gi
                if match == -1:
                    continue
                det_ignored[ti, di] = gt_ignored[match]
                det_matched[ti, di] = gts[match].id
                gt_taken[match] = 1

    # unmatched detections outside the area range do not count against precision
    if D:
        det_areas = np.array([d.extent_area() for d in dets])
        out_of_range = (det_areas < lo) | (det_areas > hi)
        det_ignored |= (det_matched == 0) & out_of_range[None, :]
        if params.permissive_unmatched:
            det_ignored |= det_matched == 0

    return ImageEval(
        det_scores=[d.score for d in dets],
        det_matched=det_matched,
        det_ignored=det_ignored,
        gt_ignored=gt_ignored,
        n_positive=int((~gt_ignored).sum()),
    )


def build_ledger(
    index: DatasetIndex, predictions: Sequence[Prediction], params: EvalParams
) -> MatchLedger:
    """Run matching for every (image, category, area range)."""
    dets_by_key: dict[tuple[int, int], list[Prediction]] = {}
    for det in predictions:
        dets_by_key.setdefault((det.image_id, det.category_id), []).append(det)

    ledger = MatchLedger(image_order=index.image_ids)
    for category_id in index.category_ids:
        sigmas = params.sigmas_for(index, category_id)
        for image_id in index.image_ids:
            gts = [a for a in index.by_image.get(image_id, ()) if a.category_id == category_id]
            if params.ignore_policy == "drop":
                gts = [g for g in gts if not g.is_ignore]
            dets = dets_by_key.get((image_id, category_id), [])
            if not gts and not dets:
                continue
            for range_name, area_range in params.area_ranges:
                ledger.fragments[(image_id, category_id, range_name)] = _evaluate_image(
                    gts, dets, params.oks_thresholds, area_range, sigmas, params
                )
    return ledger


def accumulate_and_summarize(
    ledger: MatchLedger, index: DatasetIndex, params: EvalParams
) -> MetricSet:
    """Score-ranked PR accumulation and COCO-style summarization."""
    thresholds = params.oks_thresholds
    recall_grid = np.array([i / 100.0 for i in range(101)])
    t50 = _threshold_pos(thresholds, 0.5)
    t75 = _threshold_pos(thresholds, 0.75)

    # ap[range_name][t] and ar[...] lists over categories with ground truth
    ap_lists: dict[str, list[np.ndarray]] = {name: [] for name, _ in params.area_ranges}
    ar_lists: dict[str, list[np.ndarray]] = {name: [] for name, _ in params.area_ranges}

    for category_id in index.category_ids:
        for range_name, _ in params.area_ranges:
            fragments = [
                ledger.fragments[(image_id, category_id, range_name)]
                for image_id in ledger.image_order
                if (image_id, category_id, range_name) in ledger.fragments
            ]
            if not fragments:
                continue
            n_positive = sum(f.n_positive for f in fragments)
            if n_positive == 0:
                continue

            scores = np.concatenate(
                [np.asarray(f.det_scores, dtype=np.float64) for f in fragments]
            ) if fragments else np.empty(0)
            if scores.size:
                sort_idx = np.argsort(-scores, kind="mergesort")
                matched = np.concatenate([f.det_matched for f in fragments], axis=1)[:, sort_idx]
                ignored = np.concatenate([f.det_ignored for f in fragments], axis=1)[:, sort_idx]
            else:
                matched = np.zeros((len(thresholds), 0), dtype=np.int64)
                ignored = np.zeros((len(thresholds), 0), dtype=bool)

            tps = (matched != 0) & ~ignored
            fps = (matched == 0) & ~ignored
            tp_cum = np.cumsum(tps, axis=1, dtype=np.float64)
            fp_cum = np.cumsum(fps, axis=1, dtype=np.float64)

            ap_per_t = np.zeros(len(thresholds))
            ar_per_t = np.zeros(len(thresholds))
            for ti in range(len(thresholds)):
                tp, fp = tp_cum[ti], fp_cum[ti]
                if tp.size == 0:
                    continue  # no detections: AP and AR stay 0
                recalls = tp / n_positive
                # tp+fp is 0 only at all-ignored prefixes, where tp is 0 too
                precisions = tp / np.maximum(tp + fp, 1.0)
                ar_per_t[ti] = recalls[-1]
                # monotone envelope from the right, then 101-point sampling
                prec_env = np.maximum.accumulate(precisions[::-1])[::-1]
                positions = np.searchsorted(recalls, recall_grid, side="left")
                sampled = np.where(
                    positions < prec_env.size,
                    prec_env[np.minimum(positions, prec_env.size - 1)],
                    0.0,
                )
                ap_per_t[ti] = math.fsum(sampled.tolist()) / len(recall_grid)
            ap_lists[range_name].append(ap_per_t)
            ar_lists[range_name].append(ar_per_t)

    def summarize(store, range_name, t_index="mean"):
        rows = store[range_name]
        if not rows:
            return None
        if t_index is None:  # requested threshold absent from the grid
            return None
        stacked = np.stack(rows)  # (categories, thresholds)
        if t_index == "mean":
            return math.fsum(stacked.ravel().tolist()) / stacked.size
        return math.fsum(stacked[:, t_index].tolist()) / stacked.shape[0]

    return MetricSet(
        mAP=summarize(ap_lists, "all"),
        ap50=summarize(ap_lists, "all", t50),
        ap75=summarize(ap_lists, "all", t75),
        ap_medium=summarize(ap_lists, "medium"),
        ap_large=summarize(ap_lists, "large"),
        mAR=summarize(ar_lists, "all"),
        ar50=summarize(ar_lists, "all", t50),
        ar75=summarize(ar_lists, "all", t75),
        ar_medium=summarize(ar_lists, "medium"),
        ar_large=summarize(ar_lists, "large"),
    )


def _threshold_pos(thresholds: Sequence[float], value: float) -> Optional[int]:
    for i, t in enumerate(thresholds):
        if math.isclose(t, value, abs_tol=1e-9):
            return i
    return None


def evaluate_predictions(
    index: DatasetIndex, predictions: Sequence[Prediction], params: Optional[EvalParams] = None
) -> MetricSet:
    """Full evaluation of a prediction list against a dataset index."""
    params = params or EvalParams()
    ledger = build_ledger(index, predictions, params)
    return accumulate_and_summarize(ledger, index, params)
