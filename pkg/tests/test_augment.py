import csv
import json

import numpy as np
import pytest

from kpbench.augment import (
    PARAM_RANGES,
    SET_MEMBERS,
    _TRANSFORMS,
    apply_pipeline,
    apply_pipeline_traced,
    build_pipeline,
    export_augmented,
)
from kpbench.corruption.seeding import rng_from_seed
from kpbench.data import load_annotations
from kpbench.image import load_image
from synth import natural_image


class TestBuildPipeline:
    def test_set_a_has_six_transforms_in_order(self):
        pipeline = build_pipeline(["A"])
        assert [s.transform_id for s in pipeline.steps] == [
            "box_blur", "median_blur", "gaussian_blur",
            "gaussian_noise", "iso_noise", "motion_blur",
        ]

    def test_full_concatenation_is_19(self):
        pipeline = build_pipeline(["A", "B", "C", "D"])
        assert len(pipeline) == 19
        ids = [s.transform_id for s in pipeline.steps]
        assert ids == list(SET_MEMBERS["A"] + SET_MEMBERS["B"] + SET_MEMBERS["C"] + SET_MEMBERS["D"])

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            build_pipeline([])

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            build_pipeline(["A", "a"])

    def test_unknown_set_rejected(self):
        with pytest.raises(ValueError, match="unknown augmentation set 'E'"):
            build_pipeline(["E"])

    def test_order_is_abcd_regardless_of_request_order(self):
        pipeline = build_pipeline(["D", "B"])
        assert [s.transform_id for s in pipeline.steps] == list(
            SET_MEMBERS["B"] + SET_MEMBERS["D"]
        )


class TestApplyPipeline:
    def test_probability_zero_identity(self, photo):
        pipeline = build_pipeline(["A", "B", "C", "D"], probability=0.0)
        assert np.array_equal(apply_pipeline(pipeline, photo, seed=3), photo)

    def test_deterministic(self, photo):
        pipeline = build_pipeline(["A", "C"])
        a = apply_pipeline(pipeline, photo, seed=11)
        assert np.array_equal(a, apply_pipeline(pipeline, photo, seed=11))
        assert not np.array_equal(a, apply_pipeline(pipeline, photo, seed=12))

    def test_traced_reports_fired_steps(self, photo):
        pipeline = build_pipeline(["A"], probability=1.0)
        _, fired = apply_pipeline_traced(pipeline, photo, seed=0)
        assert fired == list(SET_MEMBERS["A"])

    def test_every_transform_preserves_geometry(self, photo):
        for tid, fn in _TRANSFORMS.items():
            rng = rng_from_seed(99)
            out = fn(photo, rng, PARAM_RANGES[tid])
            assert out.shape == photo.shape, tid
            assert out.dtype == np.uint8, tid

    def test_set_d_only_blanks_or_keeps_pixels(self, photo):
        for tid in SET_MEMBERS["D"]:
            out = _TRANSFORMS[tid](photo, rng_from_seed(5), PARAM_RANGES[tid])
            changed = np.any(out != photo, axis=2)
            assert (out[changed] == 0).all(), tid
            assert changed.any(), tid

    def test_firing_fraction_statistics(self):
        # expected all-skip probability for set A is 0.5^6 ~ 1.56%
        img = natural_image(32, 24, seed=55)
        pipeline = build_pipeline(["A"])
        differing = 0
        n = 10_000
        for i in range(n):
            out = apply_pipeline(pipeline, img, seed=i)
            if not np.array_equal(out, img):
                differing += 1
        assert 0.975 * n <= differing <= n


class TestExport:
    def test_export_counts_and_determinism(self, tiny_dataset, tmp_path):
        ann_path, images_root = tiny_dataset
        index = load_annotations(ann_path)
        pipeline = build_pipeline(["A", "D"])

        out1 = tmp_path / "run1"
        manifest1 = export_augmented(index, images_root, pipeline, 2, out1, global_seed=9)
        assert len(manifest1) == 2 * len(index.images)
        images = sorted((out1 / "images").glob("*.png"))
        assert len(images) == 2 * len(index.images)

        out2 = tmp_path / "run2"
        manifest2 = export_augmented(index, images_root, pipeline, 2, out2, global_seed=9)
        for row1, row2 in zip(manifest1, manifest2):
            assert row1["seed"] == row2["seed"]
            assert row1["transforms_fired"] == row2["transforms_fired"]
            a = load_image(row1["output_path"])
            b = load_image(row2["output_path"])
            assert np.array_equal(a, b)

    def test_zero_probability_outputs_identical_inputs(self, tiny_dataset, tmp_path):
        ann_path, images_root = tiny_dataset
        index = load_annotations(ann_path)
        pipeline = build_pipeline(["A", "B", "C", "D"], probability=0.0)
        out = tmp_path / "noop"
        manifest = export_augmented(index, images_root, pipeline, 1, out, global_seed=1)
        for row in manifest:
            assert np.array_equal(load_image(row["source_path"]), load_image(row["output_path"]))
            assert row["transforms_fired"] == ""
        # annotations carry over with remapped image ids
        with open(out / "annotations.json") as fh:
            payload = json.load(fh)
        assert len(payload["images"]) == len(index.images)
        assert len(payload["annotations"]) == len(index.annotations)
        reloaded = load_annotations(out / "annotations.json")
        assert [a.keypoints for a in reloaded.annotations] == [
            a.keypoints for a in index.annotations
        ]

    def test_manifest_file_schema(self, tiny_dataset, tmp_path):
        ann_path, images_root = tiny_dataset
        index = load_annotations(ann_path)
        out = tmp_path / "schema"
        export_augmented(index, images_root, build_pipeline(["C"]), 1, out, global_seed=2)
        with open(out / "manifest.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert set(rows[0]) == {"source_path", "output_path", "seed", "transforms_fired"}
        assert len(rows) == len(index.images)

    def test_copies_must_be_positive(self, tiny_dataset, tmp_path):
        ann_path, images_root = tiny_dataset
        index = load_annotations(ann_path)
        with pytest.raises(ValueError, match="copies"):
            export_augmented(index, images_root, build_pipeline(["A"]), 0, tmp_path, 0)
