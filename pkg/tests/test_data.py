import json
import math

import pytest

from kpbench.data import (
    DatasetError,
    load_annotations,
    load_predictions,
    mask_targets_for,
)


def minimal_payload():
    return {
        "images": [{"id": 1, "file_name": "000001.png", "width": 64, "height": 48}],
        "annotations": [
            {
                "id": 10,
                "image_id": 1,
                "category_id": 1,
                "keypoints": [5.0, 5.0, 2.0] * 17,
                "num_keypoints": 17,
                "area": 500.0,
                "bbox": [0.0, 0.0, 20.0, 20.0],
                "iscrowd": 0,
            }
        ],
        "categories": [{"id": 1, "name": "person", "keypoints": [f"kp{i}" for i in range(17)]}],
    }


def write_payload(tmp_path, payload, name="ann.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def test_minimal_round_trip(tmp_path):
    path = write_payload(tmp_path, minimal_payload())
    index = load_annotations(path)
    assert len(index.images) == 1
    assert len(index.annotations) == 1
    assert len(index.categories) == 1
    assert index.by_image[1][0].id == 10
    assert index.category(1).sigmas[0] == 0.026  # 17-keypoint defaults


def test_lossless_reserialization(tmp_path):
    payload = minimal_payload()
    payload["annotations"][0]["keypoints"][0] = 5.25  # sub-pixel coordinates kept
    path = write_payload(tmp_path, payload)
    out = load_annotations(path).to_json()
    for key in ("id", "image_id", "keypoints", "area", "bbox", "iscrowd"):
        assert out["annotations"][0][key] == payload["annotations"][0][key]
    assert out["images"] == payload["images"]


def test_unknown_image_id_named(tmp_path):
    payload = minimal_payload()
    payload["annotations"][0]["image_id"] = 99
    path = write_payload(tmp_path, payload)
    with pytest.raises(DatasetError, match="annotation 10: unknown image_id 99"):
        load_annotations(path)


def test_keypoint_arity_error_message(tmp_path):
    payload = minimal_payload()
    payload["annotations"][0]["keypoints"] = [1.0] * 50
    payload["annotations"][0]["num_keypoints"] = 0
    path = write_payload(tmp_path, payload)
    with pytest.raises(DatasetError, match="expected 51 keypoint values, got 50"):
        load_annotations(path)


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_annotations("/nonexistent/ann.json")


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(json.JSONDecodeError):
        load_annotations(path)


def test_duplicate_ids_reported(tmp_path):
    payload = minimal_payload()
    payload["images"].append(dict(payload["images"][0]))
    path = write_payload(tmp_path, payload)
    with pytest.raises(DatasetError, match="duplicate image id"):
        load_annotations(path)


def test_by_image_complete(tmp_path):
    payload = minimal_payload()
    payload["images"].append({"id": 2, "file_name": "000002.png", "width": 64, "height": 48})
    second = dict(payload["annotations"][0])
    second.update(id=11, image_id=2)
    payload["annotations"].append(second)
    index = load_annotations(write_payload(tmp_path, payload))
    bucketed = [ann.id for anns in index.by_image.values() for ann in anns]
    assert sorted(bucketed) == sorted(a.id for a in index.annotations)


class TestPredictions:
    def test_accepted(self, tmp_path):
        index = load_annotations(write_payload(tmp_path, minimal_payload()))
        preds = [{"image_id": 1, "category_id": 1, "keypoints": [1.0, 2.0, 0.9] * 17, "score": 0.9}]
        path = write_payload(tmp_path, preds, "preds.json")
        loaded = load_predictions(path, index)
        assert len(loaded) == 1 and loaded[0].score == 0.9

    def test_nan_score_rejected(self, tmp_path):
        index = load_annotations(write_payload(tmp_path, minimal_payload()))
        path = tmp_path / "preds.json"
        path.write_text('[{"image_id": 1, "category_id": 1, "keypoints": '
                        + json.dumps([1.0, 2.0, 0.9] * 17) + ', "score": NaN}]')
        with pytest.raises(DatasetError, match="score must be finite"):
            load_predictions(path, index)

    def test_empty_list_ok(self, tmp_path):
        index = load_annotations(write_payload(tmp_path, minimal_payload()))
        path = write_payload(tmp_path, [], "preds.json")
        assert load_predictions(path, index) == []

    def test_unknown_image_rejected(self, tmp_path):
        index = load_annotations(write_payload(tmp_path, minimal_payload()))
        preds = [{"image_id": 5, "category_id": 1, "keypoints": [0.0, 0.0, 0.0] * 17, "score": 0.5}]
        path = write_payload(tmp_path, preds, "preds.json")
        with pytest.raises(DatasetError, match="unknown image_id 5"):
            load_predictions(path, index)

    def test_extent_area(self, tmp_path):
        index = load_annotations(write_payload(tmp_path, minimal_payload()))
        kps = [0.0, 0.0, 1.0] * 16 + [10.0, 20.0, 1.0]
        preds = [{"image_id": 1, "category_id": 1, "keypoints": kps, "score": 0.5}]
        loaded = load_predictions(write_payload(tmp_path, preds, "p.json"), index)
        assert math.isclose(loaded[0].extent_area(), 200.0)


class TestMaskTargets:
    def test_concatenation(self, tmp_path):
        payload = minimal_payload()
        second = dict(payload["annotations"][0])
        second.update(id=11)
        payload["annotations"].append(second)
        index = load_annotations(write_payload(tmp_path, payload))
        assert len(mask_targets_for(index, 1)) == 34

    def test_no_annotations(self, tmp_path):
        payload = minimal_payload()
        payload["annotations"] = []
        index = load_annotations(write_payload(tmp_path, payload))
        assert mask_targets_for(index, 1) == []

    def test_all_invisible_kept_with_v0(self, tmp_path):
        payload = minimal_payload()
        payload["annotations"][0]["keypoints"] = [5.0, 5.0, 0.0] * 17
        payload["annotations"][0]["num_keypoints"] = 0
        index = load_annotations(write_payload(tmp_path, payload))
        targets = mask_targets_for(index, 1)
        assert len(targets) == 17
        assert all(v == 0 for _, _, v in targets)

    def test_unknown_image(self, tmp_path):
        index = load_annotations(write_payload(tmp_path, minimal_payload()))
        with pytest.raises(KeyError, match="unknown image id 42"):
            mask_targets_for(index, 42)
