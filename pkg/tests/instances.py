"""Random tiny evaluation instances, in both package and oracle form."""

from __future__ import annotations

import random

from kpbench.data import Annotation, CategoryMeta, DatasetIndex, ImageRecord, Prediction

KP_COUNT = 3
SIGMAS = (0.08, 0.12, 0.06)
SCORE_CHOICES = [round(0.1 * i, 1) for i in range(1, 10)]  # discrete: exercises ties


def random_instance(rng: random.Random):
    """Build one instance: returns (DatasetIndex, predictions, oracle_images).

    Image ids ascend so the package's sorted-id evaluation order matches the
    oracle's list order. Areas straddle the medium/large boundaries and some
    instances are crowds or have zero visible keypoints (ignore regions).
    """
    n_images = rng.randint(1, 5)
    images = []
    annotations = []
    predictions = []
    oracle_images = []
    ann_id = 1

    for image_id in range(1, n_images + 1):
        images.append(ImageRecord(id=image_id, file_name=f"{image_id:04d}.png", width=64, height=64))
        gts = []
        n_gts = rng.randint(0, 4)
        for _ in range(n_gts):
            cx, cy = rng.uniform(5, 59), rng.uniform(5, 59)
            kps = []
            for _k in range(KP_COUNT):
                v = rng.choice([0, 0, 1, 2, 2])
                kps.extend([round(cx + rng.uniform(-4, 4), 2), round(cy + rng.uniform(-4, 4), 2), v])
            if rng.random() < 0.15:  # zero-visible ignore region
                kps = [v if i % 3 != 2 else 0 for i, v in enumerate(kps)]
            visible = sum(1 for v in kps[2::3] if v > 0)
            area = rng.choice([rng.uniform(200, 1000), rng.uniform(1024, 9216), rng.uniform(9216, 40000)])
            iscrowd = 1 if rng.random() < 0.1 else 0
            bbox = (cx - 5.0, cy - 5.0, 10.0, 10.0)
            annotations.append(
                Annotation(
                    id=ann_id,
                    image_id=image_id,
                    category_id=1,
                    keypoints=tuple(kps),
                    num_keypoints=visible,
                    area=area,
                    bbox=bbox,
                    iscrowd=iscrowd,
                )
            )
            gts.append(
                {
                    "keypoints": list(kps),
                    "area": area,
                    "bbox": list(bbox),
                    "iscrowd": iscrowd,
                    "ignore": bool(iscrowd) or visible == 0,
                }
            )
            ann_id += 1

        dets = []
        n_dets = rng.randint(0, 6)
        for _ in range(n_dets):
            if gts and rng.random() < 0.7:  # perturbation of a random gt
                src = rng.choice(gts)["keypoints"]
                kps = []
                for k in range(KP_COUNT):
                    kps.extend(
                        [
                            round(src[3 * k] + rng.uniform(-8, 8), 2),
                            round(src[3 * k + 1] + rng.uniform(-8, 8), 2),
                            rng.random(),
                        ]
                    )
            else:
                kps = []
                for _k in range(KP_COUNT):
                    kps.extend([round(rng.uniform(0, 64), 2), round(rng.uniform(0, 64), 2), rng.random()])
            score = rng.choice(SCORE_CHOICES)
            predictions.append(
                Prediction(image_id=image_id, category_id=1, keypoints=tuple(kps), score=score)
            )
            dets.append({"keypoints": list(kps), "score": score})

        oracle_images.append({"gts": gts, "dets": dets})

    category = CategoryMeta(
        id=1, name="thing", keypoint_names=tuple(f"kp{i}" for i in range(KP_COUNT)), sigmas=SIGMAS
    )
    index = DatasetIndex(images=images, annotations=annotations, categories=[category])
    return index, predictions, oracle_images
