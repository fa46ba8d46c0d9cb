"""kpbench: corruption-robustness benchmarking for keypoint estimation.

Synthesizes corrupted copies of keypoint datasets (10 corruption kinds,
5 severity levels each, deterministically seeded), evaluates COCO-format
keypoint predictions with OKS-based mAP/mAR, and aggregates relative
robustness into report tables.
"""

__version__ = "0.1.0"
