import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

from synth import natural_image, write_tiny_dataset  # noqa: E402

DATA_DIR = TESTS_DIR / "data"

#: (name, passed, elapsed seconds, budget seconds) per acceptance criterion
ACCEPTANCE_RESULTS: list[tuple[str, bool, float, float]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, elapsed, budget in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(
            f"[{status}] {name} ({elapsed:.2f}s / budget {budget:.0f}s)"
        )


@pytest.fixture(scope="session")
def photo():
    """Natural-statistics 128x96 test image (deterministic)."""
    return natural_image(128, 96, seed=2024)


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """Small on-disk dataset: (annotations path, images root)."""
    root = tmp_path_factory.mktemp("tinyds")
    return write_tiny_dataset(root, n_images=3)


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR
