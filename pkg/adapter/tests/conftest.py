import os
import shutil
import subprocess
import sys

import pytest

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")
IMAGE_IDS = ("fix-000", "fix-001", "fix-002")
# fix-002's road color sits nearer the sidewalk reference than the drivable
# one, so the zero-shot classifier gets it wrong until fine-tuning.
HARD_IMAGE = "fix-002"


@pytest.fixture(scope="session")
def fixtures_dir() -> str:
    return FIXTURES


@pytest.fixture(scope="session")
def image_ids() -> tuple:
    return IMAGE_IDS


def run_pipeline_cli(*args: str) -> subprocess.CompletedProcess:
    """Invoke the labeling pipeline the way any other process would."""
    return subprocess.run(
        [sys.executable, "-m", "labelforge.cli", *args],
        capture_output=True,
        text=True,
    )


@pytest.fixture()
def corpus(tmp_path):
    """Copy the fixture images and ground truth into a scratch corpus root."""
    root = tmp_path / "corpus"
    shutil.copytree(os.path.join(FIXTURES, "images"), root / "images")
    shutil.copytree(os.path.join(FIXTURES, "gt"), root / "gt")
    return root
