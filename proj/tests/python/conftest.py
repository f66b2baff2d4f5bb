import os
import pathlib
import shutil

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def data_dir():
    return pathlib.Path(os.environ.get("FLCS_TEST_DATA", ROOT / "tests" / "data"))


@pytest.fixture(scope="session")
def golden_dir():
    return ROOT / "golden" / "double_gyre"


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("FLCS_CLI") or shutil.which("flcs")
    if not path:
        pytest.skip("flcs executable not found (set FLCS_CLI)")
    return path
