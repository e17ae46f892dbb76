import os
import pathlib

import pytest

SOURCE_DIR = pathlib.Path(os.environ.get("SPMDS_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


@pytest.fixture
def source_dir():
    return SOURCE_DIR


@pytest.fixture
def cli():
    path = os.environ.get("SPMDS_CLI")
    if not path:
        pytest.skip("SPMDS_CLI is not set")
    return path
