import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from shared.config import D_MIN_MM
from shared.models import REFERENCE_START_LINKS, REFERENCE_OPTIMUM_LINKS
from app1_linkage_model.problem import default_problem


@pytest.fixture
def optimum_links():
    return REFERENCE_OPTIMUM_LINKS


@pytest.fixture
def initial_links():
    return REFERENCE_START_LINKS


@pytest.fixture
def d_min():
    return D_MIN_MM


@pytest.fixture
def problem():
    return default_problem()


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "output"
    path.mkdir()
    return path
