import csv
from pathlib import Path

import numpy as np
import pytest

from src.cross_section import CrossSection, Disc
from src.geometry import HelixParams, PerturbationProfile

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def unit_helix():
    return HelixParams(1.0, 1.0)


@pytest.fixture
def bump():
    return PerturbationProfile(amplitude=1.0, center=0.0, half_width=2.0, epsilon=0.0)


@pytest.fixture
def centred_disc():
    return CrossSection(Disc((0.0, 0.0), 1.0), (0.0, 0.0), 0.1)


@pytest.fixture
def off_centre_disc():
    return CrossSection(Disc((0.4, 0.0), 1.0), (0.4, 0.0), 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def read_table(path):
    with open(path, encoding="utf-8") as f:
        rows = list(csv.reader(line for line in f if not line.startswith("#")))
    return rows[0], rows[1:]


def assert_table_matches(path, golden, rtol=None, atol=1e-10, exact=()):
    """Compare a CSV with its golden file column by column"""
    columns, rows = read_table(path)
    golden_columns, golden_rows = read_table(golden)
    assert columns == golden_columns
    assert len(rows) == len(golden_rows)
    rtol = rtol or {}
    for row, expected in zip(rows, golden_rows):
        for name, value, want in zip(columns, row, expected):
            if name in exact or want == "" or not _is_number(want):
                assert value == want, name
            else:
                assert float(value) == pytest.approx(float(want), rel=rtol.get(name, 0.0), abs=atol), name


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True
