"""Shared pytest fixtures for all tests."""
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Iterator

import numpy as np
import pytest

from src.models.chirp import ChirpParams
from src.models.link import LinkBudget
from src.models.mac import DeviceState, TdmaSchedule

FIXTURES = Path(__file__).parent / "fixtures"
SYNC_PATTERN = (1, 0, 1, 1, 0, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1)


@pytest.fixture
def rng() -> np.random.Generator:
    """Fixed-seed random stream."""
    return np.random.default_rng(1234)


@pytest.fixture
def sf7() -> ChirpParams:
    """Fast setting used by most decode tests."""
    return ChirpParams(sf=7, bw=125000, cr=Fraction(4, 8))


@pytest.fixture
def sf7_osf4() -> ChirpParams:
    return ChirpParams(sf=7, bw=125000, cr=Fraction(4, 8), osf=4)


@pytest.fixture
def golden_frames() -> Path:
    """CSV of hand-derived frame symbol vectors."""
    return FIXTURES / "frames.csv"


@pytest.fixture
def three_devices() -> list:
    """Tags within a few metres of the source, two sharing channel 0."""
    return [
        DeviceState(id="a", channel=0, sf=7, budget=LinkBudget(d1_m=5.0)),
        DeviceState(id="b", channel=0, sf=9, budget=LinkBudget(d1_m=10.0)),
        DeviceState(id="c", channel=3, sf=10, budget=LinkBudget(d1_m=20.0)),
    ]


@pytest.fixture
def schedule() -> TdmaSchedule:
    """Half-second slots for devices a, b and c."""
    return TdmaSchedule(
        slot_duration_s=0.5,
        device_slots={"a": 0, "b": 1, "c": 2},
        round_sync_pattern=SYNC_PATTERN,
    )


@pytest.fixture
def tmp_out() -> Iterator[Path]:
    """Temporary artifact directory."""
    with tempfile.TemporaryDirectory() as d:
        yield Path(d)
