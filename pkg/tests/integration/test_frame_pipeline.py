"""End-to-end modulate/parse round trips over every chirp setting."""
from fractions import Fraction

import numpy as np
import pytest

from src.models.chirp import CODE_RATES, SPREADING_FACTORS, ChirpParams
from src.models.frame import LoraFrame
from src.phy.lora_frame import build_frame, parse_frame, render_frame

FRAMES_PER_SETTING = 50


@pytest.mark.integration
@pytest.mark.slow
class TestRoundTrip:
    """Random frames survive a noiseless modulate/parse cycle."""

    @pytest.mark.timeout(600)
    @pytest.mark.parametrize("cr", CODE_RATES)
    @pytest.mark.parametrize("sf", SPREADING_FACTORS)
    def test_random_frames(self, sf: int, cr: Fraction) -> None:
        p = ChirpParams(sf=sf, bw=125000, cr=cr)
        rng = np.random.default_rng(sf * 10 + cr.denominator)
        for _ in range(FRAMES_PER_SETTING):
            payload = rng.bytes(int(rng.integers(1, 17)))
            frame = LoraFrame(params=p, payload=payload)
            parsed = parse_frame(render_frame(build_frame(frame)), p, len(payload))
            assert parsed.payload == payload
            assert parsed.crc_ok
            assert parsed.fec_ok
