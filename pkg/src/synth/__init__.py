"""Backscatter synthesizers: square-wave baseline and harmonic cancellation."""
from typing import Optional

from src.synth.base_synth import BackscatterSynth
from src.synth.harmonic_cancel import HarmonicCancelSynth
from src.synth.square import SquareWaveSynth

SYNTH_KINDS = ("square", "multilevel")


def create_synth(
    kind: str,
    delta_f: float,
    sample_rate: Optional[float] = None,
    levels: int = 4,
    settle_cutoff_hz: Optional[float] = None,
) -> BackscatterSynth:
    """Build a synthesizer by name.

    Raises:
        ValueError: If ``kind`` is not ``"square"`` or ``"multilevel"``
    """
    if kind == "square":
        return SquareWaveSynth(delta_f, sample_rate, settle_cutoff_hz)
    if kind == "multilevel":
        return HarmonicCancelSynth(delta_f, sample_rate, settle_cutoff_hz, levels)
    raise ValueError(f"synth must be one of {SYNTH_KINDS} (got {kind!r})")


__all__ = [
    "BackscatterSynth",
    "HarmonicCancelSynth",
    "SquareWaveSynth",
    "SYNTH_KINDS",
    "create_synth",
]
