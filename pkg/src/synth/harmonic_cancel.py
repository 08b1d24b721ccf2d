"""Multi-level harmonic-cancelling synthesizer."""
from typing import Optional

from src.errors import UnsupportedLevels
from src.phy.waveform_synth import MULTILEVEL_LEVELS
from src.synth.base_synth import BackscatterSynth


class HarmonicCancelSynth(BackscatterSynth):
    """Staircase synthesizer over the multi-state switch network.

    With four levels per rail the switch steps through eight impedances in
    eighth-period increments, cancelling the 3rd and 5th harmonics; the
    first survivors are the 7th (mirror side) and 9th.
    """

    def __init__(
        self,
        delta_f: float,
        sample_rate: Optional[float] = None,
        settle_cutoff_hz: Optional[float] = None,
        levels: int = 4,
    ) -> None:
        if levels not in MULTILEVEL_LEVELS:
            raise UnsupportedLevels(
                f"levels must be one of {MULTILEVEL_LEVELS} (got {levels})"
            )
        super().__init__(delta_f, sample_rate, settle_cutoff_hz)
        self._levels = levels

    @property
    def levels(self) -> int:
        return self._levels

    def __repr__(self) -> str:
        return (
            f"HarmonicCancelSynth(delta_f={self.delta_f:.0f} Hz, "
            f"levels={self._levels})"
        )
