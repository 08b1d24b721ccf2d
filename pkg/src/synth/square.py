"""Two-level single-sideband synthesizer."""
from src.synth.base_synth import BackscatterSynth


class SquareWaveSynth(BackscatterSynth):
    """Baseline synthesizer without harmonic cancellation.

    Both rails are +-1 square waves in quadrature. The mirror image at
    ``-delta_f`` cancels, but the 3rd harmonic (mirror side, -9.5 dB) and the
    5th (signal side, -14 dB) remain.
    """

    @property
    def levels(self) -> int:
        return 2
