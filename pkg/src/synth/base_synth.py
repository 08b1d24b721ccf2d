"""Abstract base class for backscatter synthesizers."""
from abc import ABC, abstractmethod
from typing import Optional

from src.models.chirp import ChirpParams
from src.models.frame import LoraFrame
from src.models.iq_signal import IqSignal
from src.models.waveform import FrequencyPlan, MultiLevelWave
from src.phy import waveform_synth
from src.phy.lora_frame import build_frame
from src.utils.logger import get_logger

logger = get_logger()


class BackscatterSynth(ABC):
    """Turns LoRa frames into the signal a backscatter tag reflects.

    Subclasses choose the switch alphabet; the frame -> frequency plan ->
    switch schedule -> mix pipeline is shared.
    """

    def __init__(
        self,
        delta_f: float,
        sample_rate: Optional[float] = None,
        settle_cutoff_hz: Optional[float] = None,
    ) -> None:
        """Initialize the synthesizer.

        Args:
            delta_f: Backscatter offset from the source tone in Hz
            sample_rate: Simulation rate; chosen per plan when None
            settle_cutoff_hz: Optional switch-settling low-pass corner
        """
        self.delta_f = float(delta_f)
        self.sample_rate = sample_rate
        self.settle_cutoff_hz = settle_cutoff_hz

    @property
    @abstractmethod
    def levels(self) -> int:
        """Staircase level count passed to the switch scheduler."""

    def schedule(self, plan: FrequencyPlan) -> MultiLevelWave:
        return waveform_synth.switch_schedule(plan, self.levels, self.sample_rate)

    def synthesize(self, frame: LoraFrame) -> IqSignal:
        """Backscattered baseband of a whole frame, source tone at DC.

        Args:
            frame: Frame to transmit

        Returns:
            Signal whose wanted sideband sits at ``+delta_f``
        """
        plan = waveform_synth.frame_plan(build_frame(frame), self.delta_f)
        wave = self.schedule(plan)
        logger.debug(
            f"{self.__class__.__name__}: {len(wave)} samples at "
            f"{wave.sample_rate:.0f} Hz for {len(frame.payload)} B"
        )
        return waveform_synth.backscatter_mix(
            0.0, wave, settle_cutoff_hz=self.settle_cutoff_hz
        )

    def baseband(self, frame: LoraFrame, p: Optional[ChirpParams] = None) -> IqSignal:
        """Synthesize and bring the wanted sideband back to ``osf * bw``."""
        p = p or frame.params
        return waveform_synth.downconvert(self.synthesize(frame), self.delta_f, p)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(delta_f={self.delta_f:.0f} Hz)"
