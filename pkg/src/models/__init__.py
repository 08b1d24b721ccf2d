"""Value types shared by the PHY, channel and MAC layers."""
from src.models.chirp import ChirpParams, ChirpSymbol, DemodResult
from src.models.frame import (
    ChannelPlan,
    FrameSymbols,
    HopSequence,
    LoraFrame,
    ParsedFrame,
)
from src.models.iq_signal import IqSignal
from src.models.link import ChannelConfig, FrontendConfig, Interferer, LinkBudget
from src.models.mac import DeviceState, TdmaSchedule, Transcript, TranscriptEvent
from src.models.waveform import (
    FrequencyPlan,
    MultiLevelWave,
    SpectrumReport,
    SwitchState,
)

__all__ = [
    "ChirpParams",
    "ChirpSymbol",
    "DemodResult",
    "ChannelPlan",
    "FrameSymbols",
    "HopSequence",
    "LoraFrame",
    "ParsedFrame",
    "IqSignal",
    "ChannelConfig",
    "FrontendConfig",
    "Interferer",
    "LinkBudget",
    "DeviceState",
    "TdmaSchedule",
    "Transcript",
    "TranscriptEvent",
    "FrequencyPlan",
    "MultiLevelWave",
    "SpectrumReport",
    "SwitchState",
]
