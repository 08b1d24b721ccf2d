"""Exception hierarchy for chirpscatter."""
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from src.models.frame import ParsedFrame


class ChirpscatterError(Exception):
    """Base class for all chirpscatter errors."""


class ConfigError(ChirpscatterError, ValueError):
    """Invalid experiment configuration.

    Attributes:
        field: Dotted configuration key that failed validation
    """

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


class LengthMismatch(ChirpscatterError, ValueError):
    """Sample count does not match the symbol length."""


class UnsupportedLevels(ChirpscatterError, ValueError):
    """Staircase level count outside the supported set."""


class UnsupportedBandwidth(ChirpscatterError, ValueError):
    """Bandwidth has no frequency-hopping channel plan."""


class ScheduleInfeasible(ChirpscatterError, ValueError):
    """TDMA slot too short for a scheduled device's frame."""


class FrameError(ChirpscatterError):
    """Base class for frame parsing failures."""


class NoPreamble(FrameError):
    """No run of preamble up-chirps found in the signal."""


class SyncMismatch(FrameError):
    """Sync symbols or down-chirps did not match after the preamble."""


class CrcFail(FrameError):
    """Payload decoded but failed the CRC (or was truncated).

    Attributes:
        frame: The decoded frame, returned despite the failure
    """

    def __init__(self, message: str, frame: Optional["ParsedFrame"] = None) -> None:
        super().__init__(message)
        self.frame = frame
