"""LoRa-shaped frame value types."""
from dataclasses import dataclass, field
from typing import List, Tuple

from src.models.chirp import ChirpParams, ChirpSymbol

DEFAULT_SYNC: Tuple[int, int] = (8, 16)
DOWNCHIRP_QUARTERS = 9  # two and a quarter down-chirps


@dataclass(frozen=True)
class LoraFrame:
    """Frame contents and layout parameters (implicit header only)."""

    params: ChirpParams
    payload: bytes = b""
    preamble_len: int = 8
    sync: Tuple[int, int] = DEFAULT_SYNC
    crc_present: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "payload", bytes(self.payload))
        if not 6 <= self.preamble_len <= 65535:
            raise ValueError(
                f"preamble_len must be in [6, 65535] (got {self.preamble_len})"
            )
        if len(self.payload) > 255:
            raise ValueError(f"payload too long: {len(self.payload)} > 255 bytes")
        if len(self.sync) != 2:
            raise ValueError("sync must hold exactly two symbol values")
        for value in self.sync:
            ChirpSymbol(value).check(self.params)
            if value == 0:
                raise ValueError("sync values must differ from the preamble value 0")


@dataclass(frozen=True)
class FrameSymbols:
    """Symbol layout of a built frame.

    ``preamble`` and ``sync`` are up-chirps; they are followed by
    ``DOWNCHIRP_QUARTERS`` quarter-symbols of down-chirp, then ``payload``.
    """

    params: ChirpParams
    preamble: Tuple[ChirpSymbol, ...]
    sync: Tuple[ChirpSymbol, ...]
    payload: Tuple[ChirpSymbol, ...]
    coded_bits: int

    @property
    def symbols(self) -> Tuple[ChirpSymbol, ...]:
        """All up-chirp symbols in transmission order (down-chirps excluded)."""
        return self.preamble + self.sync + self.payload

    @property
    def duration_symbols(self) -> float:
        return (
            len(self.preamble)
            + len(self.sync)
            + DOWNCHIRP_QUARTERS / 4
            + len(self.payload)
        )


@dataclass(frozen=True)
class ParsedFrame:
    """Result of parsing a received frame."""

    payload: bytes
    crc_ok: bool
    confidence: Tuple[float, ...] = ()
    fec_ok: bool = True
    corrected_blocks: int = 0
    truncated: bool = False


@dataclass(frozen=True)
class ChannelPlan:
    """Frequency-hopping channel centres in integer Hz."""

    band_start: int
    channel_count: int
    spacing: int
    centers: Tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        if self.channel_count < 1:
            raise ValueError("channel_count must be positive")
        centers = tuple(
            self.band_start + k * self.spacing for k in range(self.channel_count)
        )
        if centers[0] < 902_000_000 or centers[-1] > 928_000_000:
            raise ValueError("channel centres must lie within 902-928 MHz")
        object.__setattr__(self, "centers", centers)


@dataclass(frozen=True)
class HopSequence:
    """Single-tone hop order that lands the backscatter on each channel."""

    channel_order: Tuple[int, ...]
    tone_freqs: Tuple[int, ...]
    delta_f: int

    def hops(self) -> List[Tuple[int, int]]:
        """(channel centre, tone frequency) pairs in hop order."""
        return [
            (self.tone_freqs[k] + self.delta_f, self.tone_freqs[k])
            for k in self.channel_order
        ]
