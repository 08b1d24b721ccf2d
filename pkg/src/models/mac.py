"""TDMA schedule, device state and event transcript types."""
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Tuple

from src.models.chirp import ChirpParams
from src.models.link import LinkBudget

DETECTOR_FLOOR_DBM = -71.0
ACTIONS = ("sync", "tone", "wake", "tx_start", "tx_end", "skip")
SOURCE_ID = "source"


@dataclass(frozen=True)
class TdmaSchedule:
    """Static slot assignment announced by the RF source.

    A round opens with the on-off keyed sync pattern (``sync_bit_s`` per
    bit), followed by one slot per assigned device in slot-index order.
    """

    slot_duration_s: float
    device_slots: Dict[str, int]
    round_sync_pattern: Tuple[int, ...]
    sync_bit_s: float = 1e-3

    def __post_init__(self) -> None:
        object.__setattr__(self, "round_sync_pattern", tuple(self.round_sync_pattern))
        if not self.slot_duration_s > 0:
            raise ValueError(
                f"slot_duration_s must be positive (got {self.slot_duration_s})"
            )
        if not self.sync_bit_s > 0:
            raise ValueError(f"sync_bit_s must be positive (got {self.sync_bit_s})")
        slots = list(self.device_slots.values())
        if len(set(slots)) != len(slots):
            raise ValueError("slot indices must be unique within a round")
        if any(s < 0 for s in slots):
            raise ValueError("slot indices must be non-negative")
        if len(self.round_sync_pattern) < 8:
            raise ValueError("round_sync_pattern must be at least 8 bits")
        if any(b not in (0, 1) for b in self.round_sync_pattern):
            raise ValueError("round_sync_pattern must contain only 0 and 1")

    @property
    def n_slots(self) -> int:
        return max(self.device_slots.values(), default=-1) + 1

    @property
    def sync_duration_s(self) -> float:
        return len(self.round_sync_pattern) * self.sync_bit_s

    @property
    def round_duration_s(self) -> float:
        return self.sync_duration_s + self.n_slots * self.slot_duration_s

    def slot_start(self, slot: int, round_start: float = 0.0) -> float:
        return round_start + self.sync_duration_s + slot * self.slot_duration_s

    def device_for_slot(self, slot: int) -> str:
        for device_id, s in self.device_slots.items():
            if s == slot:
                return device_id
        raise KeyError(f"no device assigned to slot {slot}")


@dataclass(frozen=True)
class DeviceState:
    """A backscatter tag as seen by the MAC.

    Attributes:
        id: Device identifier
        channel: Hopping channel index the tag transmits on
        sf: Spreading factor
        detector_threshold_dbm: Energy-detector wake-up level (>= -71 dBm)
        has_data: Whether the tag has a frame queued this round
        bw: Chirp bandwidth in Hz
        cr: Code rate
        payload_len: Payload bytes per frame
        budget: Link geometry to the source and receiver
        clock_offset_s: Constant clock offset against the source
    """

    id: str
    channel: int
    sf: int
    detector_threshold_dbm: float = DETECTOR_FLOOR_DBM
    has_data: bool = True
    bw: int = 125000
    cr: Fraction = Fraction(4, 8)
    payload_len: int = 8
    budget: LinkBudget = LinkBudget()
    clock_offset_s: float = 0.0

    def __post_init__(self) -> None:
        if self.detector_threshold_dbm < DETECTOR_FLOOR_DBM:
            raise ValueError(
                f"detector_threshold_dbm must be >= {DETECTOR_FLOOR_DBM} "
                f"(got {self.detector_threshold_dbm})"
            )
        if self.channel < 0:
            raise ValueError(f"channel must be non-negative (got {self.channel})")
        if self.payload_len < 1:
            raise ValueError(f"payload_len must be positive (got {self.payload_len})")
        object.__setattr__(self, "cr", self.params.cr)

    @property
    def params(self) -> ChirpParams:
        return ChirpParams(sf=self.sf, bw=self.bw, cr=self.cr)

    def with_data(self, has_data: bool) -> "DeviceState":
        return replace(self, has_data=has_data)


@dataclass(frozen=True)
class TranscriptEvent:
    """One MAC event. ``detail`` explains skips and is not serialised."""

    t: float
    device: str
    action: str
    channel: int
    detail: str = ""

    def __post_init__(self) -> None:
        if self.action not in ACTIONS:
            raise ValueError(f"action must be one of {ACTIONS} (got {self.action!r})")


@dataclass(frozen=True)
class Transcript:
    """Time-ordered event log of a MAC run."""

    events: Tuple[TranscriptEvent, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        events = tuple(self.events)
        object.__setattr__(self, "events", events)
        for a, b in zip(events, events[1:]):
            if b.t < a.t:
                raise ValueError("transcript events must be time-sorted")

    @classmethod
    def from_events(cls, events: Iterable[TranscriptEvent]) -> "Transcript":
        # Stable sort keeps causal order of same-time events.
        return cls(tuple(sorted(events, key=lambda e: e.t)))

    def __len__(self) -> int:
        return len(self.events)

    def by_action(self, action: str) -> List[TranscriptEvent]:
        return [e for e in self.events if e.action == action]

    def tx_intervals(self) -> Dict[str, List[Tuple[float, float]]]:
        """``(start, end)`` transmission intervals per device."""
        open_tx: Dict[str, float] = {}
        intervals: Dict[str, List[Tuple[float, float]]] = {}
        for e in self.events:
            if e.action == "tx_start":
                open_tx[e.device] = e.t
            elif e.action == "tx_end":
                intervals.setdefault(e.device, []).append((open_tx.pop(e.device), e.t))
        return intervals

    def csv_lines(self) -> List[str]:
        lines = ["t_s,device,action,channel"]
        lines += [f"{e.t:.9f},{e.device},{e.action},{e.channel}" for e in self.events]
        return lines
