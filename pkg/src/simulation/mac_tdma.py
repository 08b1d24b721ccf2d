"""TDMA link layer driven by the RF source's single tone.

The source opens each round with an on-off keyed sync pattern, then visits
the slots in order and only emits its tone in slots whose device has data.
A tag wakes when its energy detector sees the tone and backscatters one frame
inside its slot. The event loop runs on simpy and is deterministic for a seed.
"""
from dataclasses import dataclass, replace
from typing import Any, Dict, Generator, List, Mapping, Optional, Sequence

import numpy as np
import simpy
from numpy.lib.stride_tricks import sliding_window_view

from src.channel.link import incident_power_dbm
from src.errors import ScheduleInfeasible
from src.models.frame import LoraFrame
from src.models.mac import (
    DETECTOR_FLOOR_DBM,
    SOURCE_ID,
    DeviceState,
    TdmaSchedule,
    Transcript,
    TranscriptEvent,
)
from src.phy.lora_frame import frame_duration
from src.utils.logger import get_logger

logger = get_logger()

# Clock offsets are bounded by this fraction of a slot; the same amount is
# kept as guard time at the start of every slot.
DRIFT_BOUND = 0.001
SYNC_MAX_MISMATCH = 1


def energy_detect(power_dbm: float, threshold_dbm: float = DETECTOR_FLOOR_DBM) -> bool:
    """True iff the incident power reaches the threshold (boundary inclusive)."""
    return power_dbm >= threshold_dbm


def ook_stream(
    pattern: Sequence[int],
    offset: int,
    length: int,
    rng: np.random.Generator,
    flip_prob: float = 0.0,
) -> np.ndarray:
    """Random bits with ``pattern`` embedded at ``offset``, optionally corrupted.

    Every bit, pattern included, flips independently with ``flip_prob``.
    """
    pattern_arr = np.asarray(pattern, dtype=np.int8)
    if offset < 0 or offset + pattern_arr.size > length:
        raise ValueError(f"pattern at offset {offset} does not fit {length} bits")
    stream = rng.integers(0, 2, size=length, dtype=np.int8)
    stream[offset : offset + pattern_arr.size] = pattern_arr
    if flip_prob > 0:
        stream ^= (rng.random(length) < flip_prob).astype(np.int8)
    return stream


def sync_mismatches(stream: Sequence[int], pattern: Sequence[int]) -> np.ndarray:
    """Hamming distance between ``pattern`` and every alignment of ``stream``."""
    stream_arr = np.asarray(stream, dtype=np.int8)
    pattern_arr = np.asarray(pattern, dtype=np.int8)
    if stream_arr.size < pattern_arr.size:
        return np.zeros(0, dtype=np.int64)
    windows = sliding_window_view(stream_arr, pattern_arr.size)
    return np.count_nonzero(windows != pattern_arr, axis=1)


def detect_sync(
    stream: Sequence[int],
    pattern: Sequence[int],
    max_mismatch: int = SYNC_MAX_MISMATCH,
) -> Optional[int]:
    """First alignment matching ``pattern`` within ``max_mismatch`` bit errors.

    Raises:
        ValueError: If the pattern is shorter than 8 bits
    """
    if len(pattern) < 8:
        raise ValueError(f"sync pattern must be at least 8 bits (got {len(pattern)})")
    hits = np.flatnonzero(sync_mismatches(stream, pattern) <= max_mismatch)
    return int(hits[0]) if hits.size else None


def device_frame_duration(device: DeviceState) -> float:
    frame = LoraFrame(params=device.params, payload=bytes(device.payload_len))
    return frame_duration(frame)


def check_schedule(schedule: TdmaSchedule, devices: Mapping[str, DeviceState]) -> None:
    """Validate that every scheduled device exists and fits its slot.

    Raises:
        ScheduleInfeasible: If a frame plus guard and drift exceeds the slot
        ValueError: If a scheduled device is unknown or drifts too far
    """
    usable = schedule.slot_duration_s * (1 - 2 * DRIFT_BOUND)
    for device_id in schedule.device_slots:
        if device_id not in devices:
            raise ValueError(f"scheduled device {device_id!r} not configured")
        device = devices[device_id]
        airtime = device_frame_duration(device)
        if airtime > usable:
            raise ScheduleInfeasible(
                f"device {device_id!r}: frame {airtime * 1e3:.3f} ms does not fit "
                f"slot {schedule.slot_duration_s * 1e3:.3f} ms with guard"
            )
        if abs(device.clock_offset_s) > DRIFT_BOUND * schedule.slot_duration_s:
            raise ValueError(
                f"device {device_id!r}: clock offset {device.clock_offset_s} s beyond "
                f"+-{DRIFT_BOUND * 100:g}% of the slot"
            )


class TdmaSimulator:
    """Discrete-event simulation of source-arbitrated TDMA rounds."""

    def __init__(
        self,
        schedule: TdmaSchedule,
        devices: Sequence[DeviceState],
        seed: int = 0,
        flip_prob: float = 0.0,
    ) -> None:
        """Initialize the simulator.

        Args:
            schedule: Slot assignment and sync pattern
            devices: Tags taking part; only scheduled ones ever transmit
            seed: Seed for traffic, sync-stream noise and bit flips
            flip_prob: Per-bit error probability of the tags' OOK receivers

        Raises:
            ScheduleInfeasible: If a scheduled frame does not fit its slot
        """
        self.schedule = schedule
        self.devices: Dict[str, DeviceState] = {d.id: d for d in devices}
        check_schedule(schedule, self.devices)
        self.seed = seed
        self.flip_prob = flip_prob
        self.airtime = {
            d: device_frame_duration(self.devices[d]) for d in schedule.device_slots
        }
        self._events: List[TranscriptEvent] = []

    def run(
        self, n_rounds: int = 1, traffic_prob: Optional[float] = None
    ) -> Transcript:
        """Simulate ``n_rounds`` rounds.

        Args:
            n_rounds: Number of TDMA rounds
            traffic_prob: Probability that a device has data in a round; the
                devices' ``has_data`` flags are used when None

        Returns:
            Time-sorted transcript
        """
        rng = np.random.default_rng(self.seed)
        slots = self.schedule.device_slots
        scheduled = sorted(slots, key=slots.get)
        traffic = {
            d: (
                rng.random(n_rounds) < traffic_prob
                if traffic_prob is not None
                else np.full(n_rounds, self.devices[d].has_data)
            )
            for d in scheduled
        }
        env = simpy.Environment()
        sync_done = [env.event() for _ in range(n_rounds)]
        tones = [{d: env.event() for d in scheduled} for _ in range(n_rounds)]
        events: List[TranscriptEvent] = []
        self._events = events
        env.process(self._source(env, n_rounds, scheduled, traffic, sync_done, tones))
        for d in scheduled:
            device = self.devices[d]
            env.process(
                self._device(env, device, n_rounds, traffic[d], sync_done, tones, rng)
            )
        env.run()
        transcript = Transcript.from_events(events)
        logger.info(
            f"TDMA: {n_rounds} rounds, {len(transcript.by_action('tx_start'))} "
            f"transmissions, {len(transcript.by_action('skip'))} skips"
        )
        return transcript

    def _log(
        self, t: float, device: str, action: str, channel: int, detail: str = ""
    ) -> None:
        self._events.append(TranscriptEvent(t, device, action, channel, detail))

    def _source(
        self,
        env: simpy.Environment,
        n_rounds: int,
        scheduled: Sequence[str],
        traffic: Mapping[str, np.ndarray],
        sync_done: Sequence[simpy.Event],
        tones: Sequence[Dict[str, simpy.Event]],
    ) -> Generator[simpy.Event, Any, None]:
        slots = self.schedule.device_slots
        for r in range(n_rounds):
            round_start = env.now
            yield env.timeout(self.schedule.sync_duration_s)
            sync_done[r].succeed(round_start)
            for d in scheduled:
                slot_start = self.schedule.slot_start(slots[d], round_start)
                if slot_start > env.now:
                    yield env.timeout(slot_start - env.now)
                emit = bool(traffic[d][r])
                if emit:
                    self._log(env.now, SOURCE_ID, "tone", self.devices[d].channel)
                tones[r][d].succeed(emit)
            round_end = round_start + self.schedule.round_duration_s
            if round_end > env.now:
                yield env.timeout(round_end - env.now)

    def _device(
        self,
        env: simpy.Environment,
        device: DeviceState,
        n_rounds: int,
        has_data: np.ndarray,
        sync_done: Sequence[simpy.Event],
        tones: Sequence[Dict[str, simpy.Event]],
        rng: np.random.Generator,
    ) -> Generator[simpy.Event, Any, None]:
        power = incident_power_dbm(device.budget)
        powered = energy_detect(power, device.detector_threshold_dbm)
        pattern = self.schedule.round_sync_pattern
        guard = DRIFT_BOUND * self.schedule.slot_duration_s
        for r in range(n_rounds):
            yield sync_done[r]
            locked = False
            if powered:
                lead = int(rng.integers(0, 16))
                stream = ook_stream(
                    pattern, lead, lead + len(pattern), rng, self.flip_prob
                )
                locked = detect_sync(stream, pattern) is not None
                if locked:
                    self._log(env.now, device.id, "sync", device.channel)
            tone = yield tones[r][device.id]
            if not has_data[r]:
                self._log(env.now, device.id, "skip", device.channel, "no_data")
                continue
            if not tone or not powered:
                self._log(env.now, device.id, "skip", device.channel, "below_threshold")
                continue
            if not locked:
                self._log(env.now, device.id, "skip", device.channel, "no_sync")
                continue
            self._log(env.now, device.id, "wake", device.channel)
            yield env.timeout(guard + device.clock_offset_s)
            self._log(env.now, device.id, "tx_start", device.channel)
            yield env.timeout(self.airtime[device.id])
            self._log(env.now, device.id, "tx_end", device.channel)


def simulate_round(
    schedule: TdmaSchedule,
    devices: Sequence[DeviceState],
    seed: int = 0,
    flip_prob: float = 0.0,
) -> Transcript:
    """One TDMA round using each device's ``has_data`` flag."""
    return TdmaSimulator(schedule, devices, seed=seed, flip_prob=flip_prob).run(1)


def random_clock_offsets(
    devices: Sequence[DeviceState], slot_duration_s: float, seed: int
) -> List[DeviceState]:
    """Give every device a constant clock offset within the drift bound."""
    rng = np.random.default_rng(seed)
    bound = DRIFT_BOUND * slot_duration_s
    return [
        replace(d, clock_offset_s=float(rng.uniform(-bound, bound))) for d in devices
    ]


def simulate_rounds(
    schedule: TdmaSchedule,
    devices: Sequence[DeviceState],
    n_rounds: int,
    traffic_prob: float = 0.5,
    seed: int = 0,
    flip_prob: float = 0.0,
    drift: bool = True,
) -> Transcript:
    """Many rounds with random per-round traffic and optional clock drift."""
    if drift:
        devices = random_clock_offsets(devices, schedule.slot_duration_s, seed)
    simulator = TdmaSimulator(schedule, devices, seed=seed, flip_prob=flip_prob)
    return simulator.run(n_rounds, traffic_prob=traffic_prob)


@dataclass(frozen=True)
class MacAudit:
    """Safety and economy checks over a transcript."""

    transmissions: int
    overlaps: int
    idle_tones: int
    skips: int

    @property
    def ok(self) -> bool:
        return self.overlaps == 0 and self.idle_tones == 0


def audit_transcript(
    transcript: Transcript, devices: Mapping[str, DeviceState]
) -> MacAudit:
    """Count same-channel-same-sf overlaps and tones sent to devices without data."""
    groups: Dict[tuple, List[tuple]] = {}
    for device_id, intervals in transcript.tx_intervals().items():
        device = devices[device_id]
        groups.setdefault((device.channel, device.sf), []).extend(intervals)
    overlaps = 0
    for intervals in groups.values():
        intervals.sort()
        for (_, end), (start, _) in zip(intervals, intervals[1:]):
            if start < end:
                overlaps += 1

    tones = {(e.t, e.channel) for e in transcript.by_action("tone")}
    idle = sum(
        1
        for e in transcript.by_action("skip")
        if e.detail == "no_data" and (e.t, e.channel) in tones
    )
    return MacAudit(
        transmissions=len(transcript.by_action("tx_start")),
        overlaps=overlaps,
        idle_tones=idle,
        skips=len(transcript.by_action("skip")),
    )
