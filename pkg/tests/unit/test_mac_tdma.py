"""Unit tests for the source-arbitrated TDMA link layer."""
import dataclasses

import numpy as np
import pytest

from src.errors import ScheduleInfeasible
from src.models.link import LinkBudget
from src.models.mac import DeviceState, TdmaSchedule, Transcript, TranscriptEvent
from src.simulation.mac_tdma import (
    DRIFT_BOUND,
    TdmaSimulator,
    audit_transcript,
    detect_sync,
    device_frame_duration,
    energy_detect,
    ook_stream,
    simulate_round,
    simulate_rounds,
)

SYNC_PATTERN = (1, 0, 1, 1, 0, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1)


def _by_id(devices):
    return {d.id: d for d in devices}


class TestEnergyDetector:
    """Test cases for the tone detector."""

    def test_strong_tone(self) -> None:
        assert energy_detect(-45.0)

    def test_below_floor(self) -> None:
        assert not energy_detect(-72.0)

    def test_boundary_inclusive(self) -> None:
        """Exactly the threshold counts as detected."""
        assert energy_detect(-71.0)
        assert energy_detect(-30.0, threshold_dbm=-30.0)

    def test_threshold_floor(self) -> None:
        with pytest.raises(ValueError, match="detector_threshold_dbm"):
            DeviceState(id="x", channel=0, sf=7, detector_threshold_dbm=-80.0)


class TestSyncDetection:
    """Test cases for the on-off keyed round marker."""

    @pytest.mark.parametrize("offset", [0, 5, 15])
    def test_finds_offset(self, offset: int) -> None:
        stream = np.concatenate([np.zeros(offset, dtype=np.int8), SYNC_PATTERN])
        assert detect_sync(stream, SYNC_PATTERN) == offset

    def test_tolerates_one_flip(self) -> None:
        stream = np.array(SYNC_PATTERN)
        stream[4] ^= 1
        assert detect_sync(stream, SYNC_PATTERN) == 0

    def test_two_flips_rejected(self) -> None:
        stream = np.array(SYNC_PATTERN)
        stream[[2, 9]] ^= 1
        assert detect_sync(stream, SYNC_PATTERN) is None

    def test_short_stream(self) -> None:
        assert detect_sync(SYNC_PATTERN[:10], SYNC_PATTERN) is None

    def test_pattern_too_short(self) -> None:
        with pytest.raises(ValueError, match="8 bits"):
            detect_sync([1, 0, 1], [1, 0, 1])

    def test_false_detection_rare(self, rng: np.random.Generator) -> None:
        """Random 16-bit words pass the 1-mismatch test about 17 times in 65536."""
        hits = sum(
            detect_sync(rng.integers(0, 2, size=16), SYNC_PATTERN) is not None
            for _ in range(2000)
        )
        assert hits <= 5

    def test_ook_stream_embeds_pattern(self, rng: np.random.Generator) -> None:
        stream = ook_stream(SYNC_PATTERN, 7, 40, rng)
        assert list(stream[7:23]) == list(SYNC_PATTERN)
        with pytest.raises(ValueError, match="does not fit"):
            ook_stream(SYNC_PATTERN, 30, 40, rng)


class TestScheduleModel:
    """Test cases for schedule validation."""

    def test_round_timing(self, schedule: TdmaSchedule) -> None:
        assert schedule.sync_duration_s == pytest.approx(0.016)
        assert schedule.round_duration_s == pytest.approx(1.516)
        assert schedule.slot_start(2) == pytest.approx(1.016)
        assert schedule.device_for_slot(1) == "b"

    def test_duplicate_slots(self) -> None:
        with pytest.raises(ValueError, match="unique"):
            TdmaSchedule(0.5, {"a": 0, "b": 0}, SYNC_PATTERN)

    def test_short_pattern(self) -> None:
        with pytest.raises(ValueError, match="8 bits"):
            TdmaSchedule(0.5, {"a": 0}, (1, 0, 1))

    def test_frame_must_fit(self, schedule: TdmaSchedule, three_devices) -> None:
        slow = dataclasses.replace(three_devices[0], sf=12, bw=7800, payload_len=200)
        with pytest.raises(ScheduleInfeasible):
            TdmaSimulator(schedule, [slow] + three_devices[1:])

    def test_unknown_device(self, schedule: TdmaSchedule, three_devices) -> None:
        with pytest.raises(ValueError, match="not configured"):
            TdmaSimulator(schedule, three_devices[:2])

    def test_offset_beyond_drift(self, schedule: TdmaSchedule, three_devices) -> None:
        late = dataclasses.replace(three_devices[0], clock_offset_s=0.01)
        with pytest.raises(ValueError, match="clock offset"):
            TdmaSimulator(schedule, [late] + three_devices[1:])


class TestSingleRound:
    """Test cases for one round with fixed traffic."""

    def test_three_transmissions(self, schedule: TdmaSchedule, three_devices) -> None:
        transcript = simulate_round(schedule, three_devices)
        starts = transcript.by_action("tx_start")
        assert [e.device for e in starts] == ["a", "b", "c"]
        assert len(transcript.by_action("sync")) == 3
        assert len(transcript.by_action("tone")) == 3

    def test_transmissions_inside_slots(
        self, schedule: TdmaSchedule, three_devices
    ) -> None:
        transcript = simulate_round(schedule, three_devices)
        guard = DRIFT_BOUND * schedule.slot_duration_s
        for device_id, [(start, end)] in transcript.tx_intervals().items():
            slot = schedule.device_slots[device_id]
            slot_start = schedule.slot_start(slot)
            assert start == pytest.approx(slot_start + guard)
            assert end <= slot_start + schedule.slot_duration_s
            device = _by_id(three_devices)[device_id]
            assert end - start == pytest.approx(device_frame_duration(device))

    def test_no_data_no_tone(self, schedule: TdmaSchedule, three_devices) -> None:
        """The source stays silent in the slot of a device without data."""
        devices = [three_devices[0].with_data(False)] + three_devices[1:]
        transcript = simulate_round(schedule, devices)
        skips = transcript.by_action("skip")
        assert [(e.device, e.detail) for e in skips] == [("a", "no_data")]
        assert len(transcript.by_action("tone")) == 2
        assert audit_transcript(transcript, _by_id(devices)).idle_tones == 0

    def test_far_device_skips(self, schedule: TdmaSchedule, three_devices) -> None:
        """A tag too far from the source never hears the tone."""
        far = dataclasses.replace(three_devices[2], budget=LinkBudget(d1_m=10_000.0))
        transcript = simulate_round(schedule, three_devices[:2] + [far])
        skips = transcript.by_action("skip")
        assert [(e.device, e.detail) for e in skips] == [("c", "below_threshold")]
        assert "c" not in transcript.tx_intervals()

    def test_raised_threshold_skips(
        self, schedule: TdmaSchedule, three_devices
    ) -> None:
        deaf = dataclasses.replace(three_devices[1], detector_threshold_dbm=0.0)
        devices = [three_devices[0], deaf, three_devices[2]]
        transcript = simulate_round(schedule, devices)
        assert [e.device for e in transcript.by_action("tx_start")] == ["a", "c"]

    def test_noisy_sync_skips(self, schedule: TdmaSchedule, three_devices) -> None:
        """Heavy bit errors leave tags unsynchronised."""
        transcript = TdmaSimulator(schedule, three_devices, flip_prob=0.5).run(20)
        details = {e.detail for e in transcript.by_action("skip")}
        assert "no_sync" in details

    def test_csv(self, schedule: TdmaSchedule, three_devices) -> None:
        lines = simulate_round(schedule, three_devices).csv_lines()
        assert lines[0] == "t_s,device,action,channel"
        assert lines[1] == "0.016000000,source,tone,0"


class TestManyRounds:
    """Test cases for long randomised runs."""

    def test_thousand_rounds_safe(self, schedule: TdmaSchedule, three_devices) -> None:
        """Shared channel and SF, drifting clocks: still no overlap, no idle tone."""
        devices = [dataclasses.replace(d, channel=0, sf=7) for d in three_devices]
        transcript = simulate_rounds(schedule, devices, n_rounds=1000, seed=11)
        audit = audit_transcript(transcript, _by_id(devices))
        assert audit.ok
        assert audit.overlaps == 0
        assert audit.idle_tones == 0
        assert 1300 < audit.transmissions < 1700

    def test_deterministic(self, schedule: TdmaSchedule, three_devices) -> None:
        a = simulate_rounds(schedule, three_devices, n_rounds=50, seed=5)
        b = simulate_rounds(schedule, three_devices, n_rounds=50, seed=5)
        assert a.csv_lines() == b.csv_lines()

    def test_traffic_probability_bounds(
        self, schedule: TdmaSchedule, three_devices
    ) -> None:
        silent = simulate_rounds(schedule, three_devices, 10, traffic_prob=0.0)
        busy = simulate_rounds(schedule, three_devices, 10, traffic_prob=1.0)
        assert not silent.by_action("tone")
        assert len(busy.by_action("tx_start")) == 30

    def test_every_device_locks_each_round(
        self, schedule: TdmaSchedule, three_devices
    ) -> None:
        """With clean signalling every tag locks right after each marker."""
        n_rounds = 20
        sim = TdmaSimulator(schedule, three_devices, seed=8)
        transcript = sim.run(n_rounds, traffic_prob=0.5)
        for device in three_devices:
            syncs = transcript.by_action("sync")
            times = [e.t for e in syncs if e.device == device.id]
            expected = [
                r * schedule.round_duration_s + schedule.sync_duration_s
                for r in range(n_rounds)
            ]
            assert times == pytest.approx(expected)
        assert not [e for e in transcript.by_action("skip") if e.detail == "no_sync"]


class TestAudit:
    """Test cases for the transcript checks."""

    def test_detects_overlap(self) -> None:
        devices = {
            "a": DeviceState(id="a", channel=1, sf=8),
            "b": DeviceState(id="b", channel=1, sf=8),
        }
        events = [
            TranscriptEvent(0.0, "a", "tx_start", 1),
            TranscriptEvent(0.5, "b", "tx_start", 1),
            TranscriptEvent(1.0, "a", "tx_end", 1),
            TranscriptEvent(1.5, "b", "tx_end", 1),
        ]
        audit = audit_transcript(Transcript.from_events(events), devices)
        assert audit.overlaps == 1
        assert not audit.ok

    def test_different_sf_may_overlap(self) -> None:
        devices = {
            "a": DeviceState(id="a", channel=1, sf=8),
            "b": DeviceState(id="b", channel=1, sf=11),
        }
        events = [
            TranscriptEvent(0.0, "a", "tx_start", 1),
            TranscriptEvent(0.5, "b", "tx_start", 1),
            TranscriptEvent(1.0, "a", "tx_end", 1),
            TranscriptEvent(1.5, "b", "tx_end", 1),
        ]
        assert audit_transcript(Transcript.from_events(events), devices).ok

    def test_detects_idle_tone(self) -> None:
        devices = {"a": DeviceState(id="a", channel=2, sf=7)}
        events = [
            TranscriptEvent(1.0, "source", "tone", 2),
            TranscriptEvent(1.0, "a", "skip", 2, "no_data"),
        ]
        assert audit_transcript(Transcript.from_events(events), devices).idle_tones == 1

    def test_unsorted_events_rejected(self) -> None:
        events = (
            TranscriptEvent(1.0, "a", "wake", 0),
            TranscriptEvent(0.5, "a", "tx_start", 0),
        )
        with pytest.raises(ValueError, match="time-sorted"):
            Transcript(events)

    def test_unknown_action(self) -> None:
        with pytest.raises(ValueError, match="action"):
            TranscriptEvent(0.0, "a", "dance", 0)
