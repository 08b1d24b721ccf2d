"""Unit tests for frequency plans, switch schedules and harmonic levels."""
import numpy as np
import pytest

from src.errors import UnsupportedLevels
from src.models.chirp import ChirpParams, ChirpSymbol
from src.models.frame import LoraFrame
from src.models.waveform import FrequencyPlan, MultiLevelWave, SwitchState
from src.phy import waveform_synth
from src.phy.lora_frame import parse_frame
from src.synth import HarmonicCancelSynth, SquareWaveSynth, create_synth

DELTA_F = 1e6
RATE = 64e6
DURATION = (1 << 16) / RATE
# 8, 10 and 12 staircase states all divide one period.
WIDE_RATE = 240e6


def _square_report(settle=None):
    wave = waveform_synth.switch_schedule(
        FrequencyPlan(((DURATION, 0.0),), DELTA_F, 125000.0), 2, RATE
    )
    sig = waveform_synth.backscatter_mix(0.0, wave, settle_cutoff_hz=settle)
    return waveform_synth.spectrum(sig, DELTA_F)


def _multilevel_report(levels: int, rate: float = RATE):
    duration = (1 << 16) / rate
    wave = waveform_synth.multilevel_exponent(DELTA_F, duration, rate, levels)
    return waveform_synth.spectrum(waveform_synth.backscatter_mix(0.0, wave), DELTA_F)


class TestSquareWave:
    """Two-level baseline harmonics."""

    def test_third_and_fifth(self) -> None:
        report = waveform_synth.spectrum(
            waveform_synth.square_exponent(DELTA_F, DURATION, RATE), DELTA_F
        )
        assert report.harmonic_levels[3] == pytest.approx(-9.5, abs=0.5)
        assert report.harmonic_levels[5] == pytest.approx(-14.0, abs=0.5)

    def test_harmonic_sides(self) -> None:
        """The 3rd lands on the mirror side, the 5th on the signal side."""
        report = waveform_synth.spectrum(
            waveform_synth.square_exponent(DELTA_F, DURATION, RATE), DELTA_F
        )
        levels = report.signed_levels
        assert levels[-3] > levels[3] + 30
        assert levels[5] > levels[-5] + 30

    def test_mirror_cancelled(self) -> None:
        assert _square_report().mirror_level <= -60.0

    def test_settle_filter_softens_harmonics(self) -> None:
        """A slow switch rolls off the 5th relative to the ideal one."""
        ideal = _square_report().harmonic_levels[5]
        settled = _square_report(settle=2 * DELTA_F).harmonic_levels[5]
        assert settled < ideal - 3

    def test_settle_filter_rejects_high_orders(self) -> None:
        """Orders from the 7th up lose at least 6 dB more than the ideal switch."""
        ideal = _square_report().harmonic_levels
        settled = _square_report(settle=2 * DELTA_F).harmonic_levels
        for n in (7, 9, 11, 13, 15):
            assert ideal[n] - settled[n] >= 6.0, n


class TestMultiLevel:
    """Harmonic-cancelling staircases."""

    def test_four_level_cancels_third_and_fifth(self) -> None:
        report = _multilevel_report(4)
        assert report.harmonic_levels[3] <= -38.0
        assert report.harmonic_levels[5] <= -38.0
        assert report.mirror_level <= -60.0

    def test_four_level_survivors(self) -> None:
        """The 7th and 9th fall off as one over the order."""
        report = _multilevel_report(4)
        assert report.harmonic_levels[7] == pytest.approx(-16.7, abs=1.0)
        assert report.harmonic_levels[9] == pytest.approx(-18.8, abs=1.0)

    def test_four_level_cancelled_orders_both_sides(self) -> None:
        """Orders 3, 5, 11 and 13 vanish on both sides, as does the mirror."""
        report = _multilevel_report(4)
        for n in (3, 5, 11, 13):
            assert report.signed_levels[n] <= -60.0, n
            assert report.signed_levels[-n] <= -60.0, -n
        assert report.mirror_level <= -60.0

    def test_four_level_survivor_sides(self) -> None:
        """The 7th lands on the mirror side and the 9th on the signal side."""
        levels = _multilevel_report(4).signed_levels
        assert levels[-7] == pytest.approx(-16.7, abs=1.0)
        assert levels[9] == pytest.approx(-18.8, abs=1.0)

    @pytest.mark.parametrize("levels,cancelled", [(5, (3, 5, 7)), (6, (3, 5, 7, 9))])
    def test_more_levels_cancel_more(self, levels: int, cancelled: tuple) -> None:
        report = _multilevel_report(levels, WIDE_RATE)
        for n in cancelled:
            assert report.harmonic_levels[n] <= -35.0

    def test_unsupported_levels(self) -> None:
        with pytest.raises(UnsupportedLevels):
            waveform_synth.multilevel_exponent(DELTA_F, DURATION, RATE, levels=3)
        with pytest.raises(UnsupportedLevels):
            HarmonicCancelSynth(DELTA_F, levels=2)

    def test_rate_too_low(self) -> None:
        """Fewer than 16 samples per period is rejected."""
        with pytest.raises(ValueError, match="below"):
            waveform_synth.multilevel_exponent(DELTA_F, DURATION, 8 * DELTA_F)

    def test_spectrum_needs_samples(self) -> None:
        wave = waveform_synth.multilevel_exponent(DELTA_F, 1000 / RATE, RATE)
        with pytest.raises(ValueError, match="at least"):
            waveform_synth.spectrum(waveform_synth.backscatter_mix(0.0, wave), DELTA_F)


class TestSwitchAlphabet:
    """Test cases for the switch state tables."""

    @pytest.mark.parametrize("levels,n_states", [(2, 4), (4, 8), (5, 10), (6, 12)])
    def test_state_counts(self, levels: int, n_states: int) -> None:
        assert len(SwitchState.alphabet(levels)) == n_states

    def test_four_level_rails(self) -> None:
        """Each rail of the eight-state network takes four values."""
        values = [s.complex_value for s in SwitchState.alphabet(4)]
        rails = sorted({round(v.real, 9) for v in values})
        assert len(rails) == 4
        assert max(rails) == pytest.approx(np.cos(np.pi / 8))

    def test_state_index_checked(self) -> None:
        with pytest.raises(ValueError, match="outside"):
            MultiLevelWave(np.array([0, 8]), RATE, levels=4)


class TestFrequencyPlan:
    """Test cases for chirp frequency plans."""

    def test_plan_length_and_range(self, sf7: ChirpParams) -> None:
        plan = waveform_synth.frequency_plan(sf7, [ChirpSymbol(0)], 3e5)
        assert len(plan.steps) == 128
        assert plan.duration == pytest.approx(1.024e-3)
        assert all(abs(f) < sf7.bw / 2 for f in plan.frequencies)

    def test_shift_rolls_plan(self, sf7: ChirpParams) -> None:
        """A symbol value rotates the chip frequencies."""
        base = waveform_synth.frequency_plan(sf7, [ChirpSymbol(0)], 3e5).frequencies
        shifted = waveform_synth.frequency_plan(sf7, [ChirpSymbol(5)], 3e5).frequencies
        assert shifted == list(np.roll(base, -5))

    def test_offset_must_clear_band(self, sf7: ChirpParams) -> None:
        with pytest.raises(ValueError, match="delta_f"):
            waveform_synth.frequency_plan(sf7, [ChirpSymbol(0)], 50e3)

    def test_bad_alignment(self, sf7: ChirpParams) -> None:
        with pytest.raises(ValueError, match="align"):
            waveform_synth.frequency_plan(sf7, [ChirpSymbol(0)], 3e5, align="end")

    def test_default_rate(self, sf7: ChirpParams) -> None:
        """Smallest multiple of 8*delta_f with 16 samples per highest period."""
        plan = waveform_synth.frequency_plan(sf7, [ChirpSymbol(0)], 1e6)
        assert waveform_synth.default_sample_rate(plan) == pytest.approx(24e6)


class TestSwitchSchedule:
    """Test cases for driving the switch through a plan."""

    def test_schedule_length(self, sf7: ChirpParams) -> None:
        plan = waveform_synth.frequency_plan(sf7, [ChirpSymbol(3)], 1e6)
        wave = waveform_synth.switch_schedule(plan, levels=4)
        assert len(wave) == 24576
        assert wave.n_states == 8
        assert wave.transitions().size > 0

    def test_steps_one_state_at_a_time(self, sf7: ChirpParams) -> None:
        """Oversampled staircases move to a neighbouring state only."""
        plan = waveform_synth.frequency_plan(sf7, [ChirpSymbol(0)], 1e6)
        wave = waveform_synth.switch_schedule(plan, levels=4)
        jumps = np.diff(wave.states) % wave.n_states
        assert set(np.unique(jumps)) <= {0, 1}

    def test_chunked_schedule_matches(self, sf7: ChirpParams) -> None:
        """Resuming the phase counter reproduces one long schedule."""
        first = waveform_synth.frequency_plan(sf7, [ChirpSymbol(1)], 1e6)
        second = waveform_synth.frequency_plan(sf7, [ChirpSymbol(2)], 1e6)
        whole = waveform_synth.switch_schedule(first + second, 4, 24e6)
        head = waveform_synth.switch_schedule(first, 4, 24e6)
        cycles = sum(d * (f + 1e6) for d, f in first.steps)
        tail = waveform_synth.switch_schedule(second, 4, 24e6, start_cycles=cycles)
        joined = np.concatenate([head.states, tail.states])
        assert np.mean(joined == whole.states) > 0.999

    def test_no_phase_jump_between_calls(self, sf7: ChirpParams) -> None:
        """The state at a join steps by at most one, as inside a schedule."""
        plans = [
            waveform_synth.frequency_plan(sf7, [ChirpSymbol(v)], 1e6)
            for v in (0, 40, 90, 127)
        ]
        cycles = 0.0
        states = []
        for plan in plans:
            wave = waveform_synth.switch_schedule(plan, 4, 24e6, start_cycles=cycles)
            states.append(wave.states)
            cycles += sum(d * (f + 1e6) for d, f in plan.steps)
        n_states = 8
        for before, after in zip(states, states[1:]):
            assert (int(after[0]) - int(before[-1])) % n_states in (0, 1)

    def test_unsupported_levels(self, sf7: ChirpParams) -> None:
        plan = waveform_synth.frequency_plan(sf7, [ChirpSymbol(0)], 1e6)
        with pytest.raises(UnsupportedLevels):
            waveform_synth.switch_schedule(plan, levels=3)


class TestSynthesizers:
    """Synthesised frames decode after down-conversion."""

    @pytest.mark.parametrize("kind", ["square", "multilevel"])
    def test_baseband_decodes(self, kind: str, sf7: ChirpParams) -> None:
        synth = create_synth(kind, delta_f=sf7.bw)
        frame = LoraFrame(params=sf7, payload=b"tag")
        parsed = parse_frame(synth.baseband(frame), sf7, 3)
        assert parsed.payload == b"tag"
        assert parsed.crc_ok

    @pytest.mark.parametrize("sf", [6, 8])
    def test_other_spreading_factors_decode(self, sf: int) -> None:
        p = ChirpParams(sf=sf, bw=125000)
        synth = create_synth("multilevel", delta_f=p.bw)
        frame = LoraFrame(params=p, payload=b"\x01\xfe")
        parsed = parse_frame(synth.baseband(frame), p, 2)
        assert parsed.payload == b"\x01\xfe"
        assert parsed.crc_ok

    def test_factory(self) -> None:
        assert isinstance(create_synth("square", 1e6), SquareWaveSynth)
        assert create_synth("multilevel", 1e6, levels=6).levels == 6
        with pytest.raises(ValueError, match="synth"):
            create_synth("sawtooth", 1e6)
