"""Backscatter waveform synthesis.

The tag cannot generate a complex exponential; it toggles a switch between a
small set of impedances. A chirp is first turned into a digital frequency
plan, then each plan step is approximated by a phasor staircase at
``delta_f + f``. The source tone sits at DC of the simulated baseband, so the
wanted sideband appears at ``+delta_f + f_lora`` and every spectral
relationship is preserved at offsets.

An ``M``-state phasor staircase only keeps harmonics ``h = 1 (mod M)`` at
``1/|h|`` of the fundamental: the two-level square wave keeps ``-3, +5, -7``,
the four-level (eight-state) wave cancels 3 and 5 and keeps ``-7, +9``.
"""
import math
from fractions import Fraction
from typing import Literal, Optional, Sequence

import numpy as np
from scipy import signal

from src.errors import UnsupportedLevels
from src.models.chirp import ChirpParams, ChirpSymbol
from src.models.frame import DOWNCHIRP_QUARTERS, FrameSymbols
from src.models.iq_signal import IqSignal
from src.models.waveform import (
    STATES_PER_LEVELS,
    FrequencyPlan,
    MultiLevelWave,
    SpectrumReport,
)
from src.utils.logger import get_logger

logger = get_logger()

MULTILEVEL_LEVELS = (4, 5, 6)
MIN_SAMPLES_PER_PERIOD = 16
MIN_SPECTRUM_SAMPLES = 1 << 14
PSD_FLOOR = 1e-30

Align = Literal["center", "start"]


def _chip_frequencies(p: ChirpParams, align: Align) -> np.ndarray:
    if align not in ("center", "start"):
        raise ValueError(f"align must be 'center' or 'start' (got {align!r})")
    offset = 0.5 if align == "center" else 0.0
    return -p.bw / 2 + (np.arange(p.chips) + offset) * p.bw / p.chips


def frequency_plan(
    p: ChirpParams,
    symbols: Sequence[ChirpSymbol],
    delta_f: float,
    align: Align = "center",
) -> FrequencyPlan:
    """One plan step per chip: the frequency of the cyclically shifted up-chirp.

    Args:
        p: Chirp parameters
        symbols: Symbols to render
        delta_f: Backscatter offset, recorded for the switch schedule
        align: ``"center"`` gives each chip the mid-chip frequency of the
            linear sweep, which integrates to the exact chirp phase at every
            chip boundary; ``"start"`` gives the frequency at chip start

    Returns:
        Plan with ``2**sf`` steps of ``1/bw`` seconds per symbol
    """
    freqs = _chip_frequencies(p, align)
    chip = 1.0 / p.bw
    steps = []
    for s in symbols:
        s.check(p)
        steps.extend((chip, float(f)) for f in np.roll(freqs, -s.value))
    return FrequencyPlan(tuple(steps), float(delta_f), float(p.bw))


def downchirp_plan(
    p: ChirpParams, quarters: int, delta_f: float, align: Align = "center"
) -> FrequencyPlan:
    """Plan for ``quarters / 4`` base down-chirps."""
    freqs = -_chip_frequencies(p, align)
    chip = 1.0 / p.bw
    n_chips = quarters * p.chips // 4
    steps = tuple((chip, float(freqs[k % p.chips])) for k in range(n_chips))
    return FrequencyPlan(steps, float(delta_f), float(p.bw))


def frame_plan(symbols: FrameSymbols, delta_f: float) -> FrequencyPlan:
    """Plan for a whole frame, down-chirps included."""
    p = symbols.params
    return (
        frequency_plan(p, symbols.preamble + symbols.sync, delta_f)
        + downchirp_plan(p, DOWNCHIRP_QUARTERS, delta_f)
        + frequency_plan(p, symbols.payload, delta_f)
    )


def _check_rate(sample_rate: float, highest_freq: float) -> None:
    if sample_rate < MIN_SAMPLES_PER_PERIOD * highest_freq:
        raise ValueError(
            f"sample_rate {sample_rate} Hz below {MIN_SAMPLES_PER_PERIOD} x "
            f"{highest_freq} Hz"
        )


def _staircase(cycles: np.ndarray, levels: int, sample_rate: float) -> MultiLevelWave:
    """Quantise a running cycle count onto the ``M``-state phasor alphabet."""
    n_states = STATES_PER_LEVELS[levels]
    states = np.floor(n_states * cycles).astype(np.int64) % n_states
    # An M-step phasor staircase carries sinc(1/M) of its amplitude in the fundamental.
    magnitude = math.sqrt(2) if levels == 2 else 1.0
    gain = 1.0 / (magnitude * float(np.sinc(1.0 / n_states)))
    return MultiLevelWave(states, sample_rate, levels=levels, gain=gain)


def _tone_cycles(freq: float, duration: float, sample_rate: float) -> np.ndarray:
    n = int(round(duration * sample_rate))
    return np.arange(n) * (freq / sample_rate)


def square_exponent(delta_f: float, duration: float, sample_rate: float) -> IqSignal:
    """Two-level approximation of ``exp(j*2*pi*delta_f*t)``.

    Each rail is a +-1 square wave, the sine rail a quarter period behind the
    cosine rail, so the mirror image cancels but the 3rd and 5th harmonics
    remain at -9.5 dB and -14 dB.
    """
    _check_rate(sample_rate, delta_f)
    wave = _staircase(_tone_cycles(delta_f, duration, sample_rate), 2, sample_rate)
    return IqSignal(wave.values, sample_rate)


def multilevel_exponent(
    delta_f: float, duration: float, sample_rate: float, levels: int = 4
) -> MultiLevelWave:
    """Harmonic-cancelling staircase approximation of ``exp(j*2*pi*delta_f*t)``.

    ``levels=4`` steps through eight phasors in eighth-period increments;
    each rail then takes ``+-cos(pi/8), +-cos(3*pi/8)``. ``levels=5`` and ``6``
    use ten and twelve phasors, additionally cancelling the 7th (and 9th)
    harmonics.

    Raises:
        UnsupportedLevels: If ``levels`` is not 4, 5 or 6
    """
    if levels not in MULTILEVEL_LEVELS:
        raise UnsupportedLevels(
            f"levels must be one of {MULTILEVEL_LEVELS} (got {levels})"
        )
    _check_rate(sample_rate, delta_f)
    return _staircase(_tone_cycles(delta_f, duration, sample_rate), levels, sample_rate)


def default_sample_rate(plan: FrequencyPlan) -> float:
    """Smallest multiple of ``8 * delta_f`` meeting the 16-samples-per-period rule."""
    highest = plan.delta_f + plan.bw / 2
    base = 8 * plan.delta_f
    return base * math.ceil(MIN_SAMPLES_PER_PERIOD * highest / base)


def switch_schedule(
    plan: FrequencyPlan,
    levels: int = 4,
    sample_rate: Optional[float] = None,
    start_cycles: float = 0.0,
) -> MultiLevelWave:
    """Drive the switch through a frequency plan.

    The staircase phase counter runs continuously across plan steps, so a
    segment boundary never resets the state index. ``start_cycles`` resumes
    the counter when a long plan is synthesised in chunks.

    Args:
        plan: Frequency plan from :func:`frequency_plan` or :func:`frame_plan`
        levels: 2 for the square-wave baseline, or 4, 5, 6
        sample_rate: Simulation rate; defaults to :func:`default_sample_rate`
        start_cycles: Phase counter value at the first sample, in cycles

    Returns:
        Switch state sequence

    Raises:
        UnsupportedLevels: If ``levels`` has no switch alphabet
    """
    if levels not in STATES_PER_LEVELS:
        raise UnsupportedLevels(
            f"levels must be one of {sorted(STATES_PER_LEVELS)} (got {levels})"
        )
    rate = float(sample_rate or default_sample_rate(plan))
    _check_rate(rate, plan.delta_f + plan.bw / 2)

    durations = np.array([d for d, _ in plan.steps])
    freqs = np.array(plan.frequencies) + plan.delta_f
    edges = np.rint(np.concatenate([[0.0], np.cumsum(durations)]) * rate)
    counts = np.diff(edges.astype(np.int64))
    per_sample = np.repeat(freqs / rate, counts)
    cycles = start_cycles + np.cumsum(per_sample) - per_sample
    logger.debug(
        f"Switch schedule: {len(plan.steps)} steps, {per_sample.size} samples at "
        f"{rate:.0f} Hz, {STATES_PER_LEVELS[levels]} states"
    )
    return _staircase(cycles, levels, rate)


def backscatter_mix(
    carrier_freq: float,
    wave: MultiLevelWave,
    settle_cutoff_hz: Optional[float] = None,
    normalize: bool = True,
) -> IqSignal:
    """Reflect the source tone through the switch sequence.

    Args:
        carrier_freq: Source tone offset at simulated baseband (0 for DC)
        wave: Switch states
        settle_cutoff_hz: Corner of an optional single-pole low-pass standing
            in for the switch's finite settling time; off when None
        normalize: Scale so the fundamental has unit amplitude

    Returns:
        Backscattered baseband signal
    """
    values = wave.values
    if settle_cutoff_hz is not None:
        alpha = 1.0 - math.exp(-2 * math.pi * settle_cutoff_hz / wave.sample_rate)
        values = signal.lfilter([alpha], [1.0, alpha - 1.0], values)
    if normalize:
        values = values * wave.gain
    n = np.arange(len(wave))
    tone = np.exp(2j * np.pi * carrier_freq * n / wave.sample_rate)
    return IqSignal(tone * values, wave.sample_rate)


def spectrum(
    sig: IqSignal,
    delta_f: float,
    max_order: int = 15,
    nperseg: int = 4096,
    window_hz: Optional[float] = None,
) -> SpectrumReport:
    """Welch PSD and harmonic levels around ``n * delta_f``.

    Args:
        sig: Signal to analyse, at least ``2**14`` samples
        delta_f: Fundamental offset
        max_order: Highest harmonic order to report (orders beyond Nyquist
            are skipped)
        nperseg: Welch segment length
        window_hz: Half-width of the peak search around each harmonic;
            defaults to ``delta_f / 4``

    Returns:
        Spectrum report with levels in dB relative to the ``+delta_f`` peak

    Raises:
        ValueError: If the signal is shorter than ``2**14`` samples
    """
    if len(sig) < MIN_SPECTRUM_SAMPLES:
        raise ValueError(
            f"spectrum needs at least {MIN_SPECTRUM_SAMPLES} samples (got {len(sig)})"
        )
    freqs, psd = signal.welch(
        sig.samples,
        fs=sig.sample_rate,
        window="hann",
        nperseg=min(nperseg, len(sig)),
        detrend=False,
        return_onesided=False,
        scaling="spectrum",
    )
    freqs = np.fft.fftshift(freqs)
    power_db = 10 * np.log10(np.fft.fftshift(psd) + PSD_FLOOR)
    half_width = window_hz if window_hz is not None else delta_f / 4
    nyquist = sig.sample_rate / 2

    def peak(center: float) -> float:
        mask = np.abs(freqs - center) <= half_width
        return float(power_db[mask].max())

    reference = peak(delta_f)
    signed = {}
    for n in range(1, max_order + 1):
        if n * delta_f + half_width >= nyquist:
            break
        signed[n] = peak(n * delta_f) - reference
        signed[-n] = peak(-n * delta_f) - reference
    harmonics = {
        n: max(signed[n], signed[-n]) for n in range(2, max_order + 1) if n in signed
    }
    harmonics[1] = 0.0
    return SpectrumReport(
        freqs=freqs,
        power_db=power_db,
        delta_f=float(delta_f),
        signed_levels=signed,
        harmonic_levels=harmonics,
        mirror_level=signed[-1],
    )


def downconvert(sig: IqSignal, delta_f: float, p: ChirpParams) -> IqSignal:
    """Shift the backscatter sideband to DC and resample to ``osf * bw``."""
    shifted = sig.frequency_shift(-delta_f)
    ratio = Fraction(int(round(p.sample_rate)), int(round(sig.sample_rate)))
    if ratio == 1:
        return shifted
    samples = signal.resample_poly(shifted.samples, ratio.numerator, ratio.denominator)
    return IqSignal(samples, p.sample_rate)
