"""Backscatter waveform value types: frequency plans, switch states, spectra."""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

# Staircase levels per rail -> number of phasor states in the switch alphabet.
# Level count 2 is the two-level square-wave baseline.
STATES_PER_LEVELS: Dict[int, int] = {2: 4, 4: 8, 5: 10, 6: 12}


@dataclass(frozen=True)
class FrequencyPlan:
    """Piecewise-constant baseband frequency steps plus the backscatter offset.

    Attributes:
        steps: ``(duration_s, baseband_freq_hz)`` pairs in transmission order
        delta_f: Offset that moves the backscatter out of the source tone's band
        bw: Chirp bandwidth the plan was derived from
    """

    steps: Tuple[Tuple[float, float], ...]
    delta_f: float
    bw: float

    def __post_init__(self) -> None:
        if not self.delta_f > self.bw / 2:
            raise ValueError(
                f"delta_f must exceed bw/2 (got delta_f={self.delta_f}, bw={self.bw})"
            )
        for duration, freq in self.steps:
            if not duration > 0:
                raise ValueError(f"step duration must be positive (got {duration})")
            if abs(freq) > self.bw / 2 + 1e-9:
                raise ValueError(f"step frequency {freq} Hz outside +-bw/2")

    @property
    def duration(self) -> float:
        return sum(d for d, _ in self.steps)

    @property
    def frequencies(self) -> List[float]:
        return [f for _, f in self.steps]

    def __add__(self, other: "FrequencyPlan") -> "FrequencyPlan":
        if (other.delta_f, other.bw) != (self.delta_f, self.bw):
            raise ValueError("cannot join plans with different delta_f or bw")
        return FrequencyPlan(self.steps + other.steps, self.delta_f, self.bw)


@dataclass(frozen=True)
class SwitchState:
    """One impedance state of the backscatter switch network."""

    index: int
    complex_value: complex

    @staticmethod
    def alphabet(levels: int = 4) -> Tuple["SwitchState", ...]:
        """Unit phasors ``exp(j*(pi/M + 2*pi*k/M))`` for the ``M``-state network.

        The two-level baseline is scaled to the ``+-1 +-j`` square-wave corners.
        """
        n_states = STATES_PER_LEVELS[levels]
        scale = math.sqrt(2) if levels == 2 else 1.0
        phases = np.pi / n_states + 2 * np.pi * np.arange(n_states) / n_states
        return tuple(
            SwitchState(k, complex(scale * np.exp(1j * phase)))
            for k, phase in enumerate(phases)
        )


@dataclass(frozen=True, eq=False)
class MultiLevelWave:
    """State-index sequence of the switch, sampled at ``sample_rate``.

    ``gain`` rescales the staircase so its fundamental has unit amplitude.
    """

    states: np.ndarray
    sample_rate: float
    levels: int = 4
    gain: float = 1.0
    alphabet: Tuple[complex, ...] = field(init=False)

    def __post_init__(self) -> None:
        if self.levels not in STATES_PER_LEVELS:
            raise ValueError(f"no switch alphabet for {self.levels} levels")
        states = np.asarray(self.states, dtype=np.int64)
        states.setflags(write=False)
        object.__setattr__(self, "states", states)
        alphabet = tuple(s.complex_value for s in SwitchState.alphabet(self.levels))
        object.__setattr__(self, "alphabet", alphabet)
        if states.size and (states.min() < 0 or states.max() >= len(alphabet)):
            raise ValueError("state index outside the switch alphabet")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive (got {self.sample_rate})")

    def __len__(self) -> int:
        return int(self.states.size)

    @property
    def n_states(self) -> int:
        return len(self.alphabet)

    @property
    def values(self) -> np.ndarray:
        """Raw complex switch values, not normalised."""
        return np.asarray(self.alphabet)[self.states]

    def switch_states(self) -> List[SwitchState]:
        table = SwitchState.alphabet(self.levels)
        return [table[int(i)] for i in self.states]

    def transitions(self) -> np.ndarray:
        """Sample indices where the switch changes state."""
        return np.flatnonzero(np.diff(self.states)) + 1


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Welch PSD with harmonic levels relative to the ``+delta_f`` fundamental.

    ``signed_levels`` keys are signed harmonic orders (``-1`` is the mirror);
    ``harmonic_levels[n]`` is the stronger of the two sides for ``n >= 2``.
    """

    freqs: np.ndarray
    power_db: np.ndarray
    delta_f: float
    signed_levels: Dict[int, float]
    harmonic_levels: Dict[int, float]
    mirror_level: float

    @property
    def psd(self) -> List[Tuple[float, float]]:
        return list(zip(self.freqs.tolist(), self.power_db.tolist()))

    def csv_lines(self) -> List[str]:
        lines = ["freq_hz,power_db"]
        lines += [f"{f:.3f},{p:.3f}" for f, p in zip(self.freqs, self.power_db)]
        lines.append("# harmonic,n,db")
        for n in sorted(self.signed_levels):
            lines.append(f"# harmonic,{n},{self.signed_levels[n]:.3f}")
        return lines
