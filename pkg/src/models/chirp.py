"""Chirp parameter and symbol value types."""
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Union

SPREADING_FACTORS: Tuple[int, ...] = (6, 7, 8, 9, 10, 11, 12)
BANDWIDTHS_HZ: Tuple[int, ...] = (
    7800,
    10400,
    20800,
    31250,
    62500,
    125000,
    250000,
    500000,
)
CODE_RATES: Tuple[Fraction, ...] = (
    Fraction(4, 5),
    Fraction(4, 6),
    Fraction(4, 7),
    Fraction(4, 8),
)


def parse_code_rate(value: Union[str, Fraction, float]) -> Fraction:
    """Parse a code rate such as ``"4/8"`` into a non-reduced-safe Fraction.

    Args:
        value: ``"4/x"`` string, Fraction or float

    Returns:
        Code rate as a Fraction

    Raises:
        ValueError: If the value is not one of the four LoRa code rates
    """
    if isinstance(value, str):
        rate = Fraction(value.strip())
    else:
        rate = Fraction(value).limit_denominator(8)
    if rate not in CODE_RATES:
        raise ValueError(f"cr must be one of 4/5, 4/6, 4/7, 4/8 (got {value})")
    return rate


def code_rate_label(cr: Fraction) -> str:
    """Return the ``4/n`` spelling of a code rate (Fraction reduces 4/8 to 1/2)."""
    return f"4/{round(4 / cr)}"


@dataclass(frozen=True)
class ChirpParams:
    """Chirp spread spectrum parameters.

    Fixes every rate and duration formula: ``2**sf`` chips per symbol, chip
    rate ``bw`` and ``osf`` samples per chip.
    """

    sf: int
    bw: int
    cr: Fraction = Fraction(4, 8)
    osf: int = 1

    def __post_init__(self) -> None:
        if self.sf not in SPREADING_FACTORS:
            raise ValueError(f"sf must be in {SPREADING_FACTORS} (got {self.sf})")
        if self.bw not in BANDWIDTHS_HZ:
            raise ValueError(f"bw must be in {BANDWIDTHS_HZ} (got {self.bw})")
        object.__setattr__(self, "cr", parse_code_rate(self.cr))
        if not isinstance(self.osf, int) or self.osf < 1:
            raise ValueError(f"osf must be an integer >= 1 (got {self.osf})")

    @property
    def chips(self) -> int:
        """Chips per symbol, N = 2**sf."""
        return 1 << self.sf

    @property
    def samples_per_symbol(self) -> int:
        return self.osf * self.chips

    @property
    def sample_rate(self) -> float:
        return float(self.osf * self.bw)

    @property
    def codeword_bits(self) -> int:
        """Coded bits per 4-bit data nibble (5..8)."""
        return round(4 / self.cr)

    def with_osf(self, osf: int) -> "ChirpParams":
        return ChirpParams(sf=self.sf, bw=self.bw, cr=self.cr, osf=osf)

    def label(self) -> str:
        return f"sf{self.sf}_bw{self.bw}_cr{code_rate_label(self.cr)}"

    def __str__(self) -> str:
        return f"SF{self.sf}/{self.bw / 1000:g}kHz/CR{code_rate_label(self.cr)}"


@dataclass(frozen=True)
class ChirpSymbol:
    """One CSS symbol: a cyclic shift of the base chirp, in chips."""

    value: int

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError(f"symbol value must be non-negative (got {self.value})")

    def check(self, params: ChirpParams) -> None:
        """Raise ValueError if the value does not fit the spreading factor."""
        if self.value >= params.chips:
            raise ValueError(
                f"symbol value {self.value} out of range for sf={params.sf}"
            )


@dataclass(frozen=True)
class DemodResult:
    """Outcome of demodulating one symbol."""

    value: int
    peak_mag: float
    peak_to_mean: float
