"""Link budget and channel configuration value types."""
from dataclasses import dataclass, replace
from typing import Optional


@dataclass(frozen=True)
class LinkBudget:
    """Two-hop geometry and RF parameters of a source -> tag -> receiver link.

    Defaults: 30 dBm into a 6 dBi source patch, 0 dBi tag and receiver
    antennas, 4 dB switch-network loss, 905 MHz carrier.
    """

    tx_power_dbm: float = 30.0
    src_antenna_gain_dbi: float = 6.0
    tag_antenna_gain_dbi: float = 0.0
    rx_antenna_gain_dbi: float = 0.0
    switch_loss_db: float = 4.0
    excess_loss_db: float = 0.0
    carrier_freq_hz: float = 905e6
    d1_m: float = 1.0
    d2_m: float = 1.0

    def __post_init__(self) -> None:
        if not self.d1_m > 0:
            raise ValueError(f"d1_m must be positive (got {self.d1_m})")
        if not self.d2_m > 0:
            raise ValueError(f"d2_m must be positive (got {self.d2_m})")
        if self.switch_loss_db < 0:
            raise ValueError(f"switch_loss_db must be >= 0 (got {self.switch_loss_db})")
        if not self.carrier_freq_hz > 0:
            raise ValueError(
                f"carrier_freq_hz must be positive (got {self.carrier_freq_hz})"
            )

    def with_distances(self, d1_m: float, d2_m: float) -> "LinkBudget":
        return replace(self, d1_m=d1_m, d2_m=d2_m)

    def with_excess_loss(self, excess_loss_db: float) -> "LinkBudget":
        return replace(self, excess_loss_db=excess_loss_db)


@dataclass(frozen=True)
class Interferer:
    """Single-tone interferer at an offset from the LoRa channel centre."""

    offset_hz: float
    power_dbm: float


@dataclass(frozen=True)
class FrontendConfig:
    """Receiver channel filter.

    Attributes:
        k_bw: Filter width in multiples of the chirp bandwidth
        stopband_db: Stopband rejection
        enabled: Pass everything through when False
    """

    k_bw: float = 4.0
    stopband_db: float = 50.0
    enabled: bool = True

    def __post_init__(self) -> None:
        if not self.k_bw >= 1:
            raise ValueError(f"k_bw must be >= 1 (got {self.k_bw})")
        if not self.stopband_db > 0:
            raise ValueError(f"stopband_db must be positive (got {self.stopband_db})")


@dataclass(frozen=True)
class ChannelConfig:
    """Receiver noise, interference and randomness settings."""

    noise_figure_db: float = 6.0
    interferer: Optional[Interferer] = None
    rng_seed: int = 0
    noise_enabled: bool = True
    frontend: FrontendConfig = FrontendConfig()

    def __post_init__(self) -> None:
        if self.noise_figure_db < 0:
            raise ValueError(
                f"noise_figure_db must be >= 0 (got {self.noise_figure_db})"
            )

    def with_seed(self, rng_seed: int) -> "ChannelConfig":
        return replace(self, rng_seed=rng_seed)

    def with_interferer(self, interferer: Optional[Interferer]) -> "ChannelConfig":
        return replace(self, interferer=interferer)
