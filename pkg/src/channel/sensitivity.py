"""Simulated receiver sensitivity per chirp setting."""
from typing import Dict, List, Optional, Sequence, Tuple

from src.channel.link import noise_floor_dbm
from src.models.chirp import ChirpParams, parse_code_rate
from src.phy.css_core import bit_rate, raw_bit_rate, required_snr_db
from src.phy.lora_frame import rate_settings

# Receiver characterisation settings, 21.8 kbps down to 45 bps.
CHARACTERIZATION_SETTINGS: Tuple[ChirpParams, ...] = (
    ChirpParams(sf=7, bw=500000, cr=parse_code_rate("4/5")),
    ChirpParams(sf=8, bw=250000, cr=parse_code_rate("4/8")),
    ChirpParams(sf=9, bw=125000, cr=parse_code_rate("4/8")),
    ChirpParams(sf=10, bw=125000, cr=parse_code_rate("4/8")),
    ChirpParams(sf=11, bw=62500, cr=parse_code_rate("4/8")),
    ChirpParams(sf=12, bw=62500, cr=parse_code_rate("4/8")),
    ChirpParams(sf=12, bw=31250, cr=parse_code_rate("4/8")),
)

DEFAULT_TARGET_SER = 0.01


def sensitivity_dbm(
    p: ChirpParams,
    noise_figure_db: float = 6.0,
    target_ser: float = DEFAULT_TARGET_SER,
) -> float:
    """Lowest received power at which symbols decode at ``target_ser``."""
    return noise_floor_dbm(p.bw, noise_figure_db) + required_snr_db(
        p.sf, target_ser=target_ser
    )


class SensitivityTable:
    """Sensitivity lookup over a set of chirp settings.

    Settings are kept sorted fastest first, so the first one that clears a
    given RSSI is the highest usable bit rate.
    """

    def __init__(
        self,
        settings: Sequence[ChirpParams] = CHARACTERIZATION_SETTINGS,
        noise_figure_db: float = 6.0,
        target_ser: float = DEFAULT_TARGET_SER,
    ) -> None:
        self.noise_figure_db = noise_figure_db
        self.target_ser = target_ser
        self.settings: List[ChirpParams] = sorted(
            settings, key=lambda p: (bit_rate(p), raw_bit_rate(p)), reverse=True
        )
        self._levels: Dict[ChirpParams, float] = {
            p: sensitivity_dbm(p, noise_figure_db, target_ser) for p in self.settings
        }

    @classmethod
    def all_rates(
        cls, noise_figure_db: float = 6.0, target_ser: float = DEFAULT_TARGET_SER
    ) -> "SensitivityTable":
        """Table over every bandwidth, spreading factor and code rate."""
        return cls(rate_settings(), noise_figure_db, target_ser)

    def sensitivity(self, p: ChirpParams) -> float:
        if p not in self._levels:
            self._levels[p] = sensitivity_dbm(
                p, self.noise_figure_db, self.target_ser
            )
        return self._levels[p]

    def best_setting(self, rssi_dbm: float) -> Optional[ChirpParams]:
        """Fastest setting whose sensitivity the RSSI clears, or None."""
        for p in self.settings:
            if rssi_dbm >= self._levels[p]:
                return p
        return None

    def most_sensitive(self) -> float:
        return min(self._levels.values())

    def __repr__(self) -> str:
        return (
            f"SensitivityTable({len(self.settings)} settings, "
            f"NF={self.noise_figure_db} dB)"
        )
