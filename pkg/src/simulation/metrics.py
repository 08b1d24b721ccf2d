"""Result containers for PER, range and concurrency experiments."""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.models.chirp import ChirpParams


@dataclass(frozen=True)
class PerPoint:
    """Packet error rate measured at one received power."""

    rssi_dbm: float
    per: float
    n_packets: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.per <= 1.0:
            raise ValueError(f"per must be within [0, 1] (got {self.per})")


@dataclass
class PerCurve:
    """PER waterfall for one chirp setting."""

    label: str
    points: List[PerPoint] = field(default_factory=list)

    def sorted_points(self) -> List[PerPoint]:
        return sorted(self.points, key=lambda pt: pt.rssi_dbm)

    def threshold(self, per_target: float = 0.1) -> Optional[float]:
        """RSSI where the curve first drops to ``per_target``, interpolated.

        Returns None if the curve never reaches the target.
        """
        pts = self.sorted_points()
        for prev, cur in zip([None] + pts[:-1], pts):
            if cur.per > per_target:
                continue
            if prev is None or prev.per == cur.per:
                return cur.rssi_dbm
            frac = (prev.per - per_target) / (prev.per - cur.per)
            return prev.rssi_dbm + frac * (cur.rssi_dbm - prev.rssi_dbm)
        return None

    def is_monotone(self, sigmas: float = 2.0) -> bool:
        """Non-increasing in RSSI within ``sigmas`` binomial standard errors."""
        pts = self.sorted_points()
        for lo, hi in zip(pts, pts[1:]):
            spread = np.sqrt(
                lo.per * (1 - lo.per) / lo.n_packets
                + hi.per * (1 - hi.per) / hi.n_packets
            )
            if hi.per - lo.per > sigmas * spread + 1e-12:
                return False
        return True

    def csv_rows(self) -> List[Tuple[float, float, int]]:
        return [(pt.rssi_dbm, pt.per, pt.n_packets) for pt in self.sorted_points()]

    def summary(self) -> str:
        threshold = self.threshold()
        lines = [
            f"\n{'='*60}",
            f"PER CURVE - {self.label}",
            f"{'='*60}",
        ]
        for pt in self.sorted_points():
            lines.append(
                f"RSSI {pt.rssi_dbm:8.2f} dBm   PER {pt.per * 100:6.2f}%   "
                f"({pt.n_packets} packets)"
            )
        lines.append(
            "Threshold (10% PER): "
            + (f"{threshold:.2f} dBm" if threshold is not None else "not reached")
        )
        lines.append(f"{'='*60}\n")
        return "\n".join(lines)


@dataclass(frozen=True)
class ScenarioPoint:
    """Predicted RSSI at one geometry and the fastest setting that decodes it."""

    d1_m: float
    d2_m: float
    rssi_dbm: float
    best_setting: Optional[ChirpParams]

    @property
    def decodable(self) -> bool:
        return self.best_setting is not None


@dataclass
class ScenarioCurve:
    """Range-scenario prediction along a swept distance."""

    label: str
    x_name: str
    points: List[ScenarioPoint] = field(default_factory=list)

    def x(self, pt: ScenarioPoint) -> float:
        return pt.d1_m if self.x_name == "d1_m" else pt.d2_m

    def min_point(self) -> ScenarioPoint:
        return min(self.points, key=lambda pt: pt.rssi_dbm)

    def max_decodable(self) -> Optional[float]:
        """Largest swept distance that still decodes at some setting."""
        reach = [self.x(pt) for pt in self.points if pt.decodable]
        return max(reach) if reach else None

    def summary(self) -> str:
        lines = [f"\n{'='*60}", f"RANGE - {self.label}", f"{'='*60}"]
        for pt in self.points:
            rate = pt.best_setting.label() if pt.best_setting else "none"
            lines.append(
                f"{self.x_name}={self.x(pt):9.1f}   "
                f"RSSI {pt.rssi_dbm:8.2f} dBm   {rate}"
            )
        lines.append(f"{'='*60}\n")
        return "\n".join(lines)


@dataclass(frozen=True)
class DeviceOutcome:
    """Solo and concurrent PER of one device."""

    device_id: str
    solo_per: float
    concurrent_per: float
    n_packets: int

    @property
    def delta_points(self) -> float:
        """PER difference in percentage points."""
        return abs(self.concurrent_per - self.solo_per) * 100


@dataclass
class ConcurrencyReport:
    outcomes: Dict[str, DeviceOutcome] = field(default_factory=dict)

    def max_delta_points(self) -> float:
        return max((o.delta_points for o in self.outcomes.values()), default=0.0)

    def summary(self) -> str:
        lines = [f"\n{'='*60}", "CONCURRENT TRANSMISSIONS", f"{'='*60}"]
        for o in self.outcomes.values():
            lines.append(
                f"{o.device_id:<10} solo {o.solo_per * 100:6.2f}%   "
                f"concurrent {o.concurrent_per * 100:6.2f}%   "
                f"delta {o.delta_points:5.2f} pts"
            )
        lines.append(f"{'='*60}\n")
        return "\n".join(lines)
