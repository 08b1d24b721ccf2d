"""Deployment-range scenarios over the two-hop link budget."""
from typing import Optional, Sequence

import numpy as np

from src.channel.link import backscatter_rssi
from src.channel.sensitivity import SensitivityTable
from src.models.link import LinkBudget
from src.simulation.metrics import ScenarioCurve, ScenarioPoint
from src.utils.logger import get_logger

logger = get_logger()


def scenario1(
    d_total: float,
    positions: Optional[Sequence[float]] = None,
    budget: Optional[LinkBudget] = None,
    table: Optional[SensitivityTable] = None,
    n_positions: int = 19,
) -> ScenarioCurve:
    """Move the tag along the line between source and receiver.

    Args:
        d_total: Source-to-receiver separation in metres
        positions: Tag distances ``d1`` from the source; evenly spaced
            interior points when None
        budget: Link budget (distances are overridden)
        table: Sensitivity table used to annotate the fastest usable setting
        n_positions: Number of default positions

    Returns:
        RSSI versus ``d1``; U-shaped with its minimum at ``d_total / 2``
    """
    budget = budget or LinkBudget()
    table = table or SensitivityTable.all_rates()
    if positions is None:
        positions = np.linspace(0, d_total, n_positions + 2)[1:-1].tolist()
    curve = ScenarioCurve(label=f"scenario1_{d_total:g}m", x_name="d1_m")
    for d1 in positions:
        if not 0 < d1 < d_total:
            raise ValueError(f"tag position {d1} m must lie inside (0, {d_total}) m")
        rssi = backscatter_rssi(budget.with_distances(d1, d_total - d1))
        curve.points.append(
            ScenarioPoint(d1, d_total - d1, rssi, table.best_setting(rssi))
        )
    logger.info(
        f"Scenario 1 at {d_total:g} m: minimum RSSI "
        f"{curve.min_point().rssi_dbm:.1f} dBm at d1={curve.min_point().d1_m:.1f} m"
    )
    return curve


def scenario2(
    d1_fixed: float,
    d2_values: Sequence[float],
    budget: Optional[LinkBudget] = None,
    table: Optional[SensitivityTable] = None,
) -> ScenarioCurve:
    """Keep the tag near the source and move the receiver away.

    Returns:
        RSSI versus ``d2``, monotonically decreasing
    """
    budget = budget or LinkBudget()
    table = table or SensitivityTable.all_rates()
    curve = ScenarioCurve(label=f"scenario2_d1_{d1_fixed:g}m", x_name="d2_m")
    for d2 in sorted(d2_values):
        rssi = backscatter_rssi(budget.with_distances(d1_fixed, d2))
        curve.points.append(ScenarioPoint(d1_fixed, d2, rssi, table.best_setting(rssi)))
    reach = curve.max_decodable()
    logger.info(
        f"Scenario 2 with d1={d1_fixed:g} m: decodable up to "
        + (f"{reach:.0f} m" if reach is not None else "nowhere on the grid")
    )
    return curve
