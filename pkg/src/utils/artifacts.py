"""Atomic artifact writing and CSV rendering for experiment results."""
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Sequence

from src.simulation.metrics import ConcurrencyReport, PerCurve, ScenarioCurve
from src.utils.logger import get_logger

logger = get_logger()


def write_atomic(
    path: Path, lines: Iterable[str], header: Sequence[str] = ()
) -> Path:
    """Write text lines to ``path`` via a temporary file and rename.

    Args:
        path: Destination file; parent directories are created
        lines: Body lines without trailing newlines
        header: Comment lines written first, usually the resolved config

    Returns:
        The destination path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            for line in list(header) + list(lines):
                f.write(line + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info(f"Wrote {path}")
    return path


def per_curve_lines(curves: Sequence[PerCurve]) -> List[str]:
    """One ``# curve=<label>`` block per curve with ``rssi_dbm,per,n`` rows."""
    lines = ["rssi_dbm,per,n"]
    for curve in curves:
        lines.append(f"# curve={curve.label}")
        lines += [f"{x:.2f},{per:.6f},{n}" for x, per, n in curve.csv_rows()]
    return lines


def per_threshold_lines(
    curves: Sequence[PerCurve], per_target: float = 0.1
) -> List[str]:
    lines = [f"# thresholds at PER {per_target:g}"]
    for curve in curves:
        threshold = curve.threshold(per_target)
        value = "none" if threshold is None else f"{threshold:.2f}"
        lines.append(f"# threshold,{curve.label},{value}")
    return lines


def scenario_lines(curve: ScenarioCurve) -> List[str]:
    lines = [f"{curve.x_name},rssi_dbm,best_setting", f"# curve={curve.label}"]
    for pt in curve.points:
        best = pt.best_setting.label() if pt.best_setting is not None else "none"
        lines.append(f"{curve.x(pt):.2f},{pt.rssi_dbm:.3f},{best}")
    return lines


def concurrency_lines(report: ConcurrencyReport) -> List[str]:
    lines = ["device,solo_per,concurrent_per,n"]
    for o in report.outcomes.values():
        lines.append(
            f"{o.device_id},{o.solo_per:.6f},{o.concurrent_per:.6f},{o.n_packets}"
        )
    return lines
