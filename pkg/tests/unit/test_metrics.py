"""Unit tests for the result containers."""
import pytest

from src.models.chirp import ChirpParams
from src.simulation.metrics import (
    ConcurrencyReport,
    DeviceOutcome,
    PerCurve,
    PerPoint,
    ScenarioCurve,
    ScenarioPoint,
)


def _curve(pairs, n=100):
    return PerCurve("test", [PerPoint(r, p, n) for r, p in pairs])


class TestPerPoint:
    """Test cases for PerPoint."""

    def test_per_range(self) -> None:
        with pytest.raises(ValueError, match="per"):
            PerPoint(-120.0, 1.5, 10)


class TestPerCurve:
    """Test cases for PerCurve."""

    def test_threshold_interpolates(self) -> None:
        """Linear interpolation between the points bracketing 10%."""
        curve = _curve([(-130.0, 1.0), (-126.0, 0.3), (-124.0, 0.0)])
        assert curve.threshold() == pytest.approx(-126.0 + 2.0 * (0.2 / 0.3))

    def test_threshold_on_point(self) -> None:
        curve = _curve([(-130.0, 0.5), (-128.0, 0.1)])
        assert curve.threshold() == pytest.approx(-128.0)

    def test_threshold_unsorted_input(self) -> None:
        curve = _curve([(-124.0, 0.0), (-130.0, 1.0), (-126.0, 0.3)])
        assert curve.threshold() == pytest.approx(-124.6667, abs=1e-3)

    def test_never_reached(self) -> None:
        assert _curve([(-130.0, 1.0), (-128.0, 0.6)]).threshold() is None

    def test_first_point_already_good(self) -> None:
        assert _curve([(-100.0, 0.0), (-90.0, 0.0)]).threshold() == -100.0

    def test_monotone(self) -> None:
        assert _curve([(-130.0, 1.0), (-128.0, 0.5), (-126.0, 0.05)]).is_monotone()

    def test_noise_tolerated(self) -> None:
        """A bump within two standard errors still counts as monotone."""
        assert _curve([(-128.0, 0.50), (-126.0, 0.55)]).is_monotone()

    def test_rise_detected(self) -> None:
        assert not _curve([(-128.0, 0.1), (-126.0, 0.9)]).is_monotone()

    def test_summary(self) -> None:
        text = _curve([(-130.0, 1.0), (-126.0, 0.0)]).summary()
        assert "PER CURVE - test" in text
        assert "Threshold (10% PER)" in text


class TestScenarioCurve:
    """Test cases for range predictions."""

    def test_reach_and_minimum(self, sf7: ChirpParams) -> None:
        curve = ScenarioCurve(
            "walk",
            "d2_m",
            [
                ScenarioPoint(1.0, 100.0, -110.0, sf7),
                ScenarioPoint(1.0, 500.0, -125.0, sf7),
                ScenarioPoint(1.0, 900.0, -150.0, None),
            ],
        )
        assert curve.max_decodable() == 500.0
        assert curve.min_point().d2_m == 900.0
        assert "none" in curve.summary()

    def test_nothing_decodes(self) -> None:
        curve = ScenarioCurve("far", "d1_m", [ScenarioPoint(9e3, 9e3, -200.0, None)])
        assert curve.max_decodable() is None


class TestConcurrencyReport:
    """Test cases for concurrency outcomes."""

    def test_delta_points(self) -> None:
        report = ConcurrencyReport(
            {
                "a": DeviceOutcome("a", 0.01, 0.02, 200),
                "b": DeviceOutcome("b", 0.05, 0.035, 200),
            }
        )
        assert report.outcomes["a"].delta_points == pytest.approx(1.0)
        assert report.max_delta_points() == pytest.approx(1.5)
        assert "CONCURRENT TRANSMISSIONS" in report.summary()

    def test_empty(self) -> None:
        assert ConcurrencyReport().max_delta_points() == 0.0
