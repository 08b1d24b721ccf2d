"""Concurrent tags separated by channel or spreading factor."""
import pytest

from src.simulation.concurrent import (
    ConcurrentDevice,
    ConcurrentExperiment,
    common_osf,
    offset_devices,
    simulate_concurrent,
)


class TestDeviceChecks:
    """Device sets the superposition cannot separate are rejected."""

    def test_empty(self) -> None:
        with pytest.raises(ValueError, match="at least one"):
            ConcurrentExperiment([])

    def test_duplicate_ids(self) -> None:
        devices = [
            ConcurrentDevice("a", sf=7, offset_hz=1e6),
            ConcurrentDevice("a", sf=8, offset_hz=1e6),
        ]
        with pytest.raises(ValueError, match="unique"):
            ConcurrentExperiment(devices)

    def test_mixed_bandwidth(self) -> None:
        devices = [
            ConcurrentDevice("a", sf=7, offset_hz=1e6),
            ConcurrentDevice("b", sf=7, offset_hz=2e6, bw=250000),
        ]
        with pytest.raises(ValueError, match="bandwidth"):
            ConcurrentExperiment(devices)

    def test_same_channel_same_sf(self) -> None:
        with pytest.raises(ValueError, match="differ"):
            ConcurrentExperiment(offset_devices([1e6, 1e6]))

    def test_common_osf(self) -> None:
        devices = offset_devices([750e3, 1e6])
        assert common_osf(devices, 875e3) == 16
        assert common_osf(offset_devices([0.0, 4e6]), 2e6) == 128


@pytest.mark.integration
@pytest.mark.slow
class TestConcurrentDecoding:
    """PER with neighbours transmitting stays close to the solo baseline."""

    @pytest.mark.timeout(900)
    def test_adjacent_channels(self) -> None:
        report = simulate_concurrent(offset_devices([750e3, 1e6]), n_packets=100)
        assert set(report.outcomes) == {"dev0", "dev1"}
        assert report.max_delta_points() < 2.0

    @pytest.mark.timeout(1800)
    def test_orthogonal_spreading_factors(self) -> None:
        """SF7 and SF12 share a channel."""
        devices = [
            ConcurrentDevice("fast", sf=7, offset_hz=1e6),
            ConcurrentDevice("slow", sf=12, offset_hz=1e6),
        ]
        report = simulate_concurrent(devices, n_packets=40, seed=3)
        assert report.max_delta_points() < 5.0

    @pytest.mark.timeout(1800)
    def test_eight_adjacent_channels(self) -> None:
        """Eight tags on neighbouring 250 kHz-spaced channels."""
        offsets = [750e3 + 250e3 * k for k in range(8)]
        report = simulate_concurrent(offset_devices(offsets), n_packets=100, seed=5)
        assert len(report.outcomes) == 8
        assert report.max_delta_points() < 2.0
