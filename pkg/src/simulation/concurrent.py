"""Concurrent backscatter transmissions on distinct channels or spreading factors."""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.channel.frontend import receiver_frontend
from src.channel.link import apply_channel, dbm_to_mw, noise_floor_dbm
from src.models.chirp import ChirpParams
from src.models.frame import LoraFrame
from src.models.iq_signal import IqSignal
from src.models.link import ChannelConfig, FrontendConfig, LinkBudget
from src.simulation.metrics import ConcurrencyReport, DeviceOutcome
from src.simulation.simulator import PAYLOAD_LEN, RX_OSF, decode_ok, packet_signal
from src.utils.logger import get_logger

logger = get_logger()

MIN_COMMON_OSF = 16
# Narrower than the single-link default so a neighbour 250 kHz away is
# rejected before decimation.
CONCURRENT_FRONTEND = FrontendConfig(k_bw=1.5, stopband_db=50.0)


@dataclass(frozen=True)
class ConcurrentDevice:
    """A tag taking part in a concurrent run.

    Attributes:
        id: Device identifier
        sf: Spreading factor
        offset_hz: Carrier offset of the tag's channel from the source tone
        bw: Chirp bandwidth in Hz
        cr: Code rate
        snr_db: In-band SNR of this tag at the receiver
    """

    id: str
    sf: int
    offset_hz: float
    bw: int = 125000
    cr: Fraction = Fraction(4, 8)
    snr_db: float = 20.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "cr", self.params.cr)

    @property
    def params(self) -> ChirpParams:
        return ChirpParams(sf=self.sf, bw=self.bw, cr=self.cr)


def _check_devices(devices: Sequence[ConcurrentDevice]) -> None:
    if not devices:
        raise ValueError("at least one device is required")
    if len({d.id for d in devices}) != len(devices):
        raise ValueError("device ids must be unique")
    if len({d.bw for d in devices}) != 1:
        raise ValueError("concurrent devices must share one bandwidth")
    keys = [(d.offset_hz, d.sf) for d in devices]
    if len(set(keys)) != len(keys):
        raise ValueError("devices must differ pairwise in channel or spreading factor")


def common_osf(devices: Sequence[ConcurrentDevice], centre_hz: float) -> int:
    """Oversampling that holds every shifted channel with a factor-two margin."""
    bw = devices[0].bw
    span = max(abs(d.offset_hz - centre_hz) for d in devices) + bw / 2
    needed = 4 * span / bw
    return max(MIN_COMMON_OSF, 1 << math.ceil(math.log2(max(needed, 1.0))))


def _active_power_dbm(sig: IqSignal) -> float:
    active = np.abs(sig.samples) > 0
    return float(10 * np.log10(np.mean(np.abs(sig.samples[active]) ** 2)))


class ConcurrentExperiment:
    """Superposes several tags' packets and decodes each one on its own channel.

    Every trial is decoded twice from the same noise realisation: once with
    all tags present and once with only the tag under test, which is the
    solo baseline.
    """

    def __init__(
        self,
        devices: Sequence[ConcurrentDevice],
        n_packets: int = 200,
        seed: int = 0,
        noise_figure_db: float = 6.0,
        frontend: FrontendConfig = CONCURRENT_FRONTEND,
        payload_len: int = PAYLOAD_LEN,
    ) -> None:
        _check_devices(devices)
        if n_packets < 1:
            raise ValueError(f"n_packets must be positive (got {n_packets})")
        self.devices = list(devices)
        self.n_packets = n_packets
        self.seed = seed
        self.noise_figure_db = noise_figure_db
        self.frontend = frontend
        self.payload_len = payload_len
        self.centre_hz = float(np.mean([d.offset_hz for d in self.devices]))
        self.osf = common_osf(self.devices, self.centre_hz)
        self.bw = self.devices[0].bw

    def _device_signal(
        self, device: ConcurrentDevice, rng: np.random.Generator
    ) -> Tuple[bytes, IqSignal]:
        payload = rng.bytes(self.payload_len)
        frame = LoraFrame(params=device.params.with_osf(self.osf), payload=payload)
        shift = device.offset_hz - self.centre_hz
        sig = packet_signal(frame, rng).frequency_shift(shift)
        rssi = noise_floor_dbm(self.bw, self.noise_figure_db) + device.snr_db
        gain = math.sqrt(dbm_to_mw(rssi)) / 10 ** (_active_power_dbm(sig) / 20)
        return payload, sig.scaled(gain)

    def _decode(self, rx: IqSignal, device: ConcurrentDevice, payload: bytes) -> bool:
        p = device.params.with_osf(RX_OSF)
        own = rx.frequency_shift(self.centre_hz - device.offset_hz)
        own = receiver_frontend(own, p, self.frontend, output_osf=RX_OSF)
        return decode_ok(own, p, payload)

    def run(self) -> ConcurrencyReport:
        """Run all trials.

        Returns:
            Solo and concurrent PER for every device
        """
        rng = np.random.default_rng(self.seed)
        cfg = ChannelConfig(
            noise_figure_db=self.noise_figure_db, frontend=self.frontend
        )
        budget = LinkBudget()
        solo_fail = {d.id: 0 for d in self.devices}
        conc_fail = {d.id: 0 for d in self.devices}
        logger.info(
            f"Concurrent run: {len(self.devices)} devices, {self.n_packets} trials, "
            f"fs={self.osf * self.bw / 1e6:g} MHz"
        )
        for _ in range(self.n_packets):
            parts = [self._device_signal(d, rng) for d in self.devices]
            noise_cfg = cfg.with_seed(int(rng.integers(2**63)))
            composite = parts[0][1]
            for _, sig in parts[1:]:
                composite = composite + sig
            n = len(composite)
            rx_all = apply_channel(
                composite, noise_cfg, budget, rssi_dbm=_active_power_dbm(composite)
            )
            for device, (payload, sig) in zip(self.devices, parts):
                solo = IqSignal(np.pad(sig.samples, (0, n - len(sig))), sig.sample_rate)
                # Same noise realisation with the other tags silenced.
                rx_solo = apply_channel(
                    solo, noise_cfg, budget, rssi_dbm=_active_power_dbm(solo)
                )
                if not self._decode(rx_solo, device, payload):
                    solo_fail[device.id] += 1
                if not self._decode(rx_all, device, payload):
                    conc_fail[device.id] += 1

        report = ConcurrencyReport(
            outcomes={
                d.id: DeviceOutcome(
                    device_id=d.id,
                    solo_per=solo_fail[d.id] / self.n_packets,
                    concurrent_per=conc_fail[d.id] / self.n_packets,
                    n_packets=self.n_packets,
                )
                for d in self.devices
            }
        )
        logger.debug(report.summary())
        return report


def simulate_concurrent(
    devices: Sequence[ConcurrentDevice],
    n_packets: int = 200,
    seed: int = 0,
    noise_figure_db: float = 6.0,
    frontend: Optional[FrontendConfig] = None,
) -> ConcurrencyReport:
    """Per-device PER with and without the other devices transmitting."""
    return ConcurrentExperiment(
        devices,
        n_packets=n_packets,
        seed=seed,
        noise_figure_db=noise_figure_db,
        frontend=frontend or CONCURRENT_FRONTEND,
    ).run()


def offset_devices(
    offsets_hz: Sequence[float], sf: int = 7, snr_db: float = 20.0
) -> List[ConcurrentDevice]:
    """Same-sf tags on the given channel offsets, named ``dev0``, ``dev1``..."""
    return [
        ConcurrentDevice(id=f"dev{i}", sf=sf, offset_hz=off, snr_db=snr_db)
        for i, off in enumerate(offsets_hz)
    ]
