"""Packet error rate experiments over the simulated backscatter link."""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.channel.frontend import receiver_frontend
from src.channel.link import add_folded_interferer, apply_channel, is_folded
from src.channel.sensitivity import CHARACTERIZATION_SETTINGS, sensitivity_dbm
from src.errors import FrameError
from src.models.chirp import ChirpParams
from src.models.frame import LoraFrame
from src.models.iq_signal import IqSignal
from src.models.link import ChannelConfig, Interferer, LinkBudget
from src.phy.lora_frame import build_frame, parse_frame, render_frame
from src.simulation.metrics import PerCurve, PerPoint
from src.synth.base_synth import BackscatterSynth
from src.utils.logger import get_logger

logger = get_logger()

MIN_PACKETS = 100
PAYLOAD_LEN = 8
MAX_INTERFERER_OSF = 64
# Demodulator oversampling once a channel filter is in the path.
RX_OSF = 4


def interferer_osf(
    p: ChirpParams, interferer: Optional[Interferer], base_osf: int
) -> int:
    """Oversampling that places the interferer strictly inside the simulated band.

    A blocker that would need more than ``MAX_INTERFERER_OSF`` is left beyond
    Nyquist at ``base_osf``; the receiver then adds only its filtered residual.
    """
    if interferer is None:
        return base_osf
    needed = 2.5 * abs(interferer.offset_hz) / p.bw
    osf = max(base_osf, 1 << max(0, math.ceil(math.log2(max(needed, 1.0)))))
    return osf if osf <= MAX_INTERFERER_OSF else base_osf


def packet_signal(
    frame: LoraFrame,
    rng: np.random.Generator,
    synth: Optional[BackscatterSynth] = None,
) -> IqSignal:
    """Frame waveform with a random whole-chip lead-in and one silent symbol after.

    The lead-in is silence (noise only once the channel is applied), so the
    receiver has to find the preamble at an unknown chip offset.
    """
    p = frame.params
    if synth is not None:
        sig = synth.baseband(frame)
    else:
        sig = render_frame(build_frame(frame))
    lead = int(rng.integers(0, p.chips)) * p.osf
    padded = np.zeros(lead + len(sig) + p.samples_per_symbol, dtype=np.complex128)
    padded[lead : lead + len(sig)] = sig.samples
    return IqSignal(padded, sig.sample_rate)


def decode_ok(
    rx: IqSignal, p: ChirpParams, payload: bytes, crc_present: bool = True
) -> bool:
    """True when the frame parses, passes its CRC and carries ``payload``."""
    try:
        parsed = parse_frame(rx, p, len(payload), crc_present=crc_present)
    except FrameError as e:
        logger.debug(f"Packet lost: {e.__class__.__name__}: {e}")
        return False
    return parsed.payload == payload


class PerExperiment:
    """Sends packets through channel, frontend and parser at a set of RSSI points.

    Each point draws from its own stream seeded by ``[seed, point index]``, so
    results do not depend on worker count or scheduling.
    """

    def __init__(
        self,
        params: ChirpParams,
        channel: Optional[ChannelConfig] = None,
        budget: Optional[LinkBudget] = None,
        n_packets: int = 1000,
        payload_len: int = PAYLOAD_LEN,
        seed: int = 0,
        osf: int = 1,
        max_workers: Optional[int] = None,
        synth: Optional[BackscatterSynth] = None,
    ) -> None:
        """Initialize the experiment.

        Args:
            params: Chirp setting under test (its ``osf`` is ignored)
            channel: Noise, interferer and frontend settings
            budget: Link budget; only its structure matters since every point
                sets the received power directly
            n_packets: Packets per RSSI point, at least 100
            payload_len: Payload bytes per packet (a CRC-16 is appended)
            seed: Master seed
            osf: Oversampling of the simulated channel; raised automatically
                to fit an interferer
            max_workers: Thread pool size, one point per task
            synth: Render packets through a backscatter synthesizer instead
                of the ideal LoRa waveform

        Raises:
            ValueError: If ``n_packets`` is below 100
        """
        if n_packets < MIN_PACKETS:
            raise ValueError(f"n_packets must be >= {MIN_PACKETS} (got {n_packets})")
        self.channel = channel or ChannelConfig()
        self.budget = budget or LinkBudget()
        self.n_packets = n_packets
        self.payload_len = payload_len
        self.seed = seed
        self.max_workers = max_workers
        self.synth = synth
        tx_osf = interferer_osf(params, self.channel.interferer, osf)
        self.tx_params = params.with_osf(tx_osf)
        self.rx_params = params.with_osf(min(tx_osf, RX_OSF))

    def run(self, rssi_points: Sequence[float]) -> PerCurve:
        """Measure PER at every RSSI point.

        Returns:
            PerCurve labelled with the chirp setting
        """
        label = self.rx_params.label()
        logger.info(
            f"PER sweep {self.rx_params}: {len(rssi_points)} points x "
            f"{self.n_packets} packets, channel osf={self.tx_params.osf}"
        )
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            points = list(
                executor.map(self._run_point, range(len(rssi_points)), rssi_points)
            )
        curve = PerCurve(label=label, points=points)
        logger.debug(curve.summary())
        return curve

    def receive(self, tx: IqSignal, cfg: ChannelConfig, rssi_dbm: float) -> IqSignal:
        """Channel, frontend and, for a blocker beyond the simulated band, its
        filtered residual.
        """
        folded = cfg.interferer is not None and is_folded(
            cfg.interferer, tx.sample_rate
        )
        channel_cfg = cfg.with_interferer(None) if folded else cfg
        rx = apply_channel(tx, channel_cfg, self.budget, rssi_dbm=rssi_dbm)
        rx = receiver_frontend(
            rx, self.rx_params, cfg.frontend, output_osf=self.rx_params.osf
        )
        return add_folded_interferer(rx, cfg) if folded else rx

    def _run_point(self, index: int, rssi_dbm: float) -> PerPoint:
        rng = np.random.default_rng([self.seed, index])
        failures = 0
        for _ in range(self.n_packets):
            payload = rng.bytes(self.payload_len)
            frame = LoraFrame(params=self.tx_params, payload=payload)
            tx = packet_signal(frame, rng, self.synth)
            cfg = self.channel.with_seed(int(rng.integers(2**63)))
            rx = self.receive(tx, cfg, rssi_dbm)
            if not decode_ok(rx, self.rx_params, payload):
                failures += 1
        point = PerPoint(
            rssi_dbm=float(rssi_dbm),
            per=failures / self.n_packets,
            n_packets=self.n_packets,
        )
        logger.info(
            f"{self.rx_params}: RSSI {rssi_dbm:.1f} dBm -> "
            f"PER {point.per * 100:.1f}%"
        )
        return point


def rssi_grid(
    p: ChirpParams,
    noise_figure_db: float = 6.0,
    below_db: float = 6.0,
    above_db: float = 4.0,
    step_db: float = 1.0,
) -> List[float]:
    """RSSI points bracketing the simulated sensitivity of ``p``."""
    centre = round(sensitivity_dbm(p, noise_figure_db))
    n = int(round((below_db + above_db) / step_db)) + 1
    return [centre - below_db + k * step_db for k in range(n)]


def run_per_experiment(
    p: ChirpParams,
    rssi_points: Sequence[float],
    cfg: Optional[ChannelConfig] = None,
    n_packets: int = 1000,
    seed: int = 0,
    budget: Optional[LinkBudget] = None,
    max_workers: Optional[int] = None,
    synth: Optional[BackscatterSynth] = None,
) -> PerCurve:
    """Functional wrapper around :class:`PerExperiment`."""
    experiment = PerExperiment(
        p,
        cfg,
        budget=budget,
        n_packets=n_packets,
        seed=seed,
        max_workers=max_workers,
        synth=synth,
    )
    return experiment.run(rssi_points)


def run_characterization(
    settings: Sequence[ChirpParams] = CHARACTERIZATION_SETTINGS,
    n_packets: int = 1000,
    seed: int = 0,
    noise_figure_db: float = 6.0,
    max_workers: Optional[int] = None,
    rssi_points: Optional[Sequence[float]] = None,
) -> List[PerCurve]:
    """PER waterfalls for the receiver characterisation settings.

    Each setting gets its own grid around its sensitivity unless
    ``rssi_points`` is given.
    """
    curves = []
    for index, p in enumerate(settings):
        cfg = ChannelConfig(noise_figure_db=noise_figure_db)
        curves.append(
            PerExperiment(
                p,
                cfg,
                n_packets=n_packets,
                seed=seed + index,
                max_workers=max_workers,
            ).run(rssi_points or rssi_grid(p, noise_figure_db))
        )
    return curves


def interference_sweep(
    p: ChirpParams,
    powers_dbm: Sequence[float],
    offset_hz: float = 1e6,
    rssi_points: Optional[Sequence[float]] = None,
    n_packets: int = 200,
    seed: int = 0,
    channel: Optional[ChannelConfig] = None,
) -> Dict[float, PerCurve]:
    """PER curves with an out-of-band tone at each interferer power.

    The same seed is used for every power so the curves differ only by the
    interferer. The default grid reaches far above sensitivity since a
    strong blocker can cost tens of dB.
    """
    base = channel or ChannelConfig()
    if rssi_points is None:
        rssi_points = rssi_grid(p, below_db=4.0, above_db=48.0, step_db=4.0)
    points = list(rssi_points)
    curves: Dict[float, PerCurve] = {}
    for power in powers_dbm:
        cfg = base.with_interferer(Interferer(offset_hz=offset_hz, power_dbm=power))
        curve = PerExperiment(p, cfg, n_packets=n_packets, seed=seed).run(points)
        curve.label = f"{p.label()}_int{power:g}dBm"
        curves[power] = curve
    return curves
