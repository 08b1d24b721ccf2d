"""Command-line runner for chirpscatter experiments.

Every experiment verb reads a ``section.key = value`` config, writes its CSV
artifact atomically with the resolved config echoed in the header and exits
0 on success, 2 on a validation error and 3 on a runtime failure.
"""
import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.channel.frontend import receiver_frontend
from src.channel.link import apply_channel
from src.channel.sensitivity import SensitivityTable, sensitivity_dbm
from src.errors import ChirpscatterError, ConfigError, CrcFail, FrameError
from src.models.chirp import ChirpParams
from src.models.frame import LoraFrame
from src.models.iq_signal import IqSignal
from src.models.link import ChannelConfig, LinkBudget
from src.phy import waveform_synth
from src.phy.lora_frame import build_frame, parse_frame, render_frame, symbol_values
from src.simulation.concurrent import simulate_concurrent
from src.simulation.mac_tdma import audit_transcript, simulate_rounds
from src.simulation.metrics import PerCurve
from src.simulation.scenarios import scenario1, scenario2
from src.simulation.simulator import (
    interference_sweep,
    packet_signal,
    rssi_grid,
    run_characterization,
    run_per_experiment,
)
from src.synth import SYNTH_KINDS, create_synth
from src.ui.colors import error, header, success, warning
from src.utils import artifacts
from src.utils.config_loader import EXPERIMENT_KINDS, ConfigLoader, ExperimentConfig
from src.utils.logger import bind_experiment, get_logger, setup_logger

logger = get_logger()

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
LOOPBACK_MARGIN_DB = 10.0


class RunFailure(ChirpscatterError):
    """An experiment ran but did not meet its success condition."""


def _resolve_in(cfg: ExperimentConfig, path: Path) -> Path:
    return path if path.is_absolute() else cfg.out_dir / path


def run_modulate(cfg: ExperimentConfig) -> List[Path]:
    """Render a frame to an IQ file and list its symbol values."""
    frame = LoraFrame(
        params=cfg.chirp,
        payload=cfg.option("io.payload"),
        preamble_len=cfg.option("io.preamble_len"),
    )
    symbols = build_frame(frame)
    kind = cfg.option("io.synth")
    if kind == "ideal":
        sig = render_frame(symbols)
    else:
        sig = create_synth(kind, cfg.option("io.delta_f")).synthesize(frame)
    iq_path = _resolve_in(cfg, cfg.option("io.iq_out"))
    iq_path.parent.mkdir(parents=True, exist_ok=True)
    sig.write(iq_path)
    lines = ["index,section,value"]
    for section in ("preamble", "sync", "payload"):
        for i, v in enumerate(symbol_values(getattr(symbols, section))):
            lines.append(f"{i},{section},{v}")
    header_lines = cfg.header_lines() + [f"# iq_file = {iq_path}"]
    print(f"{len(sig)} samples at {sig.sample_rate:g} Hz -> {iq_path}")
    return [artifacts.write_atomic(cfg.output_path, lines, header_lines)]


def run_demodulate(cfg: ExperimentConfig) -> List[Path]:
    """Parse a frame from an IQ file."""
    sig = IqSignal.read(_resolve_in(cfg, cfg.option("io.iq_in")))
    osf = sig.sample_rate / cfg.chirp.bw
    if not float(osf).is_integer():
        raise ConfigError(
            "chirp.bw", f"IQ rate {sig.sample_rate:g} Hz is not a multiple of bw"
        )
    p = cfg.chirp.with_osf(int(osf))
    try:
        parsed = parse_frame(
            sig, p, cfg.option("io.payload_len"), crc_present=cfg.option("io.crc")
        )
    except CrcFail as e:
        if e.frame is None:
            raise
        parsed = e.frame
    confidence = float(np.mean(parsed.confidence)) if parsed.confidence else 0.0
    lines = [
        "payload_hex,crc_ok,fec_ok,mean_confidence",
        f"{parsed.payload.hex()},{parsed.crc_ok},{parsed.fec_ok},{confidence:.3f}",
    ]
    path = artifacts.write_atomic(cfg.output_path, lines, cfg.header_lines())
    print(f"payload={parsed.payload.hex()} crc_ok={parsed.crc_ok}")
    if not parsed.crc_ok:
        raise RunFailure("decoded frame failed its CRC")
    return [path]


def run_spectrum(cfg: ExperimentConfig) -> List[Path]:
    """One spectrum CSV per staircase level count."""
    delta_f = cfg.option("spectrum.delta_f")
    rate = cfg.option("spectrum.sample_rate") or 64 * delta_f
    duration = cfg.option("spectrum.duration_s")
    paths = []
    stem = cfg.output_path.with_suffix("")
    for levels in cfg.option("spectrum.levels"):
        if levels == 2:
            sig = waveform_synth.square_exponent(delta_f, duration, rate)
        else:
            wave = waveform_synth.multilevel_exponent(delta_f, duration, rate, levels)
            sig = waveform_synth.backscatter_mix(0.0, wave)
        report = waveform_synth.spectrum(
            sig, delta_f, max_order=cfg.option("spectrum.max_order")
        )
        levels_text = ", ".join(
            f"{n}: {report.harmonic_levels[n]:.1f} dB"
            for n in sorted(report.harmonic_levels)
            if n in (3, 5, 7, 9)
        )
        print(f"levels={levels} mirror={report.mirror_level:.1f} dB {levels_text}")
        path = Path(f"{stem}_levels{levels}.csv")
        paths.append(
            artifacts.write_atomic(path, report.csv_lines(), cfg.header_lines())
        )
    return paths


def run_per_sweep(cfg: ExperimentConfig) -> List[Path]:
    """PER waterfalls, with or without an interferer sweep."""
    n_packets = cfg.option("sweep.n_packets")
    rssi_points = list(cfg.option("sweep.rssi_points")) or None
    workers = cfg.option("sweep.max_workers") or None
    powers = cfg.option("sweep.interferer_powers_dbm")
    curves: List[PerCurve]
    if powers:
        curves = list(
            interference_sweep(
                cfg.chirp,
                powers,
                offset_hz=cfg.option("sweep.interferer_offset_hz"),
                rssi_points=rssi_points,
                n_packets=n_packets,
                seed=cfg.seed,
                channel=cfg.channel,
            ).values()
        )
    elif cfg.option("sweep.settings") == "characterization":
        curves = run_characterization(
            n_packets=n_packets,
            seed=cfg.seed,
            noise_figure_db=cfg.channel.noise_figure_db,
            max_workers=workers,
            rssi_points=rssi_points,
        )
    elif cfg.option("sweep.settings") == "chirp":
        curves = [
            run_per_experiment(
                cfg.chirp,
                rssi_points or rssi_grid(cfg.chirp, cfg.channel.noise_figure_db),
                cfg.channel,
                n_packets=n_packets,
                seed=cfg.seed,
                budget=cfg.budget,
                max_workers=workers,
            )
        ]
    else:
        raise ConfigError("sweep.settings", "must be 'characterization' or 'chirp'")
    for curve in curves:
        print(curve.summary())
    lines = artifacts.per_curve_lines(curves) + artifacts.per_threshold_lines(curves)
    return [artifacts.write_atomic(cfg.output_path, lines, cfg.header_lines())]


def run_range_scenario1(cfg: ExperimentConfig) -> List[Path]:
    curve = scenario1(
        cfg.option("scenario.d_total_m"),
        positions=list(cfg.option("scenario.positions_m")) or None,
        budget=cfg.budget,
        table=SensitivityTable.all_rates(cfg.channel.noise_figure_db),
        n_positions=cfg.option("scenario.n_positions"),
    )
    print(curve.summary())
    lines = artifacts.scenario_lines(curve)
    return [artifacts.write_atomic(cfg.output_path, lines, cfg.header_lines())]


def run_range_scenario2(cfg: ExperimentConfig) -> List[Path]:
    curve = scenario2(
        cfg.option("scenario.d1_m"),
        cfg.option("scenario.d2_values_m"),
        budget=cfg.budget,
        table=SensitivityTable.all_rates(cfg.channel.noise_figure_db),
    )
    print(curve.summary())
    lines = artifacts.scenario_lines(curve)
    return [artifacts.write_atomic(cfg.output_path, lines, cfg.header_lines())]


def run_mac_sim(cfg: ExperimentConfig) -> List[Path]:
    """Simulate TDMA rounds and audit the transcript."""
    assert cfg.schedule is not None
    transcript = simulate_rounds(
        cfg.schedule,
        cfg.devices,
        cfg.option("mac.rounds"),
        traffic_prob=cfg.option("mac.traffic_prob"),
        seed=cfg.seed,
        flip_prob=cfg.option("mac.flip_prob"),
        drift=cfg.option("mac.drift"),
    )
    audit = audit_transcript(transcript, {d.id: d for d in cfg.devices})
    lines = transcript.csv_lines() + [
        f"# audit,transmissions,{audit.transmissions}",
        f"# audit,overlaps,{audit.overlaps}",
        f"# audit,idle_tones,{audit.idle_tones}",
        f"# audit,skips,{audit.skips}",
    ]
    path = artifacts.write_atomic(cfg.output_path, lines, cfg.header_lines())
    print(
        f"{audit.transmissions} transmissions, {audit.skips} skips, "
        f"{audit.overlaps} overlaps, {audit.idle_tones} idle tones"
    )
    if not audit.ok:
        raise RunFailure("transcript audit failed")
    return [path]


def run_concurrent(cfg: ExperimentConfig) -> List[Path]:
    report = simulate_concurrent(
        cfg.concurrent_devices,
        n_packets=cfg.option("concurrent.n_packets"),
        seed=cfg.seed,
        noise_figure_db=cfg.channel.noise_figure_db,
    )
    print(report.summary())
    lines = artifacts.concurrency_lines(report)
    return [artifacts.write_atomic(cfg.output_path, lines, cfg.header_lines())]


RUNNERS: Dict[str, Callable[[ExperimentConfig], List[Path]]] = {
    "modulate": run_modulate,
    "demodulate": run_demodulate,
    "spectrum": run_spectrum,
    "per-sweep": run_per_sweep,
    "range-scenario1": run_range_scenario1,
    "range-scenario2": run_range_scenario2,
    "mac-sim": run_mac_sim,
    "concurrent": run_concurrent,
}


def loopback(
    payload: bytes,
    p: ChirpParams,
    noiseless: bool = False,
    rssi_dbm: Optional[float] = None,
    seed: int = 0,
    synth: str = "multilevel",
    delta_f: Optional[float] = None,
    noise_figure_db: float = 6.0,
) -> bytes:
    """Modulate, mix, pass through the channel and parse one frame.

    Args:
        payload: Bytes to send
        p: Chirp setting (``osf`` is used for the channel simulation)
        noiseless: Skip the channel entirely
        rssi_dbm: Received power; 10 dB above simulated sensitivity when None
        seed: Seed for the lead-in and channel noise
        synth: ``"ideal"`` for the plain LoRa waveform or a synthesizer kind
        delta_f: Backscatter offset; defaults to ``bw``
        noise_figure_db: Receiver noise figure

    Returns:
        Decoded payload

    Raises:
        FrameError: If the frame cannot be decoded
    """
    frame = LoraFrame(params=p, payload=payload)
    rng = np.random.default_rng(seed)
    backscatter = None
    if synth != "ideal":
        backscatter = create_synth(synth, delta_f or float(p.bw))
    tx = packet_signal(frame, rng, backscatter)
    rx = tx
    if not noiseless:
        if rssi_dbm is None:
            rssi_dbm = sensitivity_dbm(p, noise_figure_db) + LOOPBACK_MARGIN_DB
        cfg = ChannelConfig(noise_figure_db=noise_figure_db, rng_seed=seed)
        rx = apply_channel(tx, cfg, LinkBudget(), rssi_dbm=rssi_dbm)
        rx = receiver_frontend(rx, p, cfg.frontend)
    parsed = parse_frame(rx, p, len(payload))
    return parsed.payload


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--log-file", type=Path, default=None)
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="chirpscatter", description="LoRa backscatter laboratory"
    )
    verbs = parser.add_subparsers(dest="command", required=True)
    for kind in EXPERIMENT_KINDS:
        verb = verbs.add_parser(
            kind, parents=[common], help=f"run a {kind} experiment"
        )
        verb.add_argument("--config", type=Path, required=True)
        verb.add_argument("--out", type=Path, default=None, help="artifact directory")

    lb = verbs.add_parser("loopback", parents=[common], help="round-trip one frame")
    lb.add_argument("--payload", required=True, help="payload as hex")
    lb.add_argument("--sf", type=int, default=7)
    lb.add_argument("--bw", type=int, default=125000)
    lb.add_argument("--cr", default="4/8")
    lb.add_argument("--noiseless", action="store_true")
    lb.add_argument("--rssi", type=float, default=None, help="received power in dBm")
    lb.add_argument("--synth", choices=("ideal",) + SYNTH_KINDS, default="multilevel")
    lb.add_argument("--delta-f", type=float, default=None)
    return parser


def _run_loopback(args: argparse.Namespace) -> int:
    try:
        payload = bytes.fromhex(args.payload)
        p = ChirpParams(sf=args.sf, bw=args.bw, cr=args.cr)
        seed = ConfigLoader.effective_seed(args.seed)
    except ConfigError as e:
        print(error(f"Configuration error: {e}"), file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as e:
        print(error(f"Invalid loopback parameters: {e}"), file=sys.stderr)
        return EXIT_VALIDATION
    bind_experiment("loopback", seed)
    try:
        decoded = loopback(
            payload,
            p,
            noiseless=args.noiseless,
            rssi_dbm=args.rssi,
            seed=seed,
            synth=args.synth,
            delta_f=args.delta_f,
        )
    except FrameError as e:
        print(error(f"Decode failed: {e.__class__.__name__}: {e}"), file=sys.stderr)
        return EXIT_RUNTIME
    print(f"payload={decoded.hex()} crc_ok=True")
    if decoded != payload:
        print(warning("Decoded payload differs from input"), file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and return its exit status."""
    args = build_parser().parse_args(argv)
    setup_logger(log_file=args.log_file, verbose=args.verbose)

    if args.command == "loopback":
        return _run_loopback(args)

    try:
        cfg = ConfigLoader.load(args.config)
        if cfg.kind != args.command:
            raise ConfigError(
                "experiment.kind", f"config is for {cfg.kind!r}, not {args.command!r}"
            )
        cfg = ConfigLoader.resolve_seed(cfg, args.seed)
        if args.out is not None:
            cfg = cfg.with_out_dir(args.out)
    except (ConfigError, FileNotFoundError) as e:
        print(error(f"Configuration error: {e}"), file=sys.stderr)
        return EXIT_VALIDATION

    bind_experiment(cfg.kind, cfg.seed)
    print(header(f"chirpscatter {cfg.kind} (seed {cfg.seed})"))
    try:
        paths = RUNNERS[cfg.kind](cfg)
    except ConfigError as e:
        print(error(f"Configuration error: {e}"), file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:
        logger.error(f"{cfg.kind} failed: {e.__class__.__name__}: {e}")
        print(error(f"Run failed: {e}"), file=sys.stderr)
        return EXIT_RUNTIME
    for path in paths:
        print(success(f"Wrote {path}"))
    return EXIT_OK
