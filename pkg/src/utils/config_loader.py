"""Configuration loading utilities.

Experiment configs are flat text files of ``section.key = value`` lines.
``#`` starts a comment; keys may carry further dots, as in
``device.tag_a.slot = 0``.
"""
import os
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from src.channel.link import excess_loss_presets
from src.errors import ConfigError
from src.models.chirp import ChirpParams, code_rate_label
from src.models.link import ChannelConfig, FrontendConfig, Interferer, LinkBudget
from src.models.mac import DeviceState, TdmaSchedule
from src.simulation.concurrent import ConcurrentDevice

EXPERIMENT_KINDS = (
    "modulate",
    "demodulate",
    "spectrum",
    "per-sweep",
    "range-scenario1",
    "range-scenario2",
    "mac-sim",
    "concurrent",
)
SEED_ENV = "CHIRPSCATTER_SEED"
DEFAULT_CONFIG = Path("config/per_sweep.conf")


def _bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _float_list(value: str) -> Tuple[float, ...]:
    items = [v for v in value.replace(",", " ").split() if v]
    if not items:
        raise ValueError("expected at least one number")
    return tuple(float(v) for v in items)


def _int_list(value: str) -> Tuple[int, ...]:
    return tuple(int(v) for v in _float_list(value))


def _hex_bytes(value: str) -> bytes:
    return bytes.fromhex(value.strip())


def _bits(value: str) -> Tuple[int, ...]:
    bits = value.strip()
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"expected a string of 0 and 1, got {value!r}")
    return tuple(int(b) for b in bits)


def _text(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return code_rate_label(value)
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, bytes):
        return value.hex()
    if isinstance(value, (tuple, list)):
        return ", ".join(_text(v) for v in value)
    return str(value)


def _prefixed(section: str, value: Any) -> Dict[str, Any]:
    return {f"{section}.{f.name}": getattr(value, f.name) for f in fields(value)}


Cast = Callable[[str], Any]

# Experiment-specific options: key -> (parser, default). A default of None
# marks the key as required for that kind.
KIND_OPTIONS: Dict[str, Dict[str, Tuple[Cast, Any]]] = {
    "modulate": {
        "io.payload": (_hex_bytes, None),
        "io.iq_out": (Path, None),
        "io.preamble_len": (int, 8),
        "io.synth": (str, "ideal"),
        "io.delta_f": (float, 3e6),
    },
    "demodulate": {
        "io.iq_in": (Path, None),
        "io.payload_len": (int, None),
        "io.crc": (_bool, True),
    },
    "spectrum": {
        "spectrum.delta_f": (float, None),
        "spectrum.levels": (_int_list, (2, 4)),
        "spectrum.duration_s": (float, 0.01),
        "spectrum.sample_rate": (float, 0.0),
        "spectrum.max_order": (int, 15),
    },
    "per-sweep": {
        "sweep.settings": (str, "characterization"),
        "sweep.n_packets": (int, 1000),
        "sweep.rssi_points": (_float_list, ()),
        "sweep.interferer_powers_dbm": (_float_list, ()),
        "sweep.interferer_offset_hz": (float, 1e6),
        "sweep.max_workers": (int, 0),
    },
    "range-scenario1": {
        "scenario.d_total_m": (float, None),
        "scenario.positions_m": (_float_list, ()),
        "scenario.n_positions": (int, 19),
    },
    "range-scenario2": {
        "scenario.d1_m": (float, None),
        "scenario.d2_values_m": (_float_list, None),
    },
    "mac-sim": {
        "mac.rounds": (int, 1000),
        "mac.traffic_prob": (float, 0.5),
        "mac.flip_prob": (float, 0.0),
        "mac.drift": (_bool, True),
    },
    "concurrent": {
        "concurrent.n_packets": (int, 200),
    },
}
OUTPUT_NAMES = {
    "modulate": "modulate.csv",
    "demodulate": "demodulate.csv",
    "spectrum": "spectrum.csv",
    "per-sweep": "per_sweep.csv",
    "range-scenario1": "range_scenario1.csv",
    "range-scenario2": "range_scenario2.csv",
    "mac-sim": "mac_transcript.csv",
    "concurrent": "concurrent.csv",
}

DEVICE_FIELDS: Dict[str, Cast] = {
    "slot": int,
    "channel": int,
    "sf": int,
    "bw": int,
    "cr": str,
    "threshold_dbm": float,
    "has_data": _bool,
    "payload_len": int,
    "d1_m": float,
    "d2_m": float,
    "offset_hz": float,
    "snr_db": float,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated experiment description.

    ``entries`` keeps the raw key/value text so artifacts can echo it.
    """

    kind: str
    seed: int
    chirp: ChirpParams
    budget: LinkBudget
    channel: ChannelConfig
    schedule: Optional[TdmaSchedule] = None
    devices: Tuple[DeviceState, ...] = ()
    concurrent_devices: Tuple[ConcurrentDevice, ...] = ()
    options: Dict[str, Any] = field(default_factory=dict)
    out_dir: Path = Path("results")
    output_name: str = ""
    entries: Dict[str, str] = field(default_factory=dict)

    def option(self, key: str) -> Any:
        return self.options[key]

    @property
    def output_path(self) -> Path:
        return self.out_dir / self.output_name

    def with_seed(self, seed: int) -> "ExperimentConfig":
        entries = {**self.entries, "experiment.seed": str(seed)}
        return replace(
            self, seed=seed, channel=self.channel.with_seed(seed), entries=entries
        )

    def with_out_dir(self, out_dir: Path) -> "ExperimentConfig":
        entries = {**self.entries, "io.out_dir": str(out_dir)}
        return replace(self, out_dir=Path(out_dir), entries=entries)

    def resolved(self) -> Dict[str, str]:
        """Every setting the run uses, with defaults and presets filled in.

        Raw entries are kept for keys no value type covers; a preset name
        given for the excess loss is echoed next to the value it resolved to.
        """
        values: Dict[str, Any] = dict(self.entries)
        values["experiment.kind"] = self.kind
        values["experiment.seed"] = self.seed
        values.update(_prefixed("chirp", self.chirp))
        values.update(_prefixed("budget", self.budget))
        preset = self.entries.get("budget.excess_loss_db", "")
        if preset in excess_loss_presets(self.budget):
            values["budget.excess_loss_db"] = (
                f"{_text(self.budget.excess_loss_db)} ({preset})"
            )
        values["channel.noise_figure_db"] = self.channel.noise_figure_db
        values["channel.noise_enabled"] = self.channel.noise_enabled
        values.update(_prefixed("frontend", self.channel.frontend))
        if self.channel.interferer is not None:
            values.update(_prefixed("interferer", self.channel.interferer))
        values.update(self.options)
        if self.schedule is not None:
            values["schedule.slot_duration_s"] = self.schedule.slot_duration_s
            values["schedule.sync_pattern"] = "".join(
                str(b) for b in self.schedule.round_sync_pattern
            )
            values["schedule.sync_bit_s"] = self.schedule.sync_bit_s
        for state in self.devices:
            key = f"device.{state.id}"
            assert self.schedule is not None
            values[f"{key}.slot"] = self.schedule.device_slots[state.id]
            values[f"{key}.channel"] = state.channel
            values[f"{key}.sf"] = state.sf
            values[f"{key}.bw"] = state.bw
            values[f"{key}.cr"] = state.cr
            values[f"{key}.threshold_dbm"] = state.detector_threshold_dbm
            values[f"{key}.has_data"] = state.has_data
            values[f"{key}.payload_len"] = state.payload_len
            values[f"{key}.d1_m"] = state.budget.d1_m
            values[f"{key}.d2_m"] = state.budget.d2_m
        for device in self.concurrent_devices:
            for name in ("sf", "bw", "cr", "offset_hz", "snr_db"):
                values[f"device.{device.id}.{name}"] = getattr(device, name)
        values["io.out_dir"] = self.out_dir
        values["io.output"] = self.output_name
        return {key: _text(value) for key, value in values.items()}

    def header_lines(self) -> List[str]:
        """Resolved configuration as ``# key = value`` comment lines."""
        resolved = self.resolved()
        lines = ["# config"]
        lines += [f"# {key} = {resolved[key]}" for key in sorted(resolved)]
        return lines


class ConfigLoader:
    """Loads and validates experiment configuration files."""

    @staticmethod
    def load(config_path: Path) -> ExperimentConfig:
        """Load configuration from a ``section.key = value`` file.

        Args:
            config_path: Path to the configuration file

        Returns:
            Validated experiment configuration

        Raises:
            FileNotFoundError: If config file doesn't exist
            ConfigError: If a line or value is invalid
        """
        config_path = Path(config_path)
        if not config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")
        text = config_path.read_text(encoding="utf-8")
        return ConfigLoader.loads(text)

    @staticmethod
    def loads(text: str) -> ExperimentConfig:
        """Parse and validate configuration text."""
        return ConfigLoader._validate(ConfigLoader.parse(text))

    @staticmethod
    def parse(text: str) -> Dict[str, str]:
        """Split configuration text into a flat key/value mapping.

        Raises:
            ConfigError: On a line without ``=``, an empty key or a duplicate key
        """
        entries: Dict[str, str] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ConfigError(
                    f"line {number}", f"expected 'key = value': {raw!r}"
                )
            if "." not in key:
                raise ConfigError(key, "keys must have the form section.key")
            if key in entries:
                raise ConfigError(key, "duplicate key")
            entries[key] = value.strip()
        return entries

    @staticmethod
    def _get(entries: Dict[str, str], key: str, cast: Cast, default: Any) -> Any:
        if key not in entries:
            if default is None:
                raise ConfigError(key, "required key is missing")
            return default
        try:
            return cast(entries[key])
        except ValueError as e:
            raise ConfigError(key, str(e)) from e

    @staticmethod
    def _build(section: str, factory: Callable[..., Any], **kwargs: Any) -> Any:
        # Value types name the offending field first in their messages.
        try:
            return factory(**kwargs)
        except ValueError as e:
            name = str(e).split(" ", 1)[0]
            raise ConfigError(f"{section}.{name}", str(e)) from e

    @staticmethod
    def _validate(entries: Dict[str, str]) -> ExperimentConfig:
        """Build every value type the experiment needs.

        Raises:
            ConfigError: Naming the first dotted field that fails
        """
        get = ConfigLoader._get
        build = ConfigLoader._build
        kind = get(entries, "experiment.kind", str, None)
        if kind not in EXPERIMENT_KINDS:
            raise ConfigError(
                "experiment.kind", f"must be one of {', '.join(EXPERIMENT_KINDS)}"
            )
        seed = get(entries, "experiment.seed", int, 0)

        chirp = build(
            "chirp",
            ChirpParams,
            sf=get(entries, "chirp.sf", int, 7),
            bw=get(entries, "chirp.bw", int, 125000),
            cr=get(entries, "chirp.cr", str, "4/8"),
            osf=get(entries, "chirp.osf", int, 1),
        )

        budget = build(
            "budget",
            LinkBudget,
            tx_power_dbm=get(entries, "budget.tx_power_dbm", float, 30.0),
            src_antenna_gain_dbi=get(
                entries, "budget.src_antenna_gain_dbi", float, 6.0
            ),
            tag_antenna_gain_dbi=get(
                entries, "budget.tag_antenna_gain_dbi", float, 0.0
            ),
            rx_antenna_gain_dbi=get(
                entries, "budget.rx_antenna_gain_dbi", float, 0.0
            ),
            switch_loss_db=get(entries, "budget.switch_loss_db", float, 4.0),
            carrier_freq_hz=get(entries, "budget.carrier_freq_hz", float, 905e6),
            d1_m=get(entries, "budget.d1_m", float, 1.0),
            d2_m=get(entries, "budget.d2_m", float, 1.0),
        )
        excess = entries.get("budget.excess_loss_db", "0")
        presets = excess_loss_presets(budget)
        if excess in presets:
            budget = budget.with_excess_loss(presets[excess])
        else:
            budget = budget.with_excess_loss(
                get(entries, "budget.excess_loss_db", float, 0.0)
            )

        frontend = build(
            "frontend",
            FrontendConfig,
            k_bw=get(entries, "frontend.k_bw", float, 4.0),
            stopband_db=get(entries, "frontend.stopband_db", float, 50.0),
            enabled=get(entries, "frontend.enabled", _bool, True),
        )
        interferer = None
        if "interferer.power_dbm" in entries:
            interferer = Interferer(
                offset_hz=get(entries, "interferer.offset_hz", float, 1e6),
                power_dbm=get(entries, "interferer.power_dbm", float, None),
            )
        channel = build(
            "channel",
            ChannelConfig,
            noise_figure_db=get(entries, "channel.noise_figure_db", float, 6.0),
            interferer=interferer,
            rng_seed=seed,
            noise_enabled=get(entries, "channel.noise_enabled", _bool, True),
            frontend=frontend,
        )

        options = {
            key: get(entries, key, cast, default)
            for key, (cast, default) in KIND_OPTIONS[kind].items()
        }
        devices = ConfigLoader._devices(entries)
        schedule = None
        states: Tuple[DeviceState, ...] = ()
        concurrent: Tuple[ConcurrentDevice, ...] = ()
        if kind == "mac-sim":
            schedule, states = ConfigLoader._mac(entries, chirp, budget, devices)
        elif kind == "concurrent":
            concurrent = ConfigLoader._concurrent(chirp, devices)

        return ExperimentConfig(
            kind=kind,
            seed=seed,
            chirp=chirp,
            budget=budget,
            channel=channel,
            schedule=schedule,
            devices=states,
            concurrent_devices=concurrent,
            options=options,
            out_dir=get(entries, "io.out_dir", Path, Path("results")),
            output_name=get(entries, "io.output", str, OUTPUT_NAMES[kind]),
            entries=dict(entries),
        )

    @staticmethod
    def _devices(entries: Dict[str, str]) -> Dict[str, Dict[str, Any]]:
        devices: Dict[str, Dict[str, Any]] = {}
        for key in entries:
            parts = key.split(".")
            if parts[0] != "device":
                continue
            if len(parts) != 3 or parts[2] not in DEVICE_FIELDS:
                fields = "|".join(DEVICE_FIELDS)
                raise ConfigError(key, f"expected device.<id>.<{fields}>")
            _, device_id, name = parts
            devices.setdefault(device_id, {})[name] = ConfigLoader._get(
                entries, key, DEVICE_FIELDS[name], None
            )
        return devices

    @staticmethod
    def _mac(
        entries: Dict[str, str],
        chirp: ChirpParams,
        budget: LinkBudget,
        devices: Dict[str, Dict[str, Any]],
    ) -> Tuple[TdmaSchedule, Tuple[DeviceState, ...]]:
        get = ConfigLoader._get
        if not devices:
            raise ConfigError("device", "mac-sim needs at least one device")
        slots: Dict[str, int] = {}
        states = []
        for device_id, values in devices.items():
            if "slot" not in values:
                raise ConfigError(
                    f"device.{device_id}.slot", "required key is missing"
                )
            slots[device_id] = values["slot"]
            device_budget = budget.with_distances(
                values.get("d1_m", budget.d1_m), values.get("d2_m", budget.d2_m)
            )
            states.append(
                ConfigLoader._build(
                    f"device.{device_id}",
                    DeviceState,
                    id=device_id,
                    channel=values.get("channel", 0),
                    sf=values.get("sf", chirp.sf),
                    detector_threshold_dbm=values.get("threshold_dbm", -71.0),
                    has_data=values.get("has_data", True),
                    bw=values.get("bw", chirp.bw),
                    cr=values.get("cr", chirp.cr),
                    payload_len=values.get("payload_len", 8),
                    budget=device_budget,
                )
            )
        schedule = ConfigLoader._build(
            "schedule",
            TdmaSchedule,
            slot_duration_s=get(entries, "schedule.slot_duration_s", float, None),
            device_slots=slots,
            round_sync_pattern=get(entries, "schedule.sync_pattern", _bits, None),
            sync_bit_s=get(entries, "schedule.sync_bit_s", float, 1e-3),
        )
        return schedule, tuple(states)

    @staticmethod
    def _concurrent(
        chirp: ChirpParams, devices: Dict[str, Dict[str, Any]]
    ) -> Tuple[ConcurrentDevice, ...]:
        if not devices:
            raise ConfigError("device", "concurrent needs at least one device")
        result = []
        for device_id, values in devices.items():
            if "offset_hz" not in values:
                raise ConfigError(
                    f"device.{device_id}.offset_hz", "required key is missing"
                )
            result.append(
                ConfigLoader._build(
                    f"device.{device_id}",
                    ConcurrentDevice,
                    id=device_id,
                    sf=values.get("sf", chirp.sf),
                    offset_hz=values["offset_hz"],
                    bw=values.get("bw", chirp.bw),
                    cr=values.get("cr", chirp.cr),
                    snr_db=values.get("snr_db", 20.0),
                )
            )
        return tuple(result)

    @staticmethod
    def effective_seed(cli_seed: Optional[int], file_seed: int = 0) -> int:
        """Seed precedence: command line, then environment, then file.

        Raises:
            ConfigError: If the environment variable is not an integer
        """
        if cli_seed is not None:
            return cli_seed
        env = os.environ.get(SEED_ENV)
        if env is not None and env.strip():
            try:
                return int(env)
            except ValueError as e:
                raise ConfigError(SEED_ENV, f"expected an integer, got {env!r}") from e
        return file_seed

    @staticmethod
    def resolve_seed(
        config: ExperimentConfig, cli_seed: Optional[int]
    ) -> ExperimentConfig:
        """Apply :meth:`effective_seed` to a loaded config."""
        seed = ConfigLoader.effective_seed(cli_seed, config.seed)
        return config if seed == config.seed else config.with_seed(seed)

    @staticmethod
    def load_default() -> ExperimentConfig:
        """Load default configuration from config/per_sweep.conf.

        Returns:
            Experiment configuration
        """
        return ConfigLoader.load(DEFAULT_CONFIG)
