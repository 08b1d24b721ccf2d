"""Two-hop backscatter link budget and the simulated radio channel."""
import math
from typing import Dict, Optional

import numpy as np

from src.models.iq_signal import IqSignal
from src.models.link import ChannelConfig, Interferer, LinkBudget
from src.utils.logger import get_logger

logger = get_logger()

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_HZ = -174.0

# -134 dBm backscatter with source and receiver 400 m apart, tag halfway.
ANCHOR_RSSI_DBM = -134.0
ANCHOR_D1_M = 200.0
ANCHOR_D2_M = 200.0


def free_space_path_loss(d_m: float, f_hz: float) -> float:
    """Free-space path loss in dB, ``20*log10(4*pi*d*f/c)``."""
    if not d_m > 0:
        raise ValueError(f"distance must be positive (got {d_m})")
    return 20 * math.log10(4 * math.pi * d_m * f_hz / SPEED_OF_LIGHT)


def incident_power_dbm(budget: LinkBudget) -> float:
    """Source tone power arriving at the tag antenna (feeds the energy detector)."""
    return (
        budget.tx_power_dbm
        + budget.src_antenna_gain_dbi
        + budget.tag_antenna_gain_dbi
        - free_space_path_loss(budget.d1_m, budget.carrier_freq_hz)
    )


def backscatter_rssi(budget: LinkBudget) -> float:
    """Backscatter power at the receiver in dBm.

    Each leg contributes its own free-space loss, so the power scales as
    ``1/(d1**2 * d2**2)``.
    """
    f = budget.carrier_freq_hz
    return (
        budget.tx_power_dbm
        + budget.src_antenna_gain_dbi
        + 2 * budget.tag_antenna_gain_dbi
        + budget.rx_antenna_gain_dbi
        - free_space_path_loss(budget.d1_m, f)
        - free_space_path_loss(budget.d2_m, f)
        - budget.switch_loss_db
        - budget.excess_loss_db
    )


def calibrate_excess_loss(
    budget: LinkBudget,
    target_rssi_dbm: float = ANCHOR_RSSI_DBM,
    d1_m: float = ANCHOR_D1_M,
    d2_m: float = ANCHOR_D2_M,
) -> float:
    """Excess loss that makes ``budget`` hit ``target_rssi_dbm`` at (d1, d2)."""
    free = budget.with_distances(d1_m, d2_m).with_excess_loss(0.0)
    excess = backscatter_rssi(free) - target_rssi_dbm
    logger.debug(f"Calibrated excess loss: {excess:.2f} dB")
    return excess


def excess_loss_presets(budget: Optional[LinkBudget] = None) -> Dict[str, float]:
    """Named excess-loss settings: pure free space, or calibrated to the anchor."""
    budget = budget or LinkBudget()
    return {"free_space": 0.0, "calibrated": calibrate_excess_loss(budget)}


def attenuate_to(budget: LinkBudget, rssi_dbm: float) -> LinkBudget:
    """Adjust excess loss so the budget delivers ``rssi_dbm`` (variable attenuator)."""
    shortfall = backscatter_rssi(budget) - rssi_dbm
    return budget.with_excess_loss(budget.excess_loss_db + shortfall)


def noise_floor_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Thermal noise plus noise figure integrated over ``bandwidth_hz``."""
    return THERMAL_NOISE_DBM_HZ + noise_figure_db + 10 * math.log10(bandwidth_hz)


def dbm_to_mw(power_dbm: float) -> float:
    return 10 ** (power_dbm / 10)


def _fold_offset(offset_hz: float, sample_rate: float) -> float:
    return (offset_hz + sample_rate / 2) % sample_rate - sample_rate / 2


def apply_channel(
    sig: IqSignal,
    cfg: ChannelConfig,
    budget: LinkBudget,
    rssi_dbm: Optional[float] = None,
) -> IqSignal:
    """Scale to the received power, then add receiver noise and interference.

    The received power is set over the non-silent samples, so zero padding
    around a packet does not change its RSSI. After this call ``|x|**2`` is
    in milliwatts. An interferer beyond the simulated Nyquist band cannot be
    represented; it is handed to :func:`add_folded_interferer`, which treats
    ``sig`` as already channel-filtered.

    Args:
        sig: Baseband signal centred on the LoRa channel
        cfg: Noise, interferer and seed settings
        budget: Link budget fixing the received power
        rssi_dbm: Received power override, bypassing ``budget``

    Returns:
        Received signal, deterministic for a given ``cfg.rng_seed``
    """
    target_dbm = backscatter_rssi(budget) if rssi_dbm is None else rssi_dbm
    active = np.abs(sig.samples) > 0
    power = float(np.mean(np.abs(sig.samples[active]) ** 2)) if active.any() else 0.0
    gain = math.sqrt(dbm_to_mw(target_dbm) / power) if power > 0 else 0.0
    out = sig.samples * gain
    rate = sig.sample_rate
    rng = np.random.default_rng(cfg.rng_seed)

    if cfg.noise_enabled:
        noise_mw = dbm_to_mw(noise_floor_dbm(rate, cfg.noise_figure_db))
        sigma = math.sqrt(noise_mw / 2)
        out = out + sigma * (
            rng.standard_normal(out.size) + 1j * rng.standard_normal(out.size)
        )

    interferer = cfg.interferer
    if interferer is None:
        return IqSignal(out, rate)
    if is_folded(interferer, rate):
        return add_folded_interferer(IqSignal(out, rate), cfg)
    tone = _tone(interferer.offset_hz, interferer.power_dbm, sig.time, rng)
    return IqSignal(out + tone, rate)


def is_folded(interferer: Interferer, sample_rate: float) -> bool:
    """True when the blocker lies at or beyond the Nyquist edge of ``sample_rate``."""
    return abs(interferer.offset_hz) >= sample_rate / 2


def add_folded_interferer(sig: IqSignal, cfg: ChannelConfig) -> IqSignal:
    """Add the part of an out-of-band blocker that survives the channel filter.

    ``sig`` is taken to be the channel-filtered (and possibly decimated)
    receiver signal. The blocker lands on its alias at ``sig``'s rate, reduced
    by the frontend stopband when the frontend is enabled.
    """
    interferer = cfg.interferer
    if interferer is None:
        return sig
    offset = _fold_offset(interferer.offset_hz, sig.sample_rate)
    level = interferer.power_dbm
    if cfg.frontend.enabled:
        level -= cfg.frontend.stopband_db
    logger.warning(
        f"Interferer at {interferer.offset_hz:.0f} Hz beyond Nyquist "
        f"({sig.sample_rate / 2:.0f} Hz); folded to {offset:.0f} Hz "
        f"at {level:.1f} dBm"
    )
    rng = np.random.default_rng([cfg.rng_seed, 1])
    return IqSignal(sig.samples + _tone(offset, level, sig.time, rng), sig.sample_rate)


def _tone(
    offset_hz: float, power_dbm: float, t: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    phase = rng.uniform(0, 2 * np.pi)
    return math.sqrt(dbm_to_mw(power_dbm)) * np.exp(
        1j * (2 * np.pi * offset_hz * t + phase)
    )
