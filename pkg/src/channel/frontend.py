"""Receiver channel-select filter and decimation."""
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import signal

from src.models.chirp import ChirpParams
from src.models.iq_signal import IqSignal
from src.models.link import FrontendConfig
from src.utils.logger import get_logger

logger = get_logger()


@lru_cache(maxsize=32)
def design_frontend_filter(
    sample_rate: float, bw: float, k_bw: float, stopband_db: float
) -> Optional[np.ndarray]:
    """Kaiser-window low-pass taps for the complex-baseband channel filter.

    The passband edge is ``k_bw * bw / 2`` and the stopband starts at
    ``k_bw * bw``. Returns None when the stopband edge is not below Nyquist,
    in which case there is nothing left to reject.
    """
    passband = k_bw * bw / 2
    stopband = k_bw * bw
    nyquist = sample_rate / 2
    if stopband >= nyquist:
        return None
    numtaps, beta = signal.kaiserord(stopband_db, (stopband - passband) / nyquist)
    numtaps |= 1  # odd length keeps the delay an integer number of samples
    taps = signal.firwin(
        numtaps,
        (passband + stopband) / 2,
        window=("kaiser", beta),
        fs=sample_rate,
    )
    logger.debug(
        f"Frontend filter: {numtaps} taps, pass {passband:.0f} Hz, "
        f"stop {stopband:.0f} Hz at {sample_rate:.0f} Hz"
    )
    return taps


def receiver_frontend(
    sig: IqSignal,
    p: ChirpParams,
    cfg: Optional[FrontendConfig] = None,
    output_osf: Optional[int] = None,
) -> IqSignal:
    """Select the LoRa channel and optionally decimate for the demodulator.

    Args:
        sig: Received baseband centred on the LoRa channel
        p: Receiver chirp parameters (``bw`` sets the filter width)
        cfg: Filter settings; defaults to ``FrontendConfig()``
        output_osf: Decimate to ``output_osf * bw`` when given

    Returns:
        Filtered (and possibly resampled) signal
    """
    cfg = cfg or FrontendConfig()
    samples = sig.samples
    rate = sig.sample_rate
    if cfg.enabled:
        taps = design_frontend_filter(rate, float(p.bw), cfg.k_bw, cfg.stopband_db)
        if taps is not None:
            samples = signal.oaconvolve(samples, taps, mode="same")
    if output_osf is not None:
        target = output_osf * p.bw
        factor = rate / target
        if factor != 1 and float(factor).is_integer():
            # Plain decimation: anything the channel filter lets through aliases
            # in-band, so stopband_db is the receiver's whole selectivity.
            samples = samples[:: int(factor)]
            rate = target
        elif factor != 1:
            ratio = Fraction(int(round(target)), int(round(rate)))
            samples = signal.resample_poly(samples, ratio.numerator, ratio.denominator)
            rate = target
    return IqSignal(samples, rate)
