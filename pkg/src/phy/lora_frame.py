"""LoRa-compatible frame construction and parsing.

Frames are implicit-header: bandwidth, spreading factor, code rate and payload
length are configured statically on both ends. Layout on air::

    preamble (value-0 up-chirps) | 2 sync | 2.25 down-chirps | payload (+CRC)
"""
import itertools
import math
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.errors import CrcFail, NoPreamble, SyncMismatch, UnsupportedBandwidth
from src.models.chirp import (
    BANDWIDTHS_HZ,
    CODE_RATES,
    SPREADING_FACTORS,
    ChirpParams,
    ChirpSymbol,
    parse_code_rate,
)
from src.models.frame import (
    DEFAULT_SYNC,
    DOWNCHIRP_QUARTERS,
    ChannelPlan,
    FrameSymbols,
    HopSequence,
    LoraFrame,
    ParsedFrame,
)
from src.models.iq_signal import IqSignal
from src.phy import css_core
from src.phy.fec import (
    bytes_to_nibbles,
    crc16,
    hamming_decode,
    hamming_encode,
    nibbles_to_bytes,
)
from src.utils.logger import get_logger

logger = get_logger()

PREAMBLE_MIN_RUN = 4
# Mean peak-to-mean over the preamble run; pure noise sits around 2.5-3.4.
PREAMBLE_MIN_PEAK_TO_MEAN = 3.0
MAX_TIMING_RESIDUAL_CHIPS = 1


def coded_bit_count(payload_len: int, crc_present: bool, p: ChirpParams) -> int:
    """Coded bits carried by the payload section."""
    total_bytes = payload_len + (2 if crc_present else 0)
    return total_bytes * 2 * p.codeword_bits


def payload_symbol_count(payload_len: int, crc_present: bool, p: ChirpParams) -> int:
    return math.ceil(coded_bit_count(payload_len, crc_present, p) / p.sf)


def build_frame(frame: LoraFrame) -> FrameSymbols:
    """Lay out a frame as preamble, sync and coded payload symbols.

    Payload path: bytes (+ big-endian CRC) -> nibbles, low first -> Hamming
    codewords -> MSB-first bits, zero-padded to a symbol multiple.
    """
    p = frame.params
    data = frame.payload
    if frame.crc_present:
        crc = crc16(frame.payload)
        data = data + bytes([crc >> 8, crc & 0xFF])
    bits = hamming_encode(bytes_to_nibbles(data), p.cr)
    payload = tuple(css_core.bits_to_symbols(bits, p)) if bits else ()
    logger.debug(
        f"Built frame: {len(frame.payload)} B payload, {len(bits)} coded bits, "
        f"{len(payload)} payload symbols at {p}"
    )
    return FrameSymbols(
        params=p,
        preamble=(ChirpSymbol(0),) * frame.preamble_len,
        sync=tuple(ChirpSymbol(v) for v in frame.sync),
        payload=payload,
        coded_bits=len(bits),
    )


def render_frame(symbols: FrameSymbols) -> IqSignal:
    """Ideal LoRa waveform of a built frame at ``osf * bw``."""
    p = symbols.params
    head = css_core.modulate_symbols(p, symbols.preamble + symbols.sync)
    down = css_core.base_chirp(p, "down").samples
    quarter = p.samples_per_symbol // 4
    downchirps = np.concatenate([down, down, down[:quarter]])
    payload = css_core.modulate_symbols(p, symbols.payload)
    return IqSignal(
        np.concatenate([head.samples, downchirps, payload.samples]), p.sample_rate
    )


def frame_duration(frame: LoraFrame) -> float:
    """Airtime in seconds."""
    p = frame.params
    n_payload = payload_symbol_count(len(frame.payload), frame.crc_present, p)
    n_symbols = frame.preamble_len + 2 + DOWNCHIRP_QUARTERS / 4 + n_payload
    return n_symbols * css_core.symbol_duration(p)


def _find_preamble(x: np.ndarray, p: ChirpParams) -> int:
    """Sample index of a preamble symbol boundary."""
    m = p.samples_per_symbol
    n_win = x.size // m
    if n_win < PREAMBLE_MIN_RUN:
        raise NoPreamble(f"signal shorter than {PREAMBLE_MIN_RUN} symbols")
    values, _, ratio = css_core.demodulate_symbols(x[: n_win * m], p)
    for i in range(n_win - PREAMBLE_MIN_RUN + 1):
        run = values[i : i + PREAMBLE_MIN_RUN]
        if np.all(run == run[0]) and (
            ratio[i : i + PREAMBLE_MIN_RUN].mean() >= PREAMBLE_MIN_PEAK_TO_MEAN
        ):
            # A window starting tau samples into a chirp demodulates to tau/osf.
            align = i * m - int(run[0]) * p.osf
            return align + m if align < 0 else align
    raise NoPreamble("no run of identical up-chirps found")


def _signed(value: int, modulus: int) -> int:
    value %= modulus
    return value - modulus if value >= modulus // 2 else value


def parse_frame(
    sig: IqSignal,
    p: ChirpParams,
    payload_len: int,
    crc_present: bool = True,
    sync: Tuple[int, int] = DEFAULT_SYNC,
) -> ParsedFrame:
    """Detect, synchronise and decode one frame.

    Args:
        sig: Received baseband at ``p.sample_rate``, starting within the preamble
        p: Chirp parameters configured on the receiver
        payload_len: Configured payload length in bytes (implicit header)
        crc_present: Whether a CRC-16 follows the payload
        sync: Expected sync symbol values

    Returns:
        Parsed frame with payload, CRC status and per-symbol confidence

    Raises:
        NoPreamble: If no preamble run is found
        SyncMismatch: If sync symbols or down-chirps do not follow the preamble
        CrcFail: If the CRC fails or the payload is truncated; ``.frame``
            still holds the decoded payload
    """
    if sig.sample_rate != p.sample_rate:
        raise ValueError(
            f"signal sampled at {sig.sample_rate} Hz, receiver expects "
            f"{p.sample_rate} Hz"
        )
    m = p.samples_per_symbol
    x = sig.samples
    align = _find_preamble(x, p)

    aligned = x[align:]
    n_win = aligned.size // m
    values, _, _ = css_core.demodulate_symbols(aligned[: n_win * m], p)
    j = 0
    while j < n_win and values[j] == 0:
        j += 1
    if j + 4 > n_win:
        raise SyncMismatch("signal ends before the sync and down-chirps")
    found = (int(values[j]), int(values[j + 1]))
    if found != tuple(sync):
        raise SyncMismatch(f"expected sync {tuple(sync)}, found {found}")

    down_start = align + (j + 2) * m
    d_values, d_peaks, _ = css_core.demodulate_symbols(
        x[down_start : down_start + 2 * m], p, reference="down"
    )
    best = int(np.argmax(d_peaks))
    residual = _signed(-int(d_values[best]), p.chips)
    if abs(residual) > MAX_TIMING_RESIDUAL_CHIPS:
        raise SyncMismatch(f"down-chirp timing residual {residual} chips")
    payload_start = down_start + DOWNCHIRP_QUARTERS * m // 4 - residual * p.osf

    n_payload = payload_symbol_count(payload_len, crc_present, p)
    available = max(0, (x.size - payload_start) // m)
    n_read = min(n_payload, available)
    block = x[payload_start : payload_start + n_read * m]
    p_values, _, p_ratio = css_core.demodulate_symbols(block, p)
    truncated = n_read < n_payload
    symbol_values = list(p_values) + [0] * (n_payload - n_read)

    coded = coded_bit_count(payload_len, crc_present, p)
    bits = css_core.symbols_to_bits([ChirpSymbol(int(v)) for v in symbol_values], p)
    decoded = hamming_decode(bits[:coded], p.cr)
    data = nibbles_to_bytes(decoded.nibbles)
    payload = data[:payload_len]
    crc_ok = not truncated
    if crc_present:
        received = (data[payload_len] << 8) | data[payload_len + 1]
        crc_ok = crc_ok and received == crc16(payload)

    parsed = ParsedFrame(
        payload=payload,
        crc_ok=crc_ok,
        confidence=tuple(float(r) for r in p_ratio),
        fec_ok=decoded.ok,
        corrected_blocks=sum(decoded.corrected),
        truncated=truncated,
    )
    if truncated:
        raise CrcFail(f"payload truncated: {n_read}/{n_payload} symbols", parsed)
    if not crc_ok:
        raise CrcFail("CRC mismatch", parsed)
    return parsed


def rate_settings() -> List[ChirpParams]:
    """All 224 bandwidth x spreading factor x code rate combinations."""
    return [
        ChirpParams(sf=sf, bw=bw, cr=cr)
        for bw, sf, cr in itertools.product(
            BANDWIDTHS_HZ, SPREADING_FACTORS, CODE_RATES
        )
    ]


def channel_plan(bw: int) -> ChannelPlan:
    """FCC hopping channels for 125 kHz or 500 kHz chirps.

    Raises:
        UnsupportedBandwidth: For any other bandwidth
    """
    if bw == 125000:
        return ChannelPlan(band_start=902_300_000, channel_count=64, spacing=200_000)
    if bw == 500000:
        return ChannelPlan(band_start=903_000_000, channel_count=8, spacing=1_600_000)
    raise UnsupportedBandwidth(f"no hopping plan for bw={bw} Hz")


def hop_sequence(plan: ChannelPlan, delta_f: int, seed: int) -> HopSequence:
    """Seeded hop order for the single-tone source, offset by ``-delta_f``."""
    order = np.random.default_rng(seed).permutation(plan.channel_count)
    return HopSequence(
        channel_order=tuple(int(k) for k in order),
        tone_freqs=tuple(int(c) - int(delta_f) for c in plan.centers),
        delta_f=int(delta_f),
    )


def read_golden_vectors(path: Path) -> List[Dict[str, object]]:
    """Read ``sf,bw,cr,preamble_len,payload_hex,crc_hex,symbol_values`` lines.

    ``crc_hex`` is empty for frames without CRC; ``symbol_values`` are the
    payload symbols, comma separated. Lines starting with ``#`` are skipped.
    """
    vectors: List[Dict[str, object]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        sf, bw, cr, preamble, payload_hex, crc_hex, symbols = line.split(",", 6)
        vectors.append(
            {
                "params": ChirpParams(sf=int(sf), bw=int(bw), cr=parse_code_rate(cr)),
                "preamble_len": int(preamble),
                "payload": bytes.fromhex(payload_hex),
                "crc": int(crc_hex, 16) if crc_hex else None,
                "symbols": [int(v) for v in symbols.split(",") if v],
            }
        )
    return vectors


def symbol_values(symbols: Sequence[ChirpSymbol]) -> List[int]:
    return [s.value for s in symbols]
