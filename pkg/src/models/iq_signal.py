"""Complex baseband signal container and its on-disk format."""
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np


@dataclass(frozen=True, eq=False)
class IqSignal:
    """Complex baseband samples at a fixed sample rate.

    Amplitudes are dimensionless; when a signal has been through the channel
    ``|x|**2`` is power in milliwatts.
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.complex128)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive (got {self.sample_rate})")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    @property
    def time(self) -> np.ndarray:
        return np.arange(len(self)) / self.sample_rate

    def mean_power(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(np.mean(np.abs(self.samples) ** 2))

    def power_dbm(self) -> float:
        """Mean power in dBm, treating ``|x|**2`` as milliwatts."""
        power = self.mean_power()
        return float(10 * np.log10(power)) if power > 0 else float("-inf")

    def scaled(self, gain: float) -> "IqSignal":
        return IqSignal(self.samples * gain, self.sample_rate)

    def frequency_shift(self, offset_hz: float) -> "IqSignal":
        """Multiply by ``exp(j*2*pi*offset*t)``."""
        rotator = np.exp(2j * np.pi * offset_hz * self.time)
        return IqSignal(self.samples * rotator, self.sample_rate)

    def __add__(self, other: "IqSignal") -> "IqSignal":
        if other.sample_rate != self.sample_rate:
            raise ValueError("cannot add signals with different sample rates")
        n = max(len(self), len(other))
        total = np.zeros(n, dtype=np.complex128)
        total[: len(self)] += self.samples
        total[: len(other)] += other.samples
        return IqSignal(total, self.sample_rate)

    @staticmethod
    def concatenate(parts: Iterable["IqSignal"]) -> "IqSignal":
        parts = list(parts)
        if not parts:
            raise ValueError("nothing to concatenate")
        rate = parts[0].sample_rate
        if any(p.sample_rate != rate for p in parts):
            raise ValueError("cannot concatenate signals with different sample rates")
        return IqSignal(np.concatenate([p.samples for p in parts]), rate)

    def write(self, path: Path) -> None:
        """Write interleaved little-endian float32 I/Q plus the rate sidecar."""
        path = Path(path)
        interleaved = np.empty(2 * len(self), dtype="<f4")
        interleaved[0::2] = self.samples.real
        interleaved[1::2] = self.samples.imag
        path.write_bytes(interleaved.tobytes())
        sidecar_path(path).write_text(
            f"sample_rate_hz={self.sample_rate!r}\n", encoding="utf-8"
        )

    @classmethod
    def read(cls, path: Path) -> "IqSignal":
        """Read a signal written by :meth:`write`.

        Raises:
            FileNotFoundError: If the data file or its sidecar is missing
            ValueError: If the sidecar is malformed
        """
        path = Path(path)
        meta = sidecar_path(path)
        if not meta.exists():
            raise FileNotFoundError(f"Sample-rate sidecar not found: {meta}")
        rate = None
        for line in meta.read_text(encoding="utf-8").splitlines():
            key, sep, value = line.partition("=")
            if sep and key.strip() == "sample_rate_hz":
                rate = float(value)
        if rate is None:
            raise ValueError(f"{meta} has no sample_rate_hz line")
        raw = np.frombuffer(path.read_bytes(), dtype="<f4")
        if raw.size % 2:
            raise ValueError(f"{path} holds an odd number of float32 values")
        return cls(raw[0::2].astype(np.float64) + 1j * raw[1::2], rate)


def sidecar_path(path: Path) -> Path:
    """Sidecar holding the sample rate for an IQ file."""
    return path.with_name(path.name + ".meta")
