"""Unit tests for chirp modulation, demodulation and rate formulas."""
from fractions import Fraction

import numpy as np
import pytest

from src.errors import LengthMismatch
from src.models.chirp import ChirpParams, ChirpSymbol
from src.models.iq_signal import IqSignal
from src.phy import css_core
from src.phy.lora_frame import PREAMBLE_MIN_PEAK_TO_MEAN


class TestRates:
    """Test cases for the duration and bit-rate formulas."""

    def test_symbol_duration(self) -> None:
        """SF7 at 125 kHz lasts 1.024 ms."""
        p = ChirpParams(sf=7, bw=125000)
        assert css_core.symbol_duration(p) == pytest.approx(1.024e-3)

    def test_slowest_rate_matches_long_range_mode(self) -> None:
        """SF12, 31.25 kHz, 4/8 codes 45.78 bps."""
        p = ChirpParams(sf=12, bw=31250, cr=Fraction(4, 8))
        assert css_core.bit_rate(p) == pytest.approx(45.776, abs=0.01)

    def test_fastest_rate(self) -> None:
        """SF6, 500 kHz, 4/5 reaches 37.5 kbps."""
        p = ChirpParams(sf=6, bw=500000, cr=Fraction(4, 5))
        assert css_core.bit_rate(p) == pytest.approx(37500.0)

    def test_raw_rate_ignores_code_rate(self) -> None:
        """Raw rate is the coded rate divided by the code rate."""
        p = ChirpParams(sf=9, bw=125000, cr=Fraction(4, 7))
        assert css_core.raw_bit_rate(p) * float(p.cr) == pytest.approx(
            css_core.bit_rate(p)
        )


class TestChirps:
    """Test cases for chirp generation."""

    def test_chirp_is_unit_modulus(self, sf7_osf4: ChirpParams) -> None:
        """Every chirp sample has magnitude one."""
        chirp = css_core.base_chirp(sf7_osf4)
        assert len(chirp) == 4 * 128
        np.testing.assert_allclose(np.abs(chirp.samples), 1.0)

    def test_down_chirp_is_conjugate(self, sf7: ChirpParams) -> None:
        """The down-chirp is the complex conjugate of the up-chirp."""
        up = css_core.base_chirp(sf7, "up").samples
        down = css_core.base_chirp(sf7, "down").samples
        np.testing.assert_allclose(down, np.conj(up))

    def test_invalid_direction(self, sf7: ChirpParams) -> None:
        """Unknown directions are rejected."""
        with pytest.raises(ValueError, match="direction"):
            css_core.base_chirp(sf7, "sideways")  # type: ignore[arg-type]

    def test_out_of_range_symbol(self, sf7: ChirpParams) -> None:
        """Values must be below 2**sf."""
        with pytest.raises(ValueError):
            css_core.modulate_symbol(sf7, ChirpSymbol(128))


class TestRoundTrip:
    """demod(mod(v)) = v without noise."""

    @pytest.mark.parametrize("sf", [6, 7, 8, 9])
    def test_exhaustive_small_sf(self, sf: int) -> None:
        """Every symbol value decodes back for sf 6 to 9."""
        p = ChirpParams(sf=sf, bw=125000)
        symbols = [ChirpSymbol(v) for v in range(p.chips)]
        sig = css_core.modulate_symbols(p, symbols)
        values, _, _ = css_core.demodulate_symbols(sig.samples, p)
        np.testing.assert_array_equal(values, np.arange(p.chips))

    @pytest.mark.parametrize("sf", [10, 11, 12])
    def test_random_large_sf(self, sf: int, rng: np.random.Generator) -> None:
        """1000 random values decode back for sf 10 to 12."""
        p = ChirpParams(sf=sf, bw=125000)
        values_in = rng.integers(0, p.chips, size=1000)
        sig = css_core.modulate_symbols(p, [ChirpSymbol(int(v)) for v in values_in])
        values, _, _ = css_core.demodulate_symbols(sig.samples, p)
        np.testing.assert_array_equal(values, values_in)

    @pytest.mark.parametrize("osf", [2, 4, 8])
    def test_oversampled_round_trip(self, osf: int) -> None:
        """Folding the oversampled spectrum keeps values exact."""
        p = ChirpParams(sf=8, bw=125000, osf=osf)
        symbols = [ChirpSymbol(v) for v in range(0, p.chips, 7)]
        sig = css_core.modulate_symbols(p, symbols)
        values, _, _ = css_core.demodulate_symbols(sig.samples, p)
        assert list(values) == [s.value for s in symbols]

    def test_single_symbol_result(self, sf7: ChirpParams) -> None:
        """demodulate_symbol reports a sharp peak on a clean chirp."""
        result = css_core.demodulate_symbol(
            css_core.modulate_symbol(sf7, ChirpSymbol(42)), sf7
        )
        assert result.value == 42
        assert result.peak_mag == pytest.approx(128.0)
        assert result.peak_to_mean > 50

    def test_down_reference_decodes_down_chirp(self, sf7: ChirpParams) -> None:
        """A plain down-chirp reads as value 0 against the down reference."""
        down = css_core.base_chirp(sf7, "down").samples
        values, _, _ = css_core.demodulate_symbols(down, sf7, reference="down")
        assert values[0] == 0


class TestLengthChecks:
    """Test cases for the sample-count guards."""

    def test_wrong_length_single(self, sf7: ChirpParams) -> None:
        """One sample short of a symbol is an error."""
        sig = IqSignal(np.ones(127, dtype=complex), sf7.sample_rate)
        with pytest.raises(LengthMismatch):
            css_core.demodulate_symbol(sig, sf7)

    def test_wrong_length_block(self, sf7: ChirpParams) -> None:
        """Blocks must hold whole symbols."""
        with pytest.raises(LengthMismatch):
            css_core.demodulate_symbols(np.ones(200, dtype=complex), sf7)


class TestBitPacking:
    """Test cases for bit/symbol packing."""

    def test_msb_first(self, sf7: ChirpParams) -> None:
        """The first bit is the symbol's most significant bit."""
        symbols = css_core.bits_to_symbols([1, 0, 0, 0, 0, 0, 1], sf7)
        assert [s.value for s in symbols] == [65]

    def test_tail_zero_padded(self, sf7: ChirpParams) -> None:
        """A partial symbol is padded with zeros."""
        symbols = css_core.bits_to_symbols([1] * 9, sf7)
        assert [s.value for s in symbols] == [127, 96]
        assert css_core.symbols_to_bits(symbols, sf7)[:9] == [1] * 9

    def test_rejects_non_bits(self, sf7: ChirpParams) -> None:
        with pytest.raises(ValueError, match="0 or 1"):
            css_core.bits_to_symbols([0, 2], sf7)


class TestSensitivityModel:
    """Test cases for the Monte-Carlo SER model."""

    def test_ser_high_at_low_snr(self, rng: np.random.Generator) -> None:
        """Far below threshold nearly every symbol is wrong."""
        assert css_core.symbol_error_rate(7, -25.0, 200, rng) > 0.9

    def test_ser_zero_at_high_snr(self, rng: np.random.Generator) -> None:
        """Well above threshold no symbol is wrong."""
        assert css_core.symbol_error_rate(7, 0.0, 200, rng) == 0.0

    def test_required_snr_falls_with_sf(self) -> None:
        """Each extra spreading-factor step buys roughly 2.5 dB."""
        snr = [css_core.required_snr_db(sf) for sf in (7, 8, 9)]
        assert snr[0] > snr[1] > snr[2]
        assert snr[0] - snr[2] == pytest.approx(5.0, abs=2.0)


class TestCoherentFold:
    """Test cases for folding the oversampled dechirped spectrum."""

    def test_wrapped_symbol_keeps_full_peak(self) -> None:
        """Both sides of the frequency wrap land in one bin at full height."""
        p = ChirpParams(sf=8, bw=125000, osf=4)
        symbols = [ChirpSymbol(v) for v in range(0, p.chips, 37)]
        sig = css_core.modulate_symbols(p, symbols)
        values, peaks, _ = css_core.demodulate_symbols(sig.samples, p)
        assert list(values) == [s.value for s in symbols]
        np.testing.assert_allclose(peaks, p.samples_per_symbol, rtol=1e-9)

    def test_noise_adds_as_complex_values(self, rng: np.random.Generator) -> None:
        """Folded noise magnitude grows by sqrt(2), not by 2."""
        p = ChirpParams(sf=8, bw=125000, osf=2)
        n = 400 * p.samples_per_symbol
        noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        spectrum = np.fft.fft(noise.reshape(-1, p.samples_per_symbol), axis=1)
        folded = css_core._fold(spectrum, p.chips, p.osf)
        single = np.abs(spectrum[:, : p.chips]).mean()
        assert folded.mean() / single == pytest.approx(np.sqrt(2), rel=0.03)

    @pytest.mark.parametrize("sf", [6, 7, 8, 9, 10, 11, 12])
    def test_noise_peak_to_mean_stays_low(
        self, sf: int, rng: np.random.Generator
    ) -> None:
        """Pure noise never looks like a chirp."""
        p = ChirpParams(sf=sf, bw=125000)
        n = 40 * p.samples_per_symbol
        noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        _, _, ratio = css_core.demodulate_symbols(noise, p)
        assert ratio.max() < 6.0
        assert ratio.mean() < PREAMBLE_MIN_PEAK_TO_MEAN + 1.0
