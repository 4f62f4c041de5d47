import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from afris.link import case_scenario, snr_db
from afris.modem import (
    MAX_CONSTELLATION_POINTS,
    apply_channel,
    qpsk_demodulate,
    qpsk_modulate,
    random_bits,
    run_case,
    simulate,
    split_seed,
)

R = 1 / math.sqrt(2)


def qfunc(x):
    return 0.5 * math.erfc(x / math.sqrt(2))


def qpsk_bit_error_theory(es_n0_db):
    # per-bit error of Gray QPSK: Q(sqrt(2 Eb/N0)) with Es = 2 Eb
    return qfunc(math.sqrt(10 ** (es_n0_db / 10)))


class TestModulate:
    def test_zero_pair(self):
        assert qpsk_modulate([0, 0])[0] == pytest.approx(R + 1j * R)

    def test_one_pair(self):
        assert qpsk_modulate([1, 1])[0] == pytest.approx(-R - 1j * R)

    def test_four_points_unit_power(self):
        s = qpsk_modulate([0, 0, 0, 1, 1, 0, 1, 1])
        assert len(set(np.round(s, 12))) == 4
        assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("bits", [[0], [0, 1, 1], [], [0, 2]])
    def test_bad_streams(self, bits):
        with pytest.raises(ValueError):
            qpsk_modulate(bits)


class TestChannel:
    def test_infinite_snr_passthrough(self):
        s = qpsk_modulate(random_bits(1000, 1))
        assert np.array_equal(apply_channel(s, math.inf, 5), s)

    def test_deterministic(self):
        s = qpsk_modulate(random_bits(1000, 1))
        assert np.array_equal(apply_channel(s, 10.0, 99), apply_channel(s, 10.0, 99))
        assert not np.array_equal(apply_channel(s, 10.0, 99), apply_channel(s, 10.0, 100))

    def test_noise_power(self):
        s = np.zeros(1_000_000, dtype=complex)
        noise = apply_channel(s, 10.0, 2024)
        assert np.mean(np.abs(noise) ** 2) == pytest.approx(0.1, rel=0.01)
        # circular: equal split between components, uncorrelated
        assert np.var(noise.real) == pytest.approx(0.05, rel=0.02)
        assert np.var(noise.imag) == pytest.approx(0.05, rel=0.02)
        assert abs(np.mean(noise.real * noise.imag)) < 1e-3

    def test_nan_snr_rejected(self):
        with pytest.raises(ValueError):
            apply_channel(np.ones(2), math.nan, 1)

    def test_split_seed_stable(self):
        assert split_seed(7) == split_seed(7)
        a, b = split_seed(7)
        assert a != b and 0 <= a < 2**64 and 0 <= b < 2**64


class TestDemodulate:
    def test_noiseless(self):
        bits = random_bits(2000, 3)
        r = qpsk_demodulate(qpsk_modulate(bits), bits)
        assert r.ber == 0 and r.evm_pct == 0 and r.snr_est_db == math.inf

    def test_all_flipped(self):
        bits = random_bits(2000, 3)
        r = qpsk_demodulate(-qpsk_modulate(bits), bits)
        assert r.ber == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            qpsk_demodulate(qpsk_modulate([0, 1, 1, 0]), [0, 1])

    def test_ber_matches_gaussian_tail(self):
        # channel SNR 8 dB per symbol -> per-bit error Q(sqrt(10^0.8))
        p = qpsk_bit_error_theory(8.0)
        assert p == pytest.approx(0.006004, abs=5e-7)
        r = simulate(8.0, 1_000_000, seed=11)
        sigma = math.sqrt(p * (1 - p) / r.n_bits)
        assert abs(r.ber - p) <= 3 * sigma

    def test_constellation_capped(self):
        r = simulate(20.0, 20_000, seed=1)
        assert len(r.constellation) == MAX_CONSTELLATION_POINTS
        text = r.constellation_csv()
        assert text.startswith("i,q\n")
        assert text.count("\n") == MAX_CONSTELLATION_POINTS + 1

    def test_report_text(self):
        r = simulate(15.0, 1000, seed=1)
        keys = [line.split("=")[0] for line in r.to_text().splitlines()]
        assert keys == ["snr_est_db", "evm_pct", "ber", "bit_errors", "n_bits"]

    @settings(max_examples=30)
    @given(st.integers(0, 2**64 - 1), st.integers(1, 500))
    def test_round_trip(self, seed, nsym):
        bits = random_bits(2 * nsym, seed)
        r = qpsk_demodulate(qpsk_modulate(bits), bits)
        assert r.bit_errors == 0

    def test_ber_monotone_over_ladder(self):
        bers = [simulate(snr, 200_000, seed=5).ber for snr in range(0, 14, 2)]
        assert all(a >= b for a, b in zip(bers, bers[1:]))

    @pytest.mark.parametrize("snr", [5.0, 10.0, 15.0, 20.0, 25.0])
    def test_snr_estimate(self, snr):
        r = simulate(snr, 2_000_000, seed=8)
        assert r.snr_est_db == pytest.approx(snr, abs=0.5)


class TestCases:
    def test_case3_clean(self):
        r = run_case(3, 1_000_000, seed=7)
        assert r.ber < 1e-4
        assert r.snr_est_db == pytest.approx(snr_db(case_scenario(3)), abs=0.5)

    def test_case1_cluttered(self):
        assert run_case(1, 1_000_000, seed=7).ber > 0.05

    def test_case4_rejected(self):
        assert snr_db(case_scenario(4)) <= snr_db(case_scenario(3)) - 10

    def test_seeded_reproducible(self):
        a = run_case(2, 10_000, seed=123)
        b = run_case(2, 10_000, seed=123)
        assert a.to_text() == b.to_text()
        assert np.array_equal(a.constellation, b.constellation)

    def test_bad_case(self):
        with pytest.raises(ValueError):
            run_case(6, 100, seed=1)
