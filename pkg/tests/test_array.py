import cmath
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from afris.array import (
    C0,
    DEFAULT_CALIBRATION_OFFSET_DB,
    ArrayConfig,
    ArrayGeometry,
    PhaseCodeSequence,
    ScatterPattern,
    calibrate_bypass_loss,
    calibrate_offset,
    default_config,
    gain_vs_plate,
    plate_reference,
    scatter_pattern,
    subarray_field,
    synthesize_code,
)
from afris.rfchain import ChainConfig

IDENTITY = ChainConfig(enabled=False, bypass_loss_db=0.0)
WIDE = ArrayGeometry(spacing_m=0.05)
F0 = 3.0e9


def identity_config(codes=None, geometry=ArrayGeometry(), q=0.0):
    if codes is not None and not isinstance(codes, PhaseCodeSequence):
        codes = PhaseCodeSequence(tuple(codes))
    return ArrayConfig(geometry=geometry, codes=codes, chain=IDENTITY, q=q)


def brute_subarray_field(codes, d, theta_in, theta_out, f, q=0.0):
    """Element-by-element sum, ideal lossless phase states, identity chain."""
    k = 2 * math.pi * f / C0
    m = len(codes)
    ef_in = math.cos(math.radians(theta_in)) ** (q / 2)
    ef_out = math.cos(math.radians(theta_out)) ** (q / 2)
    rx = 0j
    for n in range(m):
        rx += ef_in * cmath.exp(1j * k * d * n * math.sin(math.radians(theta_in)))
    tx = 0j
    for n, c in enumerate(codes):
        tx += ef_out * cmath.exp(1j * (math.radians(90 * c) + k * d * n * math.sin(math.radians(theta_out))))
    return rx * tx / m


def circ_dist(a, b):
    d = (a - b) % 360.0
    return min(d, 360.0 - d)


class TestSynthesize:
    def test_broadside_all_zero(self):
        assert synthesize_code(ArrayGeometry(), 0.0, F0).codes == (0,) * 8

    def test_thirty_degrees(self):
        assert synthesize_code(WIDE, 30.0, F0).codes == (0, 3, 2, 1, 0, 3, 2, 1)

    def test_minus_thirty_degrees(self):
        assert synthesize_code(WIDE, -30.0, F0).codes == (0, 1, 2, 3, 0, 1, 2, 3)

    def test_rejects_endfire(self):
        with pytest.raises(ValueError):
            synthesize_code(ArrayGeometry(), 90.0, F0)

    @given(
        st.floats(-89, 89),
        st.floats(1e9, 6e9),
        st.floats(0.01, 0.2),
        st.integers(1, 16),
    )
    def test_each_code_is_nearest(self, target, f, d, cols):
        geo = ArrayGeometry(cols=cols, spacing_m=d)
        codes = synthesize_code(geo, target, f).codes
        k = 2 * math.pi * f / C0
        for n, c in enumerate(codes):
            ideal = -math.degrees(k * d * n * math.sin(math.radians(target)))
            best = min(circ_dist(90 * j, ideal) for j in range(4))
            assert circ_dist(90 * c, ideal) <= best + 1e-9

    @given(st.floats(0.5, 89), st.floats(1e9, 6e9), st.floats(0.01, 0.2))
    def test_mirror_target_negates_codes(self, target, f, d):
        geo = ArrayGeometry(spacing_m=d)
        k = 2 * math.pi * f / C0
        fracs = [
            (math.degrees(k * d * n * math.sin(math.radians(target))) % 90.0) for n in range(geo.cols)
        ]
        assume(all(abs(x - 45.0) > 1e-6 for x in fracs))
        assert synthesize_code(geo, -target, f) == synthesize_code(geo, target, f).negated()

    def test_tie_goes_to_smaller_code(self):
        # spacing chosen so element 1 sits exactly 45 deg from both neighbours:
        # k d sin(target) = 45 deg with target 30 deg
        lam = C0 / F0
        geo = ArrayGeometry(cols=2, spacing_m=lam / 4)
        codes = synthesize_code(geo, 30.0, F0).codes
        # ideal phase -45 deg -> 315 deg, halfway between code 3 (270) and code 0 (360)
        assert codes == (0, 0)


class TestSubarrayField:
    def test_coherent_broadside(self):
        assert subarray_field(identity_config(), 0.0, 0.0, F0) == pytest.approx(8.0, abs=1e-12)

    def test_uniform_flip(self):
        cfg = identity_config([2] * 8)
        assert subarray_field(cfg, 0.0, 0.0, F0) == pytest.approx(-8.0, abs=1e-12)

    def test_steered_matches_direct_sum(self):
        codes = [0, 3, 2, 1, 0, 3, 2, 1]
        cfg = identity_config(codes, geometry=WIDE)
        got = subarray_field(cfg, 0.0, 30.0, F0)
        want = brute_subarray_field(codes, 0.05, 0.0, 30.0, F0)
        assert abs(got) == pytest.approx(abs(want), rel=1e-2)
        assert got == pytest.approx(want, rel=1e-12)
        # 2-bit quantization keeps the steered lobe close to the coherent sum
        assert 0.85 * 8 < abs(got) <= 8

    @settings(max_examples=50)
    @given(
        st.lists(st.integers(0, 3), min_size=1, max_size=12),
        st.floats(-80, 80),
        st.floats(-89, 89),
        st.floats(2e9, 4e9),
        st.floats(0, 4),
    )
    def test_against_direct_sum(self, codes, theta_in, theta_out, f, q):
        geo = ArrayGeometry(cols=len(codes))
        cfg = identity_config(codes, geometry=geo, q=q)
        got = subarray_field(cfg, theta_in, theta_out, f)
        want = brute_subarray_field(codes, geo.spacing_m, theta_in, theta_out, f, q)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)

    def test_chain_scales_field(self):
        cfg = ArrayConfig(chain=ChainConfig(amp_voltage=7.0, loss_db=0.0))
        assert abs(subarray_field(cfg, 0.0, 0.0, F0)) == pytest.approx(8 * 10 ** (26.5 / 20), rel=1e-12)


ANGLES = np.round(np.arange(-900, 901) * 0.1, 10)


class TestPattern:
    def test_broadside_peak(self):
        pat = scatter_pattern(identity_config(), 0.0, ANGLES, F0)
        assert pat.peak()[0] == 0.0

    @pytest.mark.parametrize("target", [-30, -20, -10, 10, 20, 30])
    def test_steered_peak(self, target):
        cfg = default_config(target_deg=target)
        peak_deg, _ = scatter_pattern(cfg, 0.0, ANGLES, F0).peak()
        assert abs(peak_deg - target) <= 3.0

    @pytest.mark.parametrize("target", [10, 20, 30])
    def test_reversed_codes_mirror(self, target):
        cfg = default_config(target_deg=target)
        fwd = scatter_pattern(cfg, 0.0, ANGLES, F0).values
        rev = scatter_pattern(cfg.with_codes(cfg.codes.reversed()), 0.0, ANGLES, F0).values
        np.testing.assert_allclose(rev, fwd[::-1], atol=1e-9)

    def test_peak_power_is_element_count_squared(self):
        for rows, cols in [(1, 1), (4, 8), (3, 5)]:
            cfg = identity_config(geometry=ArrayGeometry(rows=rows, cols=cols))
            peak_db = scatter_pattern(cfg, 0.0, [0.0], F0).values[0]
            assert 10 ** (peak_db / 10) == pytest.approx((rows * cols) ** 2, rel=1e-9)

    def test_doubling_aperture_adds_12_db(self):
        small = scatter_pattern(identity_config(), 0.0, [0.0], F0).values[0]
        big_geo = ArrayGeometry(rows=8, cols=16)
        big = scatter_pattern(identity_config(geometry=big_geo), 0.0, [0.0], F0).values[0]
        assert big - small == pytest.approx(20 * math.log10(4), abs=1e-9)
        assert round(big - small, 2) == 12.04

    def test_partitioned_grid_identical(self):
        cfg = default_config(target_deg=20)
        whole = scatter_pattern(cfg, 0.0, ANGLES, F0).values
        parts = np.concatenate([scatter_pattern(cfg, 0.0, chunk, F0).values for chunk in np.array_split(ANGLES, 7)])
        np.testing.assert_array_equal(whole, parts)

    def test_csv_format(self):
        pat = ScatterPattern(np.array([-1.0, 0.0, 12.345678]), np.array([1.0, 30.10299957, -7.0]))
        assert pat.to_csv() == "theta_deg,power_db\n-1,1\n0,30.103\n12.3457,-7\n"

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            ScatterPattern(np.array([1.0, 0.0]), np.array([0.0, 0.0]))


class TestPlate:
    def test_broadside_value(self):
        val = plate_reference(ArrayGeometry(), 0.0, [0.0], F0).values[0]
        assert val == pytest.approx(20 * math.log10(32), abs=1e-12)
        assert round(val, 2) == 30.10

    def test_single_element_flat(self):
        pat = plate_reference(ArrayGeometry(rows=1, cols=1), 0.0, ANGLES, F0)
        np.testing.assert_allclose(pat.values, 0.0, atol=1e-12)

    def test_thirty_degrees_direct_sum(self):
        k = 2 * math.pi * F0 / C0
        s = sum(cmath.exp(1j * k * 0.045 * n * math.sin(math.radians(30))) for n in range(8))
        want = 20 * math.log10(4 * abs(s))
        got = plate_reference(ArrayGeometry(), 0.0, [30.0], F0).values[0]
        assert got == pytest.approx(want, abs=1e-9)

    def test_specular_for_oblique_incidence(self):
        pat = plate_reference(ArrayGeometry(), 20.0, ANGLES, F0)
        assert pat.peak()[0] == pytest.approx(-20.0, abs=0.1)


class TestGainVsPlate:
    def test_identity_is_zero(self):
        assert gain_vs_plate(identity_config(), 0.0, F0) == pytest.approx(0.0, abs=1e-12)

    def test_calibrated_afris(self):
        assert 17.2 <= gain_vs_plate(default_config(amp_voltage=7.0), 0.0, F0) <= 21.1

    def test_calibrated_lossy(self):
        assert -8.5 <= gain_vs_plate(default_config(enabled=False), 0.0, F0) <= -4.9

    @pytest.mark.parametrize("target", [0, 10, 20, 30])
    @pytest.mark.parametrize("f", [2.8e9, 2.9e9, 3.0e9, 3.1e9, 3.2e9])
    def test_steered_ranges(self, target, f):
        assert 17.2 <= gain_vs_plate(default_config(target_deg=target), target, f) <= 21.1
        assert -8.5 <= gain_vs_plate(default_config(enabled=False, target_deg=target), target, f) <= -4.9

    def test_calibration_constants_reproduce(self):
        cfg = default_config()
        assert calibrate_offset(replace(cfg, calibration_offset_db=0.0)) == pytest.approx(
            DEFAULT_CALIBRATION_OFFSET_DB, abs=1e-9
        )
        assert calibrate_bypass_loss(cfg) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("offset", [1, 2, 3])
    @pytest.mark.parametrize("target", [0, 10, 20, 30])
    def test_code_offset_invariance(self, offset, target):
        cfg = default_config(target_deg=target)
        shifted = cfg.with_codes(cfg.codes.shifted(offset))
        assert gain_vs_plate(shifted, target, F0) == pytest.approx(gain_vs_plate(cfg, target, F0), abs=1e-9)
        a = scatter_pattern(cfg, 0.0, ANGLES, F0)
        b = scatter_pattern(shifted, 0.0, ANGLES, F0)
        assert a.peak()[0] == b.peak()[0]


class TestConfig:
    def test_code_length_checked(self):
        with pytest.raises(ValueError):
            ArrayConfig(codes=PhaseCodeSequence((0, 1)))

    def test_bad_code_value(self):
        with pytest.raises(ValueError):
            PhaseCodeSequence((0, 4))

    def test_negative_q(self):
        with pytest.raises(ValueError):
            ArrayConfig(q=-1)
