import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from robustxai.core import Metric
from robustxai.discrepancy import (SIM_EPS, discrepancy_batch, discrepancy_value, mse,
                                   pcc, pcc_batch, ssim)
from robustxai.errors import ContractViolation, DegenerateVariance

finite_vec = st.lists(st.floats(-100, 100), min_size=3, max_size=8)


@st.composite
def vector_pair(draw):
    n = draw(st.integers(3, 8))
    elem = st.floats(-100, 100)
    a = np.array(draw(st.lists(elem, min_size=n, max_size=n)))
    b = np.array(draw(st.lists(elem, min_size=n, max_size=n)))
    return a, b


class TestMse:
    def test_identity(self):
        assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_unit(self):
        assert mse([0, 0], [1, 1]) == 1.0

    def test_exact_rational(self):
        # ((1-3)^2 + 0 + (3-1)^2) / 3 = 8/3 by direct evaluation
        assert mse([1, 2, 3], [3, 2, 1]) == pytest.approx(8 / 3, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ContractViolation):
            mse([1, 2], [1, 2, 3])

    @given(vector_pair())
    def test_symmetric(self, pair):
        a, b = pair
        assert mse(a, b) == pytest.approx(mse(b, a), rel=1e-12, abs=1e-15)


class TestPcc:
    def test_perfect(self):
        assert pcc([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_anticorrelated(self):
        a = np.array([1.0, 2.0, 5.0])
        assert pcc(a, -a + 3.0) == pytest.approx(-1.0)

    def test_exact_half(self):
        # centered a=(-1,0,1), b=(-1,1,0): dot=1, norms sqrt(2)*sqrt(2) -> 0.5
        assert pcc([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateVariance):
            pcc([1, 1, 1], [1, 2, 3])

    @given(vector_pair(), st.floats(0.1, 10), st.floats(-5, 5))
    @settings(suppress_health_check=[HealthCheck.filter_too_much])
    def test_affine_invariance_and_symmetry(self, pair, lam, c):
        a, b = pair
        # exclude near-constant vectors whose centered values drown in rounding
        assume(np.std(a) > 1e-3 * (1 + np.abs(a).max()))
        assume(np.std(b) > 1e-3 * (1 + np.abs(b).max()))
        base = pcc(a, b)
        assert pcc(b, a) == pytest.approx(base, abs=1e-12)
        assert pcc(lam * a + c, b) == pytest.approx(base, abs=1e-9)


class TestSsim:
    def test_identity(self):
        a = np.arange(64.0)
        assert ssim(a, a, (8, 8)) == pytest.approx(1.0)

    def test_equal_constants(self):
        a = np.full(64, 3.5)
        assert ssim(a, a.copy(), (8, 8)) == 1.0

    def test_zero_mean_negation_single_window(self):
        # one 7x7 window, zero-mean pattern vs its negation: the luminance term
        # is exactly 1 and the structure term evaluates to (c2 - 2v)/(c2 + 2v)
        gen = np.random.default_rng(0)
        a = gen.normal(0, 1, 49)
        a -= a.mean()
        b = -a
        rng_joint = max(a.max(), b.max()) - min(a.min(), b.min())
        c2 = (0.03 * rng_joint) ** 2
        v = a.var()
        expected = (c2 - 2 * v) / (c2 + 2 * v)
        got = ssim(a, b, (7, 7))
        assert got == pytest.approx(expected, abs=1e-12)
        assert got < -0.9

    def test_shape_mismatch(self):
        with pytest.raises(ContractViolation):
            ssim(np.zeros(10), np.zeros(10), (3, 3))

    def test_window_too_large(self):
        with pytest.raises(ContractViolation):
            ssim(np.zeros(16), np.zeros(16), (4, 4), window=7)


class TestDiscrepancyValue:
    def test_identity_inv_pcc(self):
        out = discrepancy_value(Metric.INV_PCC, [1, 2, 3], [1, 2, 3])
        assert out.d == pytest.approx(1.0)

    def test_beta_default_value(self):
        # similarity exactly 0.4 inverts to the inconsistency threshold 2.5
        a = np.array([1.0, 2.0, 3.0, 4.0])
        found = None
        # construct a pair with pcc == 0.4 analytically: mix a with its negation
        # b = w*a_c + sqrt(1-w^2)*q where q orthogonal to a_c, w = 0.4
        a_c = a - a.mean()
        q = np.array([1.0, -1.0, -1.0, 1.0])
        q = q - q.mean()
        q = q / np.linalg.norm(q) * np.linalg.norm(a_c)
        assert abs(a_c @ q) < 1e-9
        b = 0.4 * a_c + np.sqrt(1 - 0.16) * q
        found = discrepancy_value(Metric.INV_PCC, a, b)
        assert found.raw_similarity == pytest.approx(0.4, abs=1e-12)
        assert found.d == pytest.approx(2.5, abs=1e-9)

    def test_anticorrelated_clamps(self):
        a = np.array([1.0, 2.0, 3.0])
        out = discrepancy_value(Metric.INV_PCC, a, -a)
        assert out.d == pytest.approx(1.0 / SIM_EPS)

    def test_degenerate_maps_to_max(self):
        out = discrepancy_value(Metric.INV_PCC, [1, 1, 1], [1, 2, 3])
        assert out.d == pytest.approx(1e6)
        assert np.isnan(out.raw_similarity)

    def test_mse_passthrough(self):
        out = discrepancy_value(Metric.MSE, [1, 2, 3], [3, 2, 1])
        assert out.d == pytest.approx(8 / 3, abs=1e-12)

    def test_ssim_needs_shape(self):
        with pytest.raises(ContractViolation):
            discrepancy_value(Metric.INV_SSIM, np.zeros(4), np.zeros(4))

    @given(st.floats(0.01, 1.0), st.floats(0.01, 1.0))
    def test_monotone_in_similarity(self, s1, s2):
        # inverse discrepancy ordering must follow similarity ordering
        d1 = 1.0 / np.clip(s1, SIM_EPS, 1.0)
        d2 = 1.0 / np.clip(s2, SIM_EPS, 1.0)
        if s1 < s2:
            assert d1 >= d2

    def test_bounded(self):
        a = np.array([1.0, 0.5, -2.0])
        for b in ([1.0, 0.5, -2.0], [-1.0, -0.5, 2.0], [5.0, 5.0, 5.0]):
            d = discrepancy_value(Metric.INV_PCC, a, b).d
            assert 0 <= d <= 1.0 / SIM_EPS


class TestBatchConsistency:
    def test_pcc_batch_matches_scalar(self):
        gen = np.random.default_rng(1)
        ref = gen.normal(size=16)
        maps = gen.normal(size=(5, 16))
        batched = pcc_batch(ref, maps)
        for i in range(5):
            assert batched[i] == pytest.approx(pcc(ref, maps[i]), abs=1e-12)

    def test_discrepancy_batch_matches_scalar(self):
        gen = np.random.default_rng(2)
        ref = gen.normal(size=16)
        maps = gen.normal(size=(6, 16))
        maps[3] = 0.0  # degenerate row
        for metric in (Metric.INV_PCC, Metric.MSE):
            batched = discrepancy_batch(metric, ref, maps)
            for i in range(6):
                expect = discrepancy_value(metric, ref, maps[i]).d
                assert batched[i] == pytest.approx(expect, rel=1e-12)

    def test_standardize_switch(self):
        gen = np.random.default_rng(3)
        ref = gen.normal(size=16)
        maps = 3.0 * ref[None, :] + 2.0
        raw = discrepancy_batch(Metric.MSE, ref, maps, standardize=False)[0]
        std = discrepancy_batch(Metric.MSE, ref, maps, standardize=True)[0]
        assert raw > 0.1
        assert std == pytest.approx(0.0, abs=1e-12)
