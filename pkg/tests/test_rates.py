"""Tests for the rate expressions: legitimate, eavesdropper, secrecy."""

import numpy as np
import pytest
from scipy.linalg import eigh

from anofdm.allocation import an_power_known_csi, an_power_unknown_csi
from anofdm.ofdm import ChannelPair, OfdmConfig, channel_frequency_response, sample_channel
from anofdm.precoding import build_precoder_set, structured_stream_powers
from anofdm.rates import (
    RateBreakdown,
    eve_whitened_gains,
    interference_cov,
    rate_bob,
    rate_eve_approx,
    rate_eve_joint,
    rate_eve_persub,
    secrecy,
    to_bits_per_sec,
)

CFG = OfdmConfig(64, 16)


def an_setup(seed, lb=4, le=8, cfg=CFG):
    rng = np.random.default_rng(seed)
    pair = ChannelPair(sample_channel(lb, rng), sample_channel(le, rng))
    pre = build_precoder_set(pair, cfg, with_align=True)
    g = channel_frequency_response(pair.eve, cfg.n_sub)
    h = channel_frequency_response(pair.bob, cfg.n_sub)
    return rng, pre, h, g


class TestRateBob:
    def test_unit_everything(self):
        r = rate_bob(np.ones(2, dtype=complex), np.ones(2), 1.0)
        assert r == pytest.approx(2.0)

    def test_zero_power(self):
        assert rate_bob(np.ones(8, dtype=complex), np.zeros(8), 1.0) == 0.0

    def test_matches_scalar_loop(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        p = rng.uniform(0, 5, 16)
        expected = sum(
            np.log2(1 + abs(h[k]) ** 2 * p[k] / 0.7) for k in range(16)
        )
        assert rate_bob(h, p, 0.7) == pytest.approx(expected, rel=1e-12)


class TestInterferenceCov:
    def test_zero_power_zero_matrix(self):
        _, pre, _, _ = an_setup(1)
        cov = interference_cov(pre.an_channel, pre.align, np.zeros(CFG.n_cp))
        assert np.abs(cov).max() == 0.0

    def test_aligned_equals_svd_product(self):
        rng, pre, _, _ = an_setup(2)
        p_z = rng.uniform(0, 3, CFG.n_cp)
        cov = interference_cov(pre.an_channel, pre.align, p_z)
        lam = pre.singular_matrix
        direct = pre.svd_left @ (lam * p_z) @ lam.T @ pre.svd_left.conj().T
        assert np.abs(cov - direct).max() < 1e-10

    def test_rank_bounded_by_active_streams(self):
        _, pre, _, _ = an_setup(3)
        p_z = np.zeros(CFG.n_cp)
        p_z[:3] = 1.0
        cov = interference_cov(pre.an_channel, pre.align, p_z)
        eigs = np.linalg.eigvalsh(cov)
        assert np.sum(eigs > 1e-9 * max(eigs.max(), 1e-300)) <= min(3, pre.useful_streams)

    def test_rejects_negative_power(self):
        _, pre, _, _ = an_setup(4)
        with pytest.raises(ValueError):
            interference_cov(pre.an_channel, None, -np.ones(CFG.n_cp))


class TestRateEveJoint:
    def test_no_interference_reduces_to_diagonal(self):
        _, pre, _, g = an_setup(5)
        p = np.random.default_rng(5).uniform(0, 4, CFG.n_sub)
        r = rate_eve_joint(g, p, np.zeros((CFG.n_sub, CFG.n_sub)), 1.3)
        expected = float(np.sum(np.log2(1 + np.abs(g) ** 2 * p / 1.3)))
        assert r == pytest.approx(expected, rel=1e-12)

    def test_hand_two_by_two_determinant(self):
        g = np.ones(2, dtype=complex)
        p = np.ones(2)
        k = np.diag([1.0, 0.0])
        r = rate_eve_joint(g, p, k, 1.0)
        assert r == pytest.approx(np.log2(3 / 2) + np.log2(2.0), rel=1e-12)

    def test_more_noise_power_never_helps_eve(self):
        rng, pre, _, g = an_setup(6)
        p_x = rng.uniform(0, 5, CFG.n_sub)
        for _ in range(20):
            p_z = rng.uniform(0, 2, CFG.n_cp)
            bump = p_z.copy()
            bump[int(rng.integers(0, CFG.n_cp))] += rng.uniform(0.1, 3.0)
            r_lo = rate_eve_joint(g, p_x, interference_cov(pre.an_channel, pre.align, p_z), 1.0)
            r_hi = rate_eve_joint(g, p_x, interference_cov(pre.an_channel, pre.align, bump), 1.0)
            assert r_hi <= r_lo + 1e-9

    def test_matches_generalized_eigenvalue_form(self):
        # independent evaluation: log2 det(I + A M^-1) = sum log2(eig(A, M) + 1)
        rng, pre, _, g = an_setup(7)
        p_x = rng.uniform(0, 5, CFG.n_sub)
        p_z = rng.uniform(0, 2, CFG.n_cp)
        cov = interference_cov(pre.an_channel, pre.align, p_z)
        m = cov + 1.0 * np.eye(CFG.n_sub)
        a = np.diag(np.abs(g) ** 2 * p_x)
        eigs = eigh(a, m, eigvals_only=True)
        expected = float(np.sum(np.log2(1 + eigs)))
        assert rate_eve_joint(g, p_x, cov, 1.0) == pytest.approx(expected, abs=1e-8)


class TestRateEvePersub:
    def test_no_interference_matches_diagonal(self):
        _, pre, _, g = an_setup(8)
        p = np.random.default_rng(8).uniform(0, 4, CFG.n_sub)
        zero = np.zeros((CFG.n_sub, CFG.n_sub))
        assert rate_eve_persub(g, p, zero, 1.0) == pytest.approx(
            rate_eve_joint(g, p, zero, 1.0), rel=1e-12
        )

    def test_diagonal_interference_matches_joint(self):
        rng = np.random.default_rng(9)
        g = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        p = rng.uniform(0, 4, 8)
        k = np.diag(rng.uniform(0, 3, 8))
        assert rate_eve_persub(g, p, k, 1.0) == pytest.approx(
            rate_eve_joint(g, p, k, 1.0), abs=1e-10
        )

    def test_never_beats_joint_decoding(self):
        rng = np.random.default_rng(10)
        for trial in range(200):
            lb, le = int(rng.integers(0, 17)), int(rng.integers(0, 17))
            pair = ChannelPair(sample_channel(lb, rng), sample_channel(le, rng))
            pre = build_precoder_set(pair, CFG, with_align=True)
            g = channel_frequency_response(pair.eve, CFG.n_sub)
            p_x = rng.uniform(0, 10, CFG.n_sub)
            p_z = an_power_known_csi(pre.singular_values, float(rng.uniform(0, 500)))
            cov = interference_cov(pre.an_channel, pre.align, p_z)
            assert rate_eve_persub(g, p_x, cov, 1.0) <= rate_eve_joint(g, p_x, cov, 1.0) + 1e-9


class TestRateEveApprox:
    def test_no_an_collapses_to_clear_rate(self):
        _, pre, _, g = an_setup(11)
        r = rate_eve_approx(g, 2.0, pre.singular_values, np.zeros(CFG.n_cp), 1.0, pre.useful_streams)
        expected = float(np.sum(np.log2(1 + np.abs(g) ** 2 * 2.0)))
        assert r == pytest.approx(expected, rel=1e-12)

    def test_all_subchannels_jammed_at_boundary(self):
        # hypothetical L_u = N: every subchannel carries the AN term
        rng = np.random.default_rng(12)
        n = 8
        g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        s = rng.uniform(0.5, 2.0, n)
        p_z = rng.uniform(0.5, 2.0, n)
        r = rate_eve_approx(g, 1.5, s, p_z, 1.0, n)
        expected = float(
            np.sum(np.log2(1 + np.abs(g) ** 2 * 1.5 / (1.0 + s**2 * p_z)))
        )
        assert r == pytest.approx(expected, rel=1e-12)

    def test_splits_at_useful_count(self):
        _, pre, _, g = an_setup(13)
        lu = pre.useful_streams
        p_z = an_power_unknown_csi(lu, CFG.n_cp, 100.0)
        r = rate_eve_approx(g, 2.0, pre.singular_values, p_z, 1.0, lu)
        sigma2 = 1.0 + pre.singular_values[:lu] ** 2 * p_z[:lu]
        expected = float(
            np.sum(np.log2(1 + np.abs(g[:lu]) ** 2 * 2.0 / sigma2))
            + np.sum(np.log2(1 + np.abs(g[lu:]) ** 2 * 2.0))
        )
        assert r == pytest.approx(expected, rel=1e-12)


class TestSecrecy:
    @pytest.mark.parametrize("rb,re,expected", [(3.0, 1.0, 2.0), (1.0, 3.0, 0.0), (2.5, 2.5, 0.0)])
    def test_clamped_difference(self, rb, re, expected):
        assert secrecy(rb, re) == expected


class TestToBitsPerSec:
    def test_paper_scaling(self):
        assert to_bits_per_sec(1.0, OfdmConfig(64, 16, bandwidth=1e6)) == pytest.approx(12500.0)

    def test_zero(self):
        assert to_bits_per_sec(0.0, CFG) == 0.0

    def test_longer_prefix_costs_rate(self):
        r1 = to_bits_per_sec(5.0, OfdmConfig(64, 8))
        r2 = to_bits_per_sec(5.0, OfdmConfig(64, 16))
        assert r2 < r1


class TestSylvesterConsistency:
    def test_determinant_vs_scalar_sum(self):
        from anofdm.rates import _logdet_pd

        rng = np.random.default_rng(14)
        for _ in range(50):
            pair = ChannelPair(sample_channel(4, rng), sample_channel(8, rng))
            pre = build_precoder_set(pair, CFG, with_align=True)
            p_z = an_power_known_csi(pre.singular_values, float(rng.uniform(1, 300)))
            lam = pre.singular_matrix
            k = pre.svd_left @ (lam * p_z) @ lam.T @ pre.svd_left.conj().T
            logdet = _logdet_pd(np.eye(CFG.n_sub) + k)
            scalar = float(np.sum(np.log2(1 + pre.singular_values**2 * p_z)))
            assert logdet == pytest.approx(scalar, abs=1e-9)


class TestNoAnCollapse:
    def test_three_rates_coincide_without_an(self):
        _, pre, h, g = an_setup(15)
        p = np.full(CFG.n_sub, 2.0)
        zero_cov = np.zeros((CFG.n_sub, CFG.n_sub))
        rj = rate_eve_joint(g, p, zero_cov, 1.0)
        rp = rate_eve_persub(g, p, zero_cov, 1.0)
        ra = rate_eve_approx(g, 2.0, pre.singular_values, np.zeros(CFG.n_cp), 1.0, pre.useful_streams)
        assert rj == pytest.approx(rp, abs=1e-9)
        assert rj == pytest.approx(ra, abs=1e-9)


class TestRateBreakdown:
    def test_clamps_are_exact(self):
        b = RateBreakdown.from_rates(5.0, 7.0, 3.0, 12500.0)
        assert b.r_sec_joint == 0.0
        assert b.r_sec_persub == 2.0
        assert np.isnan(b.r_eve_approx) and np.isnan(b.r_sec_approx)

    def test_whitened_gains(self):
        _, pre, _, g = an_setup(16)
        p_z = an_power_known_csi(pre.singular_values, 50.0)
        cov = interference_cov(pre.an_channel, pre.align, p_z)
        gains = eve_whitened_gains(g, cov, 1.0)
        eta = np.real(np.diag(cov))
        np.testing.assert_allclose(gains, np.abs(g) ** 2 / (eta + 1.0), rtol=1e-12)
