import math

import numpy as np
import pytest

from qpcrepeater.physical import (
    build_detector_response,
    dark_count_flip_epsilon,
    dark_count_probability,
    p_matrix_advanced,
    p_matrix_dark,
    p_matrix_dark_leading_order,
    p_matrix_depol,
    p_matrix_loss,
    p_matrix_onoff,
    single_photon_loss_probability,
)

RNG = np.random.default_rng(1234)


def kraus_detector_response(eta_d: float, nbar: float, lmax: int = 200) -> np.ndarray:
    """Independent oracle: thermal-noise channel as a truncated Kraus sum."""

    def xi(s, l, u):
        acc = 0.0
        for n1 in range(0, u + 1):
            if not 0 <= s - n1 <= l:
                continue
            acc += (
                math.comb(u, n1)
                * math.comb(l, s - n1)
                * math.sqrt(eta_d) ** (u + s - 2 * n1)
                * math.sqrt(1.0 - eta_d) ** (l - s + 2 * n1)
                * (-1.0) ** (l - s + n1)
            )
        return acc

    probs = np.zeros((3, 3))
    for mu in range(3):
        for nu in (0, 1):
            total = 0.0
            for l in range(0, lmax + 1):
                weight = nbar**l / (nbar + 1.0) ** (l + 1)
                if weight < 1e-22 and l > 2:
                    break
                s = mu + l - nu
                if s < 0:
                    continue
                amp2 = (
                    math.factorial(nu)
                    * math.factorial(s)
                    / (math.factorial(mu) * math.factorial(l))
                    * xi(s, l, mu) ** 2
                )
                total += weight * amp2
            probs[mu, nu] = total
        probs[mu, 2] = 1.0 - probs[mu, 0] - probs[mu, 1]
    return probs


class TestLossMatrix:
    def test_perfect_detection(self):
        p = p_matrix_loss(1.0)
        col = p.column(3)
        assert col[2] == 1.0
        assert np.sum(col) == 1.0
        assert np.count_nonzero(col) == 1

    def test_transmission_value(self):
        eta = math.exp(-2.4 / 22.0)
        p = p_matrix_loss(eta)
        assert np.allclose(p.values[6, :], 1.0 - eta)
        # matches the quoted 0.1034 failure probability at 2.4 km spacing
        assert 1.0 - eta == pytest.approx(0.1034, abs=5e-5)

    @pytest.mark.parametrize("eta", [0.0, 0.3, 0.777, 1.0])
    def test_column_stochastic(self, eta):
        p = p_matrix_loss(eta)
        assert np.allclose(p.values.sum(axis=0), 1.0, atol=1e-12)


class TestDepolMatrix:
    def test_reduces_to_loss(self):
        eta = 0.83
        assert np.array_equal(p_matrix_depol(eta, 0.0).values, p_matrix_loss(eta).values)

    def test_flip_entry(self):
        p = p_matrix_depol(1.0, 0.01)
        assert p.entry(4, 3) == pytest.approx(0.005)  # (1,1) from phi_10 is (eps/2)*eta

    def test_structure(self):
        p = p_matrix_depol(0.9, 0.04)
        assert p.entry(3, 3) == pytest.approx((1 - 0.06) * 0.9)
        assert p.entry(5, 1) == pytest.approx(0.96 * 0.9)
        assert p.entry(5, 3) == pytest.approx(0.04 * 0.9)
        assert np.allclose(p.values.sum(axis=0), 1.0, atol=1e-12)


class TestAdvancedMatrix:
    def test_reduces_to_loss(self):
        eta_t = 0.64
        assert np.array_equal(p_matrix_advanced(eta_t, 0.0).values, p_matrix_loss(eta_t).values)

    def test_perfect_bm(self):
        p = p_matrix_advanced(1.0, 1.0)
        assert np.allclose(p.values[:4, :4], np.eye(4))

    def test_quoted_entry(self):
        p = p_matrix_advanced(0.9, 0.5)
        assert p.entry(1, 1) == pytest.approx(0.45)


class TestOnOffMatrix:
    def test_no_error_phi00(self):
        p = p_matrix_onoff(1.0, 0.0)
        assert p.entry(5, 1) == 1.0

    @pytest.mark.parametrize("eta", [0.3, 0.9, 1.0])
    @pytest.mark.parametrize("eps", [0.0, 0.01, 0.2])
    def test_row_merge(self, eta, eps):
        onoff = p_matrix_onoff(eta, eps).values
        depol = p_matrix_depol(eta, eps).values
        merged = depol.copy()
        merged[4, :] += merged[6, :]
        merged[6, :] = 0.0
        assert np.allclose(onoff, merged, atol=1e-15)

    def test_quoted_entry(self):
        p = p_matrix_onoff(0.9, 0.01)
        assert p.entry(5, 3) == pytest.approx(1.0 - 0.99 * 0.9)
        assert p.entry(5, 3) == pytest.approx(0.109)


class TestDetectorResponse:
    def test_perfect_detector(self):
        resp = build_detector_response(1.0, 0.4)
        assert resp.p(0, 0) == 1.0
        assert resp.p(1, 1) == 1.0
        assert resp.p(2, 2) == 1.0

    def test_pure_binomial_loss(self):
        resp = build_detector_response(0.9, 0.0)
        assert resp.p(1, 1) == pytest.approx(0.9)
        assert resp.p(1, 0) == pytest.approx(0.1)
        assert resp.p(2, 1) == pytest.approx(2 * 0.1 * 0.9)
        assert resp.p(2, 2) == pytest.approx(0.81)

    def test_quoted_vacuum_survival(self):
        resp = build_detector_response(0.97, 0.03)
        assert resp.p(0, 0) == pytest.approx(1.0 / (1.0 + 0.03 * 0.03), rel=1e-14)

    @pytest.mark.parametrize("eta_d", [0.5, 0.9, 0.97, 1.0])
    @pytest.mark.parametrize("nbar", [0.0, 0.03, 0.3, 1.5])
    def test_against_kraus_sum(self, eta_d, nbar):
        resp = build_detector_response(eta_d, nbar)
        oracle = kraus_detector_response(eta_d, nbar)
        assert np.allclose(resp.probs, oracle, atol=1e-12)

    def test_rows_normalized_random(self):
        for _ in range(300):
            resp = build_detector_response(RNG.uniform(0, 1), RNG.uniform(0, 2))
            assert np.allclose(resp.probs.sum(axis=1), 1.0, atol=1e-12)
            assert resp.probs.min() >= 0.0


class TestDarkCountProbability:
    def test_zero_cases(self):
        assert dark_count_probability(1.0, 0.5) == 0.0
        assert dark_count_probability(0.9, 0.0) == 0.0

    def test_quoted_value(self):
        got = dark_count_probability(0.97, 0.03)
        assert got == pytest.approx(9e-4 / 1.0009, rel=1e-12)
        assert got == pytest.approx(8.992e-4, abs=1e-6)


class TestDarkMatrix:
    def test_perfect_detectors_reduce_to_loss(self):
        for eta_t in (0.3, 0.9):
            for nbar in (0.0, 0.2):
                dark = p_matrix_dark(eta_t, 1.0, nbar).values
                assert np.allclose(dark, p_matrix_loss(eta_t).values, atol=1e-14)

    def test_no_thermal_reduces_to_lossy_detectors(self):
        for eta_t, eta_d in ((0.9, 0.97), (0.6, 0.8)):
            dark = p_matrix_dark(eta_t, eta_d, 0.0).values
            assert np.allclose(dark, p_matrix_loss(eta_d**2 * eta_t).values, atol=1e-14)

    def test_flip_entry_leading_order(self):
        eta_t = math.exp(-1.9 / 22.0)
        eta_d, nbar = 0.97, 0.03
        exact = p_matrix_dark(eta_t, eta_d, nbar)
        p_minus1 = (1 - eta_t) * eta_d + eta_t * 2 * (1 - eta_d) * eta_d
        eps_dc = p_minus1 * nbar * (1 - eta_d)
        # phi_10 read as (1,1): equals eps_dc up to O(nbar^2)
        assert exact.entry(4, 3) == pytest.approx(eps_dc, abs=20 * nbar**2)
        assert single_photon_loss_probability(eta_t, eta_d) == pytest.approx(p_minus1)
        assert dark_count_flip_epsilon(eta_t, eta_d, nbar) == pytest.approx(
            p_minus1 * dark_count_probability(eta_d, nbar), rel=1e-14
        )

    def test_residual_scales_quadratically(self):
        eta_t = math.exp(-1.9 / 22.0)
        ratios = []
        for nbar in (1e-2, 1e-3, 1e-4):
            exact = p_matrix_dark(eta_t, 0.97, nbar).values
            approx = p_matrix_dark_leading_order(eta_t, 0.97, nbar).values
            ratios.append(np.max(np.abs(exact - approx)) / nbar**2)
        # the residual-to-nbar^2 ratio stays bounded (approaches a constant)
        assert max(ratios) < 100.0
        assert max(ratios) <= 3.0 * min(ratios)

    def test_column_stochastic_random(self):
        for _ in range(300):
            mat = p_matrix_dark(RNG.uniform(0, 1), RNG.uniform(0.5, 1), RNG.uniform(0, 0.5))
            assert np.allclose(mat.values.sum(axis=0), 1.0, atol=1e-12)


def test_reduction_chain():
    for _ in range(200):
        eta = RNG.uniform(0, 1)
        base = p_matrix_loss(eta).values
        assert np.allclose(p_matrix_depol(eta, 0.0).values, base, atol=1e-14)
        assert np.allclose(p_matrix_advanced(eta, 0.0).values, base, atol=1e-14)
        assert np.allclose(p_matrix_dark(eta, 1.0, RNG.uniform(0, 1)).values, base, atol=1e-14)


def test_all_builders_column_stochastic_sweep():
    for _ in range(1000):
        eta = RNG.uniform(0, 1)
        eps = RNG.uniform(0, 0.5)
        for mat in (
            p_matrix_loss(eta),
            p_matrix_depol(eta, eps),
            p_matrix_advanced(eta, RNG.uniform(0, 1)),
            p_matrix_onoff(eta, eps),
        ):
            assert np.allclose(mat.values.sum(axis=0), 1.0, atol=1e-12)
