import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import solve_continuous_lyapunov

from antithetic.controller import ClosedLoopConfig
from antithetic.crn import linearize_propensities
from antithetic.errors import AnalysisError, DomainError
from antithetic.moment import (
    analysis_matrices,
    build_R_Q,
    closed_loop_stationary_mean,
    gene_R,
    gene_hurwitz_margin,
    gene_integral_variance,
    gene_openloop_variance,
    gene_variance_closed_form,
    gene_variance_limit,
    gene_variance_ratio,
    integrate_covariance,
    is_hurwitz,
    lyapunov_residual,
    maturation_R,
    maturation_beta_interval,
    maturation_openloop_variance,
    maturation_stability,
    maturation_stability_terms,
    maturation_variance_closed_form,
    solve_lyapunov,
    spectral_abscissa,
)
from antithetic.presets import (
    GENE,
    MATURATION,
    GeneExpressionParams,
    MaturationParams,
    gene_expression,
    maturation,
)

from conftest import birth_death

MU, THETA = 10.0, 2.0


def random_gene(rng):
    return GeneExpressionParams(*rng.uniform(0.2, 5.0, size=3))


def random_maturation(rng):
    return MaturationParams(*rng.uniform(0.2, 5.0, size=5))


# -- matrices ----------------------------------------------------------------

def test_gene_R_matches_display():
    lin = linearize_propensities(gene_expression(GENE))
    m = build_R_Q(lin, 1, 0, MU, THETA, 3.0, 1.5)
    assert np.array_equal(m.R, gene_R(GENE, THETA, 3.0, 1.5))
    assert m.R.tolist() == [[-2, -1.5, 3], [2, -7, 0], [0, -2, 0]]
    assert m.c == pytest.approx(35.0)
    assert np.array_equal(m.Q, m.Q.T)
    assert m.Q[2, 2] == 2 * MU and m.Q[0, 0] == pytest.approx(2 * 35.0)


def test_maturation_R_matches_display():
    lin = linearize_propensities(maturation(MATURATION))
    m = build_R_Q(lin, 2, 0, MU, THETA, 2.0, 4.0)
    assert np.allclose(m.R, maturation_R(MATURATION, THETA, 2.0, 4.0))
    assert m.R[-1].tolist() == [0, 0, -THETA, 0]


def test_beta_zero_has_no_proportional_term():
    lin = linearize_propensities(gene_expression(GENE))
    R = build_R_Q(lin, 1, 0, MU, THETA, 3.0, 0.0).R
    assert np.array_equal(R[:2, :2], lin.SW)


def test_stationary_means():
    lin = linearize_propensities(gene_expression(GENE))
    assert np.allclose(closed_loop_stationary_mean(lin, 1, MU, THETA), [17.5, 5.0])
    m = closed_loop_stationary_mean(linearize_propensities(maturation(MATURATION)), 2, MU, THETA)
    assert m[2] == pytest.approx(5.0)
    bd = linearize_propensities(birth_death(0.0, 1.0))
    assert np.allclose(closed_loop_stationary_mean(bd, 0, MU, THETA), [5.0])


def test_analysis_matrices_from_config():
    cfg = ClosedLoopConfig(mu=MU, theta=THETA, eta=100, k=3, controlled=1)
    m = analysis_matrices(gene_expression(GENE), cfg, beta=2.0)
    assert m.R[0, 1] == -2.0 and m.R[0, 2] == 3.0
    assert m.D.shape == (4, 4) and np.all(np.diag(m.D) >= 0)


# -- Hurwitz -----------------------------------------------------------------

def test_hurwitz_examples():
    assert is_hurwitz(np.diag([-1.0, -2.0]))
    assert not is_hurwitz(np.diag([-1.0, 0.0]))
    assert not is_hurwitz(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert is_hurwitz(gene_R(GENE, THETA, 3.0, 0.0))
    assert gene_hurwitz_margin(GENE, THETA, 3.0, 0.0) == pytest.approx(1 - 12 / 126)
    # the condition crosses zero at k = 31.5 for the published parameters
    assert gene_hurwitz_margin(GENE, THETA, 11.0, 0.0) > 0
    assert not is_hurwitz(gene_R(GENE, THETA, 40.0, 0.0))
    with pytest.raises(AnalysisError):
        spectral_abscissa(np.array([[np.nan]]))


def test_gene_routh_agrees_with_eigenvalues(rng):
    checked = 0
    for _ in range(1000):
        p = random_gene(rng)
        theta, k, beta = rng.uniform(0.1, 5), rng.uniform(0.01, 60), rng.uniform(0, 5)
        margin = gene_hurwitz_margin(p, theta, k, beta)
        if abs(margin) < 1e-6:
            continue
        assert is_hurwitz(gene_R(p, theta, k, beta)) == (margin > 0)
        checked += 1
    assert checked > 950


def test_maturation_routh_agrees_with_eigenvalues(rng):
    for _ in range(1000):
        p = random_maturation(rng)
        theta, k = rng.uniform(0.1, 5), rng.uniform(0.01, 30)
        beta_max = maturation_stability_terms(p, theta, k)[0]
        beta = rng.uniform(0, 1.2 * beta_max)
        assert is_hurwitz(maturation_R(p, theta, k, beta)) == \
            maturation_stability(p, theta, k, beta)


def test_maturation_preset_reduction():
    for k in (0.5, 3.0, 8.0):
        beta_max, a2, s1, s0 = maturation_stability_terms(MATURATION, THETA, k)
        assert beta_max == pytest.approx(30.0)
        # 9 b^2 - 246 b + 294 k - 720 up to a positive factor
        scale = a2 / 9
        assert s1 / scale == pytest.approx(-246)
        assert s0 / scale == pytest.approx(294 * k - 720)
    lo, hi = maturation_beta_interval(MATURATION, THETA, 3.0)
    assert lo == pytest.approx((41 - 7 * math.sqrt(31)) / 3)
    assert hi == pytest.approx((41 + 7 * math.sqrt(31)) / 3)
    assert maturation_beta_interval(MATURATION, THETA, 49 / 6 + 0.01) is None
    lo0, hi0 = maturation_beta_interval(MATURATION, THETA, 1e-12)
    assert lo0 == 0.0 and hi0 == pytest.approx(30.0, rel=1e-9)


# -- Lyapunov ----------------------------------------------------------------

def test_lyapunov_trivial_cases():
    assert np.allclose(solve_lyapunov(-np.eye(2), 2 * np.eye(2)), np.eye(2))
    assert np.allclose(solve_lyapunov(np.diag([-1.0, -2.0]), np.diag([2.0, 4.0])), np.eye(2))


def test_lyapunov_refuses_non_hurwitz():
    with pytest.raises(DomainError, match="outside validity domain") as info:
        solve_lyapunov(gene_R(GENE, THETA, 40.0, 0.0), np.eye(3))
    assert info.value.eigenvalue.real >= 0


def test_lyapunov_against_scipy(rng):
    for _ in range(50):
        n = rng.integers(2, 7)
        A = rng.normal(size=(n, n))
        A -= (np.max(np.linalg.eigvals(A).real) + rng.uniform(0.1, 2)) * np.eye(n)
        B = rng.normal(size=(n, n))
        Q = B @ B.T
        S = solve_lyapunov(A, Q)
        ref = solve_continuous_lyapunov(A, -Q)
        assert np.allclose(S, ref, rtol=1e-9, atol=1e-12 * np.abs(ref).max())
        res, scale = lyapunov_residual(A, S, Q)
        assert res <= 1e-10 * scale
        assert np.array_equal(S, S.T)
        assert np.min(np.linalg.eigvalsh(S)) > -1e-9 * np.abs(S).max()


@pytest.mark.parametrize("k,beta", [(1.0, 0.0), (3.0, 0.0), (3.0, 4.0), (7.0, 0.5)])
def test_gene_closed_form_equals_lyapunov(k, beta):
    lin = linearize_propensities(gene_expression(GENE))
    m = build_R_Q(lin, 1, 0, MU, THETA, k, beta)
    S = solve_lyapunov(m.R, m.Q)
    assert S[1, 1] == pytest.approx(gene_variance_closed_form(GENE, MU, THETA, k, beta),
                                    rel=1e-9)


def test_maturation_closed_form_equals_lyapunov():
    lin = linearize_propensities(maturation(MATURATION))
    for k in np.linspace(0.2, 8.0, 9):
        lo, hi = maturation_beta_interval(MATURATION, THETA, k)
        for beta in np.linspace(lo, hi, 12)[1:-1]:
            m = build_R_Q(lin, 2, 0, MU, THETA, k, beta)
            S = solve_lyapunov(m.R, m.Q)
            v = maturation_variance_closed_form(MATURATION, MU, THETA, k, beta)
            assert S[2, 2] == pytest.approx(v, rel=1e-9)


def test_covariance_ode_relaxes_to_lyapunov():
    R = gene_R(GENE, THETA, 3.0, 1.0)
    m = build_R_Q(linearize_propensities(gene_expression(GENE)), 1, 0, MU, THETA, 3.0, 1.0)
    path = integrate_covariance(R, m.Q, np.linspace(0, 60, 601))
    assert np.allclose(path[-1], solve_lyapunov(R, m.Q), rtol=1e-6)


# -- gene expression closed forms ---------------------------------------------

def test_gene_values():
    assert gene_openloop_variance(GENE, MU, THETA) == pytest.approx(55 / 9)
    v = gene_variance_closed_form(GENE, MU, THETA, 3.0, 0.0)
    assert v == pytest.approx(5 * (1 + 2 / 9 + 6 / 14) / (1 - 12 / 126))
    assert round(v, 3) == 9.123
    assert gene_integral_variance(GENE, MU, THETA, 3.0) == v
    assert gene_variance_ratio(GENE, MU, THETA, 3.0) == pytest.approx(v / (55 / 9))
    assert round(gene_variance_ratio(GENE, MU, THETA, 3.0), 3) == 1.493
    assert gene_variance_limit(GENE, MU, THETA) == pytest.approx(35 / 9)
    assert gene_variance_closed_form(GENE, MU, THETA, 1e-12, 0.0) == pytest.approx(55 / 9)
    assert gene_variance_closed_form(GENE, MU, THETA, 3.0, 1e6) == \
        pytest.approx(35 / 9, rel=1e-3)
    with pytest.raises(DomainError):
        gene_variance_closed_form(GENE, MU, THETA, 40.0, 0.0)


def test_gene_ratio_above_one_and_increasing():
    ks = np.linspace(0.01, 31.0, 200)
    ratios = [gene_variance_ratio(GENE, MU, THETA, k) for k in ks]
    assert min(ratios) > 1.0
    assert np.all(np.diff(ratios) > 0)


def test_gene_decreasing_in_beta_with_crossing(rng):
    for _ in range(100):
        p = random_gene(rng)
        theta = rng.uniform(0.5, 3)
        k_max = p.gamma_r * p.gamma_p * (p.gamma_r + p.gamma_p) / (theta * p.k_p)
        k = rng.uniform(0.01, 0.99) * k_max
        betas = np.linspace(0, 50, 60)
        v = np.array([gene_variance_closed_form(p, MU, theta, k, b) for b in betas])
        assert np.all(np.diff(v) < 0)
        # the limit lies below the open-loop value, so some finite beta_c beats it
        assert gene_variance_limit(p, MU, theta) < gene_openloop_variance(p, MU, theta)
        assert gene_variance_closed_form(p, MU, theta, k, 1e7) < \
            gene_openloop_variance(p, MU, theta)


# -- maturation closed forms ----------------------------------------------------

def test_maturation_open_loop_exact():
    v = maturation_openloop_variance(MATURATION, MU, THETA)
    assert abs(v - 37 / 6) < 1e-12
    exact = Fraction(5) * (1 + Fraction(1 * 3 * (3 + 2 + 1 + 1), (2 + 1) * (2 + 1 + 3) * (1 + 1 + 3)))
    assert exact == Fraction(37, 6)
    p = MATURATION
    tiny = MaturationParams(1e-12, p.gamma_r, p.gamma_p, p.k_m, p.gamma_m)
    assert maturation_openloop_variance(tiny, MU, THETA) == pytest.approx(5.0)


def test_maturation_limits_and_domain():
    assert maturation_variance_closed_form(MATURATION, MU, THETA, 1e-9, 0.0) == \
        pytest.approx(37 / 6, rel=1e-6)
    with pytest.raises(DomainError):
        maturation_variance_closed_form(MATURATION, MU, THETA, 3.0, 0.1)
    lo, hi = maturation_beta_interval(MATURATION, THETA, 3.0)
    near = [maturation_variance_closed_form(MATURATION, MU, THETA, 3.0, b)
            for b in (lo + 1e-6, hi - 1e-6)]
    assert min(near) > 1e4  # diverges at the stability boundary


def test_maturation_non_monotone_in_beta():
    lo, hi = maturation_beta_interval(MATURATION, THETA, 3.0)
    betas = np.linspace(lo, hi, 202)[1:-1]
    v = np.array([maturation_variance_closed_form(MATURATION, MU, THETA, 3.0, b)
                  for b in betas])
    i = int(np.argmin(v))
    assert 0 < i < v.size - 1
    assert np.all(np.diff(v[:i + 1]) < 0) and np.all(np.diff(v[i:]) > 0)
