"""Moment-closure approximation of the closed-loop stationary covariance.

For a unimolecular open loop with ``lambda(x) = W x + w0`` the covariance of
``(X, Z1 - Z2)`` is approximated by the solution of ``R S + S R' + Q = 0``
with::

    R = [[SW - beta e_a e_l',  k e_a],      Q = [[S D S' + c e_a e_a', 0],
         [-theta e_l',         0    ]]           [0,                  2 mu]]

where ``D = diag(W m + w0)`` at the closed-loop mean ``m`` and ``c`` is the
nominal input.  Closed forms for the two unimolecular case studies are
provided alongside and are cross-checked against the generic solver in the
test-suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controller import nominal_input
from .crn import LinearPropensityStructure, linearize_propensities
from .errors import AnalysisError, DomainError
from .presets import GeneExpressionParams, MaturationParams

__all__ = [
    "AnalysisMatrices",
    "closed_loop_stationary_mean",
    "build_R_Q",
    "analysis_matrices",
    "is_hurwitz",
    "spectral_abscissa",
    "solve_lyapunov",
    "lyapunov_residual",
    "integrate_covariance",
    "gene_R",
    "gene_hurwitz_margin",
    "gene_variance_closed_form",
    "gene_openloop_variance",
    "gene_integral_variance",
    "gene_variance_ratio",
    "gene_variance_limit",
    "maturation_R",
    "maturation_openloop_variance",
    "maturation_stability",
    "maturation_stability_terms",
    "maturation_beta_interval",
    "maturation_variance_closed_form",
]

HURWITZ_MARGIN = 1e-9


@dataclass(frozen=True)
class AnalysisMatrices:
    R: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    c: float
    beta: float
    k: float
    stationary_mean: np.ndarray
    controlled: int
    actuated: int

    @property
    def dim(self):
        return self.R.shape[0]


def _lin(obj):
    return obj if isinstance(obj, LinearPropensityStructure) else linearize_propensities(obj)


def closed_loop_stationary_mean(lin, controlled, mu, theta, actuated=0):
    """Open-loop species mean ``-(SW)^-1 (S w0 + c e_a)`` at the nominal input."""
    lin = _lin(lin)
    c = nominal_input(lin, controlled, mu, theta, actuated)
    d = lin.SW.shape[0]
    e_a = np.zeros(d)
    e_a[actuated] = 1.0
    return -np.linalg.solve(lin.SW, lin.S @ lin.w0 + c * e_a)


def build_R_Q(lin, controlled, actuated, mu, theta, k, beta):
    lin = _lin(lin)
    SW = lin.SW
    d = SW.shape[0]
    c = nominal_input(lin, controlled, mu, theta, actuated)
    e_a = np.zeros(d)
    e_a[actuated] = 1.0
    m = -np.linalg.solve(SW, lin.S @ lin.w0 + c * e_a)
    D = np.diag(lin.W @ m + lin.w0)

    R = np.zeros((d + 1, d + 1))
    R[:d, :d] = SW
    R[actuated, controlled] -= beta
    R[actuated, d] = k
    R[d, controlled] = -theta

    Q = np.zeros((d + 1, d + 1))
    Q[:d, :d] = lin.S @ D @ lin.S.T
    Q[actuated, actuated] += c
    Q[d, d] = 2.0 * mu
    return AnalysisMatrices(R, Q, D, float(c), float(beta), float(k), m, controlled, actuated)


def analysis_matrices(network, config, beta=0.0):
    """:func:`build_R_Q` from an open-loop network and a controller config."""
    return build_R_Q(linearize_propensities(network), config.controlled, config.actuated,
                     config.mu, config.theta, config.k, beta)


def spectral_abscissa(M):
    """Largest real part among the eigenvalues of ``M`` and that eigenvalue."""
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise AnalysisError("matrix has non-finite entries")
    try:
        eig = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise AnalysisError(f"eigenvalue computation failed: {exc}") from exc
    i = int(np.argmax(eig.real))
    return float(eig[i].real), complex(eig[i])


def is_hurwitz(M, margin=HURWITZ_MARGIN):
    """All eigenvalues in ``Re < -margin * max(1, ||M||)``."""
    M = np.asarray(M, dtype=float)
    alpha, _ = spectral_abscissa(M)
    scale = max(1.0, float(np.linalg.norm(M, 2)))
    return alpha < -margin * scale


def solve_lyapunov(R, Q):
    """Solve ``R S + S R' + Q = 0`` by vectorisation (Kronecker sum).

    Refuses non-Hurwitz ``R`` with a :class:`DomainError` carrying the
    offending eigenvalue.
    """
    R = np.asarray(R, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if not is_hurwitz(R):
        _, lam = spectral_abscissa(R)
        raise DomainError("approximation outside validity domain: R is not Hurwitz "
                          f"(eigenvalue {lam:.6g})", eigenvalue=lam)
    n = R.shape[0]
    eye = np.eye(n)
    # row-major vec: vec(R S) = (R kron I) vec(S), vec(S R') = (I kron R) vec(S)
    L = np.kron(R, eye) + np.kron(eye, R)
    S = np.linalg.solve(L, -Q.reshape(-1)).reshape(n, n)
    return 0.5 * (S + S.T)


def lyapunov_residual(R, S, Q):
    """Frobenius residual and the scale ``||R|| ||S|| + ||Q||`` it is judged against."""
    res = np.linalg.norm(R @ S + S @ R.T + Q)
    scale = np.linalg.norm(R) * np.linalg.norm(S) + np.linalg.norm(Q)
    return float(res), float(scale)


def integrate_covariance(R, Q, times, sigma0=None, substeps=10):
    """RK4 integration of ``dS/dt = R S + S R' + Q`` sampled at ``times``.

    An extension consistent with the stationary closure (same R and Q);
    it is meant for visual comparison with SSA variance transients.
    """
    R = np.asarray(R, dtype=float)
    Q = np.asarray(Q, dtype=float)
    times = np.asarray(times, dtype=float)
    S = np.zeros_like(R) if sigma0 is None else np.array(sigma0, dtype=float)
    out = np.empty((times.size,) + R.shape)
    out[0] = S

    def f(S):
        return R @ S + S @ R.T + Q

    for i in range(1, times.size):
        h = (times[i] - times[i - 1]) / substeps
        for _ in range(substeps):
            k1 = f(S)
            k2 = f(S + 0.5 * h * k1)
            k3 = f(S + 0.5 * h * k2)
            k4 = f(S + h * k3)
            S = S + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i] = S
    return out


# -- gene expression --------------------------------------------------------


def gene_R(p: GeneExpressionParams, theta, k, beta):
    return np.array([[-p.gamma_r, -beta, k],
                     [p.k_p, -p.gamma_p, 0.0],
                     [0.0, -theta, 0.0]])


def gene_hurwitz_margin(p: GeneExpressionParams, theta, k, beta):
    """Left side of the Routh-Hurwitz condition; R is Hurwitz iff it is > 0 (k > 0)."""
    gr, gp, kp = p.gamma_r, p.gamma_p, p.k_p
    return 1.0 - k * theta * kp / (gr * gp * (gr + gp)) + beta * kp / (gr * gp)


def gene_variance_closed_form(p: GeneExpressionParams, mu, theta, k, beta):
    gr, gp, kp = p.gamma_r, p.gamma_p, p.k_p
    den = gene_hurwitz_margin(p, theta, k, beta)
    if not den > 0:
        raise DomainError(f"Hurwitz condition violated (value {den:.6g})")
    num = 1.0 + kp / (gr + gp) + k * kp / (gr * gp) + beta * kp / (gr * (gr + gp))
    return mu / theta * num / den


def gene_openloop_variance(p: GeneExpressionParams, mu, theta):
    return mu / theta * (1.0 + p.k_p / (p.gamma_r + p.gamma_p))


def gene_integral_variance(p: GeneExpressionParams, mu, theta, k):
    """Stationary variance under pure integral control (no feedback)."""
    return gene_variance_closed_form(p, mu, theta, k, 0.0)


def gene_variance_ratio(p: GeneExpressionParams, mu, theta, k):
    """Integral-control variance over the constitutive variance."""
    return gene_integral_variance(p, mu, theta, k) / gene_openloop_variance(p, mu, theta)


def gene_variance_limit(p: GeneExpressionParams, mu, theta):
    """Limit of the closed-loop variance as the proportional gain grows without bound."""
    return mu / theta * p.gamma_p / (p.gamma_r + p.gamma_p)


# -- gene expression with maturation ----------------------------------------


def maturation_R(p: MaturationParams, theta, k, beta):
    return np.array([[-p.gamma_r, 0.0, -beta, k],
                     [p.k_p, -(p.gamma_p + p.k_m), 0.0, 0.0],
                     [0.0, p.k_m, -p.gamma_m, 0.0],
                     [0.0, 0.0, -theta, 0.0]])


def maturation_openloop_variance(p: MaturationParams, mu, theta):
    gr, gp, kp, km, gm = p.gamma_r, p.gamma_p, p.k_p, p.k_m, p.gamma_m
    amp = kp * km * (km + gr + gp + gm) / ((gr + gm) * (gr + gp + km) * (gp + gm + km))
    return mu / theta * (1.0 + amp)


def maturation_stability_terms(p: MaturationParams, theta, k):
    """Coefficients of the two Hurwitz conditions.

    Returns ``(beta_max, a2, sigma1, sigma0)`` where R is Hurwitz iff
    ``beta < beta_max`` and ``a2 beta^2 + sigma1 beta + sigma0 < 0``.
    """
    gr, gp, kp, km, gm = p.gamma_r, p.gamma_p, p.k_p, p.k_m, p.gamma_m
    s1 = gr + gp + gm + km
    s2 = gr * gp + gr * gm + gp * gm + gr * km + gm * km
    s3 = gr * gm * (gp + km)
    beta_max = (s1 * s2 - s3) / (kp * km)
    a2 = (kp * km) ** 2
    sigma1 = -kp * km * s1 * s2 + 2.0 * s3 * kp * km
    sigma0 = -s3 * s1 * s2 + s3 ** 2 + k * kp * km * theta * s1 ** 2
    return beta_max, a2, sigma1, sigma0


def maturation_stability(p: MaturationParams, theta, k, beta):
    beta_max, a2, sigma1, sigma0 = maturation_stability_terms(p, theta, k)
    return beta < beta_max and a2 * beta * beta + sigma1 * beta + sigma0 < 0


def maturation_beta_interval(p: MaturationParams, theta, k):
    """Open interval of ``beta >= 0`` for which R is Hurwitz, or None if empty."""
    beta_max, a2, sigma1, sigma0 = maturation_stability_terms(p, theta, k)
    disc = sigma1 * sigma1 - 4.0 * a2 * sigma0
    if disc <= 0:
        return None
    root = math.sqrt(disc)
    lo = max((-sigma1 - root) / (2.0 * a2), 0.0)
    hi = min((-sigma1 + root) / (2.0 * a2), beta_max)
    return (lo, hi) if lo < hi else None


def _maturation_coefficients(p: MaturationParams, theta):
    gr, gp, kp, km, gm = p.gamma_r, p.gamma_p, p.k_p, p.k_m, p.gamma_m
    xi_d = gr * gm * (gr + gm) * (gp + km) * (gr + gp + km) * (gp + gm + km)
    xi_k = -kp * km * theta * (gr + gp + gm + km) ** 2
    xi_b = kp * km * (gr**2 * gp + gr**2 * gm + gr**2 * km + gr * gp**2 + gr * gp * gm
                      + 2 * gr * gp * km + gr * gm**2 + gr * gm * km + gr * km**2
                      + gp**2 * gm + gp * gm**2 + 2 * gp * gm * km + gm**2 * km + gm * km**2)
    xi_bb = -(kp * km) ** 2
    zeta_k = kp * km * (gr**2 * gp + gr**2 * gm + gr**2 * km + gr * gp**2 + 2 * gr * gp * gm
                        + 2 * gr * gp * km + gr * gm**2 + 2 * gr * gm * km - theta * gr * gm
                        + gr * km**2 + gp**2 * gm + gp * gm**2 + 2 * gp * gm * km
                        - theta * gp * gm + gm**2 * km - theta * gm**2 + gm * km**2
                        - theta * gm * km)
    zeta_b = gm * kp * km * (gr**2 + gr * gp + gr * km + gm * gr + gp**2 + 2 * gp * km
                             + gm * gp + km**2 + gm * km)
    zeta_kb = -(kp * km) ** 2
    return xi_d, xi_k, xi_b, xi_bb, zeta_k, zeta_b, zeta_kb


def maturation_variance_closed_form(p: MaturationParams, mu, theta, k, beta):
    if not maturation_stability(p, theta, k, beta):
        raise DomainError(f"(k={k}, beta={beta}) lies outside the stability region")
    xi_d, xi_k, xi_b, xi_bb, zeta_k, zeta_b, zeta_kb = _maturation_coefficients(p, theta)
    open_loop = maturation_openloop_variance(p, mu, theta)
    num = theta / mu * open_loop + (zeta_k * k + zeta_b * beta + zeta_kb * k * beta) / xi_d
    den = 1.0 + (xi_k * k + xi_b * beta + xi_bb * beta * beta) / xi_d
    return mu / theta * num / den
