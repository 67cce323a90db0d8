"""Numerical BCH oracle.

Applies a splitting to random non-commuting matrices, takes the matrix
logarithm of the product and projects the defect

    L(eps) = log(prod ...) - eps (T + V)

onto {T, V, [T,V], [T,[T,V]], [V,[T,V]]}.  The projected coefficients,
divided by the matching power of eps and extrapolated to eps -> 0, are
independent estimates of e_T - 1, e_V - 1, e_TV, e_TTV, e_VTV.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .error_kernel import SplitCoefficients, is_palindromic
from .linalg import commutator, expm, logm

__all__ = [
    "OracleError",
    "MatrixPair",
    "ExtractionResult",
    "GradientCheck",
    "random_pair",
    "commutator_basis",
    "product_matrix",
    "product_defect",
    "richardson",
    "extract_error_coefficients",
    "fit_order",
    "verify_gradient_realization",
    "DEFAULT_GRID",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 20050
DEFAULT_GRID = tuple(2.0**-k for k in range(4, 11))
_MAX_GRAM_COND = 1e6
_NOISE_FLOOR = 1e-12


class OracleError(RuntimeError):
    """Ill-conditioned basis, branch failure or non-convergent extrapolation."""


@dataclass(frozen=True)
class MatrixPair:
    T: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    seed: int | None = None

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    def scaled(self, a: float, b: float) -> "MatrixPair":
        return MatrixPair(a * self.T, b * self.V, self.seed)


def commutator_basis(m: MatrixPair) -> list[np.ndarray]:
    """[T, V, [T,V], [T,[T,V]], [V,[T,V]]]."""
    tv = commutator(m.T, m.V)
    return [m.T, m.V, tv, commutator(m.T, tv), commutator(m.V, tv)]


def _gram_condition(basis: Sequence[np.ndarray]) -> float:
    b = np.stack([x.ravel() for x in basis], axis=1)
    return float(np.linalg.cond(b.T @ b))


def random_pair(seed: int = DEFAULT_SEED, dim: int = 4, max_draws: int = 100) -> MatrixPair:
    """Uniform [-1, 1] matrices, redrawn until the commutator basis is well conditioned."""
    if dim < 3:
        raise ValueError("dimension must be at least 3")
    rng = np.random.default_rng(seed)
    for _ in range(max_draws):
        T = rng.uniform(-1.0, 1.0, (dim, dim))
        V = rng.uniform(-1.0, 1.0, (dim, dim))
        pair = MatrixPair(T, V, seed)
        if np.linalg.norm(commutator(T, V)) < 1e-8:
            continue
        if _gram_condition(commutator_basis(pair)) < _MAX_GRAM_COND:
            return pair
    raise OracleError(f"no well-conditioned pair after {max_draws} draws (seed {seed})")


def product_matrix(
    c: SplitCoefficients,
    m: MatrixPair,
    eps: float,
    gradient_weights: Sequence[float] | None = None,
) -> np.ndarray:
    """The ordered product of exponentials, leftmost factor first.

    With ``gradient_weights`` (aligned with ``c.v``) each kick becomes
    exp(eps v_i V + eps^3 w_i [V,[T,V]]).
    """
    vtv = commutator(m.V, commutator(m.T, m.V)) if gradient_weights is not None else None
    out = np.eye(m.dim)
    for i, (ti, vi) in enumerate(zip(c.t, c.v)):
        drift = expm(ti * eps * m.T) if ti != 0.0 else None
        gen = vi * eps * m.V
        if vtv is not None and gradient_weights[i] != 0.0:
            gen = gen + gradient_weights[i] * eps**3 * vtv
        kick = expm(gen) if np.any(gen) else None
        pair = (drift, kick) if c.arrangement.value == "t_first" else (kick, drift)
        for f in pair:
            if f is not None:
                out = out @ f
    return out


def product_defect(c, m: MatrixPair, eps: float, gradient_weights=None) -> np.ndarray:
    """``log(product) - eps (T + V)``."""
    p = product_matrix(c, m, eps, gradient_weights)
    if np.linalg.norm(p - np.eye(m.dim), 2) >= 1.0:
        raise OracleError(f"eps={eps!r} too large for the principal logarithm")
    try:
        logp = logm(p)
    except np.linalg.LinAlgError as exc:
        raise OracleError(f"logarithm failed at eps={eps!r}: {exc}") from exc
    return logp - eps * (m.T + m.V)


def _project(basis: Sequence[np.ndarray], x: np.ndarray) -> np.ndarray:
    b = np.stack([y.ravel() for y in basis], axis=1)
    gram = b.T @ b
    if np.linalg.cond(gram) >= _MAX_GRAM_COND:
        raise OracleError("commutator basis is ill conditioned")
    return np.linalg.solve(gram, b.T @ x.ravel())


def richardson(
    eps: Sequence[float],
    values: Sequence[float],
    noise_power: int,
    powers: Sequence[int] = (1, 2, 3),
):
    """Extrapolate ``values(eps)`` to eps = 0 by weighted least squares.

    ``values`` is modelled as ``a0 + sum_k a_k eps**powers[k]``.  Rows are
    weighted by ``eps**noise_power``: a defect with O(1e-16) noise divided
    by eps**k carries noise proportional to eps**-k.  Returns the intercept
    and, as an error estimate, its change when the next power is added.
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    w = eps**noise_power
    powers = list(powers)
    if len(eps) < len(powers) + 2:
        raise ValueError(f"need at least {len(powers) + 2} step sizes")

    def intercept(pw):
        a = np.stack([np.ones_like(eps)] + [eps**p for p in pw], axis=1)
        return np.linalg.lstsq(a * w[:, None], values * w, rcond=None)[0][0]

    best = intercept(powers)
    return float(best), float(abs(best - intercept(powers + [powers[-1] + 1])))


def fit_order(eps: Sequence[float], norms: Sequence[float], floor: float = _NOISE_FLOOR) -> float:
    """Log-log slope of ``norms`` against ``eps``, ignoring points below ``floor``."""
    eps = np.asarray(eps, dtype=float)
    norms = np.asarray(norms, dtype=float)
    keep = norms > floor
    if keep.sum() < 2:
        return float("inf")
    slope, _ = np.polyfit(np.log(eps[keep]), np.log(norms[keep]), 1)
    return float(slope)


@dataclass(frozen=True)
class ExtractionResult:
    e_T: float
    e_V: float
    e_TV: float
    e_TTV: float
    e_VTV: float
    residual_order: float
    epsilons_used: tuple[float, ...]
    extrapolation_error: tuple[float, float, float] = (0.0, 0.0, 0.0)
    residual_norms: tuple[float, ...] = ()
    primary_ok: bool = True

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.e_TV, self.e_TTV, self.e_VTV)


def extract_error_coefficients(
    c: SplitCoefficients,
    m: MatrixPair,
    eps_grid: Sequence[float] = DEFAULT_GRID,
    gradient_weights: Sequence[float] | None = None,
    tol: float = 1e-6,
) -> ExtractionResult:
    """Estimate (e_T, e_V, e_TV, e_TTV, e_VTV) and the order of what is left.

    Raises :class:`OracleError` when the extrapolation error estimate of
    any third-order coefficient exceeds ``tol``.
    """
    eps = np.asarray(sorted(eps_grid, reverse=True), dtype=float)
    if len(eps) < 5:
        raise ValueError("need at least five step sizes")
    basis = commutator_basis(m)
    coeffs = np.array([_project(basis, product_defect(c, m, e, gradient_weights)) for e in eps])

    # columns: eps(e_T-1), eps(e_V-1), eps^2 e_TV, eps^3 e_TTV, eps^3 e_VTV (+ higher orders)
    # eps^2 and eps^3 terms lie entirely in the basis, so the first-order
    # columns pick up corrections from eps^4 on and the e_TV column from eps^4 on
    e_t = 1.0 + richardson(eps, coeffs[:, 0] / eps, 1, (3, 4, 5))[0]
    e_v = 1.0 + richardson(eps, coeffs[:, 1] / eps, 1, (3, 4, 5))[0]
    e_tv, err_tv = richardson(eps, coeffs[:, 2] / eps**2, 2, (2, 3, 4))
    e_ttv, err_ttv = richardson(eps, coeffs[:, 3] / eps**3, 3, (1, 2, 3))
    e_vtv, err_vtv = richardson(eps, coeffs[:, 4] / eps**3, 3, (1, 2, 3))
    errs = (err_tv, err_ttv, err_vtv)
    if max(errs) > tol:
        raise OracleError(f"extrapolation did not converge: error estimates {errs}")

    est = np.array([0.0, 0.0, e_tv, e_ttv, e_vtv])
    est[0] = e_t - 1.0
    est[1] = e_v - 1.0
    powers = np.array([1, 1, 2, 3, 3])
    residuals = []
    for e in eps:
        d = product_defect(c, m, e, gradient_weights)
        model = sum(k * e**p * b for k, p, b in zip(est, powers, basis))
        residuals.append(float(np.linalg.norm(d - model)))
    order = fit_order(eps, residuals)
    primary_ok = abs(e_t - 1.0) <= tol and abs(e_v - 1.0) <= tol
    return ExtractionResult(
        e_t, e_v, e_tv, e_ttv, e_vtv, order, tuple(eps), errs, tuple(residuals), primary_ok
    )


@dataclass(frozen=True)
class GradientCheck:
    ok: bool
    order: float
    required: float


def verify_gradient_realization(
    c: SplitCoefficients,
    m: MatrixPair,
    gradient_weights: Sequence[float],
    eps_grid: Sequence[float] = DEFAULT_GRID,
) -> GradientCheck:
    """Check that attaching exp(eps^3 w_i [V,[T,V]]) to the kicks lifts the order.

    Passes when the defect norm falls off at least as eps^4.8 for palindromic
    sets (odd powers only) or eps^3.8 otherwise.
    """
    eps = sorted(eps_grid, reverse=True)
    norms = [float(np.linalg.norm(product_defect(c, m, e, gradient_weights))) for e in eps]
    order = fit_order(eps, norms)
    required = 4.8 if is_palindromic(c) else 3.8
    return GradientCheck(order >= required, order, required)
