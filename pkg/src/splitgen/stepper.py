"""Executable symplectic maps for separable Hamiltonians H = p^2/2 + V(q).

A drift ``exp(tau T)`` is ``q <- q + tau p`` and a kick ``exp(tau V)`` is
``p <- p + tau F(q)`` with ``F = -grad V``.  Factors are applied in the
order they appear in the product, leftmost first.

The double commutator [V,[T,V]] is itself a kick, with force
``grad |grad V|^2``.  Forward sets with e_VTV != 0 become fourth order once
kicks carrying total weight -e_VTV of that force are attached, which is
what ``gradient_weights`` encode.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .error_kernel import (
    Arrangement,
    SplitCoefficients,
    classify_order,
    error_coefficients,
)
from .extended_linear import positivity_report
from .linalg import expm

__all__ = [
    "Distribution",
    "SplitSystem",
    "Integrator",
    "ConvergenceReport",
    "IntegratorError",
    "NonFiniteStateError",
    "GRADIENT_KICK_SIGN",
    "make_integrator",
    "step",
    "integrate",
    "trajectory",
    "convergence_study",
    "fit_slope",
    "builtin_system",
    "quadratic_system",
    "kepler_initial_state",
    "write_trajectory_csv",
    "write_convergence_csv",
]

# SplitSystem.gradient_force is -grad|grad V|^2, while exp(w [V,[T,V]]) kicks by
# +w grad|grad V|^2.  Pinned by tests/test_stepper.py::test_gradient_kick_sign.
GRADIENT_KICK_SIGN = -1.0


class IntegratorError(ValueError):
    pass


class NonFiniteStateError(FloatingPointError):
    pass


class Distribution(str, enum.Enum):
    CENTRAL = "central"
    PROPORTIONAL = "proportional"
    NONE = "none"


Vector = np.ndarray


@dataclass(frozen=True)
class SplitSystem:
    """Separable Hamiltonian with unit mass.

    ``kick_force`` is -grad V, ``gradient_force`` is -grad |grad V|^2 and
    ``exact_flow(q0, p0, t)`` returns the exact state at time t.
    """

    name: str
    dimension: int
    potential: Callable[[Vector], float]
    kick_force: Callable[[Vector], Vector]
    gradient_force: Callable[[Vector], Vector] | None = None
    exact_flow: Callable[[Vector, Vector, float], tuple[Vector, Vector]] | None = None

    def drift(self, q: Vector, p: Vector, tau: float) -> tuple[Vector, Vector]:
        return q + tau * p, p

    def kick(self, q: Vector, p: Vector, tau: float) -> tuple[Vector, Vector]:
        return q, p + tau * self.kick_force(q)

    def energy(self, q: Vector, p: Vector) -> float:
        return 0.5 * float(np.dot(p, p)) + float(self.potential(q))


@dataclass(frozen=True)
class Integrator:
    coefficients: SplitCoefficients
    gradient_weights: tuple[float, ...]
    distribution: Distribution
    forward: bool = False
    # (kind, weight, gradient weight) in application order, zero factors removed
    sequence: tuple[tuple[str, float, float], ...] = field(default=(), repr=False)

    @property
    def uses_gradient(self) -> bool:
        return any(w != 0.0 for w in self.gradient_weights)


def _sequence(c: SplitCoefficients, weights: Sequence[float]):
    seq = []
    for i, (ti, vi) in enumerate(zip(c.t, c.v)):
        drift = ("T", ti, 0.0)
        kick = ("V", vi, weights[i])
        pair = (drift, kick) if c.arrangement is Arrangement.T_FIRST else (kick, drift)
        for kind, w, g in pair:
            if w != 0.0 or g != 0.0:
                seq.append((kind, w, g))
    return tuple(seq)


def make_integrator(
    c: SplitCoefficients,
    distribution: Distribution | str = Distribution.CENTRAL,
    tol: float = 1e-12,
) -> Integrator:
    """Attach gradient weights summing to -e_VTV to the kicks of ``c``.

    ``central`` puts all of it on the middle nonzero kick (needs an odd
    number of nonzero kicks), ``proportional`` spreads it as v_i / sum(v).
    ``none`` steps the bare splitting at whatever order it has.
    """
    distribution = Distribution(distribution)
    n = len(c)
    e_vtv = error_coefficients(c).e_VTV
    weights = [0.0] * n

    if distribution is not Distribution.NONE:
        if classify_order(c, tol, gradient_weight=-e_vtv) != 4:
            raise IntegratorError(
                f"{c.name or 'set'} is not fourth order even with a gradient term; use distribution 'none'"
            )
        if abs(e_vtv) > tol:
            nonzero = [i for i, vi in enumerate(c.v) if vi != 0.0]
            if distribution is Distribution.CENTRAL:
                if len(nonzero) % 2 == 0:
                    raise IntegratorError(
                        f"central distribution needs an odd number of nonzero kicks, "
                        f"{c.name or 'set'} has {len(nonzero)}; use 'proportional'"
                    )
                weights[nonzero[len(nonzero) // 2]] = -e_vtv
            else:
                total = math.fsum(c.v[i] for i in nonzero)
                for i in nonzero:
                    weights[i] = -e_vtv * c.v[i] / total

    forward = positivity_report(c).forward
    return Integrator(c, tuple(weights), distribution, forward, _sequence(c, weights))


def step(i: Integrator, s: SplitSystem, state: tuple[Vector, Vector], eps: float) -> tuple[Vector, Vector]:
    """Advance ``(q, p)`` by one step of size ``eps`` (negative allowed)."""
    q, p = state
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if i.uses_gradient and s.gradient_force is None:
        raise IntegratorError(f"system {s.name!r} has no gradient force")
    eps3 = eps**3 * GRADIENT_KICK_SIGN
    for kind, w, g in i.sequence:
        if kind == "T":
            tau = w * eps
            assert not (i.forward and eps > 0 and tau < 0), "forward set produced a backward drift"
            q = q + tau * p
        else:
            dp = (eps * w) * s.kick_force(q)
            if g != 0.0:
                dp = dp + (eps3 * g) * s.gradient_force(q)
            p = p + dp
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
        raise NonFiniteStateError(f"non-finite state after step of size {eps!r}")
    return q, p


def integrate(i: Integrator, s: SplitSystem, q0, p0, eps: float, n_steps: int) -> tuple[Vector, Vector]:
    state = (np.asarray(q0, dtype=float), np.asarray(p0, dtype=float))
    for _ in range(n_steps):
        state = step(i, s, state, eps)
    return state


def trajectory(i: Integrator, s: SplitSystem, q0, p0, eps: float, n_steps: int, every: int = 1):
    """States and energy errors every ``every`` steps, including step 0.

    Returns ``(steps, q, p, energy_error)`` arrays.
    """
    q = np.asarray(q0, dtype=float)
    p = np.asarray(p0, dtype=float)
    e0 = s.energy(q, p)
    steps, qs, ps, de = [0], [q], [p], [0.0]
    for k in range(1, n_steps + 1):
        q, p = step(i, s, (q, p), eps)
        if k % every == 0:
            steps.append(k)
            qs.append(q)
            ps.append(p)
            de.append(s.energy(q, p) - e0)
    return np.array(steps), np.array(qs), np.array(ps), np.array(de)


# ---- convergence ----------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    step_sizes: tuple[float, ...]
    global_errors: tuple[float, ...]
    fitted_slope: float
    slope_stderr: float
    fitted_mask: tuple[bool, ...] = ()


def fit_slope(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of log y against log x and its standard error."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    n = len(lx)
    if n < 2:
        raise ValueError("need at least two points to fit a slope")
    xm = lx - lx.mean()
    sxx = float(np.dot(xm, xm))
    slope = float(np.dot(xm, ly - ly.mean()) / sxx)
    if n == 2:
        return slope, 0.0
    resid = ly - ly.mean() - slope * xm
    return slope, math.sqrt(float(np.dot(resid, resid)) / (n - 2) / sxx)


def convergence_study(
    i: Integrator,
    s: SplitSystem,
    q0,
    p0,
    t_final: float,
    eps_list: Sequence[float],
    floor: float = 1e-13,
    reference_factor: int = 8,
) -> ConvergenceReport:
    """Global phase-space error at ``t_final`` for each step size.

    Step sizes are snapped to ``t_final / n`` for integer n.  Without an
    exact flow the reference is the same integrator run ``reference_factor``
    times finer than the finest step.  Errors below ``floor`` are reported
    but left out of the slope fit.
    """
    counts = sorted({max(1, round(t_final / e)) for e in eps_list})
    eps = [t_final / n for n in counts]
    q0 = np.asarray(q0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    if s.exact_flow is not None:
        q_ref, p_ref = s.exact_flow(q0, p0, t_final)
    else:
        n_ref = reference_factor * counts[-1]
        q_ref, p_ref = integrate(i, s, q0, p0, t_final / n_ref, n_ref)
    errors = []
    for n, e in zip(counts, eps):
        q, p = integrate(i, s, q0, p0, e, n)
        errors.append(float(np.linalg.norm(np.concatenate([q - q_ref, p - p_ref]))))
    mask = [err >= floor for err in errors]
    xs = [e for e, k in zip(eps, mask) if k]
    ys = [err for err, k in zip(errors, mask) if k]
    slope, stderr = fit_slope(xs, ys)
    return ConvergenceReport(tuple(eps), tuple(errors), slope, stderr, tuple(mask))


# ---- systems --------------------------------------------------------------


def quadratic_system(stiffness, name: str = "quadratic") -> SplitSystem:
    """V = q.K.q / 2 for a symmetric matrix K; the exact flow is a matrix exponential."""
    k = np.atleast_2d(np.asarray(stiffness, dtype=float))
    d = k.shape[0]
    k2 = k @ k
    gen = np.block([[np.zeros((d, d)), np.eye(d)], [-k, np.zeros((d, d))]])

    def flow(q0, p0, t):
        z = expm(t * gen) @ np.concatenate([q0, p0])
        return z[:d], z[d:]

    return SplitSystem(
        name=name,
        dimension=d,
        potential=lambda q: 0.5 * float(q @ k @ q),
        kick_force=lambda q: -(k @ q),
        gradient_force=lambda q: -2.0 * (k2 @ q),
        exact_flow=flow,
    )


def _harmonic(dimension: int = 1) -> SplitSystem:
    def flow(q0, p0, t):
        c, s = math.cos(t), math.sin(t)
        return c * q0 + s * p0, -s * q0 + c * p0

    return SplitSystem(
        name="harmonic",
        dimension=dimension,
        potential=lambda q: 0.5 * float(np.dot(q, q)),
        kick_force=lambda q: -q,
        gradient_force=lambda q: -2.0 * q,
        exact_flow=flow,
    )


def _radius(q) -> float:
    r = math.hypot(q[0], q[1])
    if r == 0.0:
        raise ValueError("Kepler potential is singular at q = 0")
    return r


def _kepler2d() -> SplitSystem:
    # V = -1/r, |grad V|^2 = r^-4, grad |grad V|^2 = -4 q r^-6
    return SplitSystem(
        name="kepler2d",
        dimension=2,
        potential=lambda q: -1.0 / _radius(q),
        kick_force=lambda q: -q / _radius(q) ** 3,
        gradient_force=lambda q: 4.0 * q / _radius(q) ** 6,
        exact_flow=None,
    )


def builtin_system(name: str, dimension: int = 1) -> SplitSystem:
    """``harmonic`` (any dimension) or ``kepler2d`` (alias ``kepler``)."""
    if name == "harmonic":
        return _harmonic(dimension)
    if name in ("kepler2d", "kepler"):
        return _kepler2d()
    raise ValueError(f"unknown system {name!r}")


def kepler_initial_state(eccentricity: float = 0.2):
    """Perihelion state of a unit-semi-major-axis orbit; the period is 2 pi."""
    if not 0.0 <= eccentricity < 1.0:
        raise ValueError("eccentricity must be in [0, 1)")
    q0 = np.array([1.0 - eccentricity, 0.0])
    p0 = np.array([0.0, math.sqrt((1.0 + eccentricity) / (1.0 - eccentricity))])
    return q0, p0, 2.0 * math.pi


# ---- CSV ------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(out: io.TextIOBase, steps, q, p, energy_error) -> None:
    q = np.atleast_2d(q)
    p = np.atleast_2d(p)
    d = q.shape[1]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["step"] + [f"q{j}" for j in range(d)] + [f"p{j}" for j in range(d)] + ["energy_error"])
    for k, qi, pi, de in zip(steps, q, p, energy_error):
        w.writerow([int(k)] + [_fmt(x) for x in qi] + [_fmt(x) for x in pi] + [_fmt(de)])


def write_convergence_csv(out: io.TextIOBase, report: ConvergenceReport) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["eps", "global_error"])
    for e, err in zip(report.step_sizes, report.global_errors):
        w.writerow([_fmt(e), _fmt(err)])
    out.write(f"# slope={_fmt(report.fitted_slope)} stderr={_fmt(report.slope_stderr)}\n")
