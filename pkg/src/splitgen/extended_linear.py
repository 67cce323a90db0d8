"""Closed-form fourth-order coefficient families.

Velocity-type sets start with a kick (t_1 = 0) and take

    v_1 = 1/2 + C2 (1 - t_2),  v_N = 1/2 + C2 (1 - t_N),
    v_i = -C2 (t_i + t_{i+1})                               1 < i < N

with C2 = -1 / (2 phi), phi = 1 - sum(t**3).  That kills e_TV and e_TTV and
leaves e_VTV = -(1/phi - 1) / 24.  Position-type sets swap the roles of t
and v (V-first, v_1 = 0) with phi' = sqrt(1 - sum(v**3)) and
e_VTV = -(1 - phi') / 12.  Linear sets fix C2 = -1/2 and are fourth order
exactly when sum(t**3) = 0, which forces negative coefficients.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from .error_kernel import (
    DEFAULT_TOL,
    Arrangement,
    SplitCoefficients,
    classify_order,
    delta_g,
    error_coefficients,
)

__all__ = [
    "DomainError",
    "NegativeCoefficientWarning",
    "FamilyKind",
    "ExtendedLinearParams",
    "FamilySpec",
    "PositivityReport",
    "extended_linear_v",
    "extended_linear_t",
    "velocity_from_t",
    "position_from_v",
    "linear_from_t",
    "make_family",
    "named_set",
    "NAMED_SETS",
    "FAMILY_ARITY",
    "positivity_report",
]


class DomainError(ValueError):
    """Parameters outside the domain where the coefficients are real and finite."""


class NegativeCoefficientWarning(UserWarning):
    pass


class FamilyKind(str, enum.Enum):
    VELOCITY = "velocity"
    POSITION = "position"
    LINEAR = "linear"


@dataclass(frozen=True)
class ExtendedLinearParams:
    C2: float
    C1: float
    phi: float
    delta_g: float
    family_kind: FamilyKind


def _check_unit_sum(w: Sequence[float], label: str, tol: float = DEFAULT_TOL) -> None:
    total = math.fsum(w)
    if abs(total - 1.0) > tol:
        raise DomainError(f"sum({label}) must be 1, got {total!r}")


def extended_linear_v(t: Sequence[float], C2: float) -> tuple[float, ...]:
    """Kick weights for drift weights ``t`` (t[0] == 0) at a given C2."""
    t = [float(x) for x in t]
    n = len(t)
    if n < 2:
        raise DomainError("extended-linear sets need N >= 2")
    v = [0.0] * n
    v[0] = 0.5 + C2 * (1.0 - t[1])
    v[-1] = 0.5 + C2 * (1.0 - t[-1])
    for i in range(1, n - 1):
        v[i] = -C2 * (t[i] + t[i + 1])
    return tuple(v)


def extended_linear_t(v: Sequence[float], C2: float) -> tuple[float, ...]:
    """Mirror of :func:`extended_linear_v` for position-type sets (v[0] == 0)."""
    return extended_linear_v(v, C2)


def velocity_from_t(t_interior: Sequence[float]):
    """Velocity-type set for drift weights ``(0, *t_interior)``.

    Returns ``(coefficients, errors, params)``; the errors have
    e_TV = e_TTV = 0 and e_VTV = -(1/phi - 1)/24.
    """
    t = (0.0,) + tuple(float(x) for x in t_interior)
    _check_unit_sum(t, "t")
    dg = delta_g(t)
    phi = 1.0 - dg
    if not phi > 0.0:
        raise DomainError(f"phi = 1 - sum(t^3) must be positive, got {phi!r}")
    C2 = -1.0 / (2.0 * phi)
    v = extended_linear_v(t, C2)
    coeffs = SplitCoefficients(t, v, Arrangement.T_FIRST)
    params = ExtendedLinearParams(C2, 0.5 - C2, phi, dg, FamilyKind.VELOCITY)
    return coeffs, error_coefficients(coeffs), params


def position_from_v(v_interior: Sequence[float]):
    """Position-type (V-first) set for kick weights ``(0, *v_interior)``.

    The negative root for C2 is taken: C2 = -1/(2 phi'), phi' = sqrt(1 - sum(v^3)).
    """
    v = (0.0,) + tuple(float(x) for x in v_interior)
    _check_unit_sum(v, "v")
    dg = delta_g(v)
    if not 1.0 - dg > 0.0:
        raise DomainError(f"1 - sum(v^3) must be positive, got {1.0 - dg!r}")
    phi = math.sqrt(1.0 - dg)
    C2 = -1.0 / (2.0 * phi)
    t = extended_linear_t(v, C2)
    coeffs = SplitCoefficients(t, v, Arrangement.V_FIRST)
    params = ExtendedLinearParams(C2, 0.5 - C2, phi, dg, FamilyKind.POSITION)
    return coeffs, error_coefficients(coeffs), params


def linear_from_t(t: Sequence[float]):
    """Linear set ``v_i = (t_i + t_{i+1}) / 2`` with ``t_{N+1} = 0``.

    Its errors satisfy e_TTV = 2 e_VTV = sum(t^3) / 12.
    """
    t = tuple(float(x) for x in t)
    if not t or t[0] != 0.0:
        raise DomainError("linear sets require t_1 = 0")
    ext = t + (0.0,)
    v = tuple(0.5 * (ext[i] + ext[i + 1]) for i in range(len(t)))
    coeffs = SplitCoefficients(t, v, Arrangement.T_FIRST)
    return coeffs, error_coefficients(coeffs)


def _linear_params(t: Sequence[float]) -> ExtendedLinearParams:
    dg = delta_g(t)
    return ExtendedLinearParams(-0.5, 1.0, 1.0 - dg, dg, FamilyKind.LINEAR)


def _real_cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _symmetric_t(head: Sequence[float], middle: Sequence[float]) -> tuple[float, ...]:
    head = tuple(head)
    return (0.0,) + head + tuple(middle) + head[::-1]


# ---- families -------------------------------------------------------------

FAMILY_ARITY = {
    "minimal_velocity": 1,
    "minimal_position": 1,
    "alg_4bda": 1,
    "alg_4acb": 1,
    "nine_stage_velocity": 1,
    "nine_stage_position": 1,
    "eleven_stage_velocity": 2,
    "eleven_stage_position": 2,
    "forest_ruth": 0,
    "generalized_fr_even": None,
    "generalized_fr_odd": None,
}


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.family not in FAMILY_ARITY:
            raise DomainError(f"unknown family {self.family!r}")
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        arity = FAMILY_ARITY[self.family]
        if arity is None:
            if not params:
                raise DomainError(f"{self.family} needs at least one alpha")
            if params[0] != 1.0:
                raise DomainError(f"{self.family}: alpha_2 must be 1, got {params[0]!r}")
        elif len(params) != arity:
            raise DomainError(f"{self.family} takes {arity} parameter(s), got {len(params)}")


def _minimal_velocity(n: float):
    n = _integer(n, "N", 3)
    return velocity_from_t([1.0 / (n - 1)] * (n - 1))


def _minimal_position(n: float):
    n = _integer(n, "N", 3)
    return position_from_v([1.0 / (n - 1)] * (n - 1))


def _integer(x: float, label: str, minimum: int) -> int:
    if x != int(x) or x < minimum:
        raise DomainError(f"{label} must be an integer >= {minimum}, got {x!r}")
    return int(x)


def _alg_4bda(t2: float):
    if not (0.0 < t2 < 1.0):
        raise DomainError(f"4BDA requires 0 < t2 < 1, got {t2!r}")
    return velocity_from_t([t2, 1.0 - 2.0 * t2, t2])


def _alg_4acb(v2: float):
    if not v2 > 0.0:
        raise DomainError(f"4ACB requires v2 > 0, got {v2!r}")
    return position_from_v([v2, 1.0 - 2.0 * v2, v2])


def _nine_stage_velocity(t2: float):
    phi = 15.0 / 16.0 - 3.0 * (t2 - 0.25) ** 2
    if not phi > 0.0:
        raise DomainError(f"9-stage velocity family requires phi > 0, got {phi!r} at t2={t2!r}")
    return velocity_from_t([t2, 0.5 - t2, 0.5 - t2, t2])


def _nine_stage_position(v2: float):
    phi2 = 15.0 / 16.0 - 3.0 * (v2 - 0.25) ** 2
    if not phi2 > 0.0:
        raise DomainError(f"9-stage position family requires phi'^2 > 0, got {phi2!r} at v2={v2!r}")
    return position_from_v([v2, 0.5 - v2, 0.5 - v2, v2])


def _eleven_stage_velocity(t2: float, t3: float):
    phi = 1.0 - 2.0 * t2**3 - 2.0 * t3**3 - (1.0 - 2.0 * t2 - 2.0 * t3) ** 3
    if not phi > 0.0:
        raise DomainError(f"11-stage velocity family requires phi > 0, got {phi!r}")
    return velocity_from_t([t2, t3, 1.0 - 2.0 * t2 - 2.0 * t3, t3, t2])


def _eleven_stage_position(v2: float, v3: float):
    phi2 = 1.0 - 2.0 * v2**3 - 2.0 * v3**3 - (1.0 - 2.0 * v2 - 2.0 * v3) ** 3
    if not phi2 > 0.0:
        raise DomainError(f"11-stage position family requires phi'^2 > 0, got {phi2!r}")
    return position_from_v([v2, v3, 1.0 - 2.0 * v2 - 2.0 * v3, v3, v2])


def _forest_ruth():
    a = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
    t = (0.0, a, -(2.0 ** (1.0 / 3.0)) * a, a)
    return linear_from_t(t)


def _generalized_fr_even(*alphas: float):
    # N = 2k, free drifts t_2..t_k = alpha_i t_2 around a single middle drift
    sa = math.fsum(alphas)
    sa3 = _real_cbrt(math.fsum(a**3 for a in alphas))
    denom = 2.0 * sa - 2.0 ** (1.0 / 3.0) * sa3
    if denom == 0.0 or not math.isfinite(1.0 / denom):
        raise DomainError("generalized Forest-Ruth (even): singular t2 for these alphas")
    t2 = 1.0 / denom
    middle = -(2.0 ** (1.0 / 3.0)) * sa3 * t2
    return linear_from_t(_symmetric_t([a * t2 for a in alphas], [middle]))


def _generalized_fr_odd(*alphas: float):
    # N = 2k + 1, two equal middle drifts; k > 2
    if len(alphas) < 2:
        raise DomainError("generalized Forest-Ruth (odd) needs k > 2, i.e. at least two alphas")
    sa = math.fsum(alphas)
    sa3 = _real_cbrt(math.fsum(a**3 for a in alphas))
    denom = 2.0 * sa - 2.0 * sa3
    if denom == 0.0 or not math.isfinite(1.0 / denom):
        raise DomainError("generalized Forest-Ruth (odd): singular t2 for these alphas")
    t2 = 1.0 / denom
    middle = -sa3 * t2
    return linear_from_t(_symmetric_t([a * t2 for a in alphas], [middle, middle]))


_BUILDERS = {
    "minimal_velocity": _minimal_velocity,
    "minimal_position": _minimal_position,
    "alg_4bda": _alg_4bda,
    "alg_4acb": _alg_4acb,
    "nine_stage_velocity": _nine_stage_velocity,
    "nine_stage_position": _nine_stage_position,
    "eleven_stage_velocity": _eleven_stage_velocity,
    "eleven_stage_position": _eleven_stage_position,
    "forest_ruth": _forest_ruth,
    "generalized_fr_even": _generalized_fr_even,
    "generalized_fr_odd": _generalized_fr_odd,
}


def make_family(spec: FamilySpec):
    """Build a named family.

    Returns ``(coefficients, errors, params)``.  Forward (velocity or
    position) families emit :class:`NegativeCoefficientWarning` when a
    parameter choice produces a negative weight; they are not rejected.
    """
    out = _BUILDERS[spec.family](*spec.params)
    if len(out) == 3:
        coeffs, errors, params = out
    else:
        coeffs, errors = out
        params = _linear_params(coeffs.t)
    label = spec.family + ("(" + ", ".join(repr(p) for p in spec.params) + ")" if spec.params else "")
    coeffs = SplitCoefficients(coeffs.t, coeffs.v, coeffs.arrangement, label)

    if classify_order(coeffs, gradient_weight=-errors.e_VTV) != 4:
        raise DomainError(f"{label} did not produce an effective fourth-order set")
    if params.family_kind is not FamilyKind.LINEAR:
        report = positivity_report(coeffs)
        if not report.forward:
            warnings.warn(
                f"{label}: negative coefficients t{list(report.negative_t)} v{list(report.negative_v)}",
                NegativeCoefficientWarning,
                stacklevel=2,
            )
    return coeffs, errors, params


# Named algorithms at their defining parameters.
NAMED_SETS = {
    "4a": FamilySpec("minimal_velocity", (3,)),
    "4b": FamilySpec("minimal_position", (3,)),
    "4c": FamilySpec("alg_4acb", (3.0 / 8.0,)),
    "4d": FamilySpec("minimal_velocity", (4,)),
    "forest-ruth": FamilySpec("forest_ruth"),
}


def named_set(name: str):
    """Coefficients for an alias (``4a``..``4d``, ``forest-ruth``, ``leapfrog``).

    Returns ``(coefficients, errors, params_or_None)``.
    """
    key = name.lower()
    if key == "leapfrog":
        coeffs, errors = linear_from_t((0.0, 1.0))
        return SplitCoefficients(coeffs.t, coeffs.v, coeffs.arrangement, "leapfrog"), errors, None
    if key not in NAMED_SETS:
        raise DomainError(f"unknown named set {name!r}")
    coeffs, errors, params = make_family(NAMED_SETS[key])
    return SplitCoefficients(coeffs.t, coeffs.v, coeffs.arrangement, key), errors, params


# ---- positivity -----------------------------------------------------------


@dataclass(frozen=True)
class PositivityReport:
    """Negative entries (0-based indices into t and v) and derived flags.

    ``goldman_kaper`` is None unless the set is a linear (v_i = (t_i+t_{i+1})/2,
    t_1 = 0) set with vanishing cube sum; then it records whether some
    negative t has a negative neighbouring kick.
    """

    negative_t: tuple[int, ...]
    negative_v: tuple[int, ...]
    forward: bool
    goldman_kaper: bool | None = None
    negative_pairs: tuple[tuple[int, int], ...] = ()


def _is_linear_set(c: SplitCoefficients, tol: float) -> bool:
    if c.arrangement is not Arrangement.T_FIRST or c.t[0] != 0.0:
        return False
    ext = c.t + (0.0,)
    return all(abs(c.v[i] - 0.5 * (ext[i] + ext[i + 1])) <= tol for i in range(len(c)))


def positivity_report(c: SplitCoefficients, tol: float = DEFAULT_TOL) -> PositivityReport:
    neg_t = tuple(i for i, x in enumerate(c.t) if x < 0.0)
    neg_v = tuple(i for i, x in enumerate(c.v) if x < 0.0)
    gk = None
    pairs: list[tuple[int, int]] = []
    if _is_linear_set(c, tol) and abs(delta_g(c.t)) <= tol:
        # kicks adjacent to drift k in T-first order are v_{k-1} and v_k
        for k in neg_t:
            for j in (k - 1, k):
                if 0 <= j < len(c) and c.v[j] < 0.0:
                    pairs.append((k, j))
        gk = bool(pairs)
    return PositivityReport(neg_t, neg_v, not neg_t and not neg_v, gk, tuple(pairs))
