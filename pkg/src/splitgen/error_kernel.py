"""Leading BCH error coefficients of a two-operator splitting.

A splitting is the product

    prod_i exp(t_i eps T) exp(v_i eps V)        (T-first)
    prod_i exp(v_i eps V) exp(t_i eps T)        (V-first)

whose logarithm is

    eps e_T T + eps e_V V + eps^2 e_TV [T,V]
      + eps^3 (e_TTV [T,[T,V]] + e_VTV [V,[T,V]]) + O(eps^4).

The coefficients are obtained from the partial sums ``s_i = t_1 + ... + t_i``
and ``u_i = v_i + ... + v_N`` by matching the words TV, TTV and TVV in the
expanded product.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Arrangement",
    "SplitCoefficients",
    "ErrorCoefficients",
    "PrefixSums",
    "prefix_suffix_sums",
    "backward_difference",
    "error_coefficients",
    "delta_g",
    "g_sum",
    "classify_order",
    "is_palindromic",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-12


class Arrangement(str, enum.Enum):
    T_FIRST = "t_first"
    V_FIRST = "v_first"


@dataclass(frozen=True)
class SplitCoefficients:
    """Ordered splitting weights.

    ``t`` multiplies ``eps T`` (drift) and ``v`` multiplies ``eps V`` (kick).
    With ``arrangement`` T-first the i-th pair is applied drift then kick,
    with V-first kick then drift.  Lists are stored exactly as given.
    """

    t: tuple[float, ...]
    v: tuple[float, ...]
    arrangement: Arrangement = Arrangement.T_FIRST
    name: str = ""

    def __post_init__(self):
        t = tuple(float(x) for x in self.t)
        v = tuple(float(x) for x in self.v)
        if len(t) != len(v):
            raise ValueError(f"t and v must have equal length, got {len(t)} and {len(v)}")
        if len(t) < 1:
            raise ValueError("a splitting needs at least one (t, v) pair")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "arrangement", Arrangement(self.arrangement))

    def __len__(self) -> int:
        return len(self.t)

    def to_t_first(self) -> "SplitCoefficients":
        """Equivalent T-first representation.

        For V-first sets with ``v_1 = 0`` this is the index shift
        ``v' = (v_2, ..., v_N, 0)``; otherwise a zero drift is prepended.
        """
        if self.arrangement is Arrangement.T_FIRST:
            return self
        if self.v[0] == 0.0:
            return SplitCoefficients(self.t, self.v[1:] + (0.0,), Arrangement.T_FIRST, self.name)
        return SplitCoefficients((0.0,) + self.t, self.v + (0.0,), Arrangement.T_FIRST, self.name)

    def operators(self) -> list[tuple[str, float]]:
        """The factors in application order, as ``("T" | "V", weight)`` pairs."""
        ops = []
        for ti, vi in zip(self.t, self.v):
            if self.arrangement is Arrangement.T_FIRST:
                ops += [("T", ti), ("V", vi)]
            else:
                ops += [("V", vi), ("T", ti)]
        return ops

    def compress(self, tol: float = 0.0) -> list[tuple[str, float]]:
        """Operator sequence with weights ``|w| <= tol`` dropped and neighbours merged."""
        out: list[tuple[str, float]] = []
        for kind, w in self.operators():
            if abs(w) <= tol:
                continue
            if out and out[-1][0] == kind:
                out[-1] = (kind, out[-1][1] + w)
            else:
                out.append((kind, w))
        return [(k, w) for k, w in out if abs(w) > tol]

    def to_json(self, e_vtv: float | None = None, **extra) -> str:
        doc = {
            "name": self.name,
            "arrangement": self.arrangement.value,
            "t": list(self.t),
            "v": list(self.v),
            "e_vtv": e_vtv,
        }
        doc.update(extra)
        return json.dumps(doc, indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "SplitCoefficients":
        return cls(
            t=tuple(doc["t"]),
            v=tuple(doc["v"]),
            arrangement=Arrangement(doc.get("arrangement", "t_first")),
            name=doc.get("name", ""),
        )

    @classmethod
    def from_json(cls, text: str) -> "SplitCoefficients":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ErrorCoefficients:
    e_T: float
    e_V: float
    e_TV: float
    e_TTV: float
    e_VTV: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.e_T, self.e_V, self.e_TV, self.e_TTV, self.e_VTV)


@dataclass(frozen=True)
class PrefixSums:
    """``s[0..N]`` with ``s[0] = 0`` and ``u[0..N]`` with ``u[N] = 0``.

    ``s[i]`` is ``s_i`` and ``u[i-1]`` is ``u_i`` in 1-based notation.
    """

    s: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)


def prefix_suffix_sums(c: SplitCoefficients) -> PrefixSums:
    t = np.asarray(c.t)
    v = np.asarray(c.v)
    s = np.concatenate(([0.0], np.cumsum(t)))
    u = np.concatenate((np.cumsum(v[::-1])[::-1], [0.0]))
    return PrefixSums(s=s, u=u)


def backward_difference(s: np.ndarray, n: int) -> np.ndarray:
    """``s_i**n - s_{i-1}**n`` for i = 1..N."""
    sn = np.asarray(s) ** n
    return sn[1:] - sn[:-1]


def error_coefficients(c: SplitCoefficients) -> ErrorCoefficients:
    """Return e_T, e_V, e_TV, e_TTV, e_VTV of the splitting ``c``.

    Under the primary constraints e_T = e_V = 1 these reduce to

        1/2 + e_TV             = sum(nabla s_i   u_i)
        1/6 + e_TV/2 + e_TTV   = sum(nabla s_i^2 u_i) / 2
        1/6 + e_TV/2 - e_VTV   = sum(nabla s_i   u_i^2) / 2

    The constants are carried with their e_T, e_V weights so sets that
    violate the primary constraints still get their true coefficients.
    """
    c = c.to_t_first()
    ps = prefix_suffix_sums(c)
    s, u = ps.s, ps.u[:-1]
    e_t = float(s[-1])
    e_v = float(u[0])
    d1 = backward_difference(s, 1)
    d2 = backward_difference(s, 2)
    e_tv = float(np.dot(d1, u)) - 0.5 * e_t * e_v
    e_ttv = 0.5 * float(np.dot(d2, u)) - e_t * e_t * e_v / 6.0 - 0.5 * e_t * e_tv
    e_vtv = e_t * e_v * e_v / 6.0 + 0.5 * e_v * e_tv - 0.5 * float(np.dot(d1, u * u))
    return ErrorCoefficients(e_t, e_v, e_tv, e_ttv, e_vtv)


def delta_g(t: Sequence[float]) -> float:
    """Cube sum of the drift weights."""
    return float(np.sum(np.asarray(t, dtype=float) ** 3))


def g_sum(t: Sequence[float], tol: float = DEFAULT_TOL) -> float:
    """``sum s_i s_{i-1} t_i``, equal to ``(1 - delta_g(t)) / 3`` when sum(t) = 1.

    Uses the product form, which has no division by ``t_i``.
    """
    t = np.asarray(t, dtype=float)
    total = float(t.sum())
    if abs(total - 1.0) > tol:
        raise ValueError(f"g_sum requires sum(t) = 1, got {total!r}")
    s = np.concatenate(([0.0], np.cumsum(t)))
    return float(np.sum(s[1:] * s[:-1] * t))


def is_palindromic(c: SplitCoefficients, tol: float = DEFAULT_TOL) -> bool:
    """True when the compressed operator sequence reads the same reversed."""
    ops = c.compress(tol)
    for (k1, w1), (k2, w2) in zip(ops, reversed(ops)):
        if k1 != k2 or abs(w1 - w2) > tol:
            return False
    return True


def classify_order(c: SplitCoefficients, tol: float = DEFAULT_TOL, gradient_weight: float = 0.0) -> int:
    """Largest order in 0..4 whose conditions hold within ``tol``.

    ``gradient_weight`` is the total weight of exp(eps^3 w [V,[T,V]]) factors
    attached to the kicks; it shifts the effective e_VTV by ``w``.  With the
    default 0 the bare splitting is classified, so a forward set such as 4A
    (e_VTV = -1/72) is order 2 until its gradient term is supplied.
    """
    e = error_coefficients(c)
    if abs(e.e_T - 1.0) > tol or abs(e.e_V - 1.0) > tol:
        return 0
    if abs(e.e_TV) > tol:
        return 1
    if abs(e.e_TTV) > tol or abs(e.e_VTV + gradient_weight) > tol:
        return 2
    if not is_palindromic(c, tol):
        return 3
    return 4
