"""Dense matrix exponential and logarithm for small real matrices.

``expm`` is scaling-and-squaring around a diagonal Pade approximant and
``logm`` is inverse scaling-and-squaring (Denman-Beavers square roots
followed by an inverse-hyperbolic-tangent series).  Both target matrices
of modest norm and dimension, which is all the BCH oracle needs.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["expm", "logm", "sqrtm", "commutator"]

_PADE_DEGREE = 8


def _pade_coefficients(q: int) -> np.ndarray:
    c = np.empty(q + 1)
    c[0] = 1.0
    for k in range(1, q + 1):
        c[k] = c[k - 1] * (q - k + 1) / (k * (2 * q - k + 1))
    return c


_PADE = _pade_coefficients(_PADE_DEGREE)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a square array.

    The argument is scaled by ``2**-s`` until its 1-norm is at most 1/2,
    where the [8/8] Pade error bound is far below unit roundoff, and the
    result is squared back ``s`` times.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    s = 0
    if norm > 0.5:
        s = max(0, int(math.ceil(math.log2(norm / 0.5))))
    x = a / 2.0**s

    ident = np.eye(n)
    power = ident
    num = _PADE[0] * ident
    den = _PADE[0] * ident
    sign = 1.0
    for k in range(1, _PADE_DEGREE + 1):
        power = power @ x
        sign = -sign
        num = num + _PADE[k] * power
        den = den + sign * _PADE[k] * power
    e = np.linalg.solve(den, num)
    for _ in range(s):
        e = e @ e
    return e


def sqrtm(a: np.ndarray, tol: float = 1e-15, max_iter: int = 60) -> np.ndarray:
    """Principal square root by the product-form Denman-Beavers iteration."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    ident = np.eye(n)
    m = a.copy()
    y = a.copy()
    for _ in range(max_iter):
        m_inv = np.linalg.inv(m)
        y = 0.5 * y @ (ident + m_inv)
        m = 0.5 * (ident + 0.5 * (m + m_inv))
        if np.linalg.norm(m - ident, 1) <= tol:
            return y
    raise np.linalg.LinAlgError("square root iteration did not converge")


def _log_near_identity(a: np.ndarray) -> np.ndarray:
    # log(A) = 2 atanh(Z), Z = (A - I)(A + I)^-1, for ||A - I|| small
    n = a.shape[0]
    ident = np.eye(n)
    z = np.linalg.solve((a + ident).T, (a - ident).T).T
    z2 = z @ z
    term = z
    out = z.copy()
    k = 1
    while True:
        term = term @ z2
        k += 2
        update = term / k
        out = out + update
        if np.linalg.norm(update, 1) <= 1e-18 * max(1.0, np.linalg.norm(out, 1)):
            break
        if k > 200:
            raise np.linalg.LinAlgError("logarithm series did not converge")
    return 2.0 * out


def logm(a: np.ndarray, max_roots: int = 40) -> np.ndarray:
    """Principal matrix logarithm.

    Raises ``np.linalg.LinAlgError`` when the argument is too far from the
    identity for the principal branch to be reached by repeated square
    roots (e.g. eigenvalues on the negative real axis).
    """
    a = np.asarray(a, dtype=float)
    ident = np.eye(a.shape[0])
    k = 0
    while np.linalg.norm(a - ident, 1) > 0.1:
        if k >= max_roots:
            raise np.linalg.LinAlgError("logarithm: argument not reachable by square roots")
        a = sqrtm(a)
        k += 1
    return 2.0**k * _log_near_identity(a)
