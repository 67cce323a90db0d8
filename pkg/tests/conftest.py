import itertools
from fractions import Fraction

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def word_coefficients(ops):
    """Exact coefficients of the words TV, TTV, TVV in prod exp(w_k X_k).

    Brute force: each factor exp(wX) contributes X^m w^m / m!; enumerate all
    ways to produce each word from the ordered factors.
    """
    ops = [(k, Fraction(w)) for k, w in ops]
    out = {}
    for word in ("T", "V", "TV", "TTV", "TVV"):
        total = Fraction(0)
        # split the word into consecutive runs assigned to increasing factor indices
        n = len(ops)
        for cut in _compositions(word):
            for idx in itertools.combinations(range(n), len(cut)):
                term = Fraction(1)
                for run, k in zip(cut, idx):
                    kind, w = ops[k]
                    if set(run) != {kind}:
                        term = 0
                        break
                    m = len(run)
                    term *= w**m / _fact(m)
                total += term
        out[word] = total
    return out


def _fact(m):
    r = 1
    for k in range(2, m + 1):
        r *= k
    return r


def _compositions(word):
    """All ways to cut ``word`` into nonempty consecutive runs."""
    n = len(word)
    for mask in range(1 << (n - 1)):
        runs, start = [], 0
        for i in range(1, n):
            if mask >> (i - 1) & 1:
                runs.append(word[start:i])
                start = i
        runs.append(word[start:])
        yield runs


def exact_error_coefficients(t, v, t_first=True):
    """(e_T, e_V, e_TV, e_TTV, e_VTV) from the brute-force word coefficients."""
    ops = []
    for ti, vi in zip(t, v):
        pair = [("T", ti), ("V", vi)] if t_first else [("V", vi), ("T", ti)]
        ops += pair
    w = word_coefficients(ops)
    e_t, e_v = w["T"], w["V"]
    e_tv = w["TV"] - e_t * e_v / 2
    e_ttv = w["TTV"] - e_t * e_t * e_v / 6 - e_t * e_tv / 2
    e_vtv = e_t * e_v * e_v / 6 + e_v * e_tv / 2 - w["TVV"]
    return (e_t, e_v, e_tv, e_ttv, e_vtv)


@pytest.fixture
def exact_coefficients():
    return exact_error_coefficients
