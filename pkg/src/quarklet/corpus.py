"""Named test functions for experiments.

Spec strings: ``bump``, ``bspline:<m>``, ``psi``, ``sawtooth``, ``lacunary``,
``zero``; a suffix ``@<t>`` dilates to ``f(2^t x)``, e.g. ``bspline:3@2``.

=============  ================================================================
``bump``       ``exp(-2 x^2)``
``bspline:m``  centred cardinal B-spline ``N_m(x + m/2)``
``psi``        primal wavelet of the active filter pair
``sawtooth``   ``x - floor(x)`` on ``[-2, 2)``, zero elsewhere (jumps at integers)
``lacunary``   ``sum_{n<=5} 2^{-0.8 n} sin(2^n pi x)`` times ``cos^2(pi x / 4)`` on ``[-2, 2]``
``zero``       the zero function
=============  ================================================================
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .multiscale import FilterPair, eval_quarklet
from .splines import eval_bspline

LACUNARY_DECAY = 0.8
LACUNARY_TERMS = 5

BUILTINS = ("bump", "bspline", "psi", "sawtooth", "lacunary", "zero")


def _bump(x):
    return np.exp(-2.0 * x**2)


def _sawtooth(x):
    return np.where((x >= -2) & (x < 2), x - np.floor(x), 0.0)


def _lacunary(x):
    taper = np.where(np.abs(x) <= 2, np.cos(np.pi * x / 4) ** 2, 0.0)
    total = sum(2.0 ** (-LACUNARY_DECAY * n) * np.sin(2.0**n * np.pi * x) for n in range(LACUNARY_TERMS + 1))
    return taper * total


def resolve(spec: str, fp: FilterPair | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Callable for a corpus spec string; raises ``ValueError`` for unknown names."""
    name, _, dil = spec.partition("@")
    t = int(dil) if dil else 0
    base, _, arg = name.partition(":")
    if base == "bump":
        g = _bump
    elif base == "bspline":
        m = int(arg or 3)
        g = lambda x, m=m: eval_bspline(m, x + m / 2)
    elif base == "psi":
        if fp is None:
            raise ValueError("'psi' needs a filter pair")
        g = lambda x: eval_quarklet(fp, 0, x)
    elif base == "sawtooth":
        g = _sawtooth
    elif base == "lacunary":
        g = _lacunary
    elif base == "zero":
        g = np.zeros_like
    else:
        raise ValueError(f"unknown test function {spec!r}; builtins are {', '.join(BUILTINS)}")
    if t == 0:
        return lambda x: np.asarray(g(np.asarray(x, dtype=float)), dtype=float)
    scale = 2.0**t
    return lambda x: np.asarray(g(scale * np.asarray(x, dtype=float)), dtype=float)


# smooth members that sit in H^0.7 at every dilation used by the acceptance experiment
EQUIVALENCE_FAMILY = ("bump", "bspline:2", "bspline:3", "bspline:4", "psi", "lacunary")


def random_coefficient_set(
    rng: np.random.Generator,
    n: int,
    levels: tuple[int, int] = (-1, 5),
    kmax: int = 8,
    pmax: int = 0,
    **meta,
):
    """Up to ``n`` distinct indices with standard normal values (duplicates are merged)."""
    from .transform import CoefficientSet

    vals = {}
    for _ in range(n):
        p = int(rng.integers(0, pmax + 1))
        j = int(rng.integers(levels[0], levels[1] + 1))
        k = int(rng.integers(-kmax, kmax + 1))
        vals[(p, j, k)] = float(rng.standard_normal())
    return CoefficientSet(vals, **meta)
