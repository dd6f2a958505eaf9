"""Cardinal B-splines, their derivatives, the symmetrized generator and quarks.

All evaluators accept scalars or arrays and return ``float`` for scalar input,
``numpy.ndarray`` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np
import numpy.typing as npt

MAX_ORDER = 12

ArrayLike = npt.ArrayLike


def _check_order(m: int) -> None:
    if int(m) != m or m < 1:
        raise ValueError(f"spline order must be a positive integer, got {m!r}")
    if m > MAX_ORDER:
        raise ValueError(
            f"order {m} exceeds MAX_ORDER={MAX_ORDER}; the alternating truncated-power "
            "sum loses too many digits beyond that"
        )


def _out(x_in, y: np.ndarray):
    return float(y) if np.ndim(x_in) == 0 else y


def eval_bspline(m: int, x: ArrayLike):
    """Cardinal B-spline ``N_m`` via the truncated-power formula.

    ``N_m(x) = 1/(m-1)! sum_{k=0}^{m} (-1)^k C(m,k) (x-k)_+^{m-1}``

    The sum is accumulated with Neumaier compensation and evaluated on the
    left half of the (symmetric) support, which keeps the terms small. The
    result is exactly zero outside ``[0, m)``; ``N_1`` is right-open.
    """
    _check_order(m)
    xa = np.asarray(x, dtype=float)
    inside = (xa >= 0.0) & (xa < m)
    # symmetry N_m(x) = N_m(m - x) except for m = 1 whose right end is open
    xs = np.where(xa > m / 2.0, m - xa, xa) if m > 1 else xa
    total = np.zeros_like(xa)
    comp = np.zeros_like(xa)
    for k in range(m + 1):
        d = xs - k
        if m == 1:
            tp = (d >= 0).astype(float)
        else:
            tp = np.where(d > 0, d, 0.0) ** (m - 1)
        term = (-1) ** k * comb(m, k) * tp
        t = total + term
        comp += np.where(np.abs(total) >= np.abs(term), (total - t) + term, (term - t) + total)
        total = t
    y = (total + comp) / factorial(m - 1)
    y = np.where(inside, np.maximum(y, 0.0), 0.0)
    return _out(x, y)


def eval_bspline_recursive(m: int, x: ArrayLike):
    """``N_m`` from ``N_1 = chi_[0,1)`` by the two-term order recursion."""
    _check_order(m)
    xa = np.asarray(x, dtype=float)
    # values[i] holds N_order(x - i) for the shifts needed at the next order
    vals = [((xa - i >= 0) & (xa - i < 1)).astype(float) for i in range(m)]
    for order in range(2, m + 1):
        nxt = []
        for i in range(m - order + 1):
            t = xa - i
            nxt.append((t * vals[i] + (order - t) * vals[i + 1]) / (order - 1))
        vals = nxt
    return _out(x, vals[0])


def eval_bspline_derivative(m: int, n: int, x: ArrayLike):
    """n-th derivative of ``N_m`` for ``1 <= n <= m-1``.

    Applies ``N_m' = N_{m-1} - N_{m-1}(. - 1)`` n times, which gives
    ``sum_i (-1)^i C(n,i) N_{m-n}(x - i)``.
    """
    _check_order(m)
    if not 1 <= n <= m - 1:
        raise ValueError(f"derivative order must satisfy 1 <= n <= m-1, got n={n}, m={m}")
    xa = np.asarray(x, dtype=float)
    y = np.zeros_like(xa)
    for i in range(n + 1):
        y = y + (-1) ** i * comb(n, i) * eval_bspline(m - n, xa - i)
    return _out(x, y)


def eval_symmetrized(m: int, x: ArrayLike):
    """Symmetrized generator ``phi(x) = N_m(x + floor(m/2))``."""
    xa = np.asarray(x, dtype=float)
    return _out(x, eval_bspline(m, xa + m // 2))


@dataclass(frozen=True)
class Quark:
    m: int
    p: int

    def __post_init__(self) -> None:
        _check_order(self.m)
        if int(self.p) != self.p or self.p < 0:
            raise ValueError(f"quark degree must be a nonnegative integer, got {self.p!r}")

    @property
    def support(self) -> tuple[int, int]:
        return -(self.m // 2), -(-self.m // 2)


def eval_quark(q: Quark, x: ArrayLike):
    """``phi_p(x) = (x / ceil(m/2))^p phi(x)``."""
    xa = np.asarray(x, dtype=float)
    scale = -(-q.m // 2)
    y = eval_symmetrized(q.m, xa)
    if q.p:
        y = (xa / scale) ** q.p * y
    return _out(x, y)


def refinement_mask(m: int) -> list[float]:
    """Two-scale mask ``a_k = 2^(1-m) C(m,k)``, ``k = 0..m``, of ``N_m``."""
    _check_order(m)
    return [comb(m, k) / 2 ** (m - 1) for k in range(m + 1)]
