"""CDF filter pairs, primal quarklets, cascade duals and dyadic geometry."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import NamedTuple

import numpy as np

from .splines import Quark, eval_quark

SUPPORTED_PAIRS = ((1, 1), (2, 2), (2, 4), (3, 3), (3, 5), (4, 4))
DEFAULT_DEPTH = 12
GAUSS_NODES = 8


class UnsupportedParametersError(ValueError):
    """Raised for (m, mtilde) outside the shipped filter table."""


class CascadeDivergenceError(RuntimeError):
    pass


class Mask(NamedTuple):
    """Finitely supported sequence ``coeffs[i]`` at integer position ``offset + i``."""

    offset: int
    coeffs: np.ndarray

    @property
    def last(self) -> int:
        return self.offset + len(self.coeffs) - 1

    def items(self):
        return zip(range(self.offset, self.offset + len(self.coeffs)), self.coeffs)


class QuarkletIndex(NamedTuple):
    p: int
    j: int
    k: int


@dataclass(frozen=True)
class DyadicCube:
    """``Q_{j,k} = 2^-j ([0,1) + k)``."""

    j: int
    k: int

    @property
    def interval(self) -> tuple[float, float]:
        return self.k * 2.0**-self.j, (self.k + 1) * 2.0**-self.j

    @property
    def length(self) -> float:
        return 2.0**-self.j

    def indicator(self, x):
        a, b = self.interval
        x = np.asarray(x, dtype=float)
        return ((x >= a) & (x < b)).astype(float)


@dataclass(frozen=True, eq=False)
class FilterPair:
    m: int
    mtilde: int
    a: Mask
    atilde: Mask
    b: Mask
    btilde: Mask
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def phi_support(self) -> tuple[int, int]:
        return -(self.m // 2), -(-self.m // 2)

    @property
    def psi_support(self) -> tuple[float, float]:
        lo, hi = self.phi_support
        return (self.b.offset + lo) / 2, (self.b.last + hi) / 2

    @property
    def dual_phi_support(self) -> tuple[int, int]:
        return self.atilde.offset, self.atilde.last

    @property
    def dual_psi_support(self) -> tuple[float, float]:
        lo, hi = self.dual_phi_support
        return (self.btilde.offset + lo) / 2, (self.btilde.last + hi) / 2


def _parse_table(text: str) -> dict[tuple[int, int], dict[str, dict[int, float]]]:
    table: dict[tuple[int, int], dict[str, dict[int, float]]] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, m, mt, off, val = line.split()
        table.setdefault((int(m), int(mt)), {}).setdefault(name, {})[int(off)] = float(val)
    return table


@lru_cache(maxsize=None)
def _shipped_table():
    text = resources.files("quarklet").joinpath("data/cdf_filters.txt").read_text()
    return _parse_table(text)


def _to_mask(entries: dict[int, float]) -> Mask:
    lo, hi = min(entries), max(entries)
    return Mask(lo, np.array([entries.get(k, 0.0) for k in range(lo, hi + 1)]))


@lru_cache(maxsize=None)
def cdf_filters(m: int, mtilde: int) -> FilterPair:
    """Filter pair of the CDF(m, mtilde) spline wavelets from the shipped table."""
    if mtilde < m or (m + mtilde) % 2:
        raise UnsupportedParametersError(
            f"CDF({m},{mtilde}) needs mtilde >= m and m + mtilde even"
        )
    table = _shipped_table()
    if (m, mtilde) not in table:
        raise UnsupportedParametersError(
            f"CDF({m},{mtilde}) is not in the filter table; supported: {SUPPORTED_PAIRS}"
        )
    t = table[(m, mtilde)]
    return FilterPair(m, mtilde, *(_to_mask(t[n]) for n in ("a", "atilde", "b", "btilde")))


def discrete_biorthogonality_residual(fp: FilterPair) -> float:
    """Max deviation from ``sum_k h_k g_{k-2n} = 2 delta_n`` (and 0 for cross pairs)."""
    worst = 0.0
    for h, g, target in ((fp.a, fp.atilde, 2.0), (fp.b, fp.btilde, 2.0),
                         (fp.a, fp.btilde, 0.0), (fp.b, fp.atilde, 0.0)):
        hd = dict(h.items())
        gd = dict(g.items())
        lo = min(hd) - max(gd)
        hi = max(hd) - min(gd)
        for n in range(lo // 2 - 1, hi // 2 + 2):
            acc = sum(v * gd.get(k - 2 * n, 0.0) for k, v in hd.items())
            worst = max(worst, abs(acc - (target if n == 0 else 0.0)))
    return worst


# -- primal side ---------------------------------------------------------------


def eval_quarklet(fp: FilterPair, p: int, x):
    """``psi_p(x) = sum_k b_k phi_p(2x - k)``."""
    xa = np.asarray(x, dtype=float)
    q = Quark(fp.m, p)
    y = np.zeros_like(xa)
    for k, bk in fp.b.items():
        y = y + bk * eval_quark(q, 2.0 * xa - k)
    return float(y) if np.ndim(x) == 0 else y


def eval_quarklet_scaled(fp: FilterPair, idx: QuarkletIndex, x):
    """``psi_{p,j,k}``; the generator level ``j = -1`` is ``phi_p(. - k)``."""
    p, j, k = idx
    xa = np.asarray(x, dtype=float)
    if j == -1:
        y = eval_quark(Quark(fp.m, p), xa - k)
    else:
        y = 2.0 ** (j / 2) * eval_quarklet(fp, p, 2.0**j * xa - k)
    return float(y) if np.ndim(x) == 0 else np.asarray(y)


def support_of(fp: FilterPair, idx: QuarkletIndex) -> tuple[float, float]:
    """Closed hull of the support of ``psi_{p,j,k}`` (independent of p)."""
    _, j, k = idx
    if j == -1:
        lo, hi = fp.phi_support
        return float(lo + k), float(hi + k)
    lo, hi = fp.psi_support
    return (lo + k) * 2.0**-j, (hi + k) * 2.0**-j


def dual_support_of(fp: FilterPair, j: int, k: int) -> tuple[float, float]:
    if j == -1:
        lo, hi = fp.dual_phi_support
        return float(lo + k), float(hi + k)
    lo, hi = fp.dual_psi_support
    return (lo + k) * 2.0**-j, (hi + k) * 2.0**-j


# -- dual side (cascade) -------------------------------------------------------


class GridFunction(NamedTuple):
    """Piecewise linear function with nodal values ``values[i]`` at ``(start + i) * 2^-level``."""

    start: int
    level: int
    values: np.ndarray

    @property
    def step(self) -> float:
        return 2.0**-self.level

    @property
    def nodes(self) -> np.ndarray:
        return (self.start + np.arange(len(self.values))) * self.step

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        y = np.interp(xa, self.nodes, self.values, left=0.0, right=0.0)
        return float(y) if np.ndim(x) == 0 else y


def cascade(mask: Mask, depth: int, centred: bool = True) -> GridFunction:
    """Subdivision iterates ``S^depth delta`` of a refinement mask.

    The result is the piecewise linear cascade approximation of the refinable
    function on the grid ``2^-depth Z``. The initial sequence is a unit mass at
    the centre of symmetry of the mask (split over two nodes for half-integer
    centres).
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    vals = np.array([1.0])
    start = 0
    peak = 1.0
    for d in range(depth):
        up = np.zeros(2 * len(vals) - 1)
        up[::2] = vals
        vals = np.convolve(up, mask.coeffs)
        start = 2 * start + mask.offset
        new_peak = float(np.max(np.abs(vals)))
        if not np.isfinite(new_peak) or (d > 4 and new_peak > 1e6 * peak):
            raise CascadeDivergenceError("cascade iterates blow up; mask has no L2 refinable solution")
        peak = max(peak, new_peak)
    if centred and (mask.offset + mask.last) % 2:
        # start function (hat(x) + hat(x-1))/2 instead of hat(x)
        vals = np.convolve(vals, [0.5, 0.5])
    return GridFunction(start, depth, vals)


def dual_generator(fp: FilterPair, depth: int = DEFAULT_DEPTH) -> GridFunction:
    key = ("phi~", depth)
    if key not in fp._cache:
        # the Haar box is reproduced exactly at the nodes by the plain start
        fp._cache[key] = cascade(fp.atilde, depth, centred=len(fp.atilde.coeffs) > 2)
    return fp._cache[key]


def dual_wavelet(fp: FilterPair, depth: int = DEFAULT_DEPTH) -> GridFunction:
    """``psitilde = sum_k btilde_k phitilde(2 . - k)`` on the grid ``2^-(depth+1) Z``."""
    key = ("psi~", depth)
    if key not in fp._cache:
        g = dual_generator(fp, depth)
        shift = 2**depth
        lo = g.start + fp.btilde.offset * shift
        hi = g.start + len(g.values) - 1 + fp.btilde.last * shift
        vals = np.zeros(hi - lo + 1)
        for k, bk in fp.btilde.items():
            s = g.start + k * shift - lo
            vals[s : s + len(g.values)] += bk * g.values
        fp._cache[key] = GridFunction(lo, depth + 1, vals)
    return fp._cache[key]


def dual_template(fp: FilterPair, j: int, depth: int = DEFAULT_DEPTH) -> GridFunction:
    """``psitilde_{j,0}`` (``phitilde`` for ``j = -1``) as a grid function."""
    if j == -1:
        return dual_generator(fp, depth)
    w = dual_wavelet(fp, depth)
    return GridFunction(w.start, w.level + j, 2.0 ** (j / 2) * w.values)


def eval_dual_generator(fp: FilterPair, x, depth: int = DEFAULT_DEPTH):
    if depth < 1:
        raise ValueError("cascade depth must be >= 1")
    return dual_generator(fp, depth)(x)


def eval_dual_wavelet(fp: FilterPair, j: int, k: int, x, depth: int = DEFAULT_DEPTH):
    """``psitilde_{j,k}(x)`` (``phitilde(x - k)`` for ``j = -1``)."""
    if depth < 1:
        raise ValueError("cascade depth must be >= 1")
    xa = np.asarray(x, dtype=float)
    t = dual_template(fp, j, depth)
    shift = k * (1.0 if j == -1 else 2.0**-j)
    return t(xa - shift)


# -- quadrature ----------------------------------------------------------------


@lru_cache(maxsize=None)
def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def hat_moments(func, start: int, stop: int, level: int, nodes: int = GAUSS_NODES) -> np.ndarray:
    """``int func(x) hat_i(x) dx`` for the hat functions at ``i * 2^-level``.

    ``i`` runs over ``start..stop``; composite Gauss-Legendre on every grid cell,
    exact when ``func`` is a polynomial of degree ``<= 2*nodes - 2`` per cell.
    """
    h = 2.0**-level
    t, w = _gauss(nodes)
    cells = np.arange(start - 1, stop + 1)
    x = (cells[:, None] + t[None, :]) * h
    fx = func(x.ravel()).reshape(x.shape)
    left = h * (fx * (1 - t) * w).sum(axis=1)   # contribution to the cell's left node
    right = h * (fx * t * w).sum(axis=1)
    out = np.zeros(stop - start + 1)
    out += right[:-1]
    out += left[1:]
    return out


def inner_with_grid(func, g: GridFunction, nodes: int = GAUSS_NODES) -> float:
    """``int func * g`` with ``g`` piecewise linear on its grid (exact for piecewise polynomials)."""
    mom = hat_moments(func, g.start, g.start + len(g.values) - 1, g.level, nodes)
    return float(mom @ g.values)


def gauss_integral(func, lo: float, hi: float, level: int, nodes: int = GAUSS_NODES) -> float:
    """Composite Gauss-Legendre over the cells of ``2^-level Z`` covering ``[lo, hi]``."""
    h = 2.0**-level
    t, w = _gauss(nodes)
    c0 = int(np.floor(lo / h))
    c1 = int(np.ceil(hi / h))
    cells = np.arange(c0, c1)
    x = (cells[:, None] + t[None, :]) * h
    fx = func(x.ravel()).reshape(x.shape)
    return float(h * (fx * w).sum())


def primal_moments(fp: FilterPair, p: int, j: int, level: int, nodes: int = GAUSS_NODES):
    """Hat moments of ``psi_{p,j,0}`` on the grid ``2^-level Z``.

    Returns ``(start, moments)`` with ``moments[i]`` belonging to node ``start + i``.
    """
    lo, hi = support_of(fp, QuarkletIndex(p, j, 0))
    start = int(np.floor(lo * 2**level))
    stop = int(np.ceil(hi * 2**level))
    mom = hat_moments(lambda x: eval_quarklet_scaled(fp, QuarkletIndex(p, j, 0), x),
                      start, stop, level, nodes)
    return start, mom


def _shifted_dot(a_start: int, a: np.ndarray, b_start: int, b: np.ndarray) -> float:
    lo = max(a_start, b_start)
    hi = min(a_start + len(a), b_start + len(b))
    if hi <= lo:
        return 0.0
    return float(a[lo - a_start : hi - a_start] @ b[lo - b_start : hi - b_start])


def gram_matrix(fp: FilterPair, levels, ks, depth: int = DEFAULT_DEPTH, p: int = 0):
    """``<psi_{p,j,k}, psitilde_{j',k'}>`` for all ``(j,k), (j',k')`` in ``levels x ks``.

    Rows are primal indices, columns dual indices, both ordered level-major.
    Each entry is integrated exactly against the piecewise linear cascade dual.
    """
    levels = list(levels)
    ks = list(ks)
    n = len(levels) * len(ks)
    G = np.zeros((n, n))
    for b_i, jd in enumerate(levels):
        dual = dual_template(fp, jd, depth)
        E = dual.level
        dual_shift = 2 ** (E - jd) if jd >= 0 else 2**E
        for a_i, jp in enumerate(levels):
            start, mom = primal_moments(fp, p, jp, E)
            prim_shift = 2 ** (E - jp) if jp >= 0 else 2**E
            for a_k, k in enumerate(ks):
                for b_k, kd in enumerate(ks):
                    G[a_i * len(ks) + a_k, b_i * len(ks) + b_k] = _shifted_dot(
                        start + k * prim_shift, mom, dual.start + kd * dual_shift, dual.values
                    )
    return G


def biorthogonality_residual(fp: FilterPair, levels=(-1, 0, 1, 2), kmax: int = 8,
                             depth: int = DEFAULT_DEPTH) -> float:
    G = gram_matrix(fp, levels, range(-kmax, kmax + 1), depth)
    return float(np.max(np.abs(G - np.eye(len(G)))))
