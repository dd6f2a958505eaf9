"""Analysis (local means against cascade duals) and quarkonial synthesis.

Functions live on a uniform dyadic grid over a finite window and are extended
by zero outside it. Both directions exploit translation invariance: every
``(p, j)`` block is one template correlated or accumulated with stride
``2^(J_grid - j)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .multiscale import (
    DEFAULT_DEPTH,
    FilterPair,
    GridFunction,
    QuarkletIndex,
    dual_support_of,
    dual_template,
    eval_quarklet_scaled,
    support_of,
)

QUADRATURE_HEADROOM = 4


class ResolutionError(ValueError):
    """Grid too coarse for the requested transform level."""


@dataclass(frozen=True, eq=False)
class PiecewiseFunction:
    """Samples ``values[i] = f(a + i 2^-level)`` on the closed window ``[a, b]``.

    ``rule`` names how integrals of powers of ``|f|`` are taken: ``"left"``
    treats each sample as the value on ``[x_i, x_{i+1})``, which is exact for
    right-open step functions on the grid and agrees with the trapezoid rule
    whenever ``f`` vanishes at the window ends. Pointwise evaluation and the
    analysis quadrature use linear interpolation between samples.
    """

    window: tuple[float, float]
    level: int
    values: np.ndarray
    rule: str = "left"

    def __post_init__(self) -> None:
        a, b = self.window
        scale = 2.0**self.level
        if not (b > a) or a * scale != int(a * scale) or b * scale != int(b * scale):
            raise ValueError(f"window {self.window} must be a nonempty interval on the 2^-{self.level} grid")
        n = int(round((b - a) * scale)) + 1
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (n,):
            raise ValueError(f"expected {n} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("samples must be finite")
        if self.rule not in ("left", "trapezoid"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, func: Callable[[np.ndarray], np.ndarray], window, level: int,
                      rule: str = "left") -> "PiecewiseFunction":
        a, b = window
        n = int(round((b - a) * 2**level)) + 1
        x = a + np.arange(n) * 2.0**-level
        return cls((float(a), float(b)), level, np.asarray(func(x), dtype=float) * np.ones(n), rule)

    @classmethod
    def zeros(cls, window, level: int) -> "PiecewiseFunction":
        return cls.from_callable(np.zeros_like, window, level)

    @property
    def step(self) -> float:
        return 2.0**-self.level

    @property
    def nodes(self) -> np.ndarray:
        return self.window[0] + np.arange(len(self.values)) * self.step

    @property
    def first_index(self) -> int:
        """Global grid index of the left window end."""
        return int(round(self.window[0] * 2**self.level))

    def __call__(self, x):
        y = np.interp(np.asarray(x, dtype=float), self.nodes, self.values, left=0.0, right=0.0)
        return float(y) if np.ndim(x) == 0 else y

    def with_values(self, values) -> "PiecewiseFunction":
        return PiecewiseFunction(self.window, self.level, values, self.rule)

    def cell_weights(self) -> np.ndarray:
        """Quadrature weights attached to the samples for ``int g(f(x)) dx``."""
        w = np.full(len(self.values), self.step)
        if self.rule == "left":
            w[-1] = 0.0
        else:
            w[0] = w[-1] = self.step / 2
        return w

    def integrate(self, g=None) -> float:
        vals = self.values if g is None else g(self.values)
        return float(self.cell_weights() @ vals)


@dataclass(eq=False)
class CoefficientSet:
    """Finite sparse map ``(p, j, k) -> value`` plus transform metadata."""

    values: dict[QuarkletIndex, float] = field(default_factory=dict)
    m: int | None = None
    mtilde: int | None = None
    J: int | None = None
    window: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        self.values = {QuarkletIndex(*map(int, key)): float(v) for key, v in self.values.items()}

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, idx) -> float:
        return self.values.get(QuarkletIndex(*idx), 0.0)

    def items(self):
        return self.values.items()

    def _like(self, values: Mapping) -> "CoefficientSet":
        return CoefficientSet(dict(values), self.m, self.mtilde, self.J, self.window)

    def arrays(self):
        """``(p, j, k, value)`` as numpy arrays in sorted index order."""
        keys = sorted(self.values)
        if not keys:
            e = np.zeros(0, dtype=int)
            return e, e, e, np.zeros(0)
        arr = np.array(keys, dtype=int)
        return arr[:, 0], arr[:, 1], arr[:, 2], np.array([self.values[k] for k in keys])

    def nonzero(self) -> "CoefficientSet":
        return self._like({k: v for k, v in self.values.items() if v != 0.0})

    def scaled(self, alpha: float) -> "CoefficientSet":
        return self._like({k: alpha * v for k, v in self.values.items()})

    def __add__(self, other: "CoefficientSet") -> "CoefficientSet":
        out = dict(self.values)
        for k, v in other.values.items():
            out[k] = out.get(k, 0.0) + v
        return self._like(out)

    def __mul__(self, alpha: float) -> "CoefficientSet":
        return self.scaled(alpha)

    __rmul__ = __mul__

    def level(self, j: int) -> dict[int, float]:
        return {idx.k: v for idx, v in self.values.items() if idx.j == j}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["p", "j", "k", "value"])
            for idx in sorted(self.values):
                w.writerow([idx.p, idx.j, idx.k, f"{self.values[idx]:.17g}"])

    @classmethod
    def from_csv(cls, path, **meta) -> "CoefficientSet":
        vals: dict[QuarkletIndex, float] = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["p", "j", "k", "value"]:
                raise ValueError(f"{path}: expected header p,j,k,value, got {reader.fieldnames}")
            for row in reader:
                idx = QuarkletIndex(int(row["p"]), int(row["j"]), int(row["k"]))
                if idx.p < 0 or idx.j < -1:
                    raise ValueError(f"{path}: invalid index {tuple(idx)}")
                vals[idx] = vals.get(idx, 0.0) + float(row["value"])
        return cls(vals, **meta)


# -- analysis --------------------------------------------------------------------


def _mixed_mass(t: GridFunction, level: int):
    """``w[i] = int hat_{g0+i} t dx`` for the hats of the ``2^-level`` grid.

    ``t`` is piecewise linear on its own dyadic grid. If that grid is coarser
    it is first refined (exactly) to ``level``; every fine cell then sits in one
    coarse cell and Simpson's rule integrates the quadratic product exactly.
    """
    E = t.level
    vals = t.values
    start = t.start
    if E < level:
        r = 2 ** (level - E)
        fine = np.arange(start * r, (start + len(vals) - 1) * r + 1)
        vals = np.interp(fine / r, start + np.arange(len(vals)), vals)
        start, E = int(fine[0]), level
    R = 2 ** (E - level)
    H = 2.0**-E
    n = start + np.arange(len(vals) - 1)
    g = np.floor_divide(n, R)
    t0 = (n - g * R) / R
    t1 = t0 + 1.0 / R
    tm = (t0 + t1) / 2
    d0, d1 = vals[:-1], vals[1:]
    dm = (d0 + d1) / 2
    right = H / 6 * (d0 * t0 + 4 * dm * tm + d1 * t1)
    left = H / 6 * (d0 * (1 - t0) + 4 * dm * (1 - tm) + d1 * (1 - t1))
    g0 = int(g[0])
    size = int(g[-1]) - g0 + 2
    w = np.bincount(g - g0, weights=left, minlength=size) + np.bincount(g - g0 + 1, weights=right, minlength=size)
    return g0, w


def _k_range(fp: FilterPair, j: int, window, dual: bool = True) -> range:
    a, b = window
    sup = dual_support_of if dual else (lambda fp_, j_, k_: support_of(fp_, QuarkletIndex(0, j_, k_)))
    lo0, hi0 = sup(fp, j, 0)
    scale = 1.0 if j == -1 else 2.0**j
    # support (lo0 + k/scale, hi0 + k/scale) must meet the open window
    kmin = int(np.floor((a - hi0) * scale)) + 1
    kmax = int(np.ceil((b - lo0) * scale)) - 1
    return range(kmin, kmax + 1)


def analyze_level(f: PiecewiseFunction, fp: FilterPair, j: int, depth: int = DEFAULT_DEPTH):
    """Local means ``<f, psitilde_{j,k}>`` for every k whose dual support meets the window."""
    ks = _k_range(fp, j, f.window)
    g0, w = _mixed_mass(dual_template(fp, j, depth), f.level)
    S = 2 ** (f.level - j) if j >= 0 else 2 ** f.level
    ga = f.first_index
    first = g0 + ks.start * S - ga
    last = g0 + (ks.stop - 1) * S + len(w) - 1 - ga
    lo_pad = max(0, -first)
    hi_pad = max(0, last - (len(f.values) - 1))
    fpad = np.concatenate([np.zeros(lo_pad), f.values, np.zeros(hi_pad)])
    view = sliding_window_view(fpad, len(w))
    lam = view[first + lo_pad :: S][: len(ks)] @ w
    return ks, lam


def analyze(f: PiecewiseFunction, fp: FilterPair, J: int, depth: int = DEFAULT_DEPTH) -> CoefficientSet:
    """Coefficients ``lambda_{j,k} = int f psitilde_{j,k}`` for ``-1 <= j <= J`` at ``p = 0``."""
    if J < -1:
        raise ValueError("J must be >= -1")
    if J > f.level - QUADRATURE_HEADROOM:
        raise ResolutionError(
            f"J={J} needs a grid level of at least {J + QUADRATURE_HEADROOM}, got {f.level}"
        )
    vals: dict[QuarkletIndex, float] = {}
    for j in range(-1, J + 1):
        ks, lam = analyze_level(f, fp, j, depth)
        for k, v in zip(ks, lam):
            if v != 0.0:
                vals[QuarkletIndex(0, j, k)] = float(v)
    return CoefficientSet(vals, fp.m, fp.mtilde, J, f.window)


# -- synthesis -------------------------------------------------------------------


def _primal_template(fp: FilterPair, p: int, j: int, level: int):
    lo, hi = support_of(fp, QuarkletIndex(p, j, 0))
    g0 = int(np.floor(lo * 2**level))
    g1 = int(np.ceil(hi * 2**level))
    x = np.arange(g0, g1 + 1) * 2.0**-level
    return g0, eval_quarklet_scaled(fp, QuarkletIndex(p, j, 0), x)


def _accumulate(out: np.ndarray, offset: int, stride: int, ks: np.ndarray, cs: np.ndarray, tmpl: np.ndarray):
    """``out[offset + k*stride + i] += c_k * tmpl[i]`` (indices assumed in range)."""
    if len(ks) <= len(tmpl):
        for k, c in zip(ks, cs):
            s = offset + k * stride
            out[s : s + len(tmpl)] += c * tmpl
    else:
        pos = offset + ks * stride
        for i, t in enumerate(tmpl):
            np.add.at(out, pos + i, cs * t)


def synthesize(c: CoefficientSet, fp: FilterPair, grid: PiecewiseFunction) -> PiecewiseFunction:
    """Pointwise ``sum c_{p,j,k} psi_{p,j,k}`` on the nodes of ``grid`` (its values are ignored)."""
    level = grid.level
    n = len(grid.values)
    ga = grid.first_index
    blocks: dict[tuple[int, int], list] = {}
    for idx, v in sorted(c.items()):
        if v != 0.0:
            blocks.setdefault((idx.p, idx.j), []).append((idx.k, v))
    if not blocks:
        return grid.with_values(np.zeros(n))
    pieces = []
    for (p, j), entries in blocks.items():
        if j > level:
            raise ResolutionError(f"level {j} coefficients cannot be sampled on a 2^-{level} grid")
        ks = np.array([k for k, _ in entries])
        cs = np.array([v for _, v in entries])
        g0, tmpl = _primal_template(fp, p, j, level)
        S = 2 ** (level - j) if j >= 0 else 2**level
        pieces.append((g0, S, ks, cs, tmpl))
    lo = min(g0 + int(ks.min()) * S for g0, S, ks, _, _ in pieces)
    hi = max(g0 + int(ks.max()) * S + len(t) for g0, S, ks, _, t in pieces)
    lo = min(lo, ga)
    hi = max(hi, ga + n)
    out = np.zeros(hi - lo)
    for g0, S, ks, cs, tmpl in pieces:
        _accumulate(out, g0 - lo, S, ks, cs, tmpl)
    return grid.with_values(out[ga - lo : ga - lo + n])


def quarkonial_lift(lam: CoefficientSet) -> CoefficientSet:
    """Embed wavelet coefficients as a quarkonial sequence (``c_0 = lambda``, ``c_p = 0`` else)."""
    bad = [idx for idx in lam if idx.p != 0]
    if bad:
        raise ValueError(f"quarkonial_lift expects p = 0 entries only, got e.g. {bad[0]}")
    return lam._like(dict(lam.items()))


def l2_error(f: PiecewiseFunction, g: PiecewiseFunction, interior: tuple[float, float] | None = None):
    x = f.nodes
    mask = np.ones_like(x, dtype=bool) if interior is None else (x >= interior[0]) & (x <= interior[1])
    w = f.cell_weights() * mask
    err = float(np.sqrt(w @ (f.values - g.values) ** 2))
    ref = float(np.sqrt(w @ f.values**2))
    return err, ref


def roundtrip_error(f: PiecewiseFunction, fp: FilterPair, J: int, depth: int = DEFAULT_DEPTH) -> float:
    """Relative L2 error of synthesize(analyze(f)) on the window minus one level-0 support width."""
    lam = analyze(f, fp, J, depth)
    rec = synthesize(lam, fp, f)
    lo, hi = fp.psi_support
    margin = hi - lo
    a, b = f.window
    err, ref = l2_error(f, rec, (a + margin, b - margin))
    return err / ref if ref > 0 else err
