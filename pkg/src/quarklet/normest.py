"""Function-side quasi-norms: Lebesgue, Morrey, differences, and Besov coefficients.

All integrals over ``x`` use the quadrature rule of the ``PiecewiseFunction``
(by default one sample per cell ``[x_i, x_{i+1})``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np

from .multiscale import FilterPair, dual_support_of
from .regions import classify, morrey_admissible
from .seqspace import SpaceParams, seqnorm, seqnorm_morrey
from .transform import CoefficientSet, PiecewiseFunction, analyze


def _cell_contributions(f: PiecewiseFunction, r: float) -> np.ndarray:
    """``int |f|^r`` over each grid cell ``[x_i, x_{i+1})``."""
    a = np.abs(f.values) ** r
    if f.rule == "left":
        return f.step * a[:-1]
    return f.step * (a[:-1] + a[1:]) / 2


def lr_norm(f: PiecewiseFunction, r: float) -> float:
    if not r > 0:
        raise ValueError("r must be positive")
    return float(_cell_contributions(f, r).sum()) ** (1.0 / r)


def morrey_norm(f: PiecewiseFunction, u: float, r: float) -> float:
    """``sup |I|^{1/u-1/r} ||f|L_r(I)||`` over dyadic ``I`` inside the window at levels
    ``0..J_grid`` and the window itself.

    Restricting to dyadic intervals loses at most a factor ``2^{1/r}`` against
    the supremum over all intervals.
    """
    if not (0 < r <= u):
        raise ValueError(f"Morrey norm needs 0 < r <= u, got r={r}, u={u}")
    cells = _cell_contributions(f, r)
    a, b = f.window
    ex = 1.0 / u - 1.0 / r
    best = (b - a) ** ex * float(cells.sum()) ** (1.0 / r)
    for level in range(0, f.level + 1):
        n = 2 ** (f.level - level)
        first = math.ceil(a * 2**level)
        last = math.floor(b * 2**level)  # intervals [k, k+1) 2^-level with first <= k < last
        if last <= first:
            continue
        start = int(round((first * 2.0**-level - a) / f.step))
        block = cells[start : start + (last - first) * n].reshape(last - first, n).sum(axis=1)
        best = max(best, 2.0 ** (-level * ex) * float(block.max()) ** (1.0 / r))
    return best


# -- differences -------------------------------------------------------------------


def parameter_condition(s: float, r: float, q: float, w: float, N: int) -> list[tuple[str, bool]]:
    """The hypotheses of the difference characterization as ``(inequality, holds)`` pairs."""
    lower = {
        "0 < s": 0.0,
        "1/r-1 < s": 1 / r - 1,
        "1/q-1 < s": 1 / q - 1,
        "1/r-1/w < s": 1 / r - 1 / w,
        "1/q-1/w < s": 1 / q - 1 / w,
    }
    out = [(name, bound < s) for name, bound in lower.items()]
    out.append(("s < N", s < N))
    return out


@dataclass(frozen=True)
class DifferenceNormConfig:
    """Truncation and quadrature for the difference quasi-norm.

    ``h_nodes`` is the number of h-intervals per half range ``[0, 2^-i]``; the
    h-step never drops below the grid step so every difference is taken
    between grid samples.
    """

    N: int
    w: float
    i_max: int
    h_nodes: int = 32

    def __post_init__(self) -> None:
        if self.N < 1 or int(self.N) != self.N:
            raise ValueError("N must be a positive integer")
        if not self.w > 0:
            raise ValueError("w must be positive")
        if self.i_max < 0:
            raise ValueError("i_max must be nonnegative")
        if self.h_nodes < 1:
            raise ValueError("h_nodes must be positive")

    @classmethod
    def default(cls, params: SpaceParams, grid_level: int, **kw) -> "DifferenceNormConfig":
        s, r, q, m = params.s, params.r, params.q, params.m
        N = math.floor(s) + 1
        if N > m - 1 and s < m - 1:
            N = m - 1
        d = dict(N=max(N, 1), w=min(1.0, r, q), i_max=grid_level - 4)
        d.update(kw)
        return cls(**d)

    def check(self, s: float, r: float, q: float) -> None:
        failed = [name for name, ok in parameter_condition(s, r, q, self.w, self.N) if not ok]
        if failed:
            raise ValueError(f"difference norm parameters violate: {', '.join(failed)}")


@dataclass
class DifferenceNormResult:
    lr_part: float
    partials: np.ndarray  # difference part truncated at i = 0, 1, ...
    i_max: int

    @property
    def difference_part(self) -> float:
        return float(self.partials[self.i_max])

    @property
    def value(self) -> float:
        return self.lr_part + self.difference_part

    def value_at(self, i_max: int) -> float:
        return self.lr_part + float(self.partials[i_max])

    @property
    def tail_estimate(self) -> float:
        """Geometric extrapolation of the neglected terms from the last two increments."""
        d = np.diff(self.partials[: self.i_max + 1])
        if len(d) < 2 or d[-1] <= 0:
            return 0.0
        rho = d[-1] / d[-2] if d[-2] > 0 else math.inf
        return float(d[-1] * rho / (1 - rho)) if rho < 1 else math.inf


def _nth_difference(vals: np.ndarray, shift: int, N: int, lo: int, count: int) -> np.ndarray:
    """``Delta^N_h f`` at padded indices ``lo..lo+count-1`` with ``h = shift`` grid steps."""
    out = np.zeros(count)
    for n in range(N + 1):
        out += (-1) ** (N - n) * math.comb(N, n) * vals[lo + n * shift : lo + n * shift + count]
    return out


def difference_norm_partials(
    f: PiecewiseFunction,
    params: SpaceParams,
    cfg: DifferenceNormConfig,
    extra_levels: int = 0,
    x_window: tuple[float, float] | None = None,
) -> DifferenceNormResult:
    """Difference quasi-norm with the outer sum truncated at every ``i <= i_max + extra_levels``.

    ``x_window`` restricts the outer ``L_r`` integral of the difference part to
    a sub-interval (grid aligned); by default it covers every ``x`` where some
    difference can be nonzero.
    """
    s, r, q = params.s, params.r, params.q
    cfg.check(s, r, q)
    N, w = cfg.N, cfg.w
    top = cfg.i_max + extra_levels
    hstep = f.step
    pad = N * 2**f.level  # |h| <= 1
    vals = np.concatenate([np.zeros(2 * pad), f.values, np.zeros(2 * pad)])
    ga = f.first_index
    if x_window is None:
        x0, count = -pad, len(f.values) + 2 * pad
    else:
        x0 = int(round(x_window[0] / hstep)) - ga
        count = int(round((x_window[1] - x_window[0]) / hstep)) + 1
    # x index i (relative to window start) sits at padded position i + 2*pad
    base = x0 + 2 * pad
    acc = np.zeros(count)
    xw = np.full(count, hstep)
    if f.rule == "left":
        xw[-1] = 0.0
    else:
        xw[[0, -1]] = hstep / 2
    partials = np.zeros(top + 1)
    for i in range(top + 1):
        H = 2.0**-i
        dh_steps = max(1, int(round(H / cfg.h_nodes / hstep)))
        n_half = int(round(H / hstep)) // dh_steps
        if n_half < 1:
            raise ValueError(f"grid level {f.level} cannot resolve |h| <= 2^-{i}")
        integral = np.zeros(count)
        for t in range(-n_half, n_half + 1):
            wt = dh_steps * hstep * (0.5 if abs(t) == n_half else 1.0)
            d = _nth_difference(vals, t * dh_steps, N, base, count)
            integral += wt * np.abs(d) ** w
        acc += 2.0 ** (i * q * (s + 1.0 / w)) * integral ** (q / w)
        partials[i] = float(xw @ acc ** (r / q)) ** (1.0 / r)
    return DifferenceNormResult(lr_norm(f, r), partials, cfg.i_max)


def difference_norm(f: PiecewiseFunction, params: SpaceParams, cfg: DifferenceNormConfig | None = None) -> float:
    if cfg is None:
        cfg = DifferenceNormConfig.default(params, f.level)
    return difference_norm_partials(f, params, cfg).value


# -- coefficients ------------------------------------------------------------------


def besov_coeff_norm(lam: CoefficientSet, s: float, r: float, m: int) -> float:
    """``(sum (p+1)^{(2m+3)^2 r} 2^{j(s+1/2-1/r)r} |c|^r)^{1/r}``."""
    if not r > 0:
        raise ValueError("r must be positive")
    p, j, _, vals = lam.arrays()
    nz = vals != 0
    if not np.any(nz):
        return 0.0
    lw = (2 * m + 3) ** 2 * np.log2(p[nz] + 1.0) + j[nz] * (s + 0.5 - 1.0 / r) + np.log2(np.abs(vals[nz]))
    top = float(lw.max())
    return 2.0**top * float(np.sum(np.exp2(r * (lw - top)))) ** (1.0 / r)


# -- experiment --------------------------------------------------------------------


def paramset_label(params: SpaceParams) -> str:
    label = f"s={params.s:g};r={params.r:g};q={params.q:g};m={params.m}"
    return label + (f";u={params.u:g}" if params.u is not None else "")


@dataclass
class EquivalenceRow:
    function: str
    paramset: str
    seqnorm: float
    diffnorm: float | None
    ratio: float | None
    diffnorm_extended: float | None = None  # with i_max + drift_levels
    ratio_extended: float | None = None

    @property
    def drift(self) -> float | None:
        if self.ratio is None or self.ratio_extended is None:
            return None
        return abs(self.ratio_extended / self.ratio - 1)


@dataclass
class EquivalenceReport:
    rows: list[EquivalenceRow]
    budget: float
    one_sided: bool = False
    excluded: list[str] = field(default_factory=list)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.rows if r.ratio is not None])

    @property
    def spread(self) -> float:
        rs = self.ratios
        return float(rs.max() / rs.min()) if len(rs) else math.nan

    @property
    def max_drift(self) -> float:
        d = [r.drift for r in self.rows if r.drift is not None]
        return float(max(d)) if d else math.nan

    @property
    def flagged(self) -> bool:
        return bool(self.spread > self.budget)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["function", "paramset", "seqnorm", "diffnorm", "ratio"])
            for row in self.rows:
                w.writerow([row.function, row.paramset, f"{row.seqnorm:.17g}",
                            "" if row.diffnorm is None else f"{row.diffnorm:.17g}",
                            "" if row.ratio is None else f"{row.ratio:.17g}"])

    def summary(self) -> dict:
        rs = self.ratios
        return {
            "n_scored": int(len(rs)),
            "ratio_min": float(rs.min()) if len(rs) else None,
            "ratio_max": float(rs.max()) if len(rs) else None,
            "spread": self.spread if len(rs) else None,
            "budget": self.budget,
            "flagged": self.flagged if len(rs) else False,
            "max_drift": self.max_drift if len(rs) else None,
            "one_sided": self.one_sided,
            "excluded": list(self.excluded),
        }


def interior_coefficients(c: CoefficientSet, fp: FilterPair, window) -> CoefficientSet:
    """Coefficients whose dual support lies inside the window (no truncation effect)."""
    a, b = window
    keep = {}
    for idx, v in c.items():
        lo, hi = dual_support_of(fp, idx.j, idx.k)
        if lo >= a and hi <= b:
            keep[idx] = v
    return c._like(keep)


def equivalence_experiment(
    functions: Mapping[str, PiecewiseFunction],
    params: SpaceParams,
    fp: FilterPair,
    J: int,
    cfg: DifferenceNormConfig | None = None,
    budget: float = 10.0,
    drift_levels: int = 2,
    depth: int | None = None,
) -> EquivalenceReport:
    """Compare the coefficient norm of ``analyze(f)`` with the difference norm of ``f``.

    The zero function is excluded from the ratios. For ``u > r`` only the
    coefficient side is computed and the report is marked one-sided.
    """
    morrey = params.u is not None and params.u > params.r
    verdict = (morrey_admissible(params.s, params.u, params.r, params.q, params.m) if morrey
               else classify(params.s, params.r, params.q, params.m))
    if not verdict.admissible:
        bad = ", ".join(c.name for c in verdict.violated)
        raise ValueError(f"parameters not admissible ({verdict.case}): {bad}")
    label = paramset_label(params)
    rows: list[EquivalenceRow] = []
    excluded = []
    for name, f in functions.items():
        kw = {} if depth is None else {"depth": depth}
        c = interior_coefficients(analyze(f, fp, J, **kw), fp, f.window)
        A = seqnorm_morrey(params, c) if morrey else seqnorm(params, c)
        if morrey:
            rows.append(EquivalenceRow(name, label, A, None, None))
            continue
        conf = cfg or DifferenceNormConfig.default(params, f.level)
        res = difference_norm_partials(f, params, conf, extra_levels=drift_levels)
        B, B2 = res.value, res.value_at(conf.i_max + drift_levels)
        if A == 0 and B == 0:
            excluded.append(name)
            rows.append(EquivalenceRow(name, label, 0.0, 0.0, None))
            continue
        rows.append(EquivalenceRow(name, label, A, B, A / B if B > 0 else math.inf, B2,
                                   A / B2 if B2 > 0 else math.inf))
    return EquivalenceReport(rows, budget, one_sided=morrey, excluded=excluded)
