"""Weighted quarklet sequence norms, their Morrey variant, Calderon splitting and duality.

For a coefficient set ``c`` the inner function

    F(x) = ( sum (p+1)^{Wq} 2^{jsq} 2^{jq/2} |c_{p,j,k}|^q chi_{j,k}(x) )^{1/q},

with ``W = sgn(s) (2m+3)^2``, is a step function whose jumps sit at endpoints of
the cubes ``Q_{j,k} = 2^-j([0,1)+k)``. All norms below are evaluated exactly on
that step function; there is no quadrature.

Weights like ``(p+1)^81`` overflow quickly, so the step function is stored as
``2^scale * values`` with an integer ``scale``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .multiscale import QuarkletIndex
from .transform import CoefficientSet


@dataclass(frozen=True)
class SpaceParams:
    s: float
    r: float
    q: float
    m: int
    u: float | None = None

    def __post_init__(self) -> None:
        if not (self.r > 0 and self.q > 0):
            raise ValueError(f"r and q must be positive, got r={self.r}, q={self.q}")
        if not math.isfinite(self.r) or not math.isfinite(self.q):
            raise ValueError("r and q must be finite")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if self.u is not None and not (self.r <= self.u < math.inf):
            raise ValueError(f"Morrey index needs r <= u < inf, got r={self.r}, u={self.u}")

    @property
    def weight_exponent(self) -> float:
        """``sgn(s) (2m+3)^2``."""
        return float(np.sign(self.s)) * (2 * self.m + 3) ** 2

    def replace(self, **kw) -> "SpaceParams":
        d = dict(s=self.s, r=self.r, q=self.q, m=self.m, u=self.u)
        d.update(kw)
        return SpaceParams(**d)


def _require_nonzero_s(params: SpaceParams) -> None:
    if params.s == 0:
        raise ValueError("sequence norms need s != 0")


def cube_bounds(j: np.ndarray, k: np.ndarray):
    """Endpoints of ``Q_{j,k}``; exact in floating point for moderate levels."""
    length = np.ldexp(1.0, -np.asarray(j))
    return k * length, (k + 1) * length


class StepFunction(NamedTuple):
    """``2^scale * values[i]`` on ``[breaks[i], breaks[i+1])``; zero elsewhere."""

    breaks: np.ndarray
    values: np.ndarray
    scale: int

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breaks)


def _int_power(base: int, exponent: int) -> tuple[float, int]:
    """``base**exponent`` as ``mantissa * 2**exp`` from the exact integer power."""
    n = base ** abs(exponent)
    shift = max(0, n.bit_length() - 60)
    mant = float(n >> shift) if shift else float(n)
    return (1.0 / mant, -shift) if exponent < 0 else (mant, shift)


def _weights(params: SpaceParams, p, j, vals):
    """Weighted magnitudes split as ``mant * 2**exp`` with integer ``exp``.

    The polynomial weight is formed exactly; only the real exponent
    ``j(s + 1/2)`` goes through ``exp2``, after removing its integer part.
    """
    W = int(params.weight_exponent)
    pw = {int(b): _int_power(int(b) + 1, W) for b in np.unique(p)}
    pm = np.array([pw[int(b)][0] for b in p])
    pe = np.array([pw[int(b)][1] for b in p], dtype=np.int64)
    x = j * (params.s + 0.5)
    xe = np.floor(x)
    vm, ve = np.frexp(np.abs(vals))
    mant = pm * np.exp2(x - xe) * vm
    return mant, pe + xe.astype(np.int64) + ve


def inner_function(params: SpaceParams, c: CoefficientSet) -> StepFunction:
    """The step function ``F`` of the module docstring (no check on ``s``)."""
    p, j, k, vals = c.arrays()
    keep = vals != 0
    p, j, k, vals = p[keep], j[keep], k[keep], vals[keep]
    if len(vals) == 0:
        return StepFunction(np.zeros(0), np.zeros(0), 0)
    mant, ex = _weights(params, p, j, vals)
    mm, me = np.frexp(mant)
    ex = ex + me
    scale = int(ex.max())
    terms = mm**params.q * np.exp2(params.q * (ex - scale).astype(float))
    # merge all p on the same cube
    cubes, inv = np.unique(np.stack([j, k], axis=1), axis=0, return_inverse=True)
    cube_terms = np.bincount(inv.ravel(), weights=terms, minlength=len(cubes))
    cj, ck = cubes[:, 0], cubes[:, 1]
    lo, hi = cube_bounds(cj, ck)
    breaks = np.unique(np.concatenate([lo, hi]))
    mids = (breaks[:-1] + breaks[1:]) / 2
    acc = np.zeros(len(mids))
    # dyadic cubes are nested or disjoint: each cell sees one cube per level
    for level in np.unique(cj):
        sel = cj == level
        lk, lt = ck[sel], cube_terms[sel]
        cell_k = np.floor(np.ldexp(mids, int(level))).astype(np.int64)
        pos = np.clip(np.searchsorted(lk, cell_k), 0, len(lk) - 1)
        hit = lk[pos] == cell_k
        acc[hit] += lt[pos[hit]]
    return StepFunction(breaks, acc ** (1.0 / params.q), scale)


def _lr(F: StepFunction, r: float) -> float:
    if len(F.values) == 0:
        return 0.0
    total = float(F.lengths @ F.values**r)
    return total ** (1.0 / r) * 2.0**F.scale if total > 0 else 0.0


def seqnorm(params: SpaceParams, c: CoefficientSet) -> float:
    """``|| c | f^s_{r,q}(m) ||`` evaluated exactly."""
    _require_nonzero_s(params)
    return _lr(inner_function(params, c), params.r)


def _dyadic_interval_integrals(F: StepFunction, r: float, level: int):
    """Integrals of ``(F/2^scale)^r`` over the level-``level`` dyadic intervals that meet the support."""
    contrib = F.lengths * F.values**r
    idx = np.floor(np.ldexp(F.breaks[:-1], level)).astype(np.int64)
    _, inv = np.unique(idx, return_inverse=True)
    return np.bincount(inv.ravel(), weights=contrib)


def morrey_step_norm(F: StepFunction, u: float, r: float) -> float:
    """Morrey norm of a step function over dyadic intervals plus the support hull.

    Dyadic levels run from one coarser than the hull length down to the finest
    cell level; finer intervals cannot increase ``|I|^{1/u-1/r} ||F|L_r(I)||``
    because ``F`` is constant on them and ``1/u > 0``.
    """
    if r > u:
        raise ValueError(f"Morrey norm needs r <= u, got r={r}, u={u}")
    if len(F.values) == 0 or not np.any(F.values > 0):
        return 0.0
    lengths = F.lengths
    hull = F.breaks[-1] - F.breaks[0]
    finest = int(-np.floor(np.log2(lengths.min())))
    coarsest = int(-np.ceil(np.log2(hull))) - 1
    ex = 1.0 / u - 1.0 / r
    best = hull**ex * float(lengths @ F.values**r) ** (1.0 / r)
    for level in range(coarsest, finest + 1):
        ints = _dyadic_interval_integrals(F, r, level)
        best = max(best, 2.0 ** (-level * ex) * float(ints.max()) ** (1.0 / r))
    return best * 2.0**F.scale


def seqnorm_morrey(params: SpaceParams, c: CoefficientSet) -> float:
    """Inner function of ``seqnorm`` measured in the Morrey norm ``M^u_r``."""
    if params.u is None:
        raise ValueError("seqnorm_morrey needs params.u")
    _require_nonzero_s(params)
    if params.s <= 0:
        raise ValueError("the Morrey sequence norm is only used for s > 0")
    return morrey_step_norm(inner_function(params, c), params.u, params.r)


# -- Calderon products -------------------------------------------------------------


class EndpointParams(NamedTuple):
    s: float
    r: float
    q: float


@dataclass
class CalderonSplit:
    alpha: CoefficientSet
    beta: CoefficientSet
    theta: float
    endpoint0: EndpointParams
    endpoint1: EndpointParams
    params: SpaceParams
    gamma: float
    delta: float
    u: float
    v: float
    levels: dict[QuarkletIndex, int]  # index lies in K_l
    residual: float  # max relative deviation from the factorization identity
    source: CoefficientSet

    def constants(self) -> tuple[float, float]:
        """Measured ``C`` in ``||alpha|| <= C ||c||^{r/r0}`` and ``||beta|| <= C ||c||^{r/r1}``."""
        m = self.params.m
        nc = seqnorm(self.params, self.source)
        na = seqnorm(SpaceParams(*self.endpoint0, m), self.alpha)
        nb = seqnorm(SpaceParams(*self.endpoint1, m), self.beta)
        if nc == 0:
            return 0.0, 0.0
        r = self.params.r
        return na / nc ** (r / self.endpoint0.r), nb / nc ** (r / self.endpoint1.r)


def interpolated_params(e0: EndpointParams, e1: EndpointParams, theta: float, m: int) -> SpaceParams:
    s = (1 - theta) * e0.s + theta * e1.s
    r = 1.0 / ((1 - theta) / e0.r + theta / e1.r)
    q = 1.0 / ((1 - theta) / e0.q + theta / e1.q)
    return SpaceParams(s, r, q, m)


def _level_index(vstar: float) -> int:
    """``max{l : 2^l < vstar}`` computed exactly."""
    mant, e = math.frexp(vstar)
    return e - 2 if mant == 0.5 else e - 1


def _median_levels(F: StepFunction, j: np.ndarray, k: np.ndarray) -> np.ndarray:
    """For each cube, ``max{l : |Q ∩ {F > 2^l}| >= |Q|/2}`` relative to ``2^F.scale``.

    The measure of ``{F > v}`` inside ``Q`` first drops below ``|Q|/2`` at the
    value ``v*`` reached after sorting the cells of ``Q`` by decreasing ``F``
    and accumulating lengths; cell lengths are dyadic so the comparison is exact.
    """
    lo, hi = cube_bounds(j, k)
    i0 = np.searchsorted(F.breaks, lo)
    i1 = np.searchsorted(F.breaks, hi)
    out = np.empty(len(j), dtype=np.int64)
    lengths = F.lengths
    for n in range(len(j)):
        vals = F.values[i0[n] : i1[n]]
        lens = lengths[i0[n] : i1[n]]
        order = np.argsort(-vals, kind="stable")
        cum = np.cumsum(lens[order])
        pos = int(np.searchsorted(cum, (hi[n] - lo[n]) / 2))
        vstar = float(vals[order[pos]])
        if not vstar > 0:
            raise ArithmeticError(f"nonzero coefficient on cube ({j[n]}, {k[n]}) outside every K_l")
        out[n] = _level_index(vstar)
    return out


def calderon_split(c: CoefficientSet, endpoint0, endpoint1, theta: float, m: int) -> CalderonSplit:
    """Split ``c`` in the interpolated space into ``alpha`` and ``beta`` with
    ``|c| = |alpha|^{1-theta} |beta|^theta`` index by index."""
    e0, e1 = EndpointParams(*endpoint0), EndpointParams(*endpoint1)
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    if e0.s <= 0 or e1.s <= 0:
        raise ValueError("endpoint smoothness must be positive")
    for e in (e0, e1):
        SpaceParams(e.s, e.r, e.q, m)
    params = interpolated_params(e0, e1, theta, m)
    swapped = e0.r / e0.q > e1.r / e1.q
    a0, a1, th = (e1, e0, 1 - theta) if swapped else (e0, e1, theta)

    s, r, q = params.s, params.r, params.q
    gamma = 1 - r * a0.q / (q * a0.r)
    delta = 1 - r * a1.q / (q * a1.r)
    u = s + 0.5 - a0.q / q * (a0.s + 0.5)
    v = s + 0.5 - a1.q / q * (a1.s + 0.5)

    p, j, k, vals = c.arrays()
    nz = vals != 0
    F = inner_function(params, c)
    ls = np.zeros(len(vals), dtype=np.int64)
    if np.any(nz):
        ls[nz] = _median_levels(F, j[nz], k[nz]) + F.scale
    W = (2 * m + 3) ** 2
    log2Q = -j.astype(float)
    with np.errstate(divide="ignore"):
        log2c = np.log2(np.abs(vals))
    log2p = np.log2(p + 1.0)
    la = q / a0.q * ((1 - a0.q / q) * W * log2p + log2c - (ls * gamma + log2Q * u))
    lb = q / a1.q * ((1 - a1.q / q) * W * log2p + log2c - (ls * delta + log2Q * v))
    alpha_v = np.where(nz, np.exp2(la), 0.0)
    beta_v = np.where(nz, np.exp2(lb), 0.0)

    keys = list(zip(p.tolist(), j.tolist(), k.tolist()))
    A = c._like(dict(zip(keys, alpha_v)))
    B = c._like(dict(zip(keys, beta_v)))
    if swapped:
        A, B = B, A
    with np.errstate(invalid="ignore", divide="ignore"):
        prod = np.abs(np.array([A[key] for key in keys])) ** (1 - theta) * np.abs(
            np.array([B[key] for key in keys])
        ) ** theta
    absc = np.abs(vals)
    resid = float(np.max(np.abs(prod - absc)[nz] / absc[nz])) if np.any(nz) else 0.0
    split = CalderonSplit(
        A, B, theta, e0, e1, params,
        gamma if not swapped else delta, delta if not swapped else gamma,
        u if not swapped else v, v if not swapped else u,
        {QuarkletIndex(*key): int(l) for key, l, z in zip(keys, ls, nz) if z},
        resid,
        c,
    )
    return split


# -- duality -----------------------------------------------------------------------


def conjugate(x: float) -> float:
    return x / (x - 1)


def duality_pair(g: CoefficientSet, c: CoefficientSet, params: SpaceParams) -> tuple[float, float]:
    """``(sum g c, ||g|f^{-s}_{r',q'}|| * ||c|f^s_{r,q}||)``; the first never exceeds the second."""
    if not (params.r > 1 and params.q > 1):
        raise ValueError("duality needs r > 1 and q > 1")
    _require_nonzero_s(params)
    pair = math.fsum(v * c[idx] for idx, v in g.items())
    dual = params.replace(s=-params.s, r=conjugate(params.r), q=conjugate(params.q), u=None)
    return pair, seqnorm(dual, g) * seqnorm(params, c)
