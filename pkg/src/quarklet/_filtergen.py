"""Exact construction of the CDF(m, mtilde) biorthogonal spline masks.

This is the generator behind ``data/cdf_filters.txt``. Everything is done in
rational arithmetic so the shipped table can be regenerated and compared
digit for digit.

Conventions
-----------
Masks are Laurent polynomials ``{offset: coefficient}`` with
``phi(x) = sum_k a_k phi(2x - k)`` and ``sum_k a_k = 2``. The primal generator
is the symmetrized B-spline ``N_m(x + floor(m/2))``, so ``a`` lives on
``-floor(m/2) .. ceil(m/2)``. The dual refinement mask is

    atilde(z) = 2^(1-mt) (1+z)^mt z^(-floor(mt/2)) P((2 - z - 1/z) / 4),
    P(y) = sum_{n<K} binom(K-1+n, n) y^n,   K = (m + mt) / 2,

and the wavelet masks are ``b_k = (-1)^k atilde_{1-k}`` and
``btilde_k = (-1)^k a_{1-k}``.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

Laurent = dict[int, Fraction]

SUPPORTED_PAIRS: tuple[tuple[int, int], ...] = ((1, 1), (2, 2), (2, 4), (3, 3), (3, 5), (4, 4))


def _mul(p: Laurent, q: Laurent) -> Laurent:
    out: Laurent = {}
    for i, a in p.items():
        for j, b in q.items():
            out[i + j] = out.get(i + j, Fraction(0)) + a * b
    return {k: v for k, v in out.items() if v != 0}


def _pow(p: Laurent, n: int) -> Laurent:
    out: Laurent = {0: Fraction(1)}
    for _ in range(n):
        out = _mul(out, p)
    return out


def _binomial_mask(order: int) -> Laurent:
    """``2^(1-order) (1+z)^order z^(-floor(order/2))``."""
    shift = order // 2
    scale = Fraction(1, 2 ** (order - 1))
    return {k - shift: scale * comb(order, k) for k in range(order + 1)}


def primal_mask(m: int) -> Laurent:
    return _binomial_mask(m)


def dual_mask(m: int, mtilde: int) -> Laurent:
    if (m + mtilde) % 2:
        raise ValueError("m + mtilde must be even")
    big_k = (m + mtilde) // 2
    # y = sin^2(xi/2) = (2 - z - 1/z)/4 as a Laurent polynomial in z
    y: Laurent = {-1: Fraction(-1, 4), 0: Fraction(1, 2), 1: Fraction(-1, 4)}
    poly: Laurent = {}
    for n in range(big_k):
        term = _pow(y, n)
        c = comb(big_k - 1 + n, n)
        for k, v in term.items():
            poly[k] = poly.get(k, Fraction(0)) + c * v
    return _mul(_binomial_mask(mtilde), poly)


def wavelet_mask(refinement_of_other: Laurent) -> Laurent:
    """``g_k = (-1)^k h_{1-k}``, applied to the *other* side's refinement mask."""
    return {1 - k: (-1) ** ((1 - k) % 2) * v for k, v in refinement_of_other.items()}


def cdf_masks(m: int, mtilde: int) -> dict[str, Laurent]:
    a = primal_mask(m)
    at = dual_mask(m, mtilde)
    return {"a": a, "atilde": at, "b": wavelet_mask(at), "btilde": wavelet_mask(a)}


def biorthogonality_defects(masks: dict[str, Laurent]) -> dict[str, Fraction]:
    """Max deviation of the four perfect-reconstruction identities (exact).

    ``sum_k h_k g_{k-2n} = 2 delta_n`` for (a, atilde) and (b, btilde), and
    ``= 0`` for the cross pairs (a, btilde) and (b, atilde).
    """
    pairs = {
        "a*atilde": (masks["a"], masks["atilde"], 2),
        "b*btilde": (masks["b"], masks["btilde"], 2),
        "a*btilde": (masks["a"], masks["btilde"], 0),
        "b*atilde": (masks["b"], masks["atilde"], 0),
    }
    out: dict[str, Fraction] = {}
    for name, (h, g, target) in pairs.items():
        lo = min(h) - max(g)
        hi = max(h) - min(g)
        worst = Fraction(0)
        for n in range(lo // 2 - 1, hi // 2 + 2):
            acc = sum((v * g.get(k - 2 * n, 0) for k, v in h.items()), Fraction(0))
            want = target if n == 0 else 0
            worst = max(worst, abs(acc - want))
        out[name] = worst
    return out


def format_table(pairs=SUPPORTED_PAIRS) -> str:
    lines = ["# CDF biorthogonal spline masks: name m mtilde offset value", "# version 1"]
    for m, mt in pairs:
        masks = cdf_masks(m, mt)
        for name in ("a", "atilde", "b", "btilde"):
            for k in sorted(masks[name]):
                lines.append(f"{name} {m} {mt} {k} {float(masks[name][k]):.17g}")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    print(format_table(), end="")
