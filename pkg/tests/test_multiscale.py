"""Filter table, primal quarklets, cascade duals and biorthogonality."""

from __future__ import annotations

from fractions import Fraction
from importlib import resources

import numpy as np
import numpy.testing as nptest
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quarklet._filtergen import biorthogonality_defects, cdf_masks, format_table
from quarklet.multiscale import (
    SUPPORTED_PAIRS,
    DyadicCube,
    QuarkletIndex,
    UnsupportedParametersError,
    biorthogonality_residual,
    cdf_filters,
    discrete_biorthogonality_residual,
    dual_template,
    eval_dual_generator,
    eval_dual_wavelet,
    eval_quarklet,
    eval_quarklet_scaled,
    gauss_integral,
    gram_matrix,
    inner_with_grid,
    support_of,
)
from quarklet.splines import eval_symmetrized


def test_shipped_table_regenerates():
    shipped = resources.files("quarklet").joinpath("data/cdf_filters.txt").read_text()
    assert shipped == format_table(SUPPORTED_PAIRS)


@pytest.mark.parametrize("pair", SUPPORTED_PAIRS)
def test_exact_biorthogonality_of_masks(pair):
    defects = biorthogonality_defects(cdf_masks(*pair))
    assert all(d == 0 for d in defects.values())


@pytest.mark.parametrize("pair", SUPPORTED_PAIRS)
def test_shipped_masks_biorthogonal(pair):
    assert discrete_biorthogonality_residual(cdf_filters(*pair)) < 1e-14


# independent reference masks, normalized to sum 2
REFERENCE_ATILDE = {
    (1, 1): (0, [1, 1]),
    (2, 2): (-2, [Fraction(-1, 4), Fraction(1, 2), Fraction(3, 2), Fraction(1, 2), Fraction(-1, 4)]),
    (2, 4): (-4, [Fraction(3, 64), Fraction(-3, 32), Fraction(-1, 4), Fraction(19, 32), Fraction(45, 32),
                  Fraction(19, 32), Fraction(-1, 4), Fraction(-3, 32), Fraction(3, 64)]),
    (3, 3): (-3, [Fraction(3, 32), Fraction(-9, 32), Fraction(-7, 32), Fraction(45, 32),
                  Fraction(45, 32), Fraction(-7, 32), Fraction(-9, 32), Fraction(3, 32)]),
}


@pytest.mark.parametrize("pair", sorted(REFERENCE_ATILDE))
def test_dual_masks_against_reference(pair):
    offset, coeffs = REFERENCE_ATILDE[pair]
    fp = cdf_filters(*pair)
    assert fp.atilde.offset == offset
    nptest.assert_allclose(fp.atilde.coeffs, [float(c) for c in coeffs], atol=1e-16)


def test_haar_pair():
    fp = cdf_filters(1, 1)
    nptest.assert_array_equal(fp.b.coeffs, [1.0, -1.0])
    nptest.assert_array_equal(fp.btilde.coeffs, [1.0, -1.0])


@pytest.mark.parametrize("pair", [(2, 3), (4, 2), (5, 5), (2, 6), (0, 2)])
def test_unsupported_pairs(pair):
    with pytest.raises(UnsupportedParametersError):
        cdf_filters(*pair)


@pytest.mark.parametrize("pair", SUPPORTED_PAIRS)
def test_mask_sums(pair):
    fp = cdf_filters(*pair)
    assert fp.a.coeffs.sum() == pytest.approx(2.0, abs=1e-15)
    assert fp.atilde.coeffs.sum() == pytest.approx(2.0, abs=1e-15)
    assert fp.b.coeffs.sum() == pytest.approx(0.0, abs=1e-15)
    assert fp.btilde.coeffs.sum() == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("pair", SUPPORTED_PAIRS)
def test_primal_vanishing_moments(pair):
    fp = cdf_filters(*pair)
    lo, hi = fp.psi_support
    scale = max(abs(lo), abs(hi))
    for l in range(fp.mtilde):
        mom = gauss_integral(lambda x: (x / scale) ** l * eval_quarklet(fp, 0, x), lo, hi, level=1)
        assert abs(mom) < 1e-9
    # the first nonvanishing moment really is nonzero
    mom = gauss_integral(lambda x: (x / scale) ** fp.mtilde * eval_quarklet(fp, 0, x), lo, hi, level=1)
    assert abs(mom) > 1e-6


@pytest.mark.parametrize("pair", SUPPORTED_PAIRS)
def test_dual_vanishing_moments(pair):
    fp = cdf_filters(*pair)
    w = dual_template(fp, 0)
    for l in range(fp.m):
        assert abs(inner_with_grid(lambda x: x**l, w)) < 1e-6


def test_quarklet_reduces_to_wavelet():
    fp = cdf_filters(2, 2)
    x = np.linspace(-2, 3, 1001)
    manual = sum(bk * eval_symmetrized(2, 2 * x - k) for k, bk in fp.b.items())
    nptest.assert_allclose(eval_quarklet(fp, 0, x), manual, atol=1e-15)


@pytest.mark.parametrize("pair", [(2, 2), (3, 3), (3, 5)])
def test_wavelet_integrates_to_zero(pair):
    fp = cdf_filters(*pair)
    lo, hi = fp.psi_support
    assert abs(gauss_integral(lambda x: eval_quarklet(fp, 0, x), lo, hi, level=1)) < 1e-10


def test_scaled_quarklet_definition():
    fp = cdf_filters(2, 2)
    x = np.linspace(-1, 2, 301)
    nptest.assert_array_equal(eval_quarklet_scaled(fp, QuarkletIndex(0, 0, 0), x), eval_quarklet(fp, 0, x))
    nptest.assert_allclose(eval_quarklet_scaled(fp, QuarkletIndex(0, 2, 3), x),
                           2 * eval_quarklet(fp, 0, 4 * x - 3), atol=1e-15)
    nptest.assert_allclose(eval_quarklet_scaled(fp, QuarkletIndex(2, -1, 1), x),
                           (x - 1) ** 2 * eval_symmetrized(2, x - 1), atol=1e-15)


@pytest.mark.parametrize("j, k", [(0, 0), (1, -3), (3, 5), (5, 1)])
def test_l2_norm_is_dilation_invariant(j, k):
    fp = cdf_filters(3, 3)
    idx = QuarkletIndex(0, j, k)
    lo, hi = support_of(fp, idx)
    val = gauss_integral(lambda x: eval_quarklet_scaled(fp, idx, x) ** 2, lo, hi, level=j + 1)
    ref = gauss_integral(lambda x: eval_quarklet(fp, 0, x) ** 2, *fp.psi_support, level=1)
    assert val == pytest.approx(ref, abs=1e-8)


@pytest.mark.parametrize("m, expected", [(2, (-1.0, 1.0)), (3, (-1.0, 2.0)), (4, (-2.0, 2.0))])
def test_generator_support(m, expected):
    fp = cdf_filters(m, m)
    for p in (0, 3):
        assert support_of(fp, QuarkletIndex(p, -1, 0)) == expected


@given(j=st.integers(0, 8), k=st.integers(-50, 50), p=st.integers(0, 4))
def test_support_dilation_arithmetic(j, k, p):
    fp = cdf_filters(3, 5)
    lo0, hi0 = support_of(fp, QuarkletIndex(0, 0, 0))
    assert support_of(fp, QuarkletIndex(p, j, k)) == ((lo0 + k) / 2**j, (hi0 + k) / 2**j)


@pytest.mark.parametrize("pair", SUPPORTED_PAIRS)
@pytest.mark.parametrize("j", [-1, 0, 2])
def test_support_matches_numerical_support(pair, j):
    fp = cdf_filters(*pair)
    idx = QuarkletIndex(1, j, 1)
    lo, hi = support_of(fp, idx)
    level = max(j, 0) + 8
    x = np.arange(np.floor((lo - 1) * 2**level), np.ceil((hi + 1) * 2**level) + 1) * 2.0**-level
    y = eval_quarklet_scaled(fp, idx, x)
    nz = x[np.abs(y) > 1e-12]
    cell = 2.0**-level
    assert nz.min() >= lo - cell and nz.max() <= hi + cell
    assert nz.min() <= lo + 2 * cell and nz.max() >= hi - 2 * cell


def test_disjoint_supports():
    fp = cdf_filters(2, 2)
    lo, hi = support_of(fp, QuarkletIndex(0, 3, 0))
    width = (hi - lo) * 2**3
    a = support_of(fp, QuarkletIndex(0, 3, 0))
    b = support_of(fp, QuarkletIndex(0, 3, int(width) + 1))
    assert a[1] < b[0]


@pytest.mark.parametrize("depth", [1, 4, 12])
def test_haar_dual_is_box(depth):
    fp = cdf_filters(1, 1)
    x = np.arange(-2 * 2**depth, 3 * 2**depth) * 2.0**-depth
    box = ((x >= 0) & (x < 1)).astype(float)
    nptest.assert_array_equal(eval_dual_generator(fp, x, depth), box)


def test_dual_depth_validation():
    fp = cdf_filters(2, 2)
    with pytest.raises(ValueError):
        eval_dual_generator(fp, 0.0, depth=0)
    with pytest.raises(ValueError):
        eval_dual_wavelet(fp, 0, 0, 0.0, depth=0)


def test_dual_wavelet_refinement():
    fp = cdf_filters(2, 2)
    x = np.linspace(-2, 3, 777)
    lhs = eval_dual_wavelet(fp, 0, 0, x, depth=10)
    rhs = sum(bk * eval_dual_generator(fp, 2 * x - k, depth=10) for k, bk in fp.btilde.items())
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_generator_biorthogonality_depth_10():
    fp = cdf_filters(2, 2)
    G = gram_matrix(fp, [-1], range(-4, 5), depth=10)
    assert np.max(np.abs(G - np.eye(len(G)))) < 2e-4


def test_residual_shrinks_with_depth():
    fp = cdf_filters(2, 2)
    res = [biorthogonality_residual(fp, levels=(-1, 0), kmax=4, depth=d) for d in (8, 10, 12, 14, 16)]
    assert all(b < a for a, b in zip(res, res[1:]))
    assert res[0] / res[-1] > 4


def test_full_gram_residual_22():
    assert biorthogonality_residual(cdf_filters(2, 2), depth=12) < 5e-4


def test_dyadic_cube():
    Q = DyadicCube(2, 3)
    assert Q.interval == (0.75, 1.0)
    assert Q.length == 0.25
    nptest.assert_array_equal(Q.indicator([0.74, 0.75, 0.99, 1.0]), [0, 1, 1, 0])
    assert DyadicCube(-1, 1).interval == (2.0, 4.0)
