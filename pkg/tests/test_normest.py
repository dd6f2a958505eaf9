"""Lebesgue, Morrey, difference and Besov-coefficient norms; equivalence experiment."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quarklet.corpus import random_coefficient_set, resolve
from quarklet.multiscale import cdf_filters
from quarklet.normest import (
    DifferenceNormConfig,
    besov_coeff_norm,
    difference_norm,
    difference_norm_partials,
    equivalence_experiment,
    lr_norm,
    morrey_norm,
    parameter_condition,
)
from quarklet.regions import spline_membership
from quarklet.seqspace import SpaceParams, seqnorm
from quarklet.splines import eval_bspline
from quarklet.transform import CoefficientSet, PiecewiseFunction


def box(window=(-2.0, 2.0), level=10):
    return PiecewiseFunction.from_callable(lambda x: ((x >= 0) & (x < 1)).astype(float), window, level)


def bump(level=12, window=(-5.0, 5.0)):
    return PiecewiseFunction.from_callable(lambda x: np.exp(-2.0 * x**2), window, level)


class TestLebesgue:
    def test_box(self):
        assert lr_norm(box(), 2) == pytest.approx(1.0, abs=1e-10)

    def test_zero(self):
        assert lr_norm(PiecewiseFunction.zeros((0.0, 1.0), 4), 1.5) == 0.0

    def test_hat_integral(self):
        f = PiecewiseFunction.from_callable(lambda x: eval_bspline(2, x), (-2.0, 4.0), 10)
        assert lr_norm(f, 1) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("m", [3, 4, 5])
    def test_bspline_integral(self, m):
        f = PiecewiseFunction.from_callable(lambda x: eval_bspline(m, x), (-1.0, 6.0), 12)
        assert lr_norm(f, 1) == pytest.approx(1.0, abs=1e-10)

    def test_trapezoid_rule(self):
        f = PiecewiseFunction.from_callable(lambda x: x, (0.0, 1.0), 10, rule="trapezoid")
        assert lr_norm(f, 1) == pytest.approx(0.5, abs=1e-15)

    @settings(max_examples=30)
    @given(seed=st.integers(0, 2**16), r=st.floats(0.3, 6))
    def test_monotone(self, seed, r):
        rng = np.random.default_rng(seed)
        g = rng.standard_normal(65)
        f = g * rng.uniform(0, 1, 65)
        F = PiecewiseFunction((0.0, 4.0), 4, f)
        G = PiecewiseFunction((0.0, 4.0), 4, g)
        assert lr_norm(F, r) <= lr_norm(G, r) * (1 + 1e-14)
        assert morrey_norm(F, r + 1, r) <= morrey_norm(G, r + 1, r) * (1 + 1e-14)


class TestMorrey:
    def test_box_example(self):
        assert morrey_norm(box(), 2, 1) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("r", [0.5, 1, 2, 3.5])
    def test_equals_lr_at_u_equal_r(self, r):
        f = bump(8)
        assert morrey_norm(f, r, r) == pytest.approx(lr_norm(f, r), abs=1e-10)

    def test_zero(self):
        assert morrey_norm(PiecewiseFunction.zeros((-1.0, 1.0), 5), 3, 2) == 0.0

    @pytest.mark.parametrize("r1, r2, u", [(2, 1, 4), (3, 1.5, 3), (2, 0.5, 6)])
    def test_embedding_monotone_in_r(self, r1, r2, u):
        rng = np.random.default_rng(int(r1 * 10 + u))
        f = PiecewiseFunction((-2.0, 2.0), 6, rng.standard_normal(4 * 64 + 1))
        assert morrey_norm(f, u, r2) <= morrey_norm(f, u, r1) * (1 + 1e-12)

    def test_rejects_u_below_r(self):
        with pytest.raises(ValueError):
            morrey_norm(box(), 1, 2)

    @pytest.mark.parametrize("u, r", [(2, 1), (4, 2), (1.5, 0.5)])
    def test_dyadic_family_against_all_intervals(self, u, r):
        rng = np.random.default_rng(0)
        f = PiecewiseFunction((-2.0, 2.0), 4, rng.standard_normal(65))
        cells = np.abs(f.values[:-1]) ** r * f.step
        prefix = np.concatenate([[0.0], np.cumsum(cells)])
        n = len(cells)
        best = max(((b - a) * f.step) ** (1 / u - 1 / r) * (prefix[b] - prefix[a]) ** (1 / r)
                   for a in range(n) for b in range(a + 1, n + 1))
        d = morrey_norm(f, u, r)
        assert d <= best * (1 + 1e-12)
        assert best <= 2 ** (1 / r) * d


class TestDifferenceNorm:
    P = SpaceParams(0.5, 2, 2, 3)

    def test_zero(self):
        f = PiecewiseFunction.zeros((-2.0, 2.0), 8)
        assert difference_norm(f, self.P) == 0.0

    @pytest.mark.parametrize("alpha", [-3.0, 0.25, 7.5])
    def test_homogeneity(self, alpha):
        f = bump(9)
        g = f.with_values(alpha * f.values)
        cfg = DifferenceNormConfig.default(self.P, 9)
        assert difference_norm(g, self.P, cfg) == pytest.approx(abs(alpha) * difference_norm(f, self.P, cfg),
                                                                rel=1e-10)

    @pytest.mark.parametrize("N, degree", [(1, 0), (2, 1), (3, 2)])
    def test_polynomials_are_annihilated(self, N, degree):
        f = PiecewiseFunction.from_callable(lambda x: (0.3 * x + 0.1) ** degree + 0 * x, (-6.0, 6.0), 8)
        params = SpaceParams(0.5, 2, 2, 4)
        cfg = DifferenceNormConfig(N=N, w=1.0, i_max=3, h_nodes=8)
        res = difference_norm_partials(f, params, cfg, x_window=(-6.0 + N, 6.0 - N))
        assert res.difference_part < 1e-9
        # without restriction the window edges register as jumps
        assert difference_norm_partials(f, params, cfg).difference_part > 1e-3

    def test_plateau(self):
        f = bump(14)
        cfg = DifferenceNormConfig.default(self.P, 14, i_max=12)
        res = difference_norm_partials(f, self.P, cfg)
        vals = [res.value_at(i) for i in range(8, 13)]
        inc = np.diff(vals)
        assert np.all(inc > 0)
        assert np.all(np.diff(inc) < 0)
        assert inc[-1] < 1e-3 * vals[-1]
        assert res.tail_estimate < 1e-3 * res.value

    def test_bspline_finite_and_membership(self):
        f = PiecewiseFunction.from_callable(lambda x: eval_bspline(3, x), (-2.0, 5.0), 11)
        params = SpaceParams(0.8, 2, 2, 3)
        assert math.isfinite(difference_norm(f, params))
        assert spline_membership(0.8, 2, 3)
        assert not spline_membership(2.5, 2, 3)

    @pytest.mark.parametrize(
        "s, r, q, w, N, failing",
        [(1.2, 2, 2, 1, 1, "s < N"), (0.2, 0.5, 2, 0.5, 1, "1/r-1 < s"), (0.3, 2, 2, 8, 1, "1/r-1/w < s"),
         (-0.1, 2, 2, 1, 1, "0 < s")],
    )
    def test_condition_violations_are_named(self, s, r, q, w, N, failing):
        cfg = DifferenceNormConfig(N=N, w=w, i_max=2)
        with pytest.raises(ValueError, match=failing.replace("/", ".").replace("+", r"\+")):
            difference_norm(bump(6), SpaceParams(s, r, q, 3), cfg)
        assert (failing, False) in parameter_condition(s, r, q, w, N)

    @pytest.mark.parametrize("s, r, q, m, N, w", [(0.7, 2, 2, 3, 1, 1.0), (1.4, 0.8, 3, 3, 2, 0.8),
                                                  (1.5, 2, 2, 3, 2, 1.0), (0.5, 2, 0.5, 2, 1, 0.5)])
    def test_defaults(self, s, r, q, m, N, w):
        cfg = DifferenceNormConfig.default(SpaceParams(s, r, q, m), 12)
        assert (cfg.N, cfg.w, cfg.i_max) == (N, w, 8)

    def test_grid_too_coarse(self):
        cfg = DifferenceNormConfig(N=1, w=1.0, i_max=9)
        with pytest.raises(ValueError):
            difference_norm(bump(6), self.P, cfg)


class TestBesovCoefficients:
    @pytest.mark.parametrize("j, s, r", [(0, 0.5, 2), (3, 1.2, 0.7), (-1, 0.3, 1.5)])
    def test_single(self, j, s, r):
        c = CoefficientSet({(0, j, 4): 1.0})
        assert besov_coeff_norm(c, s, r, 2) == pytest.approx(2 ** (j * (s + 0.5 - 1 / r)), rel=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("s, r", [(0.5, 2), (1.3, 0.6), (-0.4, 3)])
    def test_matches_sequence_norm_for_wavelets(self, seed, s, r):
        c = random_coefficient_set(np.random.default_rng(seed), 40)
        assert besov_coeff_norm(c, s, r, 3) == pytest.approx(seqnorm(SpaceParams(s, r, r, 3), c), rel=1e-12)

    def test_empty(self):
        assert besov_coeff_norm(CoefficientSet(), 1.0, 2.0, 2) == 0.0

    def test_p_weight(self):
        c = CoefficientSet({(2, 0, 0): 1.0})
        assert besov_coeff_norm(c, 1.0, 2.0, 2) == pytest.approx(3.0**49, rel=1e-14)


class TestEquivalence:
    fp = cdf_filters(3, 3)
    P = SpaceParams(0.7, 2, 2, 3)

    def family(self, names, level=11):
        return {n: PiecewiseFunction.from_callable(resolve(n, self.fp), (-5.0, 5.0), level) for n in names}

    def test_single_function_spread_one(self):
        rep = equivalence_experiment(self.family(["bump"]), self.P, self.fp, 7)
        assert rep.spread == 1.0
        assert not rep.flagged

    def test_zero_excluded(self):
        rep = equivalence_experiment(self.family(["bump", "zero"]), self.P, self.fp, 7)
        assert rep.excluded == ["zero"]
        assert len(rep.ratios) == 1

    def test_dilated_bumps(self):
        names = [f"bump@{t}" for t in range(5)]
        rep = equivalence_experiment(self.family(names, 12), self.P, self.fp, 8)
        assert rep.spread < 10
        assert rep.summary()["n_scored"] == 5

    def test_inadmissible_rejected(self):
        with pytest.raises(ValueError, match="not admissible"):
            equivalence_experiment(self.family(["bump"]), SpaceParams(2.5, 2, 2, 3), self.fp, 7)

    def test_morrey_is_one_sided(self):
        rep = equivalence_experiment(self.family(["bump"]), self.P.replace(u=4), self.fp, 7)
        assert rep.one_sided
        assert rep.rows[0].diffnorm is None and rep.rows[0].seqnorm > 0

    def test_csv(self, tmp_path):
        rep = equivalence_experiment(self.family(["bump", "bspline:3"]), self.P, self.fp, 7)
        rep.to_csv(tmp_path / "r.csv")
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert lines[0] == "function,paramset,seqnorm,diffnorm,ratio"
        assert len(lines) == 3
