import csv

import numpy as np
import pytest

from torustomo.fields import GraphLagrangian, OneForm, PeriodicScalarField
from torustomo.roots import TANGENT
from torustomo.tomograph import (
    ExcessTangencyError,
    RadialMeasure,
    SParam,
    Tomograph,
    crofton_integral,
    flat_crofton_closed,
    homogenize,
    homogenized_limit,
    intersection_count,
    lagrangian_at,
    normalization_constant,
    potential_field,
    sigma,
)

TWO_PI = 2.0 * np.pi


@pytest.fixture
def tomo():
    return Tomograph(1, RadialMeasure.constant(1.0, 0.5, 1.0, 1.0))


@pytest.fixture
def tomo2():
    return Tomograph(2, RadialMeasure.constant(1.0, 0.5, 1.0, 1.0))


class TestRadialMeasure:
    def test_constant_tail_mass(self):
        m = RadialMeasure.constant(1.0, 0.5, 1.0, 1.0)
        assert m.tail_mass(0.0) == 0.5
        assert m.tail_mass(0.75) == 0.25
        assert m.tail_mass(1.2) == 0.0
        assert np.allclose(m(np.array([0.3, 0.6, 1.1])), [0.0, 1.0, 0.0])

    def test_breakpoints_piecewise_linear(self):
        m = RadialMeasure.from_breakpoints(1.0, [0.4, 0.6, 0.8], [0.0, 2.0, 0.0])
        assert abs(m.total_mass() - 0.4) < 1e-14  # triangle area
        assert abs(m(np.array([0.6]))[0] - 2.0) < 1e-14

    def test_support_validation(self):
        with pytest.raises(ValueError):
            RadialMeasure.constant(1.0, 0.0, 0.5, 1.0)  # touches rho = 0
        with pytest.raises(ValueError):
            RadialMeasure(1.0, [(0.5, 0.8, [-1.0])])  # negative density
        with pytest.raises(ValueError):
            RadialMeasure(1.0, [(0.2, 0.6, [1.0]), (0.5, 0.9, [1.0])])  # overlap

    def test_serialization_round_trip(self):
        m = RadialMeasure.from_breakpoints(2.0, [0.4, 0.9, 1.3], [0.1, 1.0, 0.2])
        m2 = RadialMeasure.from_dict(m.to_dict())
        t = np.linspace(0, 2, 33)
        assert np.array_equal(m.tail_mass(t), m2.tail_mass(t))


class TestLagrangianAt:
    def test_zero_radius_gives_zero_section(self, tomo):
        lag = lagrangian_at(tomo, SParam([0.0], [0.3]))
        x = np.linspace(0, TWO_PI, 9)[:, None]
        assert np.allclose(lag.form(x), 0.0)

    def test_sine_value(self, tomo):
        lag = lagrangian_at(tomo, SParam([1.0], [0.0]))
        assert abs(lag.form(np.array([0.5 * np.pi]))[0] - 1.0) < 1e-15

    def test_frequency_three(self, tomo):
        t3 = homogenize(tomo, 3)
        lag = lagrangian_at(t3, SParam([0.5], [0.5 * np.pi]))
        assert abs(lag.form(np.array([0.0]))[0] - 0.5) < 1e-15

    def test_potential_attached_and_exact(self, tomo):
        for k in (1, 4):
            tk = homogenize(tomo, k)
            lag = lagrangian_at(tk, SParam([0.8], [1.1]))
            assert lag.form.potential is not None
            assert lag.form.potential_mismatch(256) <= 1e-12
            pot = potential_field(tk, SParam([0.8], [1.1]))
            x = np.linspace(0, TWO_PI, 65)[:, None]
            assert np.allclose(pot(x), lag.form.potential(x), atol=0)


class TestIntersectionCount:
    def test_zero_section_two_per_factor(self, tomo, tomo2):
        s1 = SParam([0.7], [1.3])
        assert intersection_count(tomo, s1, GraphLagrangian.zero_section(1)) == 2
        s2 = SParam([0.7, 0.9], [1.3, 0.2])
        assert intersection_count(tomo2, s2, GraphLagrangian.zero_section(2)) == 4

    def test_flat_above_radius_empty(self, tomo):
        assert intersection_count(tomo, SParam([0.6], [0.4]), GraphLagrangian.flat([0.9])) == 0

    def test_analytic_two_roots(self, tomo):
        # rho sin x = -a sin x has roots {0, pi} whenever rho != a
        pot = PeriodicScalarField.from_terms(1, [(0.3, [1], 0.0)])
        lag = GraphLagrangian.from_potential(pot)
        assert intersection_count(tomo, SParam([0.8], [0.0]), lag) == 2

    def test_tangent_at_touching_radius(self, tomo):
        result = intersection_count(tomo, SParam([0.7], [0.9]), GraphLagrangian.flat([0.7]))
        assert result is TANGENT

    def test_homogenized_counts_scale(self, tomo):
        lag = GraphLagrangian.flat([0.3])
        for k in (1, 2, 5):
            tk = homogenize(tomo, k)
            assert intersection_count(tk, SParam([0.8], [0.4]), lag) == 2 * k

    def test_coupled_counting(self, tomo2):
        # small coupled graph: counts stay at 2 per factor crossing pattern
        pot = PeriodicScalarField.from_terms(2, [(0.05, [1, 1], 0.4)])
        lag = GraphLagrangian.from_potential(pot)
        assert not lag.form.is_separable()
        s = SParam([0.9, 0.8], [0.3, 1.9])
        assert intersection_count(tomo2, s, lag, resolution=256) == 4

    def test_coupled_matches_separable_on_product_form(self, tomo2):
        # force the coupled path on a separable form by adding a negligible
        # coupling term; counts must agree with the separable path
        base = PeriodicScalarField.from_terms(2, [(0.2, [1, 0], 0.3), (0.15, [0, 1], 1.2)])
        sep = GraphLagrangian.from_potential(base)
        coupled_pot = base + PeriodicScalarField.from_terms(2, [(1e-9, [1, 1], 0.0)])
        coupled = GraphLagrangian.from_potential(coupled_pot)
        for seed in range(4):
            rng = np.random.default_rng(seed)
            s = SParam(rng.uniform(0.55, 0.95, 2), rng.uniform(0, TWO_PI, 2))
            ref = intersection_count(tomo2, s, sep)
            got = intersection_count(tomo2, s, coupled, resolution=256)
            assert got == ref


class TestSigmaAndNormalization:
    def test_closed_forms(self, tomo):
        assert sigma(tomo, [0.0]) == 1.0
        assert sigma(tomo, [0.75]) == 0.5
        assert sigma(tomo, [1.3]) == 0.0

    def test_crofton_oracle(self, tomo):
        # sigma(y) = I(T_y) / (2 pi)^n through actual root counting
        for y in (0.0, 0.6, 0.85):
            res = crofton_integral(tomo, GraphLagrangian.flat([y]), radial=80, angular=32)
            assert abs(res.value / TWO_PI - sigma(tomo, [y])) < 1e-9

    def test_normalization_constant(self, tomo, tomo2):
        assert normalization_constant(tomo) == 1.0
        assert normalization_constant(tomo2) == 1.0
        half = Tomograph(1, RadialMeasure.constant(2.0, 0.5, 1.0, 1.0))
        assert normalization_constant(half) == 2.0

    def test_normalized_sigma0_exactly_one(self):
        m = RadialMeasure.constant(3.7, 0.4, 0.9, 1.0)
        tomo = Tomograph(1, m).normalized()
        assert sigma(tomo, [0.0]) == 1.0

    def test_monotone_profile(self, tomo2):
        ys = np.linspace(0, 1, 41)
        vals = [sigma(tomo2, [y, 0.3]) for y in ys]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


class TestCroftonIntegral:
    def test_flat_closed_forms(self, tomo):
        for y, expected in [(0.0, TWO_PI), (0.75, np.pi), (1.2, 0.0)]:
            closed = flat_crofton_closed(tomo, [y])
            assert abs(closed - expected) < 1e-12
            res = crofton_integral(tomo, GraphLagrangian.flat([y]), radial=100, angular=32)
            assert abs(res.value - expected) < 1e-9 * max(1.0, expected)

    def test_plain_tensor_mode_coarser(self, tomo):
        res = crofton_integral(tomo, GraphLagrangian.flat([0.75]), radial=200, angular=64,
                               refine=False)
        assert abs(res.value - np.pi) / np.pi < 0.05
        refined = crofton_integral(tomo, GraphLagrangian.flat([0.75]), radial=200, angular=64)
        assert abs(refined.value - np.pi) < abs(res.value - np.pi) + 1e-12

    def test_n2_factorizes(self, tomo2):
        res = crofton_integral(tomo2, GraphLagrangian.flat([0.3, 0.75]), radial=60, angular=24)
        assert len(res.factor_values) == 2
        assert abs(res.value - res.factor_values[0] * res.factor_values[1]) < 1e-12
        assert abs(res.value - flat_crofton_closed(tomo2, [0.3, 0.75])) < 1e-8

    def test_trace_csv(self, tomo, tmp_path):
        path = tmp_path / "samples.csv"
        res = crofton_integral(tomo, GraphLagrangian.flat([0.6]), radial=40, angular=8,
                               trace_path=str(path))
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert rows and set(rows[0]) == {"factor", "rho", "phi", "count", "weight"}
        total = sum(float(r["count"]) * float(r["weight"]) for r in rows)
        assert abs(total - res.value) < 1e-9

    def test_plain_mode_perturbs_tangent_nodes(self):
        # place a Gauss-Legendre node exactly at the tangency radius
        z, _ = np.polynomial.legendre.leggauss(40)
        nodes = 0.5 * 0.5 * (z + 1.0) + 0.5
        y = float(nodes[17])
        tomo = Tomograph(1, RadialMeasure.constant(1.0, 0.5, 1.0, 1.0))
        res = crofton_integral(tomo, GraphLagrangian.flat([y]), radial=40, angular=8,
                               refine=False)
        assert res.n_perturbed > 0
        assert abs(res.value - flat_crofton_closed(tomo, [y])) / res.value < 0.05

    def test_excess_tangency_raises(self, monkeypatch):
        # force a tangency radius at a node and another one 1e-7 above it, so
        # the perturbed sample is tangent again and the sample fails
        z, _ = np.polynomial.legendre.leggauss(4)
        nodes = 0.5 * 0.5 * (z + 1.0) + 0.5
        target = float(nodes[1])
        import torustomo.tomograph as tg

        monkeypatch.setattr(tg, "_tangency_radii",
                            lambda *args, **kw: [target, target + 1e-7])
        tomo = Tomograph(1, RadialMeasure.constant(1.0, 0.5, 1.0, 1.0))
        with pytest.raises(ExcessTangencyError):
            crofton_integral(tomo, GraphLagrangian.flat([0.2]),
                             radial=4, angular=4, refine=False)

    def test_dimension_mismatch(self, tomo):
        with pytest.raises(ValueError):
            crofton_integral(tomo, GraphLagrangian.zero_section(2))


class TestHomogenization:
    def test_k1_identity(self, tomo):
        assert homogenize(tomo, 1) == tomo

    def test_only_from_base(self, tomo):
        with pytest.raises(ValueError):
            homogenize(homogenize(tomo, 2), 4)

    def test_flat_invariance(self, tomo):
        base = flat_crofton_closed(tomo, [0.3])
        for k in (2, 4):
            tk = homogenize(tomo, k)
            assert abs(flat_crofton_closed(tk, [0.3]) - base) < 1e-9
            res = crofton_integral(tk, GraphLagrangian.flat([0.3]), radial=60, angular=24)
            assert abs(res.value - base) / base < 1e-3

    def test_limit_closed_forms(self, tomo):
        zero = GraphLagrangian.zero_section(1)
        assert abs(homogenized_limit(tomo, zero) - TWO_PI) < 1e-12
        const = GraphLagrangian.flat([0.75])
        assert abs(homogenized_limit(tomo, const) - TWO_PI * 0.5) < 1e-12

    def test_limit_against_quadrature_oracle(self, tomo):
        # beta = -0.6 sin x dx: limit is int 2 M(0.6 |sin x|) dx
        pot = PeriodicScalarField.from_terms(1, [(0.6, [1], 0.0)])
        lag = GraphLagrangian.from_potential(pot)
        x = np.linspace(0, TWO_PI, 2_000_001)
        m_tail = np.clip(1.0 - np.abs(0.6 * np.sin(x)), None, 0.5)
        oracle = np.trapezoid(2.0 * np.clip(m_tail, 0.0, None) / 2.0 * 2.0, x) / 2.0
        # M(t) = min(0.5, 1 - t) for t in [0, 1]; sigma = 2 M
        sig = 2.0 * np.minimum(0.5, 1.0 - 0.6 * np.abs(np.sin(x)))
        oracle = np.trapezoid(sig, x)
        assert abs(homogenized_limit(tomo, lag) - oracle) < 1e-6

    def test_gap_shrinks_with_k(self, tomo):
        pot = PeriodicScalarField.from_terms(1, [(0.6, [1], 0.0)])
        lag = GraphLagrangian.from_potential(pot)
        limit = homogenized_limit(tomo, lag)
        gaps = []
        for k in (1, 4, 16):
            res = crofton_integral(homogenize(tomo, k), lag, radial=100, angular=48)
            gaps.append(abs(res.value - limit))
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] / limit < 0.01


class TestTomographSerialization:
    def test_round_trip(self, tomo):
        t2 = Tomograph.from_dict(homogenize(tomo, 4).to_dict())
        assert t2.frequency == 4
        assert t2.measure.tail_mass(0.6) == tomo.measure.tail_mass(0.6)
