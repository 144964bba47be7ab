import math
import os
import subprocess
import sys

import numpy as np
import pytest

from torustomo._kernels import fallback
from torustomo.fields import PeriodicScalarField, periodic_grid
from torustomo.persistence import (
    Barcode,
    DegenerateFieldError,
    FilteredTorusComplex,
    bar_count,
    barcode,
    count_critical_points,
    stability_count_check,
    verify_bar_identity,
)

TWO_PI = 2.0 * np.pi


def field_1d(terms):
    return PeriodicScalarField.from_terms(1, terms)


def naive_reduction_bars(complex_):
    """Independent oracle: dense F2 Gaussian column reduction, no clearing.

    Deliberately written differently from the production kernels (dense
    boolean matrix, plain left-to-right sweep) to cross-check pairings.
    """
    order, rank, indptr, indices, _ = complex_.boundary_csc()
    n = complex_.n_cells
    mat = np.zeros((n, n), dtype=bool)
    for c in range(n):
        mat[indices[indptr[c]:indptr[c + 1]], c] = True
    lows = np.full(n, -1, dtype=int)
    owner = {}
    for c in range(n):
        while True:
            rows = np.nonzero(mat[:, c])[0]
            if len(rows) == 0:
                break
            low = rows[-1]
            if low not in owner:
                owner[low] = c
                lows[c] = low
                break
            mat[:, c] ^= mat[:, owner[low]]
    pvals = complex_.values[order]
    finite, infinite = [], 0
    paired = np.zeros(n, dtype=bool)
    for c in range(n):
        if lows[c] >= 0:
            paired[c] = True
            paired[lows[c]] = True
            length = pvals[c] - pvals[lows[c]]
            if length > 1e-12:
                finite.append(length)
    infinite = n - int(paired.sum())
    return sorted(finite), infinite


class TestBarcodeExamples:
    def test_cos_only_infinite_bars(self):
        bc = barcode(field_1d([(1.0, [1], 0.0)]), 256)
        assert bc.n_infinite == 2
        assert len(bc.finite_lengths) == 0

    def test_cos_2x_single_finite_bar(self):
        bc = barcode(field_1d([(1.0, [2], 0.0)]), 2048)
        assert bc.n_infinite == 2
        assert len(bc.finite_lengths) == 1
        assert abs(bc.finite_lengths[0] - 2.0) < 1e-12

    def test_constant_degenerate(self):
        with pytest.raises(DegenerateFieldError):
            barcode(PeriodicScalarField.constant(1, 0.3), 256)

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            barcode(field_1d([(1.0, [1], 0.0)]), 32)

    def test_close_critical_values_degenerate(self):
        # two critical values 1e-9 apart cannot be certified at resolution 64
        f = field_1d([(1.0, [1], 0.0), (5e-10, [2], 0.0)])
        with pytest.raises(DegenerateFieldError):
            barcode(f, 64)


class TestAgainstNaiveReduction:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_1d_random(self, seed):
        f = PeriodicScalarField.random(1, np.random.default_rng(seed), n_terms=4)
        res = 96
        bc = barcode(f, res)
        vals = f(periodic_grid(1, res))
        finite, infinite = naive_reduction_bars(FilteredTorusComplex(vals))
        assert infinite == bc.n_infinite == 2
        assert np.allclose(sorted(bc.finite_lengths), finite, atol=1e-12)

    def test_2d_random(self):
        f = PeriodicScalarField.random(2, np.random.default_rng(5), n_terms=3, max_freq=1)
        res = 16
        vals = f(periodic_grid(2, res)).reshape(res, res)
        complex_ = FilteredTorusComplex(vals)
        finite, infinite = naive_reduction_bars(complex_)
        order, rank, indptr, indices, column_order = complex_.boundary_csc()
        low = fallback.reduce_boundary(complex_.n_cells, indptr, indices, column_order)
        pvals = complex_.values[order]
        deaths = np.nonzero(np.asarray(low) >= 0)[0]
        lengths = pvals[deaths] - pvals[np.asarray(low)[deaths]]
        lengths = sorted(l for l in lengths if l > 1e-12)
        assert infinite == 4
        assert np.allclose(lengths, finite, atol=1e-12)


class TestBarCount:
    def test_cos_small_eps(self):
        bc = barcode(field_1d([(1.0, [1], 0.0)]), 256)
        assert bar_count(bc, 0.1) == 2

    def test_cos2x_eps_excludes_finite(self):
        bc = barcode(field_1d([(1.0, [2], 0.0)]), 2048)
        assert bar_count(bc, 3.0) == 2
        assert bar_count(bc, 0.5) == 3

    def test_large_eps_leaves_homology(self):
        for n, terms in [(1, [(1.0, [2], 0.3), (0.3, [3], 0.9)])]:
            f = PeriodicScalarField.from_terms(n, terms)
            bc = barcode(f, 1024)
            assert bar_count(bc, 1e9) == 2 ** n

    def test_monotone_in_eps(self):
        f = PeriodicScalarField.random(1, np.random.default_rng(8), n_terms=5)
        bc = barcode(f, 1024)
        eps = np.linspace(1e-6, 5.0, 60)
        counts = [bc.bar_count(e) for e in eps]
        assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_eps_positive_required(self):
        bc = barcode(field_1d([(1.0, [1], 0.0)]), 256)
        with pytest.raises(ValueError):
            bc.bar_count(0.0)


class TestBarIdentity:
    def test_cos(self):
        rep = verify_bar_identity(field_1d([(1.0, [1], 0.0)]), 1024)
        assert rep["crit_independent"] == 2 == 2 * rep["total_bars"] - 2
        assert rep["identity_ok"] and rep["sweep_ok"]

    def test_cos2x(self):
        rep = verify_bar_identity(field_1d([(1.0, [2], 0.0)]), 1024)
        assert rep["crit_independent"] == 4 == 2 * rep["total_bars"] - 2
        assert rep["identity_ok"]

    @pytest.mark.parametrize("seed", range(5))
    def test_random_trig_1d(self, seed):
        f = PeriodicScalarField.random(1, np.random.default_rng(100 + seed), n_terms=5)
        rep = verify_bar_identity(f, 2048)
        assert rep["identity_ok"] and rep["sweep_ok"]

    def test_random_trig_2d(self):
        f = PeriodicScalarField.random(2, np.random.default_rng(21), n_terms=4, max_freq=2)
        rep = verify_bar_identity(f, 256)
        assert rep["identity_ok"] and rep["sweep_ok"]


class TestStability:
    def test_same_field_trivial(self):
        f = field_1d([(1.0, [2], 0.0)])
        rep = stability_count_check(f, f, eps=0.3, delta=0.4)
        assert rep["precondition_ok"] and rep["passed"]

    def test_small_perturbation(self):
        f = field_1d([(1.0, [2], 0.0)])
        g = f + field_1d([(0.05, [3], -0.5 * np.pi)])  # + 0.05 sin(3x)
        rep = stability_count_check(f, g, eps=0.5, delta=0.2)
        assert rep["precondition_ok"] and rep["passed"]

    def test_precondition_violation_reported(self):
        f = field_1d([(1.0, [2], 0.0)])
        g = f + field_1d([(0.5, [3], 0.0)])
        rep = stability_count_check(f, g, eps=0.5, delta=0.2)
        assert not rep["precondition_ok"]
        assert rep["passed"] is None

    @pytest.mark.parametrize("seed", range(20))
    def test_random_pairs(self, seed):
        rng = np.random.default_rng(1000 + seed)
        f = PeriodicScalarField.random(1, rng, n_terms=4)
        pert = PeriodicScalarField.random(1, rng, n_terms=3, amp_scale=0.02)
        g = f + pert
        from torustomo.fields import sup_norm

        delta = 2.5 * sup_norm(pert, 256)
        rep = stability_count_check(f, g, eps=0.15, delta=delta, resolution=512)
        assert rep["precondition_ok"]
        assert rep["passed"]


class TestComplexStructure:
    def test_cell_counts_and_euler_characteristic(self):
        res = 12
        f = PeriodicScalarField.random(2, np.random.default_rng(2), n_terms=3, max_freq=1)
        vals = f(periodic_grid(2, res)).reshape(res, res)
        cx = FilteredTorusComplex(vals)
        assert cx.n_cells == 4 * res * res
        chi = np.sum((-1.0) ** cx.dims.astype(float))
        assert chi == 0.0

    def test_filtration_monotone(self):
        res = 16
        f = PeriodicScalarField.random(2, np.random.default_rng(3), n_terms=3, max_freq=1)
        vals = f(periodic_grid(2, res)).reshape(res, res)
        cx = FilteredTorusComplex(vals)
        rows, cols = np.nonzero(cx.face_table >= 0)
        faces = cx.face_table[rows, cols]
        assert np.all(cx.values[faces] <= cx.values[rows])

    def test_infinite_bar_count_is_torus_homology(self):
        for n, res in [(1, 256), (2, 64)]:
            f = PeriodicScalarField.random(n, np.random.default_rng(4 + n), n_terms=3, max_freq=1)
            bc = barcode(f, res)
            assert bc.n_infinite == 2 ** n

    def test_tie_break_stable_under_half_cell_shift(self):
        # cos(2x) has exactly tied maxima; the canonical order must keep the
        # bar multiset stable when the grid shifts by half a cell
        f = field_1d([(1.0, [2], 0.0)])
        res = 512
        bc1 = barcode(f, res)
        bc2 = barcode(f.shift([np.pi / res]), res)
        assert bc1.n_infinite == bc2.n_infinite
        assert np.allclose(bc1.finite_lengths, bc2.finite_lengths, atol=1e-3)

    def test_resolution_convergence_quadratic(self):
        f = PeriodicScalarField.random(1, np.random.default_rng(9), n_terms=4)
        res = 512
        bc1 = barcode(f, res)
        bc2 = barcode(f, 2 * res)
        assert len(bc1.finite_lengths) == len(bc2.finite_lengths)
        bound = f.hessian_bound() * ((TWO_PI / res) ** 2 + (TWO_PI / (2 * res)) ** 2) / 8.0
        assert np.max(np.abs(np.sort(bc1.finite_lengths) - np.sort(bc2.finite_lengths))) <= bound


class TestCriticalPointCount:
    def test_simple_fields(self):
        assert count_critical_points(field_1d([(1.0, [1], 0.0)])) == 2
        assert count_critical_points(field_1d([(1.0, [3], 0.4)])) == 6

    def test_degenerate_detected(self):
        # f' has a double zero when f = cos(x) + (1/4) cos(2x) at x = pi
        f = field_1d([(1.0, [1], 0.0), (0.25, [2], 0.0)])
        with pytest.raises(DegenerateFieldError):
            count_critical_points(f)


class TestKernelBackends:
    def test_fallback_matches_compiled(self):
        from torustomo import _kernels

        f = PeriodicScalarField.random(2, np.random.default_rng(12), n_terms=3, max_freq=2)
        res = 32
        vals = f(periodic_grid(2, res)).reshape(res, res)
        cx = FilteredTorusComplex(vals)
        _, _, indptr, indices, column_order = cx.boundary_csc()
        low_f = fallback.reduce_boundary(cx.n_cells, indptr, indices, column_order)
        low_active = _kernels.reduce_boundary(cx.n_cells, indptr, indices, column_order)
        assert np.array_equal(np.asarray(low_f), np.asarray(low_active))

    def test_sign_change_backends_agree(self):
        from torustomo import _kernels

        rng = np.random.default_rng(13)
        vals = rng.normal(size=(64, 257))
        assert np.array_equal(fallback.sign_change_counts(vals),
                              np.asarray(_kernels.sign_change_counts(vals)))

    def test_forced_fallback_env(self):
        code = ("import torustomo; print(torustomo.backend_name())")
        env = dict(os.environ, TORUSTOMO_FORCE_FALLBACK="1")
        out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                             text=True, env=env)
        assert out.stdout.strip() == "fallback"


class TestBarcodeSerialization:
    def test_csv_rows(self):
        bc = barcode(field_1d([(1.0, [2], 0.0)]), 512)
        rows = bc.to_csv_rows()
        assert rows[-1] == (math.inf, 1)
        assert sum(flag for _, flag in rows) == 2
        assert all(l > 0 for l, _ in rows)

    def test_shortest_bar(self):
        bc_cos = barcode(field_1d([(1.0, [1], 0.0)]), 256)
        assert bc_cos.shortest_bar() == math.inf
        bc = barcode(field_1d([(1.0, [2], 0.0)]), 512)
        assert abs(bc.shortest_bar() - 2.0) < 1e-12
