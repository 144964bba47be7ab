import numpy as np
import pytest

from torustomo.fields import PeriodicScalarField
from torustomo.roots import (
    TANGENT,
    Tangent,
    bisect_many,
    count_common_zeros_2d,
    guarded_periodic_count,
    sign_change_count_rows,
)

TWO_PI = 2.0 * np.pi


class TestBisection:
    def test_vectorized_roots(self):
        f = lambda x: np.sin(x)
        roots = bisect_many(f, [3.0, 6.0], [3.3, 6.5])
        assert np.allclose(roots, [np.pi, TWO_PI], atol=1e-13)


class TestGuardedCount:
    def test_simple_sine(self):
        rc = guarded_periodic_count(np.sin, np.cos, 256)
        assert rc.count == 2 and not rc.tangent

    def test_shifted_level(self):
        f = lambda x: np.sin(x) - 0.5
        rc = guarded_periodic_count(f, np.cos, 256)
        assert rc.count == 2
        assert np.allclose(np.sort(np.sin(rc.roots)), [0.5, 0.5], atol=1e-12)

    def test_no_roots(self):
        rc = guarded_periodic_count(lambda x: np.sin(x) + 1.5, np.cos, 256)
        assert rc.count == 0

    def test_tangency_flagged(self):
        rc = guarded_periodic_count(lambda x: np.sin(x) + 1.0, np.cos, 256)
        assert rc.tangent

    def test_hidden_pair_recovered(self):
        # cos(2x) + 1 - 1e-5 dips below zero on intervals of width ~4.5e-3,
        # far below the node spacing at resolution 192
        off = 1.0 - 1e-5
        f = lambda x: np.cos(2 * x) + off
        fp = lambda x: -2.0 * np.sin(2 * x)
        rc = guarded_periodic_count(f, fp, 192)
        assert rc.count == 4 and not rc.tangent

    def test_high_frequency(self):
        f = lambda x: np.sin(16 * x) - 0.2
        fp = lambda x: 16 * np.cos(16 * x)
        rc = guarded_periodic_count(f, fp, 1024)
        assert rc.count == 32


class TestSignChangeRows:
    def test_counts_match_scalar_path(self):
        x = (np.arange(512) + 0.37) * TWO_PI / 512
        rows = np.stack([np.sin(x) - 0.3, np.sin(3 * x) + 0.1, np.full(512, 2.0)])
        counts = sign_change_count_rows(rows)
        assert list(counts) == [2, 6, 0]

    def test_cyclic_wraparound(self):
        # one sign change across the seam only
        vals = np.concatenate([np.full(10, 1.0), np.full(10, -1.0)])
        assert sign_change_count_rows(vals[None, :])[0] == 2


class TestTangentSentinel:
    def test_singleton_and_falsy(self):
        assert Tangent() is TANGENT
        assert not TANGENT
        assert repr(TANGENT) == "TANGENT"


class TestCommonZeros2D:
    @staticmethod
    def _system(f1, f2):
        g1 = lambda x: f1(np.asarray(x))
        g2 = lambda x: f2(np.asarray(x))
        return g1, g2

    def test_product_system(self):
        # sin(x - 0.3) = 0, sin(y + 0.8) = 0: exactly 4 solutions
        g1 = lambda p: np.sin(p[..., 0] - 0.3)
        g2 = lambda p: np.sin(p[..., 1] + 0.8)

        def jac(p):
            p = np.asarray(p)
            out = np.zeros(p.shape[:-1] + (2, 2))
            out[..., 0, 0] = np.cos(p[..., 0] - 0.3)
            out[..., 1, 1] = np.cos(p[..., 1] + 0.8)
            return out

        rc = count_common_zeros_2d(g1, g2, jac, resolution=128)
        assert rc.count == 4 and not rc.tangent

    def test_coupled_system_against_field_gradient(self):
        # critical points of a singleterm coupled potential: cos(x + y) has
        # degenerate critical lines, so perturb with an axis term
        f = PeriodicScalarField.from_terms(
            2, [(1.0, [1, 1], 0.3), (0.7, [1, 0], 1.1), (0.4, [0, 1], 2.0)])
        g1 = f.partial(0)
        g2 = f.partial(1)
        rc = count_common_zeros_2d(lambda x: g1(x), lambda x: g2(x),
                                   lambda x: f.hessian(x), resolution=256)
        rc2 = count_common_zeros_2d(lambda x: g1(x), lambda x: g2(x),
                                    lambda x: f.hessian(x), resolution=512)
        assert rc.count == rc2.count >= 4
        # every reported root is a genuine common zero
        for z in rc.roots:
            assert abs(g1(z)) < 1e-9 and abs(g2(z)) < 1e-9

    def test_no_solutions(self):
        g1 = lambda p: np.sin(p[..., 0]) + 1.5
        g2 = lambda p: np.sin(p[..., 1])
        jac = lambda p: np.eye(2)
        rc = count_common_zeros_2d(g1, g2, jac, resolution=64)
        assert rc.count == 0
