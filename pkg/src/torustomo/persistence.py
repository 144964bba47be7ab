"""Sublevel-set persistence barcodes of periodic fields over F_2.

For exact graph Lagrangians the filtered intersection complex of a pair
(graph df, graph dg) reduces to the Morse complex of the generating-function
difference g - f filtered by value; its barcode is computed here as the
lower-star persistence of the difference field on a periodic cubical grid.
Bars from all homology degrees are pooled into one multiset of lengths in
(0, inf]; the number of infinite bars equals the total F_2 homology
dimension of the torus, 2^n.

Cells are ordered by (filtration value, dimension, lexicographic index), so
ties from symmetric inputs resolve canonically and the pairing is the unique
one determined by the filtration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .fields import TWO_PI, periodic_grid, sup_norm
from .roots import count_common_zeros_2d, guarded_periodic_count

#: relative threshold below which a bar is treated as a zero-length pair
ZERO_BAR_REL_TOL = 1e-12

#: relative threshold below which two vertex values count as a flat edge
FLAT_EDGE_REL_TOL = 1e-12

#: relative threshold for clustering equal critical values (symmetry ties)
TIE_REL_TOL = 1e-9


class DegenerateFieldError(ValueError):
    """The field is not Morse at the requested resolution."""


@dataclass
class Barcode:
    """Multiset of bar lengths in (0, inf]; birth values kept for diagnostics."""

    finite_lengths: np.ndarray
    n_infinite: int
    finite_births: np.ndarray = field(default_factory=lambda: np.empty(0))
    infinite_births: np.ndarray = field(default_factory=lambda: np.empty(0))
    dimension: int = 1
    resolution: int = 0

    @property
    def total_bars(self):
        return len(self.finite_lengths) + self.n_infinite

    def bar_count(self, eps):
        """Number of bars strictly longer than eps (infinite bars always count)."""
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        return int(np.count_nonzero(self.finite_lengths > eps)) + self.n_infinite

    def shortest_bar(self):
        """Length of the shortest bar; inf when only infinite bars exist."""
        if len(self.finite_lengths) == 0:
            return math.inf
        return float(np.min(self.finite_lengths))

    def lengths(self):
        """All bar lengths, infinite ones as math.inf, sorted ascending."""
        return sorted(self.finite_lengths.tolist()) + [math.inf] * self.n_infinite

    def to_csv_rows(self):
        rows = [(float(l), 0) for l in np.sort(self.finite_lengths)]
        rows += [(math.inf, 1)] * self.n_infinite
        return rows


def bar_count(barcode_obj, eps):
    return barcode_obj.bar_count(eps)


class FilteredTorusComplex:
    """Periodic cubical grid with the lower-star filtration of vertex values.

    Every cell carries the max of its vertices, so filtration values are
    monotone under the face relation by construction.
    """

    def __init__(self, vertex_values):
        values = np.asarray(vertex_values, dtype=float)
        if values.ndim == 1:
            self._build_1d(values)
        elif values.ndim == 2:
            if values.shape[0] != values.shape[1]:
                raise ValueError("2d grid must be square")
            self._build_2d(values)
        else:
            raise ValueError("only 1d and 2d grids are supported")
        rows, cols = np.nonzero(self.face_table >= 0)
        faces = self.face_table[rows, cols]
        if np.any(self.values[faces] > self.values[rows]):
            raise AssertionError("filtration values not monotone under the face relation")

    def _build_1d(self, vv):
        g = len(vv)
        ev = np.maximum(vv, np.roll(vv, -1))
        self.dimension = 1
        self.grid = g
        self.values = np.concatenate([vv, ev])
        self.dims = np.concatenate([np.zeros(g, np.int8), np.ones(g, np.int8)])
        ft = np.full((2 * g, 2), -1, dtype=np.int64)
        j = np.arange(g)
        ft[g + j, 0] = j
        ft[g + j, 1] = (j + 1) % g
        self.face_table = ft

    def _build_2d(self, vv):
        g = vv.shape[0]
        n_v = g * g
        he = np.maximum(vv, np.roll(vv, -1, axis=1))
        ve = np.maximum(vv, np.roll(vv, -1, axis=0))
        sq = np.maximum(he, np.roll(he, -1, axis=0))
        self.dimension = 2
        self.grid = g
        self.values = np.concatenate([vv.ravel(), he.ravel(), ve.ravel(), sq.ravel()])
        self.dims = np.concatenate([
            np.zeros(n_v, np.int8), np.ones(n_v, np.int8),
            np.ones(n_v, np.int8), np.full(n_v, 2, np.int8),
        ])
        i, j = np.divmod(np.arange(n_v), g)
        vid = lambda a, b: (a % g) * g + (b % g)
        ft = np.full((4 * n_v, 4), -1, dtype=np.int64)
        # horizontal edge (i, j): vertices (i, j) and (i, j+1)
        ft[n_v + np.arange(n_v), 0] = vid(i, j)
        ft[n_v + np.arange(n_v), 1] = vid(i, j + 1)
        # vertical edge (i, j): vertices (i, j) and (i+1, j)
        ft[2 * n_v + np.arange(n_v), 0] = vid(i, j)
        ft[2 * n_v + np.arange(n_v), 1] = vid(i + 1, j)
        # square (i, j): its four boundary edges
        ft[3 * n_v + np.arange(n_v), 0] = n_v + vid(i, j)
        ft[3 * n_v + np.arange(n_v), 1] = n_v + vid(i + 1, j)
        ft[3 * n_v + np.arange(n_v), 2] = 2 * n_v + vid(i, j)
        ft[3 * n_v + np.arange(n_v), 3] = 2 * n_v + vid(i, j + 1)
        self.face_table = ft

    @property
    def n_cells(self):
        return len(self.values)

    def filtration_order(self):
        """Cell ids sorted by (value, dimension, lexicographic index)."""
        gids = np.arange(self.n_cells)
        return np.lexsort((gids, self.dims, self.values))

    def boundary_csc(self):
        """Boundary matrix in filtration coordinates plus the reduction order.

        Returns (order, rank, indptr, indices, column_order) where `order`
        maps filtration position -> cell id and `column_order` lists the
        column positions grouped by dimension from high to low (enabling the
        clearing shortcut in the reduction).
        """
        order = self.filtration_order()
        rank = np.empty(self.n_cells, dtype=np.int64)
        rank[order] = np.arange(self.n_cells)
        ft_ord = self.face_table[order]
        valid = ft_ord >= 0
        fr = np.where(valid, rank[np.where(valid, ft_ord, 0)], np.iinfo(np.int64).max)
        fr.sort(axis=1)
        lens = valid.sum(axis=1)
        mask = np.arange(ft_ord.shape[1])[None, :] < lens[:, None]
        indices = fr[mask].astype(np.int32)
        indptr = np.concatenate([[0], np.cumsum(lens)]).astype(np.int64)
        pdims = self.dims[order]
        positions = np.arange(self.n_cells, dtype=np.int32)
        column_order = np.concatenate(
            [positions[pdims == d] for d in range(self.dimension, 0, -1)]
        ).astype(np.int32)
        return order, rank, indptr, indices, column_order


def _degeneracy_checks(f, vertex_values, resolution):
    values = vertex_values.ravel()
    vrange = float(np.max(values) - np.min(values))
    if vrange == 0.0:
        raise DegenerateFieldError("field is constant on the grid")
    scale = max(1.0, float(np.max(np.abs(values))))
    flat_tol = FLAT_EDGE_REL_TOL * scale
    if vertex_values.ndim == 1:
        gaps = np.abs(vertex_values - np.roll(vertex_values, -1))
        if np.any(gaps <= flat_tol):
            raise DegenerateFieldError("flat edge: adjacent vertex values coincide")
    else:
        for axis in (0, 1):
            gaps = np.abs(vertex_values - np.roll(vertex_values, -1, axis=axis))
            if np.any(gaps <= flat_tol):
                raise DegenerateFieldError("flat edge: adjacent vertex values coincide")
    return vrange


def _critical_value_separation_check(f, endpoints, vrange, resolution):
    """DEGENERATE when distinct critical values sit inside the grid-error band."""
    if len(endpoints) < 2:
        return
    h = TWO_PI / resolution
    interp_err = f.hessian_bound() * h * h / 8.0
    tie_tol = TIE_REL_TOL * max(1.0, vrange)
    vals = np.sort(np.asarray(endpoints, dtype=float))
    clusters = [vals[0]]
    for v in vals[1:]:
        if v - clusters[-1] > tie_tol:
            if v - clusters[-1] < 2.0 * interp_err:
                raise DegenerateFieldError(
                    f"critical values separated by {v - clusters[-1]:.3e} "
                    f"< 2 x grid interpolation error {interp_err:.3e}")
            clusters.append(v)


def barcode(f, resolution=256):
    """Sublevel persistence barcode of a field on T^n over F_2, degrees pooled.

    Raises DegenerateFieldError when the field is not Morse at this
    resolution (constant stretches, or distinct critical values closer than
    twice the grid interpolation error).
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64 per axis")
    n = f.dimension
    if n == 1:
        grid = periodic_grid(1, resolution)
        vertex_values = f(grid)
    else:
        grid = periodic_grid(2, resolution)
        vertex_values = f(grid).reshape(resolution, resolution)
    vrange = _degeneracy_checks(f, vertex_values, resolution)

    complex_ = FilteredTorusComplex(vertex_values)
    order, rank, indptr, indices, column_order = complex_.boundary_csc()
    low = _kernels.reduce_boundary(complex_.n_cells, indptr, indices, column_order)
    low = np.asarray(low)
    pvals = complex_.values[order]

    deaths = np.nonzero(low >= 0)[0]
    birth_rows = low[deaths]
    lengths = pvals[deaths] - pvals[birth_rows]
    zero_tol = ZERO_BAR_REL_TOL * max(1.0, vrange)
    keep = lengths > zero_tol
    finite_lengths = lengths[keep]
    finite_births = pvals[birth_rows[keep]]

    paired = np.zeros(complex_.n_cells, dtype=bool)
    paired[deaths] = True
    paired[birth_rows] = True
    unpaired = np.nonzero(~paired)[0]
    if len(unpaired) != 2 ** n:
        raise DegenerateFieldError(
            f"expected {2 ** n} infinite bars, found {len(unpaired)}")

    endpoints = np.concatenate([finite_births, finite_births + finite_lengths, pvals[unpaired]])
    _critical_value_separation_check(f, endpoints, vrange, resolution)

    order_idx = np.argsort(finite_lengths)
    return Barcode(
        finite_lengths=finite_lengths[order_idx],
        n_infinite=len(unpaired),
        finite_births=finite_births[order_idx],
        infinite_births=pvals[unpaired],
        dimension=n,
        resolution=resolution,
    )


def count_critical_points(f, resolution=None):
    """Independent critical-point count by root isolation of the gradient.

    n = 1 counts zeros of f' by guarded sign changes and bisection; n = 2
    counts common zeros of the two partials by bilinear cell tracing.
    Raises DegenerateFieldError at a degenerate (near-singular Hessian)
    critical point.
    """
    n = f.dimension
    if n == 1:
        fp = f.partial(0)
        fpp = fp.partial(0)
        res = resolution or max(512, 32 * (f.max_frequency() + 1))
        rc = guarded_periodic_count(lambda x: fp(x[..., None]), lambda x: fpp(x[..., None]), res)
        if rc.tangent:
            raise DegenerateFieldError("degenerate critical point (f'' ~ 0 at a root of f')")
        return rc.count
    g1 = f.partial(0)
    g2 = f.partial(1)
    res = resolution or 512
    rc = count_common_zeros_2d(lambda x: g1(x), lambda x: g2(x), lambda x: f.hessian(x),
                               resolution=res)
    if rc.tangent:
        raise DegenerateFieldError("degenerate critical point (singular Hessian)")
    return rc.count


def verify_bar_identity(f, resolution=1024, n_eps=50):
    """Check #crit = 2 b - 2^n exactly, plus the inequality over an eps sweep.

    The critical-point count on the left comes from independent root
    isolation of the gradient; b is the total number of bars.  The sweep
    checks #crit >= 2 b_eps - 2^n for n_eps values of eps.
    """
    n = f.dimension
    bc = barcode(f, resolution)
    crit_from_barcode = 2 * len(bc.finite_lengths) + bc.n_infinite
    crit_independent = count_critical_points(f)
    b_total = bc.total_bars
    identity_ok = crit_independent == 2 * b_total - 2 ** n

    top = float(bc.finite_lengths.max()) * 1.2 if len(bc.finite_lengths) else 1.0
    eps_values = np.linspace(top / n_eps, top, n_eps)
    sweep_ok = all(crit_independent >= 2 * bc.bar_count(e) - 2 ** n for e in eps_values)
    return {
        "barcode": bc,
        "crit_independent": crit_independent,
        "crit_from_barcode": crit_from_barcode,
        "total_bars": b_total,
        "identity_ok": bool(identity_ok),
        "sweep_ok": bool(sweep_ok),
    }


def stability_count_check(f, g, eps, delta, resolution=512):
    """Count stability under the oscillation surrogate.

    Precondition: sup |f - g| < delta / 2 (the surrogate upper bound for the
    spectral distance between the exact graphs of df and dg).  When it holds,
    asserts b_eps(barcode of g) >= b_{eps+delta}(barcode of f).  A violated
    precondition is reported, not asserted.
    """
    diff = f - g
    sup = sup_norm(diff, max(256, resolution))
    report = {"sup_difference": sup, "delta": delta, "eps": eps,
              "precondition_ok": bool(sup < delta / 2.0)}
    if not report["precondition_ok"]:
        report["passed"] = None
        return report
    bc_f = barcode(f, resolution)
    bc_g = barcode(g, resolution)
    lhs = bc_g.bar_count(eps)
    rhs = bc_f.bar_count(eps + delta)
    report.update({"count_perturbed": lhs, "count_base": rhs, "passed": bool(lhs >= rhs)})
    return report
