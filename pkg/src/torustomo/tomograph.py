"""Sine-graph tomographs on T^n x R^n and their Crofton integrals.

A tomograph is the family of exact graph Lagrangians

    L_s = graph( sum_i rho_i sin(k x_i + phi_i) dx_i ),

parameterized by s = ((rho_1, phi_1), ..., (rho_n, phi_n)) in a polydisk,
together with a rotationally symmetric measure on the parameter space.  The
measure is parameterized directly as ds = prod_i m(rho_i) drho_i dphi_i with
the polar Jacobian absorbed into the radial density m, so the tail mass
M(t) = int_t^R m is the single primitive from which the flat-torus Crofton
values, the limit profile sigma and the normalization constant all derive in
closed form.

The Crofton integral of a graph Lagrangian L is the measure integral of the
intersection count N(s) = |L_s ^ L|.  The generic evaluation path counts
roots; the closed forms are kept separate so they can serve as independent
oracles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fields import (
    TWO_PI,
    GraphLagrangian,
    OneForm,
    PeriodicScalarField,
    periodic_grid,
    periodic_nodes,
)
from .roots import (
    TANGENT,
    TANGENT_JACOBIAN_TOL,
    bisect_many,
    count_common_zeros_2d,
    guarded_periodic_count,
    offset_grid,
    sign_change_count_rows,
)


class ExcessTangencyError(RuntimeError):
    """Raised when more than the allowed fraction of samples stay tangent."""


class RadialMeasure:
    """Piecewise-polynomial radial density m on [0, R], supported in [r0, r1].

    ``pieces`` is a list of (lo, hi, coeffs) with polynomial coefficients in
    increasing degree.  The support must stay away from 0; touching the outer
    radius is tolerated (the smoothness it would break is irrelevant to any
    integrated quantity computed here).
    """

    def __init__(self, outer_radius, pieces, divisor=1.0):
        self.outer_radius = float(outer_radius)
        cleaned = []
        for lo, hi, coeffs in sorted(pieces, key=lambda p: p[0]):
            lo, hi = float(lo), float(hi)
            if not (0.0 <= lo < hi <= self.outer_radius):
                raise ValueError("measure piece outside [0, R]")
            if cleaned and lo < cleaned[-1][1]:
                raise ValueError("measure pieces overlap")
            cleaned.append((lo, hi, np.asarray(coeffs, dtype=float)))
        if not cleaned:
            raise ValueError("measure needs at least one piece")
        self.pieces = cleaned
        self.divisor = float(divisor)
        if self.support[0] <= 0.0:
            raise ValueError("measure must be supported away from rho = 0")
        probe = np.linspace(self.support[0], self.support[1], 512)
        if np.any(self(probe) < -1e-12):
            raise ValueError("measure density must be nonnegative")
        if self.total_mass() <= 0.0:
            raise ValueError("measure must have positive total mass")

    @classmethod
    def constant(cls, value=1.0, lo=0.5, hi=1.0, outer_radius=1.0):
        return cls(outer_radius, [(lo, hi, [value])])

    @classmethod
    def from_breakpoints(cls, outer_radius, breakpoints, values):
        """Piecewise-linear density through (breakpoint, value) pairs."""
        bp = np.asarray(breakpoints, dtype=float)
        vals = np.asarray(values, dtype=float)
        if len(bp) != len(vals) or len(bp) < 2:
            raise ValueError("need matching breakpoints and values, at least two")
        pieces = []
        for lo, hi, v0, v1 in zip(bp[:-1], bp[1:], vals[:-1], vals[1:]):
            slope = (v1 - v0) / (hi - lo)
            pieces.append((lo, hi, [v0 - slope * lo, slope]))
        return cls(outer_radius, pieces)

    @property
    def support(self):
        return self.pieces[0][0], self.pieces[-1][1]

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = np.zeros_like(rho)
        for lo, hi, coeffs in self.pieces:
            mask = (rho >= lo) & (rho <= hi)
            if np.any(mask):
                out = np.where(mask, np.polynomial.polynomial.polyval(rho, coeffs), out)
        return out / self.divisor

    def tail_mass(self, t):
        """M(t) = int_t^R m(rho) drho, exact per polynomial piece."""
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t)
        for lo, hi, coeffs in self.pieces:
            anti = np.polynomial.polynomial.polyint(coeffs)
            upper = np.polynomial.polynomial.polyval(hi, anti)
            start = np.clip(t, lo, hi)
            total = total + upper - np.polynomial.polynomial.polyval(start, anti)
        return total / self.divisor

    def total_mass(self):
        return float(self.tail_mass(0.0))

    def scaled(self, factor):
        return RadialMeasure(
            self.outer_radius,
            [(lo, hi, coeffs * factor) for lo, hi, coeffs in self.pieces],
            divisor=self.divisor,
        )

    def with_divisor(self, divisor):
        return RadialMeasure(self.outer_radius, [(lo, hi, c.copy()) for lo, hi, c in self.pieces], divisor=divisor)

    def to_dict(self):
        return {
            "outer_radius": self.outer_radius,
            "divisor": self.divisor,
            "pieces": [[lo, hi, list(map(float, c))] for lo, hi, c in self.pieces],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["outer_radius"], [tuple(p) for p in data["pieces"]], divisor=data.get("divisor", 1.0))


@dataclass(frozen=True)
class SParam:
    """Tomograph parameter: one (rho_i, phi_i) pair per factor."""

    rho: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", np.atleast_1d(np.asarray(self.rho, dtype=float)))
        object.__setattr__(self, "phi", np.atleast_1d(np.asarray(self.phi, dtype=float)))
        if self.rho.shape != self.phi.shape:
            raise ValueError("rho and phi must have matching shapes")
        if np.any(self.rho < 0.0):
            raise ValueError("radii must be nonnegative")

    @property
    def dimension(self):
        return len(self.rho)


@dataclass(frozen=True)
class Tomograph:
    """Sine-graph family over the polydisk, with frequency k and shared radial measure."""

    dimension: int
    measure: RadialMeasure
    frequency: int = 1

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if not (isinstance(self.frequency, (int, np.integer)) and self.frequency >= 1):
            raise ValueError("frequency must be a positive integer")

    def normalized(self):
        """Measure divided by the normalization constant, so sigma(0) = 1."""
        raw = self.measure.with_divisor(1.0)
        return replace(self, measure=self.measure.with_divisor(2.0 * raw.tail_mass(0.0)))

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "frequency": int(self.frequency),
            "measure": self.measure.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["dimension"]), RadialMeasure.from_dict(data["measure"]),
                   int(data.get("frequency", 1)))


def lagrangian_at(tomo, s):
    """The graph of sum_i rho_i sin(k x_i + phi_i) dx_i, potential attached."""
    if s.dimension != tomo.dimension:
        raise ValueError("parameter dimension mismatch")
    potential = potential_field(tomo, s)
    comps = []
    k = tomo.frequency
    for i in range(tomo.dimension):
        wave = np.zeros(tomo.dimension, dtype=np.int64)
        wave[i] = k
        # rho sin(k x + phi) = rho cos(k x + phi - pi/2)
        comps.append(PeriodicScalarField(tomo.dimension, [s.rho[i]], [wave], [s.phi[i] - 0.5 * np.pi]))
    return GraphLagrangian(OneForm(tuple(comps), potential=potential))


def potential_field(tomo, s):
    """Generating function -(1/k) sum_i rho_i cos(k x_i + phi_i) of L_s."""
    k = tomo.frequency
    amps, waves, phases = [], [], []
    for i in range(tomo.dimension):
        wave = np.zeros(tomo.dimension, dtype=np.int64)
        wave[i] = k
        amps.append(-s.rho[i] / k)
        waves.append(wave)
        phases.append(s.phi[i])
    return PeriodicScalarField(tomo.dimension, amps, waves, phases)


def sigma(tomo, y):
    """Profile of the horizontal limit density: prod_i 2 M(|y_i|).

    Closed form; the Crofton integral of the flat torus T^n_y divided by
    (2 pi)^n gives the same number through root counting and serves as the
    independent oracle in the tests.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape[-1] != tomo.dimension:
        raise ValueError("dimension mismatch")
    return np.prod(2.0 * tomo.measure.tail_mass(np.abs(y)), axis=-1)


def normalization_constant(tomo):
    """c = sigma(0) = (2 M(0))^n, the maximum of the limit profile."""
    return float(sigma(tomo, np.zeros(tomo.dimension)))


def homogenize(tomo, k):
    """The frequency-k tomograph T_k (measure carries the 1/k^n scale).

    The per-factor 1/k weight is applied inside the Crofton quadrature, so
    the stored measure stays that of the base tomograph.
    """
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ValueError("k must be a positive integer")
    if tomo.frequency != 1:
        raise ValueError("homogenize starts from the base (frequency 1) tomograph")
    return replace(tomo, frequency=int(k))


def flat_crofton_closed(tomo, y):
    """Closed-form Crofton integral of the flat torus T^n_y: prod_i 4 pi M(|y_i|).

    Written with the frequency factors spelled out (2k roots per factor, one
    1/k from the measure scale) so the k-invariance check exercises actual
    float arithmetic.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    k = float(tomo.frequency)
    value = 1.0
    for yi in y:
        value *= (2.0 * k) * TWO_PI * float(tomo.measure.tail_mass(abs(yi))) / k
    return value


def homogenized_limit(tomo, beta, resolution=8192):
    """Quadrature of sigma(beta(x)) over T^n, the k -> infinity Crofton value."""
    form = beta.form if isinstance(beta, GraphLagrangian) else beta
    n = tomo.dimension
    if n > 1:
        resolution = min(int(resolution), 512)
    resolution = max(int(resolution), 16 * (form.max_frequency() + 1))
    grid = periodic_grid(n, resolution)
    heights = form(grid)
    vals = np.prod(2.0 * tomo.measure.tail_mass(np.abs(heights)), axis=-1)
    return float(np.sum(vals) * (TWO_PI / resolution) ** n)


# -- intersection counting ---------------------------------------------------------


def _axis_field(component, axis):
    """Restrict a separable component to a field of one variable."""
    return PeriodicScalarField(1, component.amplitudes, component.waves[:, axis:axis + 1],
                               component.phases)


def _factor_resolution(k, beta_freq):
    # a root pair near a tangency is invisible to the grid within a band of
    # width ~ rho (k h)^2 / 8 in rho; segment widths shrink like 1/k, so the
    # node count has to grow like k^(3/2) to keep midpoint counts exact
    return max(384, int(32 * (k + beta_freq + 1) * max(1.0, np.sqrt(k))))


def intersection_count(tomo, s, lagrangian, resolution=None, tangent_tol=TANGENT_JACOBIAN_TOL):
    """|L_s ^ L| for a graph Lagrangian L, or TANGENT at a non-transverse s.

    Separable forms decouple into n scalar problems counted by guarded sign
    changes plus bisection; coupled forms (n = 2) go through bilinear
    zero-curve tracing per grid cell.
    """
    beta = lagrangian.form
    if beta.dimension != tomo.dimension or s.dimension != tomo.dimension:
        raise ValueError("dimension mismatch")
    k = tomo.frequency
    if beta.is_separable():
        total = 1
        for i in range(tomo.dimension):
            comp = _axis_field(beta.components[i], i)
            res = resolution or _factor_resolution(k, comp.max_frequency())
            rho_i, phi_i = float(s.rho[i]), float(s.phi[i])

            def f(x, rho_i=rho_i, phi_i=phi_i, comp=comp):
                return rho_i * np.sin(k * x + phi_i) - comp(x[..., None])

            def fp(x, rho_i=rho_i, phi_i=phi_i, dcomp=comp.partial(0)):
                return rho_i * k * np.cos(k * x + phi_i) - dcomp(x[..., None])

            rc = guarded_periodic_count(f, fp, res, tangent_tol)
            if rc.tangent:
                return TANGENT
            total *= rc.count
            if total == 0:
                return 0
        return total

    if tomo.dimension != 2:
        raise ValueError("coupled counting is implemented for n = 2 only")
    res = resolution or 512

    def g(i):
        comp = beta.components[i]

        def gi(x, i=i, comp=comp):
            x = np.asarray(x, dtype=float)
            return s.rho[i] * np.sin(k * x[..., i] + s.phi[i]) - comp(x)

        return gi

    def jac(x):
        x = np.asarray(x, dtype=float)
        rows = []
        for i in range(2):
            grad = -beta.components[i].gradient(x)
            grad[..., i] += s.rho[i] * k * np.cos(k * x[..., i] + s.phi[i])
            rows.append(grad)
        return np.stack(rows, axis=-2)

    rc = count_common_zeros_2d(g(0), g(1), jac, resolution=res, tangent_tol=tangent_tol)
    if rc.tangent:
        return TANGENT
    return rc.count


# -- Crofton integrals --------------------------------------------------------------


@dataclass
class CroftonResult:
    """Crofton integral value with sampling diagnostics."""

    value: float
    n_samples: int
    n_perturbed: int = 0
    n_failed: int = 0
    factor_values: tuple = ()
    n_jumps: int = 0

    @property
    def perturbed_fraction(self):
        return self.n_perturbed / self.n_samples if self.n_samples else 0.0

    @property
    def tangent_fraction(self):
        return self.n_failed / self.n_samples if self.n_samples else 0.0


def _batched_counts(rho_nodes, phi, k, x, b_vals, chunk=4_000_000):
    """Counts of rho sin(kx + phi) = b(x) for a column of radii at fixed phi."""
    s_vals = np.sin(k * x + phi)
    n_rho = len(rho_nodes)
    if n_rho * len(x) <= chunk:
        vals = rho_nodes[:, None] * s_vals[None, :] - b_vals[None, :]
        return sign_change_count_rows(vals)
    out = np.empty(n_rho, dtype=np.int32)
    step = max(1, chunk // len(x))
    for start in range(0, n_rho, step):
        block = rho_nodes[start:start + step, None] * s_vals[None, :] - b_vals[None, :]
        out[start:start + step] = sign_change_count_rows(block)
    return out


def _count_at(rho, phi, k, x_fine, b_fine):
    vals = rho * np.sin(k * x_fine + phi) - b_fine
    return int(sign_change_count_rows(vals[None, :])[0])


def _tangency_radii(comp, dcomp, k, phi, x, b_vals, db_vals, r0, r1):
    """Radii where the count of rho sin(kx + phi) = b(x) jumps, located exactly.

    A root pair is born or dies at (rho*, x*) with g(x*) = g'(x*) = 0, which
    eliminates rho: x* is a zero of the Wronskian-type function
    W = b s' - b' s (s = sin(kx + phi)), and rho* = b(x*) / s(x*).  When b is
    proportional to s itself, W vanishes identically and the single jump
    radius is the proportionality constant.
    """
    s_vals = np.sin(k * x + phi)
    sp_vals = k * np.cos(k * x + phi)
    w_vals = b_vals * sp_vals - db_vals * s_vals
    scale = max(float(np.max(np.abs(b_vals))) * k, float(np.max(np.abs(db_vals))), 1e-30)
    candidates = []
    if float(np.max(np.abs(w_vals))) < 1e-11 * scale:
        i0 = int(np.argmax(np.abs(s_vals)))
        if abs(s_vals[i0]) > 0.5:
            candidates.append(b_vals[i0] / s_vals[i0])
    else:
        pos = w_vals >= 0.0
        flips = np.nonzero(pos != np.roll(pos, -1))[0]
        if len(flips):
            h = x[1] - x[0]

            def wf(xx):
                return (comp(xx[..., None]) * k * np.cos(k * xx + phi)
                        - dcomp(xx[..., None]) * np.sin(k * xx + phi))

            roots = bisect_many(wf, x[flips], x[flips] + h)
            bv = comp(roots[:, None])
            dbv = dcomp(roots[:, None])
            sv = np.sin(k * roots + phi)
            spv = k * np.cos(k * roots + phi)
            with np.errstate(divide="ignore", invalid="ignore"):
                rho_star = np.where(np.abs(sv) > 1e-8, bv / sv, dbv / spv)
            candidates.extend(rho_star[np.isfinite(rho_star)].tolist())
    eps = 1e-12 * max(1.0, r1)
    inside = sorted(c for c in candidates if r0 + eps < c < r1 - eps)
    merged = []
    for c in inside:
        if not merged or c - merged[-1] > 1e-11:
            merged.append(c)
    return merged


def _collect_jumps(count_at, a, b, ca, cb, jumps, depth=0):
    """All parameter values in (a, b) where the count changes, by bisection."""
    if ca == cb:
        return
    if depth >= 5:
        jumps.append(0.5 * (a + b))
        return
    lo, hi = a, b
    for _ in range(46):
        mid = 0.5 * (lo + hi)
        if count_at(mid) == ca:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    c_left = count_at(0.5 * (a + t))
    if c_left != ca:
        _collect_jumps(count_at, a, t, ca, c_left, jumps, depth + 1)
    jumps.append(t)
    c_right = count_at(0.5 * (t + b))
    if c_right != cb:
        _collect_jumps(count_at, t, b, c_right, cb, jumps, depth + 1)


def _factor_crofton(tomo, comp1d, radial, angular, refine, trace_rows=None, factor_index=0):
    """Measure integral of the factor count over one (rho, phi) disk.

    In refined mode the count profile along rho is integrated exactly
    against the measure between bisected jump locations; in plain mode the
    tensor Gauss-Legendre x trapezoid rule is applied to the node counts.
    """
    k = tomo.frequency
    measure = tomo.measure
    r0, r1 = measure.support
    z, w = np.polynomial.legendre.leggauss(radial)
    rho_nodes = 0.5 * (r1 - r0) * (z + 1.0) + r0
    rho_w = 0.5 * (r1 - r0) * w
    phi_nodes = periodic_nodes(angular)
    w_phi = TWO_PI / angular

    bfreq = comp1d.max_frequency()
    res = _factor_resolution(k, bfreq)
    x = offset_grid(res)
    b_vals = comp1d(x[:, None])
    db_vals = None
    dcomp = comp1d.partial(0)

    eps = 1e-9 * (r1 - r0)
    total = 0.0
    n_perturbed = 0
    n_failed = 0
    n_jumps = 0
    for phi in phi_nodes:
        counts = _batched_counts(rho_nodes, phi, k, x, b_vals)
        if refine:
            if db_vals is None:
                db_vals = dcomp(x[:, None])
            jumps = _tangency_radii(comp1d, dcomp, k, phi, x, b_vals, db_vals, r0, r1)

            def count_at(rho, phi=phi):
                return _count_at(rho, phi, k, x, b_vals)

            boundaries = np.concatenate([[r0], jumps, [r1]])
            mids = 0.5 * (boundaries[:-1] + boundaries[1:])
            mid_counts = _batched_counts(mids, phi, k, x, b_vals)
            # defense against missed tangencies: every quadrature node must
            # agree with the count of the segment it falls in
            seg_of_node = np.searchsorted(jumps, rho_nodes) if jumps else np.zeros(len(rho_nodes), int)
            mismatch = counts != mid_counts[seg_of_node]
            if np.any(mismatch):
                extra = []
                bounds = np.concatenate([[r0 + eps], rho_nodes, [r1 - eps]])
                cvals = np.concatenate([[count_at(r0 + eps)], counts, [count_at(r1 - eps)]])
                for a, b, ca, cb in zip(bounds[:-1], bounds[1:], cvals[:-1], cvals[1:]):
                    _collect_jumps(count_at, a, b, int(ca), int(cb), extra)
                merged = sorted(set(np.round(np.concatenate([jumps, extra]), 13)))
                boundaries = np.concatenate([[r0], merged, [r1]])
                mids = 0.5 * (boundaries[:-1] + boundaries[1:])
                mid_counts = _batched_counts(mids, phi, k, x, b_vals)
            n_jumps += len(boundaries) - 2
            masses = measure.tail_mass(boundaries[:-1]) - measure.tail_mass(boundaries[1:])
            contribution = float(np.sum(mid_counts * masses))
            if trace_rows is not None:
                for rho_rep, c_seg, mass in zip(mids, mid_counts, masses):
                    trace_rows.append((factor_index, float(rho_rep), float(phi),
                                       int(c_seg), float(mass) * w_phi / k))
            total += w_phi * contribution
        else:
            if db_vals is None:
                db_vals = dcomp(x[:, None])
            radii = np.asarray(_tangency_radii(comp1d, dcomp, k, phi, x, b_vals, db_vals, r0, r1))
            window = 1e-9 * max(1.0, measure.outer_radius)

            def near_tangency(rho):
                return len(radii) > 0 and float(np.min(np.abs(radii - rho))) < window

            counts = counts.copy().astype(np.int64)
            live = np.ones(len(rho_nodes), dtype=bool)
            for j, rho_v in enumerate(rho_nodes):
                if not near_tangency(rho_v):
                    continue
                n_perturbed += 1
                shifted = rho_v + 1e-7
                if near_tangency(shifted):
                    n_failed += 1
                    live[j] = False
                    continue
                counts[j] = _count_at(shifted, phi, k, x, b_vals)
            weights = rho_w * measure(rho_nodes) * live
            total += w_phi * float(np.sum(weights * counts))
            if trace_rows is not None:
                for rho_v, c_v, w_v in zip(rho_nodes, counts, weights):
                    trace_rows.append((factor_index, float(rho_v), float(phi), int(c_v),
                                       float(w_v) * w_phi / k))
    return total / k, len(rho_nodes) * angular, n_perturbed, n_failed, n_jumps


def crofton_integral(tomo, lagrangian, radial=200, angular=64, refine=True,
                     trace_path=None, max_tangent_fraction=0.01,
                     coupled_radial=8, coupled_angular=8, coupled_resolution=128):
    """Crofton integral I(L) of a graph Lagrangian against the tomograph measure.

    Separable forms factor into per-disk integrals (the solution set of the
    decoupled system is a product).  ``refine=True`` integrates the
    piecewise-constant radial count profile exactly against the measure
    between bisected jump locations; ``refine=False`` is the plain tensor
    rule with tangent samples perturbed by 1e-7 in rho.  Raises
    ExcessTangencyError when more than ``max_tangent_fraction`` of the
    samples stay tangent after perturbation.
    """
    beta = lagrangian.form
    if beta.dimension != tomo.dimension:
        raise ValueError("dimension mismatch")
    trace_rows = [] if trace_path is not None else None

    if beta.is_separable():
        value = 1.0
        factors = []
        n_samples = n_pert = n_failed = n_jumps = 0
        for i in range(tomo.dimension):
            comp = _axis_field(beta.components[i], i)
            fval, fsamples, fpert, ffail, fjumps = _factor_crofton(
                tomo, comp, radial, angular, refine, trace_rows, i)
            factors.append(fval)
            value *= fval
            n_samples += fsamples
            n_pert += fpert
            n_failed += ffail
            n_jumps += fjumps
        result = CroftonResult(value=value, n_samples=n_samples, n_perturbed=n_pert,
                               n_failed=n_failed, factor_values=tuple(factors), n_jumps=n_jumps)
    else:
        result = _coupled_crofton(tomo, lagrangian, coupled_radial, coupled_angular,
                                  coupled_resolution, trace_rows)

    if trace_path is not None:
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["factor", "rho", "phi", "count", "weight"])
            writer.writerows(trace_rows)
    if result.n_samples and result.tangent_fraction > max_tangent_fraction:
        raise ExcessTangencyError(
            f"{result.n_failed} of {result.n_samples} samples tangent after perturbation")
    return result


def _coupled_crofton(tomo, lagrangian, radial, angular, resolution, trace_rows):
    """Plain tensor quadrature for coupled (non-separable) forms, n = 2.

    Every sample runs the bilinear cell tracer, so keep the sample counts
    small; this path exists for robustness checks, not for the production
    experiments (which are all separable).
    """
    measure = tomo.measure
    r0, r1 = measure.support
    z, w = np.polynomial.legendre.leggauss(radial)
    rho_nodes = 0.5 * (r1 - r0) * (z + 1.0) + r0
    rho_w = 0.5 * (r1 - r0) * w
    phi_nodes = periodic_nodes(angular)
    w_phi = TWO_PI / angular
    k = tomo.frequency

    total = 0.0
    n_samples = 0
    n_pert = 0
    n_failed = 0
    dens = measure(rho_nodes)
    for i1, rho1 in enumerate(rho_nodes):
        for l1, phi1 in enumerate(phi_nodes):
            for i2, rho2 in enumerate(rho_nodes):
                for l2, phi2 in enumerate(phi_nodes):
                    n_samples += 1
                    s = SParam([rho1, rho2], [phi1, phi2])
                    cnt = intersection_count(tomo, s, lagrangian, resolution=resolution)
                    if cnt is TANGENT:
                        n_pert += 1
                        s = SParam([rho1 + 1e-7, rho2 + 1e-7], [phi1, phi2])
                        cnt = intersection_count(tomo, s, lagrangian, resolution=resolution)
                        if cnt is TANGENT:
                            n_failed += 1
                            continue
                    weight = rho_w[i1] * dens[i1] * rho_w[i2] * dens[i2] * w_phi * w_phi
                    total += weight * cnt
                    if trace_rows is not None:
                        trace_rows.append((-1, float(rho1), float(phi1), int(cnt), weight / k ** 2))
    return CroftonResult(value=total / k ** 2, n_samples=n_samples,
                         n_perturbed=n_pert, n_failed=n_failed)
