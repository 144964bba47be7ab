"""Trigonometric scalar fields, one-forms and graph Lagrangians on the torus.

Everything lives on T^n = (R / 2*pi*Z)^n with n in {1, 2}.  A scalar field is
a finite sum of cosine terms, so evaluation and derivatives of any order are
exact; no finite differencing enters anywhere downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

SUPPORTED_DIMENSIONS = (1, 2)


def wrap_angle(x):
    """Reduce angles into [0, 2*pi)."""
    return np.mod(x, TWO_PI)


def torus_point(coords, dim=None):
    """Validate and wrap a point of T^n given as an array of angles."""
    x = np.atleast_1d(np.asarray(coords, dtype=float))
    if x.ndim != 1:
        raise ValueError(f"a torus point must be a flat angle vector, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim} angles, got {x.shape[0]}")
    return wrap_angle(x)


class PeriodicScalarField:
    """Finite trigonometric sum f(x) = sum_j a_j * cos(<m_j, x> + theta_j).

    The wave vectors m_j are integer tuples, which makes f exactly
    2*pi-periodic in every coordinate.  Partial derivatives are again fields
    of the same form (term-by-term differentiation).
    """

    def __init__(self, dimension, amplitudes=(), waves=(), phases=()):
        if dimension not in SUPPORTED_DIMENSIONS:
            raise ValueError(f"dimension must be one of {SUPPORTED_DIMENSIONS}, got {dimension}")
        self.dimension = int(dimension)
        amps = np.asarray(amplitudes, dtype=float).reshape(-1)
        waves = np.asarray(waves, dtype=np.int64).reshape(-1, self.dimension) if len(amps) else np.zeros((0, self.dimension), dtype=np.int64)
        phases = np.asarray(phases, dtype=float).reshape(-1)
        if not (len(amps) == len(waves) == len(phases)):
            raise ValueError("amplitudes, waves and phases must have equal length")
        keep = amps != 0.0
        self.amplitudes = amps[keep]
        self.waves = waves[keep]
        self.phases = phases[keep]

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, dimension):
        return cls(dimension)

    @classmethod
    def constant(cls, dimension, value):
        if value == 0.0:
            return cls(dimension)
        return cls(dimension, [value], [np.zeros(dimension, dtype=np.int64)], [0.0])

    @classmethod
    def from_terms(cls, dimension, terms):
        """Build from an iterable of (amplitude, wave_vector, phase) triples."""
        terms = list(terms)
        amps = [t[0] for t in terms]
        waves = [np.atleast_1d(t[1]) for t in terms]
        phases = [t[2] for t in terms]
        return cls(dimension, amps, waves, phases)

    @classmethod
    def random(cls, dimension, rng, n_terms=5, max_freq=3, amp_scale=1.0):
        """Random trigonometric polynomial with nonzero integer wave vectors."""
        waves = []
        while len(waves) < n_terms:
            m = rng.integers(-max_freq, max_freq + 1, size=dimension)
            if np.any(m != 0):
                waves.append(m)
        amps = amp_scale * rng.uniform(0.2, 1.0, size=n_terms) * rng.choice([-1.0, 1.0], size=n_terms)
        phases = rng.uniform(0.0, TWO_PI, size=n_terms)
        return cls(dimension, amps, waves, phases)

    # -- evaluation ------------------------------------------------------------

    def __call__(self, x):
        """Evaluate at points of shape (..., n) or a single flat angle vector."""
        x = np.asarray(x, dtype=float)
        if x.shape == () and self.dimension == 1:
            x = x.reshape(1)
        if x.shape[-1] != self.dimension:
            raise ValueError(f"dimension mismatch: field on T^{self.dimension}, points of shape {x.shape}")
        if len(self.amplitudes) == 0:
            return np.zeros(x.shape[:-1])
        args = x @ self.waves.T.astype(float) + self.phases
        return np.cos(args) @ self.amplitudes

    def gradient(self, x):
        """Exact gradient, shape (..., n)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ValueError("dimension mismatch")
        if len(self.amplitudes) == 0:
            return np.zeros(x.shape)
        args = x @ self.waves.T.astype(float) + self.phases
        return -np.sin(args) @ (self.amplitudes[:, None] * self.waves.astype(float))

    def hessian(self, x):
        """Exact Hessian, shape (..., n, n)."""
        x = np.asarray(x, dtype=float)
        if len(self.amplitudes) == 0:
            return np.zeros(x.shape + (self.dimension,))
        args = x @ self.waves.T.astype(float) + self.phases
        mw = self.waves.astype(float)
        outer = mw[:, :, None] * mw[:, None, :]  # (terms, n, n)
        return np.einsum("...t,tij->...ij", -np.cos(args) * self.amplitudes, outer)

    def partial(self, axis):
        """The field d f / d x_axis; again a trigonometric sum."""
        if not 0 <= axis < self.dimension:
            raise ValueError(f"axis {axis} out of range for dimension {self.dimension}")
        # d/dx cos(u) = -m sin(u) = m cos(u + pi/2)
        amps = self.amplitudes * self.waves[:, axis]
        return PeriodicScalarField(self.dimension, amps, self.waves.copy(), self.phases + 0.5 * np.pi)

    def shift(self, theta):
        """The translated field x -> f(x + theta); exact on the term level."""
        theta = np.asarray(theta, dtype=float).reshape(self.dimension)
        return PeriodicScalarField(
            self.dimension, self.amplitudes.copy(), self.waves.copy(),
            self.phases + self.waves.astype(float) @ theta,
        )

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other):
        if np.isscalar(other):
            other = PeriodicScalarField.constant(self.dimension, float(other))
        if other.dimension != self.dimension:
            raise ValueError("dimension mismatch")
        return PeriodicScalarField(
            self.dimension,
            np.concatenate([self.amplitudes, other.amplitudes]),
            np.concatenate([self.waves, other.waves]),
            np.concatenate([self.phases, other.phases]),
        )

    def __neg__(self):
        return PeriodicScalarField(self.dimension, -self.amplitudes, self.waves.copy(), self.phases.copy())

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        return PeriodicScalarField(self.dimension, self.amplitudes * float(scalar), self.waves.copy(), self.phases.copy())

    __rmul__ = __mul__

    # -- structure -------------------------------------------------------------

    @property
    def n_terms(self):
        return len(self.amplitudes)

    def max_frequency(self):
        """Largest |m_i| over all terms and axes; 0 for a constant field."""
        if len(self.waves) == 0:
            return 0
        return int(np.max(np.abs(self.waves)))

    def amplitude_bound(self):
        """sum |a_j|, an upper bound for |f|."""
        return float(np.sum(np.abs(self.amplitudes)))

    def gradient_bound(self):
        """Upper bound for |grad f| (entrywise sum of |a_j m_j|)."""
        if len(self.waves) == 0:
            return 0.0
        return float(np.sum(np.abs(self.amplitudes[:, None] * self.waves), axis=0).max()) * np.sqrt(self.dimension)

    def hessian_bound(self):
        """Upper bound for the spectral norm of the Hessian: sum |a_j| |m_j|^2."""
        if len(self.waves) == 0:
            return 0.0
        return float(np.sum(np.abs(self.amplitudes) * np.sum(self.waves.astype(float) ** 2, axis=1)))

    def depends_only_on(self, axis):
        """True when every wave vector is supported on the given axis alone."""
        if len(self.waves) == 0:
            return True
        others = np.delete(self.waves, axis, axis=1)
        return bool(np.all(others == 0))

    # -- serialization ---------------------------------------------------------

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "terms": [
                [float(a), [int(m) for m in w], float(p)]
                for a, w, p in zip(self.amplitudes, self.waves, self.phases)
            ],
        }

    @classmethod
    def from_dict(cls, data):
        return cls.from_terms(int(data["dimension"]), data.get("terms", []))

    def dumps(self):
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"PeriodicScalarField(n={self.dimension}, terms={self.n_terms})"


class OneForm:
    """A one-form beta = sum_i beta_i(x) dx_i with trigonometric components.

    When built from a potential f via :meth:`exact`, the components are the
    exact partial derivatives of f and the potential is kept alongside.
    """

    def __init__(self, components, potential=None):
        components = tuple(components)
        if not components:
            raise ValueError("a one-form needs at least one component")
        dim = components[0].dimension
        if len(components) != dim or any(c.dimension != dim for c in components):
            raise ValueError("need exactly n components, all fields on T^n")
        self.dimension = dim
        self.components = components
        self.potential = potential

    @classmethod
    def exact(cls, potential):
        """The differential of a scalar field, with the potential attached."""
        comps = tuple(potential.partial(i) for i in range(potential.dimension))
        return cls(comps, potential=potential)

    @classmethod
    def zero(cls, dimension):
        return cls.exact(PeriodicScalarField.zero(dimension))

    @classmethod
    def constant(cls, values):
        values = np.atleast_1d(np.asarray(values, dtype=float))
        comps = tuple(PeriodicScalarField.constant(len(values), v) for v in values)
        return cls(comps)

    def __call__(self, x):
        """Component values at points of shape (..., n); returns (..., n)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ValueError("dimension mismatch")
        return np.stack([c(x) for c in self.components], axis=-1)

    def jacobian(self, x):
        """Matrix J_ij = d beta_i / d x_j at points of shape (..., n)."""
        x = np.asarray(x, dtype=float)
        return np.stack([c.gradient(x) for c in self.components], axis=-2)

    def is_exact(self):
        return self.potential is not None

    def is_separable(self):
        """True when component i depends only on x_i for every i."""
        return all(c.depends_only_on(i) for i, c in enumerate(self.components))

    def max_frequency(self):
        return max(c.max_frequency() for c in self.components)

    def sup_bound(self):
        """Upper bound on max_i sup |beta_i|."""
        return max(c.amplitude_bound() for c in self.components)

    def potential_mismatch(self, resolution=256):
        """Max-norm discrepancy between components and potential derivatives.

        Returns 0.0 when no potential is attached.
        """
        if self.potential is None:
            return 0.0
        grid = periodic_grid(self.dimension, resolution)
        values = self(grid)
        derivs = self.potential.gradient(grid)
        return float(np.max(np.abs(values - derivs))) if values.size else 0.0

    def shift(self, theta):
        pot = self.potential.shift(theta) if self.potential is not None else None
        return OneForm(tuple(c.shift(theta) for c in self.components), potential=pot)

    def to_dict(self):
        data = {"components": [c.to_dict() for c in self.components]}
        if self.potential is not None:
            data["potential"] = self.potential.to_dict()
        return data

    @classmethod
    def from_dict(cls, data):
        comps = tuple(PeriodicScalarField.from_dict(c) for c in data["components"])
        pot = PeriodicScalarField.from_dict(data["potential"]) if "potential" in data else None
        return cls(comps, potential=pot)

    def dumps(self):
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


def eval_one_form(beta, x):
    """Value (beta_1(x), ..., beta_n(x)) at a single torus point."""
    x = torus_point(x, dim=beta.dimension)
    return beta(x)


@dataclass(frozen=True)
class GraphLagrangian:
    """The graph {(x, beta(x))} of a one-form inside T^n x R^n."""

    form: OneForm

    @property
    def dimension(self):
        return self.form.dimension

    @classmethod
    def from_potential(cls, f):
        return cls(OneForm.exact(f))

    @classmethod
    def zero_section(cls, dimension):
        return cls(OneForm.zero(dimension))

    @classmethod
    def flat(cls, y):
        """The flat torus T^n x {y}."""
        return cls(OneForm.constant(y))

    def height(self, x):
        return self.form(x)

    def tangent_data(self, x):
        """(W, U) rows of the tangent frame at x: v_i = (e_i, d beta / d x_i).

        For batched x of shape (..., n) the result has shape (..., n, n).
        """
        x = np.asarray(x, dtype=float)
        jac = self.form.jacobian(x)
        w = np.broadcast_to(np.eye(self.dimension), jac.shape).copy()
        # row i of U is the x_i-derivative of beta, i.e. column i of the Jacobian
        u = np.swapaxes(jac, -1, -2).copy()
        return w, u


# -- grids and quadrature -------------------------------------------------------


def periodic_nodes(count, offset=0.0):
    """Equally spaced angular nodes on [0, 2*pi)."""
    return offset + TWO_PI * np.arange(count) / count


def periodic_grid(dimension, resolution, offset=0.0):
    """Tensor grid on T^n flattened to shape (resolution^n, n)."""
    axes = [periodic_nodes(resolution, offset) for _ in range(dimension)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


class QuadratureRule:
    """Tensor quadrature with per-axis rules.

    Angular axes use the periodic trapezoid rule (spectrally accurate for
    trigonometric integrands); radial axes use Gauss-Legendre on an interval.
    """

    def __init__(self, axes):
        self.axes = []
        for spec in axes:
            kind = spec[0]
            if kind == "periodic":
                _, count = spec
                if count < 1:
                    raise ValueError("periodic axis needs at least one node")
                nodes = periodic_nodes(count)
                weights = np.full(count, TWO_PI / count)
            elif kind == "legendre":
                _, count, lo, hi = spec
                if not hi > lo:
                    raise ValueError("legendre axis needs hi > lo")
                z, w = np.polynomial.legendre.leggauss(count)
                nodes = 0.5 * (hi - lo) * (z + 1.0) + lo
                weights = 0.5 * (hi - lo) * w
            else:
                raise ValueError(f"unknown axis kind {kind!r}")
            if np.any(weights <= 0):
                raise ValueError("quadrature weights must be positive")
            self.axes.append((kind, nodes, weights))

    @classmethod
    def periodic(cls, dimension, resolution):
        return cls([("periodic", resolution)] * dimension)

    def nodes_and_weights(self):
        """Flattened tensor nodes (N, n_axes) and combined weights (N,)."""
        meshes = np.meshgrid(*[nodes for _, nodes, _ in self.axes], indexing="ij")
        wmeshes = np.meshgrid(*[w for _, _, w in self.axes], indexing="ij")
        nodes = np.stack([m.reshape(-1) for m in meshes], axis=-1)
        weights = np.prod(np.stack([w.reshape(-1) for w in wmeshes], axis=-1), axis=-1)
        return nodes, weights


# -- scalar-field extremes and graph volume --------------------------------------


def _newton_refine(f, x0, max_steps=3):
    """Newton steps on grad f from x0; falls back to x0 if ill-conditioned."""
    x = x0
    for _ in range(max_steps):
        g = f.gradient(x)
        h = f.hessian(x)
        try:
            step = np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            return x
        if not np.all(np.isfinite(step)) or np.linalg.norm(step) > 0.5:
            return x
        x = x - step
        if np.linalg.norm(step) < 1e-12:
            break
    return x


def extrema(f, resolution=256):
    """(min, max) of a field over T^n, grid scan plus one Newton refinement."""
    if resolution < 64:
        raise ValueError("resolution must be at least 64 per axis")
    grid = periodic_grid(f.dimension, resolution)
    vals = f(grid)
    i_min, i_max = int(np.argmin(vals)), int(np.argmax(vals))
    lo, hi = vals[i_min], vals[i_max]
    x_min = _newton_refine(f, grid[i_min])
    x_max = _newton_refine(f, grid[i_max])
    return float(min(lo, f(x_min))), float(max(hi, f(x_max)))


def oscillation(f, resolution=256):
    """max f - min f over T^n; the surrogate upper bound for the
    spectral-norm distance between exact graphs."""
    lo, hi = extrema(f, resolution)
    return hi - lo


def sup_norm(f, resolution=256):
    """max |f| over T^n with the same refinement as :func:`oscillation`."""
    lo, hi = extrema(f, resolution)
    return max(abs(lo), abs(hi))


def graph_volume(beta, resolution=1024, tube=None):
    """Surface area of graph(beta) in the flat metric on T^n x R^n.

    vol = integral over T^n of sqrt(det(I + Dbeta(x)^T Dbeta(x))) dx.  With
    ``tube=u`` the integral is restricted to {x : |beta_i(x)| < u for all i},
    i.e. the part of the graph inside the tube U = {|y_i| < u}.
    """
    n = beta.dimension
    resolution = max(int(resolution), 16 * (beta.max_frequency() + 1))
    grid = periodic_grid(n, resolution)
    jac = beta.jacobian(grid)
    gram = np.eye(n) + np.swapaxes(jac, -1, -2) @ jac
    integrand = np.sqrt(np.linalg.det(gram))
    if tube is not None:
        mask = np.all(np.abs(beta(grid)) < tube, axis=-1)
        integrand = integrand * mask
    cell = (TWO_PI / resolution) ** n
    return float(np.sum(integrand) * cell)
