"""n-densities on T^n x R^n and their vertical scaling transforms.

A density assigns a nonnegative value to every n-frame and transforms by
|det A| under linear reparameterization of the frame.  Degenerate frames get
the value 0.  Two families are implemented in closed form:

* the flat metric density  sqrt(det(W W^T + U U^T)),
* torus-invariant densities  sigma(y) * |det W|,

where W and U stack the horizontal and vertical parts of the frame vectors.
The vertical rescalings P_k (u -> u/k, with P_inf dropping u entirely) and
the horizontal coverings F_k (x -> kx) act on densities by pull-back and
push-forward; the identities they satisfy are checked numerically here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import TWO_PI, periodic_nodes, wrap_angle


@dataclass(frozen=True)
class Frame:
    """An n-frame at a base point (x, y) of T^n x R^n.

    Row i of ``horizontal`` / ``vertical`` holds the (w_i, u_i) split of the
    i-th frame vector.  Linearly dependent frames are allowed; densities
    evaluate to zero on them.
    """

    x: np.ndarray
    y: np.ndarray
    horizontal: np.ndarray
    vertical: np.ndarray

    def __post_init__(self):
        n = len(np.atleast_1d(self.x))
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(n))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).reshape(n))
        object.__setattr__(self, "horizontal", np.asarray(self.horizontal, dtype=float).reshape(n, n))
        object.__setattr__(self, "vertical", np.asarray(self.vertical, dtype=float).reshape(n, n))

    @property
    def dimension(self):
        return len(self.x)

    @classmethod
    def graph_frame(cls, lagrangian, x):
        """The tangent frame (e_i, d beta / d x_i) of a graph at x."""
        x = np.asarray(x, dtype=float)
        w, u = lagrangian.tangent_data(x)
        return cls(x, lagrangian.height(x), w, u)

    @classmethod
    def random(cls, dimension, rng, scale=1.0):
        return cls(
            rng.uniform(0.0, TWO_PI, dimension),
            rng.normal(0.0, scale, dimension),
            rng.normal(0.0, scale, (dimension, dimension)),
            rng.normal(0.0, scale, (dimension, dimension)),
        )

    def reparametrized(self, matrix):
        """Frame with vectors v_i' = sum_j A_ij v_j (same base point)."""
        a = np.asarray(matrix, dtype=float)
        return Frame(self.x, self.y, a @ self.horizontal, a @ self.vertical)

    def to_flat(self):
        """Flat array (x, y, W rows, U rows) for test fixtures."""
        return np.concatenate([self.x, self.y, self.horizontal.ravel(), self.vertical.ravel()])

    @classmethod
    def from_flat(cls, data, dimension):
        data = np.asarray(data, dtype=float)
        n = dimension
        if data.shape != (2 * n + 2 * n * n,):
            raise ValueError("flat frame has wrong length")
        return cls(data[:n], data[n:2 * n], data[2 * n:2 * n + n * n], data[2 * n + n * n:])


class LinearReparam:
    """An n x n matrix acting on the span of a frame."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)

    @property
    def det(self):
        return float(np.linalg.det(self.matrix))

    def __call__(self, frame):
        return frame.reparametrized(self.matrix)


class Density:
    """Base class: an evaluator Frame -> nonnegative real, with a tag."""

    tag = "abstract"

    def __call__(self, frame):
        raise NotImplementedError

    def pullback_vertical_scaling(self, k):
        """P_k^* of this density: evaluate on (w, u/k); k = inf drops u."""
        return pullback_Pk(self, k)


class MetricDensity(Density):
    """Flat metric density sqrt(det(W W^T + U U^T))."""

    tag = "metric"

    def __call__(self, frame):
        w, u = frame.horizontal, frame.vertical
        gram = w @ w.T + u @ u.T
        det = np.linalg.det(gram)
        return float(np.sqrt(max(det, 0.0)))

    def batch(self, x, y, w, u):
        gram = w @ np.swapaxes(w, -1, -2) + u @ np.swapaxes(u, -1, -2)
        return np.sqrt(np.maximum(np.linalg.det(gram), 0.0))


class InvariantDensity(Density):
    """Torus-invariant density sigma(y) * |det W|.

    The profile sigma must be defined on all of R^n (zero outside its
    support) and the value vanishes whenever the horizontal parts are
    linearly dependent.
    """

    tag = "invariant-profile"

    def __init__(self, profile):
        self.profile = profile

    def __call__(self, frame):
        sig = float(self.profile(frame.y))
        if sig == 0.0:
            return 0.0
        return sig * abs(float(np.linalg.det(frame.horizontal)))

    def batch(self, x, y, w, u):
        sig = np.asarray([float(self.profile(yi)) for yi in y])
        return sig * np.abs(np.linalg.det(w))


class PulledBackDensity(Density):
    """P_k^* d for a base density d: evaluates on vertically rescaled frames."""

    tag = "pulled-back"

    def __init__(self, base, k):
        if not (k == np.inf or (isinstance(k, (int, np.integer)) and k >= 1)):
            raise ValueError("k must be a positive integer or inf")
        self.base = base
        self.k = k

    def __call__(self, frame):
        if self.k == np.inf:
            u = np.zeros_like(frame.vertical)
        else:
            u = frame.vertical / self.k
        return self.base(Frame(frame.x, frame.y, frame.horizontal, u))

    def batch(self, x, y, w, u):
        u = np.zeros_like(u) if self.k == np.inf else u / self.k
        if hasattr(self.base, "batch"):
            return self.base.batch(x, y, w, u)
        return np.asarray([self.base(Frame(x[i], y[i], w[i], u[i])) for i in range(len(y))])


def pullback_Pk(density, k):
    """The density v -> d(P_k v) with P_k(w, u) = (w, u/k), P_inf(w, u) = (w, 0).

    Invariant-profile densities never see the vertical part, so they are
    fixed points of every P_k; the same object is returned.
    """
    if isinstance(density, InvariantDensity):
        return density
    if k == 1:
        return density
    return PulledBackDensity(density, k)


def metric_density_eval(frame):
    return MetricDensity()(frame)


def invariant_density_eval(profile, frame):
    return InvariantDensity(profile)(frame)


def check_homogeneity(density, frame, reparam):
    """Residual |d(A.frame) - |det A| d(frame)| of the defining law."""
    if not isinstance(reparam, LinearReparam):
        reparam = LinearReparam(reparam)
    return abs(density(reparam(frame)) - abs(reparam.det) * density(frame))


# -- horizontal coverings F_k ----------------------------------------------------


def covering_pullback(density, k, dimension):
    """F_k^* d with F_k(x, y) = (kx, y); frames transform by (w, u) -> (kw, u)."""

    k = int(k)

    class _Pulled(Density):
        tag = "covering-pullback"

        def __call__(self, frame):
            return density(Frame(wrap_angle(k * frame.x), frame.y, k * frame.horizontal, frame.vertical))

    return _Pulled()


def covering_pushforward(density, k, dimension):
    """F_k* d: sum over the k^n preimages of the base point, frames by (w/k, u)."""

    k = int(k)
    offsets = np.stack(
        np.meshgrid(*[periodic_nodes(k) for _ in range(dimension)], indexing="ij"),
        axis=-1,
    ).reshape(-1, dimension)

    class _Pushed(Density):
        tag = "covering-pushforward"

        def __call__(self, frame):
            base = wrap_angle(frame.x)
            total = 0.0
            for off in offsets:
                total += density(Frame((base + off) / k, frame.y, frame.horizontal / k, frame.vertical))
            return total

    return _Pushed()


def scaling_lemma_check(profile, k, dimension, rng=None, n_frames=100):
    """Max residual of the covering-scaling identities on random frames.

    For a torus-invariant density d the compositions F_k^* F_k* and
    F_k* F_k^* both multiply d by the covering degree k^n (the number of
    preimages of a point under x -> kx on T^n).  Returns the worst absolute
    residual of both identities over the sampled frames.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    d = InvariantDensity(profile)
    pull_push = covering_pullback(covering_pushforward(d, k, dimension), k, dimension)
    push_pull = covering_pushforward(covering_pullback(d, k, dimension), k, dimension)
    degree = float(k) ** dimension
    worst = 0.0
    for _ in range(n_frames):
        fr = Frame.random(dimension, rng)
        target = degree * d(fr)
        worst = max(worst, abs(pull_push(fr) - target), abs(push_pull(fr) - target))
    return worst


def integrate_density_over_graph(density, beta, resolution=1024):
    """Integral of a density along graph(beta) via the periodic trapezoid rule.

    The frame at x is (e_i, d beta / d x_i) at the point (x, beta(x)).  For
    the metric density this reproduces the graph volume.
    """
    from .fields import GraphLagrangian, periodic_grid

    lag = beta if isinstance(beta, GraphLagrangian) else GraphLagrangian(beta)
    n = lag.dimension
    if n > 1:
        resolution = min(int(resolution), 256)
    resolution = max(int(resolution), 16 * (lag.form.max_frequency() + 1))
    grid = periodic_grid(n, resolution)
    heights = lag.height(grid)
    w_all, u_all = lag.tangent_data(grid)
    cell = (TWO_PI / resolution) ** n
    if hasattr(density, "batch"):
        values = density.batch(grid, heights, w_all, u_all)
    else:
        values = np.asarray(
            [density(Frame(grid[i], heights[i], w_all[i], u_all[i])) for i in range(grid.shape[0])]
        )
    return float(np.sum(values) * cell)
