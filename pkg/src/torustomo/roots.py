"""Root counting for trigonometric equations on the circle and the 2-torus.

The scalar path counts zeros of a smooth 2*pi-periodic function by sign
changes on a fine grid, refines every bracketed root by bisection, and guards
against tangencies and root pairs hiding between grid nodes by also locating
the critical points of the function.  The batched path (used inside tensor
quadratures, where only counts matter) skips per-root refinement.

Grids carry a fixed irrational-ish offset so that structured problems (roots
at 0, pi/2, ...) never place a zero exactly on a node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .fields import TWO_PI

GRID_OFFSET_FRACTION = 0.381966011250105  # 2 - golden ratio

#: Jacobian threshold below which a root counts as a tangency.
TANGENT_JACOBIAN_TOL = 1e-8


class Tangent:
    """Sentinel returned by intersection counting at non-transverse parameters."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TANGENT"

    def __bool__(self):
        return False


TANGENT = Tangent()


def offset_grid(resolution):
    """Uniform periodic grid with the standard off-node offset."""
    h = TWO_PI / resolution
    return GRID_OFFSET_FRACTION * h + h * np.arange(resolution)


def bisect_many(f, lo, hi, iters=52):
    """Vectorized bisection on brackets [lo_i, hi_i]; f maps arrays to arrays.

    Assumes a sign change on each bracket (f(lo) and f(hi) of opposite sign,
    zeros treated as positive).
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        same = (fmid >= 0.0) == (flo >= 0.0)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fmid, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


@dataclass
class RootCount:
    """Result of a guarded periodic root count."""

    count: int
    tangent: bool
    roots: np.ndarray = field(default_factory=lambda: np.empty(0))
    min_jacobian: float = np.inf


def guarded_periodic_count(f, fprime, resolution, tangent_tol=TANGENT_JACOBIAN_TOL):
    """Count zeros of f on [0, 2*pi) with tangency detection.

    f and fprime must be vectorized callables.  The resolution must resolve
    the oscillation of f (use >= 24 nodes per unit frequency).  Returns a
    RootCount whose ``tangent`` flag is set when any root (or near-root at a
    critical point) has |f'| below ``tangent_tol``.
    """
    x = offset_grid(resolution)
    h = TWO_PI / resolution
    v = f(x)
    pos = v >= 0.0
    flips = np.nonzero(pos != np.roll(pos, -1))[0]
    roots = bisect_many(f, x[flips], x[flips] + h) if len(flips) else np.empty(0)

    # critical points guard missed pairs: between consecutive critical points
    # f is monotone, so a same-sign cell can hide zeros only around a
    # critical point that dips across zero inside the cell.
    dv = fprime(x)
    dpos = dv >= 0.0
    dflips = np.nonzero(dpos != np.roll(dpos, -1))[0]
    crits = bisect_many(fprime, x[dflips], x[dflips] + h) if len(dflips) else np.empty(0)

    tangent = False
    extra = []
    if len(crits):
        fc = f(crits)
        vmag = max(1.0, float(np.max(np.abs(v))))
        for xc, fxc in zip(crits, fc):
            if abs(fxc) < tangent_tol * vmag:
                tangent = True
                continue
            cell = int(np.floor((xc - x[0]) / h)) % resolution
            if cell in flips:
                continue
            if (fxc >= 0.0) != pos[cell]:
                # two crossings hidden inside the cell
                a = x[cell]
                extra.extend(bisect_many(f, [a, xc], [xc, a + h]))
    if extra:
        roots = np.concatenate([roots, np.asarray(extra)])

    min_jac = np.inf
    if len(roots):
        jac = np.abs(fprime(roots))
        min_jac = float(np.min(jac))
        if min_jac < tangent_tol:
            tangent = True
    return RootCount(count=len(roots), tangent=tangent, roots=np.sort(roots) if len(roots) else roots,
                     min_jacobian=min_jac)


def sign_change_count_rows(values):
    """Batched cyclic sign-change counts (delegates to the active kernel)."""
    values = np.atleast_2d(values)
    return _kernels.sign_change_counts(values)


def locate_count_jump(count_fn, lo, hi, iters=42):
    """Bisect the parameter where an integer-valued count function changes.

    ``count_fn`` maps a scalar parameter to an int; the counts at lo and hi
    must differ.  Returns the midpoint of the final bracket.
    """
    c_lo = count_fn(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if count_fn(mid) == c_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- two-dimensional common zeros -------------------------------------------------


def _bilinear_coeffs(c00, c10, c01, c11):
    """Coefficients (a, b, c, d) of a + b s + c t + d s t on the unit cell."""
    return c00, c10 - c00, c01 - c00, c11 - c10 - c01 + c00


def _cell_seeds(p, q, margin=0.125):
    """Seed points (s, t) where the bilinear zero curves of p and q intersect."""
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    q2 = b2 * d1 - d2 * b1
    q1 = a2 * d1 + b2 * c1 - c2 * b1 - d2 * a1
    q0 = a2 * c1 - c2 * a1
    if abs(q2) <= 1e-13 * (abs(q1) + abs(q0) + abs(q2)):
        ss = [-q0 / q1] if abs(q1) > 1e-300 else []
    else:
        disc = q1 * q1 - 4.0 * q2 * q0
        if disc < 0.0:
            return []
        r = np.sqrt(disc)
        # stable quadratic: avoid cancellation between -q1 and r
        qq = -0.5 * (q1 + np.copysign(r, q1))
        ss = [qq / q2]
        if qq != 0.0:
            ss.append(q0 / qq)
    seeds = []
    for s in ss:
        if not (-margin <= s <= 1.0 + margin):
            continue
        den1 = c1 + d1 * s
        den2 = c2 + d2 * s
        if abs(den1) >= abs(den2):
            if abs(den1) < 1e-300:
                continue
            t = -(a1 + b1 * s) / den1
        else:
            t = -(a2 + b2 * s) / den2
        if -margin <= t <= 1.0 + margin:
            seeds.append((s, t))
    return seeds


def count_common_zeros_2d(g1, g2, jacobian, resolution=512, tangent_tol=TANGENT_JACOBIAN_TOL,
                          newton_iters=40):
    """Count solutions of g1 = g2 = 0 on the 2-torus.

    Both maps must be vectorized callables on points of shape (..., 2), and
    ``jacobian`` must return the stacked gradients (..., 2, 2) with row i the
    gradient of g_i.  Per grid cell the bilinear interpolants of g1 and g2
    provide intersection seeds of their zero curves, which a Newton iteration
    on the exact maps then polishes; duplicates are merged modulo 2*pi.

    Returns a RootCount; ``roots`` holds the solution points (m, 2).
    """
    h = TWO_PI / resolution
    ax = offset_grid(resolution)
    gx, gy = np.meshgrid(ax, ax, indexing="ij")
    pts = np.stack([gx, gy], axis=-1)
    v1 = g1(pts)
    v2 = g2(pts)

    def corners(v):
        return v, np.roll(v, -1, axis=0), np.roll(v, -1, axis=1), np.roll(np.roll(v, -1, axis=0), -1, axis=1)

    a1, b1c, c1c, d1c = corners(v1)
    a2, b2c, c2c, d2c = corners(v2)

    def mixed(v00, v10, v01, v11):
        mn = np.minimum(np.minimum(v00, v10), np.minimum(v01, v11))
        mx = np.maximum(np.maximum(v00, v10), np.maximum(v01, v11))
        return (mn <= 0.0) & (mx >= 0.0)

    cand = mixed(a1, b1c, c1c, d1c) & mixed(a2, b2c, c2c, d2c)
    cells = np.argwhere(cand)

    found = []
    tangent = False
    min_jac = np.inf
    for i, j in cells:
        p = _bilinear_coeffs(a1[i, j], b1c[i, j], c1c[i, j], d1c[i, j])
        q = _bilinear_coeffs(a2[i, j], b2c[i, j], c2c[i, j], d2c[i, j])
        for s, t in _cell_seeds(p, q):
            z = np.array([ax[i] + s * h, ax[j] + t * h])
            ok = False
            for _ in range(newton_iters):
                fv = np.array([float(g1(z)), float(g2(z))])
                if np.max(np.abs(fv)) < 1e-12:
                    ok = True
                    break
                jm = jacobian(z)
                try:
                    step = np.linalg.solve(jm, fv)
                except np.linalg.LinAlgError:
                    break
                if not np.all(np.isfinite(step)) or np.max(np.abs(step)) > 2.0 * h:
                    step = np.clip(step, -2.0 * h, 2.0 * h)
                z = z - step
            if not ok:
                continue
            z = np.mod(z, TWO_PI)
            dj = abs(float(np.linalg.det(jacobian(z))))
            found.append((z, dj))

    # deduplicate modulo 2*pi
    unique = []
    tol = 1e-6
    for z, dj in found:
        dup = False
        for zu, _ in unique:
            d = np.abs(z - zu)
            d = np.minimum(d, TWO_PI - d)
            if np.max(d) < tol:
                dup = True
                break
        if not dup:
            unique.append((z, dj))
    if unique:
        min_jac = min(dj for _, dj in unique)
        scale = max(1.0, float(np.max(np.abs(v1))), float(np.max(np.abs(v2))))
        if min_jac < tangent_tol * scale:
            tangent = True
    pts_out = np.array([z for z, _ in unique]) if unique else np.empty((0, 2))
    return RootCount(count=len(unique), tangent=tangent, roots=pts_out, min_jacobian=min_jac)
