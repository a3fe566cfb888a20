"""Exact differential geometry of the constant-curvature model surfaces.

Three charts are supported:

* ``euclidean-cartesian`` -- the flat plane, K = 0.
* ``poincare-disk``       -- the conformal disk model, K < 0.  The chart is
  the open unit disk with metric ``(2 / (sqrt(|K|) (1 - |x|^2)))^2`` times
  the identity, so all chart coordinates stay in (-1, 1).
* ``sphere-polar``        -- geodesic polar (azimuthal equidistant)
  coordinates about a pole, K > 0.  A chart point x represents the point at
  intrinsic distance |x| from the pole in direction x/|x|; the chart
  excludes the antipode (|x| < pi/sqrt(K)).

Geodesics and distances in the curved charts are computed through the round
sphere / Minkowski hyperboloid embeddings, which are exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

CHARTS = ("euclidean-cartesian", "poincare-disk", "sphere-polar")


class ChartDomainError(ValueError):
    """A point lies outside the valid region of the chart."""


class FocalDistanceError(ValueError):
    """Parallel-surface data requested at or beyond the focal distance."""

    def __init__(self, message, focal_distance=None):
        super().__init__(message)
        self.focal_distance = focal_distance


@dataclass(frozen=True)
class ManifoldModel:
    """Constant-curvature ambient surface: curvature, dimension, chart."""

    curvature: float
    dim: int = 2
    chart: str = "euclidean-cartesian"

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dimension must be >= 2, got {self.dim}")
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}")
        K = self.curvature
        if self.chart == "euclidean-cartesian" and K != 0.0:
            raise ValueError("euclidean-cartesian chart requires K = 0")
        if self.chart == "poincare-disk" and K >= 0.0:
            raise ValueError("poincare-disk chart requires K < 0")
        if self.chart == "sphere-polar" and K <= 0.0:
            raise ValueError("sphere-polar chart requires K > 0")

    @property
    def sphere_radius(self):
        """Embedding radius 1/sqrt(|K|); inf for the flat chart."""
        if self.curvature == 0.0:
            return np.inf
        return 1.0 / np.sqrt(abs(self.curvature))

    @property
    def chart_rho_max(self):
        """Largest admissible distance-from-origin in the chart."""
        if self.chart == "sphere-polar":
            return np.pi * self.sphere_radius
        return np.inf

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.sum(x * x, axis=-1))
        if self.chart == "poincare-disk":
            if np.any(r >= 1.0):
                raise ChartDomainError("point outside the open unit disk")
        elif self.chart == "sphere-polar":
            if np.any(r >= self.chart_rho_max):
                raise ChartDomainError(
                    "point at or beyond the antipode (|x| >= pi/sqrt(K))")
        return x


@dataclass(frozen=True)
class MetricData:
    """Metric tensor, its inverse and sqrt(det) at a single chart point."""

    sigma: np.ndarray
    sigma_inv: np.ndarray
    sqrt_det: float


# -- warping functions -------------------------------------------------------
#
# sn_K(r) = sin(sqrt(K) r)/sqrt(K)        K > 0
#         = r                             K = 0
#         = sinh(sqrt(-K) r)/sqrt(-K)     K < 0
# ct_K(r) = sn_K'(r)/sn_K(r), the Jacobi-field logarithmic derivative.


def sn_K(K, r):
    r = np.asarray(r, dtype=float)
    if K > 0.0:
        m = np.sqrt(K)
        return np.sin(m * r) / m
    if K < 0.0:
        m = np.sqrt(-K)
        return np.sinh(m * r) / m
    return r.copy() if r.ndim else float(r)


def ct_K(K, r):
    """sqrt(K) cot(sqrt(K) r) / 1/r / sqrt(-K) coth(sqrt(-K) r), stable at K ~ 0."""
    r = np.asarray(r, dtype=float)
    if abs(K) * np.max(r * r, initial=0.0) < 1e-8:
        # series of sn'/sn about K = 0, accurate to O((K r^2)^2) ~ 1e-16
        return 1.0 / r - K * r / 3.0 - K * K * r ** 3 / 45.0
    if K > 0.0:
        m = np.sqrt(K)
        return m / np.tan(m * r)
    m = np.sqrt(-K)
    return m / np.tanh(m * r)


# -- metric and Christoffel symbols ------------------------------------------


def _disk_conformal(model, xs):
    """lambda(x) for the Poincare disk: 2 / (sqrt(|K|) (1 - |x|^2))."""
    r2 = np.sum(xs * xs, axis=-1)
    return 2.0 / (np.sqrt(-model.curvature) * (1.0 - r2))


def _sphere_g(K, r):
    """Tangential metric coefficient sin^2(m r)/(m r)^2 and its derivative."""
    m = np.sqrt(K)
    s = m * r
    small = s < 1e-4
    g = np.empty_like(r)
    gp = np.empty_like(r)
    with np.errstate(invalid="ignore", divide="ignore"):
        g[~small] = np.sin(s[~small]) ** 2 / s[~small] ** 2
        gp[~small] = (2.0 * np.sin(s[~small])
                      * (s[~small] * np.cos(s[~small]) - np.sin(s[~small]))
                      / (m ** 2 * r[~small] ** 3))
    s2 = s[small] ** 2
    g[small] = 1.0 - s2 / 3.0 + 2.0 * s2 ** 2 / 45.0
    gp[small] = m * m * r[small] * (-2.0 / 3.0 + 8.0 * s2 / 45.0)
    return g, gp


def metric_batch(model, xs):
    """Metric sigma, inverse and sqrt(det) at an (m, 2) array of chart points.

    Returns (sigma, sigma_inv, sqrt_det) with shapes (m,2,2), (m,2,2), (m,).
    """
    xs = model.check_point(np.atleast_2d(np.asarray(xs, dtype=float)))
    m = xs.shape[0]
    eye = np.broadcast_to(np.eye(2), (m, 2, 2)).copy()
    if model.chart == "euclidean-cartesian":
        return eye, eye.copy(), np.ones(m)
    if model.chart == "poincare-disk":
        lam2 = _disk_conformal(model, xs) ** 2
        sigma = eye * lam2[:, None, None]
        sigma_inv = eye / lam2[:, None, None]
        return sigma, sigma_inv, lam2
    # sphere-polar: sigma = g (I - P_r) + P_r  with P_r = xhat xhat^T
    r = np.sqrt(np.sum(xs * xs, axis=-1))
    g, _ = _sphere_g(model.curvature, r)
    safe_r = np.where(r > 0.0, r, 1.0)
    xhat = xs / safe_r[:, None]
    P = xhat[:, :, None] * xhat[:, None, :]
    at_origin = r == 0.0
    P[at_origin] = 0.0
    g = np.where(at_origin, 1.0, g)
    sigma = g[:, None, None] * (eye - P) + P
    sigma_inv = (1.0 / g)[:, None, None] * (eye - P) + P
    return sigma, sigma_inv, np.sqrt(g)


def metric_at(model, x):
    """MetricData (sigma, sigma^{-1}, sqrt det sigma) at one chart point."""
    sigma, sigma_inv, sqrt_det = metric_batch(model, np.asarray(x, float)[None, :])
    return MetricData(sigma[0], sigma_inv[0], float(sqrt_det[0]))


def christoffel_batch(model, xs):
    """Christoffel symbols Gamma^k_{ij} at (m, 2) chart points, shape (m,2,2,2).

    Index order is [point, k, i, j]; symmetric in (i, j).
    """
    xs = model.check_point(np.atleast_2d(np.asarray(xs, dtype=float)))
    m = xs.shape[0]
    gamma = np.zeros((m, 2, 2, 2))
    if model.chart == "euclidean-cartesian":
        return gamma
    if model.chart == "poincare-disk":
        # conformal metric e^{2 phi} delta: Gamma^k_ij =
        #   d_j phi delta_ik + d_i phi delta_jk - d_k phi delta_ij
        r2 = np.sum(xs * xs, axis=-1)
        dphi = 2.0 * xs / (1.0 - r2)[:, None]
        eye = np.eye(2)
        gamma = (dphi[:, None, :, None] * eye[None, :, None, :]
                 + dphi[:, None, None, :] * eye[None, :, :, None]
                 - dphi[:, :, None, None] * eye[None, None, :, :])
        return gamma
    # sphere-polar: sigma_ij = g delta_ij + A x_i x_j, A = (1 - g)/r^2
    K = model.curvature
    r = np.sqrt(np.sum(xs * xs, axis=-1))
    g, gp = _sphere_g(K, r)
    small = np.sqrt(K) * r < 1e-4
    with np.errstate(invalid="ignore", divide="ignore"):
        A = (1.0 - g) / r ** 2
        Ap = -gp / r ** 2 - 2.0 * (1.0 - g) / r ** 3
    # series: A = K/3 - 2 K^2 r^2/45, A' = -4 K^2 r / 45
    A[small] = K / 3.0 - 2.0 * K * K * r[small] ** 2 / 45.0
    Ap[small] = -4.0 * K * K * r[small] / 45.0
    safe_r = np.where(r > 0.0, r, 1.0)
    xhat = xs / safe_r[:, None]
    xhat[r == 0.0] = 0.0
    eye = np.eye(2)
    # d_k sigma_ij = g' xhat_k delta_ij + A' xhat_k x_i x_j
    #               + A (delta_ik x_j + delta_jk x_i)
    dsig = (gp[:, None, None, None] * xhat[:, :, None, None] * eye[None, None, :, :]
            + Ap[:, None, None, None] * xhat[:, :, None, None]
            * xs[:, None, :, None] * xs[:, None, None, :]
            + A[:, None, None, None] * (eye[None, :, :, None] * xs[:, None, None, :]
                                        + eye[None, :, None, :] * xs[:, None, :, None]))
    _, sigma_inv, _ = metric_batch(model, xs)
    # Gamma^k_ij = 1/2 sigma^{kl} (d_i sigma_jl + d_j sigma_il - d_l sigma_ij),
    # reading dsig[p, k, i, j] = d_k sigma_ij
    bracket = (dsig                           # d_i sigma_jl as [p, i, j, l]
               + dsig.transpose(0, 2, 1, 3)   # d_j sigma_il
               - dsig.transpose(0, 2, 3, 1))  # d_l sigma_ij
    gamma = 0.5 * np.einsum("pkl,pijl->pkij", sigma_inv, bracket)
    return gamma


def christoffels_at(model, x):
    """Gamma^k_{ij} at one chart point, shape (2, 2, 2), k first."""
    return christoffel_batch(model, np.asarray(x, float)[None, :])[0]


# -- embeddings, distance, exponential map -----------------------------------


def embed(model, xs):
    """Map chart points to the round-sphere / hyperboloid embedding in R^3."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    R = model.sphere_radius
    if model.chart == "poincare-disk":
        r2 = np.sum(xs * xs, axis=-1)
        den = 1.0 - r2
        out = np.empty(xs.shape[:-1] + (3,))
        out[..., :2] = 2.0 * xs / den[..., None]
        out[..., 2] = (1.0 + r2) / den
        return R * out
    if model.chart == "sphere-polar":
        r = np.sqrt(np.sum(xs * xs, axis=-1))
        safe_r = np.where(r > 0.0, r, 1.0)
        xhat = np.where((r > 0.0)[..., None], xs / safe_r[..., None], 0.0)
        out = np.empty(xs.shape[:-1] + (3,))
        out[..., :2] = np.sin(r / R)[..., None] * xhat
        out[..., 2] = np.cos(r / R)
        return R * out
    raise ValueError("embedding defined only for curved charts")


def unembed(model, ps):
    """Inverse of :func:`embed`."""
    ps = np.atleast_2d(np.asarray(ps, dtype=float))
    R = model.sphere_radius
    if model.chart == "poincare-disk":
        return ps[..., :2] / (R + ps[..., 2])[..., None]
    horiz = np.sqrt(np.sum(ps[..., :2] ** 2, axis=-1))
    rho = R * np.arctan2(horiz / R, ps[..., 2] / R)
    safe = np.where(horiz > 0.0, horiz, 1.0)
    return np.where((horiz > 0.0)[..., None],
                    rho[..., None] * ps[..., :2] / safe[..., None],
                    np.zeros_like(ps[..., :2]))


def embed_differential(model, xs, vs):
    """Push chart tangent vectors through the embedding differential."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    R = model.sphere_radius
    if model.chart == "poincare-disk":
        r2 = np.sum(xs * xs, axis=-1)
        xv = np.sum(xs * vs, axis=-1)
        den = 1.0 - r2
        out = np.empty(xs.shape[:-1] + (3,))
        out[..., :2] = 2.0 * vs / den[..., None] \
            + 4.0 * xv[..., None] * xs / den[..., None] ** 2
        out[..., 2] = 2.0 * xv / den + (1.0 + r2) * 2.0 * xv / den ** 2
        # simplify: d/dv[(1+r2)/den] = 2 xv/den + (1+r2) 2 xv / den^2
        return R * out
    if model.chart == "sphere-polar":
        r = np.sqrt(np.sum(xs * xs, axis=-1))
        out = np.empty(xs.shape[:-1] + (3,))
        small = r < 1e-12
        safe_r = np.where(small, 1.0, r)
        xhat = np.where(small[..., None], 0.0, xs / safe_r[..., None])
        rv = np.sum(xhat * vs, axis=-1)
        v_perp = vs - rv[..., None] * xhat
        c, s = np.cos(r / R), np.sin(r / R)
        out[..., :2] = (c * rv)[..., None] * xhat \
            + (R * s / safe_r)[..., None] * v_perp
        out[..., 2] = -s * rv
        if np.any(small):
            out[small, :2] = vs[small]
            out[small, 2] = 0.0
        return out
    raise ValueError("embedding defined only for curved charts")


def distance(model, x, y):
    """Geodesic distance between chart points; broadcasts over (..., 2) arrays."""
    x = model.check_point(np.asarray(x, dtype=float))
    y = model.check_point(np.asarray(y, dtype=float))
    if model.chart == "euclidean-cartesian":
        return np.sqrt(np.sum((x - y) ** 2, axis=-1))
    if model.chart == "poincare-disk":
        # cosh(sqrt(|K|) d) = 1 + 2|x-y|^2 / ((1-|x|^2)(1-|y|^2))
        m = np.sqrt(-model.curvature)
        d2 = np.sum((x - y) ** 2, axis=-1)
        den = (1.0 - np.sum(x * x, axis=-1)) * (1.0 - np.sum(y * y, axis=-1))
        arg = 1.0 + 2.0 * d2 / den
        return np.arccosh(np.maximum(arg, 1.0)) / m
    R = model.sphere_radius
    p, q = embed(model, x), embed(model, y)
    dot = np.sum(p * q, axis=-1) / R ** 2
    broadcast_shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1])
    d = R * np.arccos(np.clip(dot, -1.0, 1.0))
    return d.reshape(broadcast_shape) if d.shape != broadcast_shape else d


def norm_sq(model, xs, vs):
    """Squared metric norm of chart tangent vectors at chart points."""
    sigma, _, _ = metric_batch(model, xs)
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    return np.einsum("pij,pi,pj->p", sigma, vs, vs)


def exp_map(model, xs, vs, ts):
    """Point reached from x by geodesic in direction v after distance t.

    v is a chart tangent vector (any nonzero length; only its direction is
    used).  Vectorized over leading axes of xs/vs/ts.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    xs, vs = np.broadcast_arrays(xs, vs)
    xs = xs.copy()
    nrm = np.sqrt(norm_sq(model, xs, vs))
    if np.any(nrm == 0.0):
        raise ValueError("zero direction vector in exp_map")
    vhat = vs / nrm[:, None]
    if model.chart == "euclidean-cartesian":
        return xs + ts[:, None] * vhat
    R = model.sphere_radius
    P = embed(model, xs)
    V = embed_differential(model, xs, vhat)
    if model.chart == "sphere-polar":
        out = np.cos(ts / R)[:, None] * P + (R * np.sin(ts / R))[:, None] * V
    else:
        # Minkowski metric diag(1, 1, -1); tangent vectors are spacelike
        out = np.cosh(ts / R)[:, None] * P + (R * np.sinh(ts / R))[:, None] * V
    return unembed(model, out)


# -- Laplacians of distance functions ----------------------------------------


def laplacian_rho(model, rho):
    """Laplacian of the distance-from-a-point function at radius rho.

    Equals (n-1) ct_K(rho) on a space form: (n-1)/rho for K = 0,
    (n-1) sqrt(K) cot(sqrt(K) rho) for K > 0, the coth analogue for K < 0.
    """
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(rho_arr <= 0.0):
        raise ValueError("rho must be positive")
    K = model.curvature
    if K > 0.0 and np.any(rho_arr >= np.pi / np.sqrt(K)):
        raise ChartDomainError("rho must be below pi/sqrt(K) for K > 0")
    out = (model.dim - 1) * ct_K(K, rho_arr)
    return float(out) if np.isscalar(rho) or np.ndim(rho) == 0 else out


_RICCATI_BLOWUP = 1e6


def _riccati_solve(K, kappa0, t_end):
    def rhs(_t, y):
        return -y * y - K

    def blowup(_t, y):
        return abs(y[0]) - _RICCATI_BLOWUP

    blowup.terminal = True
    sol = solve_ivp(rhs, (0.0, t_end), [-float(kappa0)], method="RK45",
                    rtol=1e-11, atol=1e-12, events=blowup, dense_output=True)
    return sol


def riccati_laplacian_d(model, kappa0, t):
    """Laplacian of the distance-to-a-curve function along the inward normal.

    Solves lambda' = -lambda^2 - K with lambda(0) = -kappa0, where kappa0 is
    the geodesic curvature of the curve with respect to the inner normal.
    lambda(t) equals the Laplacian of d on the parallel curve at distance t.
    Only the surface case (dim = 2) carries a single Riccati scalar.
    """
    if model.dim != 2:
        raise ValueError("parallel-curve Riccati data is 2-D only")
    t = float(t)
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return -float(kappa0)
    sol = _riccati_solve(model.curvature, kappa0, t)
    if sol.t_events[0].size:
        raise FocalDistanceError(
            f"t = {t} is at or beyond the focal distance "
            f"{sol.t_events[0][0]:.6g} of this boundary data",
            focal_distance=float(sol.t_events[0][0]))
    return float(sol.y[0, -1])


def focal_distance(model, kappa0, t_max):
    """Blow-up time of the parallel-curve Riccati data, or inf if none below t_max."""
    if model.dim != 2:
        raise ValueError("parallel-curve Riccati data is 2-D only")
    sol = _riccati_solve(model.curvature, kappa0, float(t_max))
    if sol.t_events[0].size:
        return float(sol.t_events[0][0])
    return np.inf
