"""Pointwise extrinsic geometry of graphs z = f(x, y) and vertical surfaces.

Graph quantities take a :class:`DomainPoint` and a :class:`Jet2` (values of
``f`` and its partial derivatives at that point).  Everything is written in
terms of ``s = sqrt(1 + y^2 |grad f|^2)``, so that ``w = s / y^2``.

The unit normal is the upward one (positive E3 component); every sign of
the second fundamental form, the shape operator and the mean curvature
follows from that choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable

import numpy as np
import scipy.linalg

from .ambient import (
    DomainPoint,
    FrameVector,
    covariant_derivative_along,
    fd_step,
    inner,
)
from .errors import DomainViolation

GAUSS_RANK_TAU = 1e-6
# below this the Gauss map differential is treated as identically zero
GAUSS_RANK_ABS = 1e-9
MIN_RANK_SAMPLES = 25


@dataclass(frozen=True)
class Jet2:
    f: float
    fx: float
    fy: float
    fxx: float
    fxy: float
    fyy: float

    def as_tuple(self):
        return tuple(getattr(self, fl.name) for fl in fields(self))


@dataclass(frozen=True)
class Jet3(Jet2):
    fxxx: float
    fxxy: float
    fxyy: float
    fyyy: float

    def jet2(self) -> Jet2:
        return Jet2(self.f, self.fx, self.fy, self.fxx, self.fxy, self.fyy)


JetFunction = Callable[[float, float], Jet2]


def as_jet_function(field) -> JetFunction:
    """Accept a catalog spec (anything with ``.jet``) or a plain callable."""
    if hasattr(field, "jet"):
        return field.jet
    if callable(field):
        return field
    raise TypeError(f"cannot evaluate jets of {field!r}")


def _s(p: DomainPoint, j: Jet2):
    return np.sqrt(1.0 + p.y ** 2 * (j.fx ** 2 + j.fy ** 2))


def w_factor(p: DomainPoint, j: Jet2):
    return _s(p, j) / p.y ** 2


def first_forms(p: DomainPoint, j: Jet2):
    inv = 1.0 / p.y ** 2
    return j.fx ** 2 + inv, j.fx * j.fy, j.fy ** 2 + inv


def unit_normal(p: DomainPoint, j: Jet2) -> FrameVector:
    s = _s(p, j)
    y = p.y
    # -f_x/(w y) = -y f_x / s etc.
    return FrameVector(-y * j.fx / s, -y * j.fy / s, 1.0 / s)


gauss_map = unit_normal


def second_forms(p: DomainPoint, j: Jet2):
    y = p.y
    d = w_factor(p, j) * y ** 3
    return (y * j.fxx - j.fy) / d, (y * j.fxy + j.fx) / d, (y * j.fyy + j.fy) / d


def mean_curvature(p: DomainPoint, j: Jet2):
    E, F, G = first_forms(p, j)
    L, M, N = second_forms(p, j)
    return (G * L - 2.0 * F * M + E * N) / (2.0 * (E * G - F ** 2))


def minimal_residual(p: DomainPoint, j: Jet2):
    """Left-hand side of the minimal surfaces equation.

    Equals ``2 H w^3 y^4``, so it vanishes exactly where H does and carries
    the sign of H.
    """
    y = p.y
    fx, fy = j.fx, j.fy
    return (
        (1.0 + y ** 2 * fy ** 2) * j.fxx
        - y * (fx ** 2 + fy ** 2) * fy
        - 2.0 * y ** 2 * fx * fy * j.fxy
        + (1.0 + y ** 2 * fx ** 2) * j.fyy
    )


def totally_geodesic_residual(p: DomainPoint, j: Jet2):
    y = p.y
    return np.maximum.reduce(
        [
            np.abs(j.fxx - j.fy / y),
            np.abs(j.fyy + j.fy / y),
            np.abs(j.fxy + j.fx / y),
        ]
    )


@dataclass(frozen=True)
class SurfaceData:
    E: float
    F: float
    G: float
    L: float
    M: float
    N: float
    w: float
    normal: FrameVector

    def check(self, tol: float = 1e-12) -> None:
        """Raise ``AssertionError`` if an invariant of the forms is violated."""
        det = self.E * self.G - self.F ** 2
        assert np.all(self.E > 0) and np.all(self.G > 0) and np.all(det > 0)
        assert np.all(self.w > 0)
        assert np.all(np.abs(det - self.w ** 2) <= tol * self.w ** 2)
        assert np.all(np.abs(self.normal.norm() - 1.0) <= tol)

    def as_dict(self) -> dict:
        n = self.normal
        return {
            "E": self.E, "F": self.F, "G": self.G,
            "L": self.L, "M": self.M, "N": self.N,
            "w": self.w,
            "xi1": n.c1, "xi2": n.c2, "xi3": n.c3,
        }


def surface_data(p: DomainPoint, j: Jet2) -> SurfaceData:
    E, F, G = first_forms(p, j)
    L, M, N = second_forms(p, j)
    return SurfaceData(E, F, G, L, M, N, w_factor(p, j), unit_normal(p, j))


# ---------------------------------------------------------------------------
# shape operator


@dataclass(frozen=True)
class ShapeOperator:
    """Matrix of the shape operator in the basis {phi_x, phi_y}.

    Column ``k`` holds the coordinates of ``A(phi_k)``.  ``metric`` is the
    induced metric (E, F, G) at the same point, needed for the real
    eigenvalue problem.
    """

    a11: float
    a12: float
    a21: float
    a22: float
    metric: tuple[float, float, float] | None = None
    error_estimate: float = 0.0

    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]], dtype=float)

    def metric_matrix(self) -> np.ndarray:
        E, F, G = self.metric
        return np.array([[E, F], [F, G]], dtype=float)

    def lowered(self) -> np.ndarray:
        """h A, which is the second fundamental form matrix."""
        return self.metric_matrix() @ self.matrix()

    def symmetry_defect(self) -> float:
        ha = self.lowered()
        return abs(ha[0, 1] - ha[1, 0])

    def principal_curvatures(self) -> np.ndarray:
        """Eigenvalues in ascending order (real by self-adjointness)."""
        if self.metric is None:
            return np.sort(np.linalg.eigvals(self.matrix()).real)
        ha = self.lowered()
        ha = 0.5 * (ha + ha.T)
        return scipy.linalg.eigh(ha, self.metric_matrix(), eigvals_only=True)

    def mean_curvature(self) -> float:
        return 0.5 * (self.a11 + self.a22)


def _ratio_partials(p: DomainPoint, j: Jet2, k: int, which: str):
    """x- and y-derivatives of ``y^k f_i / s`` (i = x or y).

    ``f_x / w = y^2 f_x / s`` and ``f_x / (y w) = y f_x / s``; the shape
    operator entries are built from these ratios.
    """
    y = p.y
    s = _s(p, j)
    grad2 = j.fx ** 2 + j.fy ** 2
    s_x = y ** 2 * (j.fx * j.fxx + j.fy * j.fxy) / s
    s_y = (y * grad2 + y ** 2 * (j.fx * j.fxy + j.fy * j.fyy)) / s
    if which == "x":
        fi, fix, fiy = j.fx, j.fxx, j.fxy
    else:
        fi, fix, fiy = j.fy, j.fxy, j.fyy
    yk = y ** k
    d_x = yk * (fix * s - fi * s_x) / s ** 2
    d_y = (k * y ** (k - 1) * fi + yk * fiy) / s - yk * fi * s_y / s ** 2
    return d_x, d_y


def _ratio_value(p: DomainPoint, j: Jet2, k: int, which: str):
    fi = j.fx if which == "x" else j.fy
    return p.y ** k * fi / _s(p, j)


def _shape_entries(y, fxw_x, fyw_x, fyw_y, fxyw_y, fyyw_y, fy_yw, fx_yw):
    a11 = fxw_x - fy_yw
    a12 = y * fxyw_y
    a21 = fyw_x + fx_yw
    a22 = y * fyyw_y
    return a11, a12, a21, a22


def shape_operator(p: DomainPoint, j: Jet2) -> ShapeOperator:
    """Exact shape operator from a second-order jet."""
    fxw_x, _ = _ratio_partials(p, j, 2, "x")
    fyw_x, fyw_y = _ratio_partials(p, j, 2, "y")
    _, fxyw_y = _ratio_partials(p, j, 1, "x")
    _, fyyw_y = _ratio_partials(p, j, 1, "y")
    entries = _shape_entries(
        p.y, fxw_x, fyw_x, fyw_y, fxyw_y, fyyw_y,
        _ratio_value(p, j, 1, "y"), _ratio_value(p, j, 1, "x"),
    )
    return ShapeOperator(*entries, metric=first_forms(p, j))


def _ratio_partials_fd(jet_fn: JetFunction, p: DomainPoint, h: float):
    x, y = float(p.x), float(p.y)

    def ratios(xx, yy):
        q = DomainPoint(xx, yy)
        jj = jet_fn(xx, yy)
        return np.array([_ratio_value(q, jj, k, w) for k, w in ((2, "x"), (2, "y"), (1, "x"), (1, "y"))])

    dx = (ratios(x + h, y) - ratios(x - h, y)) / (2 * h)
    dy = (ratios(x, y + h) - ratios(x, y - h)) / (2 * h)
    return dx, dy


def shape_operator_fd(jet_fn, p: DomainPoint, h: float | None = None) -> ShapeOperator:
    """Shape operator with the ratio derivatives taken by central differences.

    Only values and first derivatives of ``f`` enter the differenced ratios,
    so this route is independent of the analytic second-derivative formulas
    used by :func:`shape_operator`.  ``error_estimate`` is a Richardson
    estimate from steps ``h`` and ``2h``.
    """
    jet_fn = as_jet_function(jet_fn)
    if h is None:
        h = float(fd_step(max(abs(float(p.x)), float(p.y)), 1e-4))
    if float(p.y) - 2 * h <= 0:
        raise DomainViolation("finite-difference stencil leaves the half-plane")
    j = jet_fn(float(p.x), float(p.y))

    def build(step):
        dx, dy = _ratio_partials_fd(jet_fn, p, step)
        return np.array(
            _shape_entries(
                float(p.y), dx[0], dx[1], dy[1], dy[2], dy[3],
                _ratio_value(p, j, 1, "y"), _ratio_value(p, j, 1, "x"),
            )
        )

    fine = build(h)
    coarse = build(2 * h)
    err = float(np.max(np.abs(fine - coarse)) / 3.0)
    return ShapeOperator(*fine, metric=first_forms(p, j), error_estimate=err)


def umbilicity_residual(p: DomainPoint, j: Jet2):
    """Max defect of the three umbilicity equations (unscaled).

    The equations are ``(f_x/(w y))_y = 0``, ``(f_y/w)_x + f_x/(w y) = 0``
    and ``(f_x/w)_x - (f_y/w)_y = 0``.
    """
    fxw_x, _ = _ratio_partials(p, j, 2, "x")
    fyw_x, fyw_y = _ratio_partials(p, j, 2, "y")
    _, fxyw_y = _ratio_partials(p, j, 1, "x")
    return np.maximum.reduce(
        [
            np.abs(fxyw_y),
            np.abs(fyw_x + _ratio_value(p, j, 1, "x")),
            np.abs(fxw_x - fyw_y),
        ]
    )


def umbilical_lambda(p: DomainPoint, c1, c2, c3):
    """Umbilicity factor lambda(x, y) of the umbilical graph family."""
    return (0.5 * c1 * (p.x ** 2 + p.y ** 2) + c2 * p.x - c3) / p.y


def umbilical_j(c1, c2, c3):
    return 1.0 - c2 ** 2 - 2.0 * c1 * c3


def codazzi_identity_residual(p: DomainPoint, j: Jet2, c1, c2, c3):
    """``|y^2 w - 1 / sqrt(jconst - lambda^2)|`` for an umbilical graph."""
    jc = umbilical_j(c1, c2, c3)
    lam = umbilical_lambda(p, c1, c2, c3)
    gap = jc - lam ** 2
    if np.any(gap <= 0.0):
        raise DomainViolation(f"j - lambda^2 = {np.min(gap)!r} <= 0: outside the umbilical graph")
    return np.abs(p.y ** 2 * w_factor(p, j) - 1.0 / np.sqrt(gap))


def codazzi_system_residual(p: DomainPoint, j: Jet2, c1, c2, c3):
    """Defect of ``lambda_x = f_x/(w y^2)``, ``lambda_y = f_y/(w y^2)``."""
    x, y = p.x, p.y
    lam_x = (c1 * x + c2) / y
    lam_y = -(0.5 * c1 * x ** 2 + c2 * x - c3) / y ** 2 + 0.5 * c1
    wy2 = w_factor(p, j) * y ** 2
    return np.maximum(np.abs(lam_x - j.fx / wy2), np.abs(lam_y - j.fy / wy2))


def mean_curvature_flux_fd(jet_fn, p: DomainPoint, h: float | None = None):
    """Mean curvature from the divergence form, by central differences.

    ``H = (y^2 / 2) div(grad f / sqrt(1 + y^2 |grad f|^2))`` with the flux
    built from first derivatives only.
    """
    jet_fn = as_jet_function(jet_fn)
    x, y = float(p.x), float(p.y)
    if h is None:
        h = float(fd_step(max(abs(x), y)))

    def flux(xx, yy):
        jj = jet_fn(xx, yy)
        s = math.sqrt(1.0 + yy ** 2 * (jj.fx ** 2 + jj.fy ** 2))
        return jj.fx / s, jj.fy / s

    div = (flux(x + h, y)[0] - flux(x - h, y)[0]) / (2 * h) + (
        flux(x, y + h)[1] - flux(x, y - h)[1]
    ) / (2 * h)
    return 0.5 * y ** 2 * div


# ---------------------------------------------------------------------------
# Gauss map


def gauss_jacobian_fd(jet_fn, p: DomainPoint) -> np.ndarray:
    """3x2 Jacobian of (x, y) -> xi(x, y) in frame components."""
    jet_fn = as_jet_function(jet_fn)
    x, y = float(p.x), float(p.y)
    hx = float(fd_step(x))
    hy = min(float(fd_step(y)), 0.5 * y)

    def xi(xx, yy):
        return unit_normal(DomainPoint(xx, yy), jet_fn(xx, yy)).as_array()

    jac = np.empty((3, 2))
    jac[:, 0] = (xi(x + hx, y) - xi(x - hx, y)) / (2 * hx)
    jac[:, 1] = (xi(x, y + hy) - xi(x, y - hy)) / (2 * hy)
    return jac


def jacobian_rank(jac, tau: float = GAUSS_RANK_TAU, abs_tol: float = GAUSS_RANK_ABS) -> int:
    sv = np.linalg.svd(jac, compute_uv=False)
    if sv[0] <= abs_tol:
        return 0
    return int(np.sum(sv > tau * sv[0]))


def interior_samples(region, samples: int = MIN_RANK_SAMPLES):
    """Interior grid of at least ``samples`` points of a rectangle (x0, x1, y0, y1)."""
    x0, x1, y0, y1 = map(float, region)
    if not (x1 > x0 and y1 > y0 and y0 > 0):
        raise DomainViolation(f"invalid region {region!r}")
    n = max(2, math.ceil(math.sqrt(samples)))
    xs = x0 + (x1 - x0) * (np.arange(n) + 0.5) / n
    ys = y0 + (y1 - y0) * (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(xs, ys)
    return np.column_stack([X.ravel(), Y.ravel()])


def gauss_rank(field, region, samples: int = MIN_RANK_SAMPLES, tau: float = GAUSS_RANK_TAU,
               points=None) -> int:
    """Rank of the differential of the Gauss map, maximised over samples.

    A singular value of the finite-difference Jacobian counts when it
    exceeds ``tau`` times the largest one.  ``points`` overrides the
    default interior sample grid and must lie inside ``region``.
    """
    jet_fn = as_jet_function(field)
    x0, x1, y0, y1 = map(float, region)
    pts = interior_samples(region, samples) if points is None else np.asarray(points, float)
    if len(pts) < MIN_RANK_SAMPLES:
        raise ValueError(f"gauss_rank needs at least {MIN_RANK_SAMPLES} samples")
    inside = (pts[:, 0] >= x0) & (pts[:, 0] <= x1) & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
    if not np.all(inside):
        raise DomainViolation("gauss_rank sample outside the region")
    admissible = getattr(field, "check_domain", None)
    rank = 0
    for x, y in pts:
        p = DomainPoint(x, y)
        if admissible is not None:
            admissible(p)
        rank = max(rank, jacobian_rank(gauss_jacobian_fd(jet_fn, p), tau))
    return rank


PCA_PATCH = 1e-4
PCA_TAU = 1e-2


def local_pca_ratios(field, p: DomainPoint, patch: float = PCA_PATCH) -> np.ndarray:
    """Singular values (descending, normalised by the largest) of Gauss-map samples
    on a 5x5 parameter patch of half-width ``patch`` around ``p``.

    Returns zeros when the samples coincide.
    """
    jet_fn = as_jet_function(field)
    x, y = float(p.x), float(p.y)
    off = np.linspace(-patch, patch, 5)
    X, Y = np.meshgrid(x + off, y + off * min(1.0, y))
    xi = unit_normal(DomainPoint(X.ravel(), Y.ravel()), jet_fn(X.ravel(), Y.ravel())).as_array()
    xi = xi - xi.mean(axis=0)
    sv = np.linalg.svd(xi, compute_uv=False)
    if sv[0] <= GAUSS_RANK_ABS * patch:
        return np.zeros_like(sv)
    return sv / sv[0]


def gauss_pca_rank(field, region, samples: int = MIN_RANK_SAMPLES, tau: float = PCA_TAU,
                   patch: float = PCA_PATCH) -> int:
    """Dimension of the Gauss image estimated by local PCA, maximised over samples."""
    admissible = getattr(field, "check_domain", None)
    rank = 0
    for x, y in interior_samples(region, samples):
        p = DomainPoint(x, y)
        if admissible is not None:
            admissible(p)
        r = local_pca_ratios(field, p, patch)
        rank = max(rank, int(np.sum(r > tau)))
    return rank


# ---------------------------------------------------------------------------
# vertical surfaces


@dataclass(frozen=True)
class VerticalProfile:
    """Profile a(u) of the vertical surface (u, a(u), v) with its derivatives."""

    a: float
    ap: float
    app: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainViolation(f"vertical profile needs a > 0, got {self.a!r}")


@dataclass(frozen=True)
class VerticalSurfaceData:
    E: float
    F: float
    G: float
    L: float
    M: float
    N: float
    H: float
    normal: FrameVector


def vertical_surface_data(vp: VerticalProfile, u: float) -> VerticalSurfaceData:
    a, ap, app = vp.a, vp.ap, vp.app
    p = DomainPoint(u, a)
    root = math.sqrt(1.0 + ap ** 2)
    xi = FrameVector(ap / root, -1.0 / root, 0.0)
    # d/du of the normal's frame components
    dxi = FrameVector(app / root ** 3, ap * app / root ** 3, 0.0)
    Xu = FrameVector(1.0 / a, ap / a, 0.0)
    Xv = FrameVector(0.0, 0.0, 1.0)
    zero = FrameVector(0.0, 0.0, 0.0)
    nabla_u = covariant_derivative_along(xi, dxi, Xu, p)
    nabla_v = covariant_derivative_along(xi, zero, Xv, p)
    L = -float(inner(nabla_u, Xu))
    M = -float(inner(nabla_u, Xv))
    N = -float(inner(nabla_v, Xv))
    E = float(inner(Xu, Xu))
    F = float(inner(Xu, Xv))
    G = float(inner(Xv, Xv))
    H = (G * L - 2.0 * F * M + E * N) / (2.0 * (E * G - F ** 2))
    return VerticalSurfaceData(E, F, G, L, M, N, H, xi)


def vertical_plane_data(u: float, c: float = 0.0) -> VerticalSurfaceData:
    """Forms of the plane x = c, parametrised as (c, u, v) with u > 0."""
    p = DomainPoint(c, u)
    xi = FrameVector(1.0, 0.0, 0.0)
    zero = FrameVector(0.0, 0.0, 0.0)
    Xu = FrameVector(0.0, 1.0 / u, 0.0)
    Xv = FrameVector(0.0, 0.0, 1.0)
    nabla_u = covariant_derivative_along(xi, zero, Xu, p)
    nabla_v = covariant_derivative_along(xi, zero, Xv, p)
    L = -float(inner(nabla_u, Xu))
    M = -float(inner(nabla_u, Xv))
    N = -float(inner(nabla_v, Xv))
    E, F, G = float(inner(Xu, Xu)), 0.0, 1.0
    H = (G * L + E * N) / (2.0 * E * G)
    return VerticalSurfaceData(E, F, G, L, M, N, H, xi)


def profile_ode_residual(vp: VerticalProfile) -> float:
    """a a'' + a'^2 + 1, zero exactly on geodesic profiles."""
    return vp.a * vp.app + vp.ap ** 2 + 1.0
