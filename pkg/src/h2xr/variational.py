"""Area functional and harmonicity properties of minimal graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .ambient import DomainPoint, fd_step, geodesic_curvature_graph_curve
from .errors import DomainViolation, LevelCurveDegenerate
from .pde import GridField
from .shape import Jet2, as_jet_function, first_forms, w_factor

DEFAULT_AREA_NODES = 257
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class AreaReport:
    area: float
    quadrature: str
    resolution: tuple[int, int]
    estimated_quadrature_error: float


def _simpson2d(vals, xs, ys) -> float:
    return float(simpson(simpson(vals, x=xs, axis=1), x=ys))


def _area_from_w(w, xs, ys, label) -> AreaReport:
    fine = _simpson2d(w, xs, ys)
    ny, nx = w.shape
    if nx >= 5 and ny >= 5 and nx % 2 == 1 and ny % 2 == 1:
        coarse = _simpson2d(w[::2, ::2], xs[::2], ys[::2])
        err = abs(fine - coarse) / 15.0
    else:
        err = float("nan")
    return AreaReport(fine, label, (nx, ny), err)


def grid_area_element(gf: GridField) -> np.ndarray:
    """w = sqrt(1 + y^2 |grad f|^2) / y^2 at the nodes, second-order gradients."""
    fy, fx = np.gradient(gf.values, gf.ys, gf.xs, edge_order=2)
    Y = gf.ys[:, None]
    return np.sqrt(1.0 + Y ** 2 * (fx ** 2 + fy ** 2)) / Y ** 2


def area(field, region=None, n: int = DEFAULT_AREA_NODES) -> AreaReport:
    """Area of the graph of ``field`` over a rectangle.

    ``field`` is a :class:`GridField` (the rectangle is the grid's own, and
    gradients are differenced) or anything with analytic jets, in which case
    ``region = (x0, x1, y0, y1)`` is sampled with ``n`` nodes per direction.
    The error estimate compares Simpson on the grid and on every other node.
    """
    if isinstance(field, GridField):
        if region is not None and tuple(map(float, region)) != (field.x0, field.x1, field.y0, field.y1):
            raise ValueError("region must match the grid rectangle")
        return _area_from_w(grid_area_element(field), field.xs, field.ys, "simpson-grid")
    if region is None:
        raise ValueError("region required for analytic fields")
    x0, x1, y0, y1 = map(float, region)
    if not y0 > 0:
        raise DomainViolation("region must lie in y > 0")
    jet_fn = as_jet_function(field)
    xs, ys = np.linspace(x0, x1, n), np.linspace(y0, y1, n)
    X, Y = np.meshgrid(xs, ys)
    j = jet_fn(X, Y)
    w = w_factor(DomainPoint(X, Y), j) + np.zeros_like(X)
    return _area_from_w(w, xs, ys, "simpson-analytic")


@dataclass
class ComparisonTable:
    """Areas of ``f + eps b`` relative to ``f`` for one bump."""

    base_area: float
    rows: list[tuple[float, float]] = field(default_factory=list)  # (eps, A(f+eps b) - A(f))
    quadrature_error: float = 0.0

    def difference(self, eps: float) -> float:
        for e, d in self.rows:
            if e == eps:
                return d
        raise KeyError(eps)

    def first_order(self, eps: float) -> float:
        """(A(f+eps b) - A(f-eps b)) / 2: the part odd in eps."""
        return 0.5 * (self.difference(eps) - self.difference(-eps))

    def second_order(self, eps: float) -> float:
        """(A(f+eps b) + A(f-eps b) - 2 A(f)) / 2: the part even in eps."""
        return 0.5 * (self.difference(eps) + self.difference(-eps))


def area_comparison(solution: GridField, bump, epsilons) -> ComparisonTable:
    """Area differences ``A(f + eps b) - A(f)`` for a boundary-vanishing bump.

    ``bump`` is an array on the grid or a vectorised ``b(X, Y)``.
    """
    X, Y = solution.mesh()
    b = np.asarray(bump(X, Y) if callable(bump) else bump, dtype=float)
    if b.shape != solution.values.shape:
        raise ValueError("bump shape does not match the grid")
    if np.max(np.abs(b[solution.boundary_mask])) > BOUNDARY_TOL:
        raise ValueError("bump must vanish on the boundary")
    base = area(solution)
    table = ComparisonTable(base.area, quadrature_error=base.estimated_quadrature_error)
    for eps in epsilons:
        eps = float(eps)
        a = area(solution.with_values(solution.values + eps * b)).area
        table.rows.append((eps, a - base.area))
    return table


def sine_bump(gf: GridField, kx: int, ky: int):
    """sin(kx pi s) sin(ky pi t) in rectangle coordinates s, t in [0, 1]; zero on the boundary."""
    X, Y = gf.mesh()
    s = (X - gf.x0) / (gf.x1 - gf.x0)
    t = (Y - gf.y0) / (gf.y1 - gf.y0)
    b = np.sin(kx * math.pi * s) * np.sin(ky * math.pi * t)
    b[gf.boundary_mask] = 0.0
    return b


def standard_bumps(gf: GridField, count: int = 5) -> list[np.ndarray]:
    modes = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (1, 3), (3, 3)]
    if count > len(modes):
        raise ValueError(f"at most {len(modes)} standard bumps")
    return [sine_bump(gf, kx, ky) for kx, ky in modes[:count]]


# ---------------------------------------------------------------------------
# harmonicity


def induced_laplacian(field, p: DomainPoint, h: float | None = None) -> float:
    """Laplace-Beltrami operator of f for the induced metric of its graph.

    ``(1/sqrt(det h)) div(sqrt(det h) h^{-1} grad f)`` with ``sqrt(det h) = w``;
    the flux is evaluated from analytic first derivatives and differenced
    centrally.
    """
    jet_fn = as_jet_function(field)
    x, y = float(p.x), float(p.y)
    if h is None:
        h = float(fd_step(max(abs(x), y)))

    def flux(xx, yy):
        q = DomainPoint(xx, yy)
        j = jet_fn(xx, yy)
        E, F, G = first_forms(q, j)
        w = w_factor(q, j)
        return (G * j.fx - F * j.fy) / w, (E * j.fy - F * j.fx) / w

    div = (flux(x + h, y)[0] - flux(x - h, y)[0]) / (2 * h) + (
        flux(x, y + h)[1] - flux(x, y - h)[1]
    ) / (2 * h)
    return float(div / w_factor(p, jet_fn(x, y)))


def flat_laplacian(j: Jet2):
    return j.fxx + j.fyy


def level_curve_slopes(j: Jet2):
    """y' and y'' of the level curve through the point, written as y(x)."""
    if np.any(j.fy == 0):
        raise LevelCurveDegenerate("f_y = 0: level curve is not a graph over x")
    yp = -j.fx / j.fy
    ypp = -(j.fxx + 2 * j.fxy * yp + j.fyy * yp ** 2) / j.fy
    return yp, ypp


def level_curve_curvature(p: DomainPoint, j: Jet2):
    """Geodesic curvature in H^2 of the level curve of f through ``p``."""
    yp, ypp = level_curve_slopes(j)
    return geodesic_curvature_graph_curve(p.y, yp, ypp)


def level_curve_identity_residual(p: DomainPoint, j: Jet2):
    """``lap f - sign(f_y) y k_g |grad f|^3`` (Euclidean gradient norm).

    Algebraically this equals the minimal-surface residual, so it vanishes
    exactly on minimal graphs.  The sign factor accounts for the division by
    f_y when the level curve is written as a graph.
    """
    k_g = level_curve_curvature(p, j)
    grad = np.sqrt(j.fx ** 2 + j.fy ** 2)
    return flat_laplacian(j) - np.sign(j.fy) * p.y * k_g * grad ** 3
