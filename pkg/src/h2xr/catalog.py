"""Closed-form graph and vertical-surface families with analytic jets.

Each family is described by a :class:`SolutionSpec` (family tag plus named
real constants).  Graph families evaluate ``f`` and all its partial
derivatives through third order; vertical families evaluate their profile
curve.  Every graph family accepts an extra ``x_shift`` constant, which
replaces ``x`` by ``x - x_shift`` (an isometry of H^2 x R).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np
from scipy.stats import qmc

from .ambient import DomainPoint
from .errors import DomainViolation
from .shape import Jet3, VerticalProfile, umbilical_j, umbilical_lambda

EPS_DOM = 1e-6


class Family(str, enum.Enum):
    Plane = "Plane"
    ArcsinY = "ArcsinY"
    Funnel = "Funnel"
    RationalX = "RationalX"
    ArcsinInvY = "ArcsinInvY"
    UmbilicalGraph = "UmbilicalGraph"
    HorizontalPlane = "HorizontalPlane"
    VerticalPlane = "VerticalPlane"
    GeodesicCylinder = "GeodesicCylinder"


VERTICAL = frozenset({Family.VerticalPlane, Family.GeodesicCylinder})

_DEFAULTS: dict[Family, dict[str, float]] = {
    Family.Plane: {"a": 0.0, "b": 0.0},
    Family.ArcsinY: {"a": 1.0, "b": 0.0},
    Family.Funnel: {"a": 1.0, "b": 0.0},
    Family.RationalX: {"c": 1.0},
    Family.ArcsinInvY: {"a": 1.0, "b": 0.0},
    Family.UmbilicalGraph: {"c1": 0.0, "c2": 0.0, "c3": -1.0, "c": 0.0},
    Family.HorizontalPlane: {"c": 0.0},
    Family.VerticalPlane: {"c": 0.0},
    Family.GeodesicCylinder: {"c1": 0.0, "c2": 1.0},
}
for _fam, _d in _DEFAULTS.items():
    if _fam not in VERTICAL:
        _d["x_shift"] = 0.0


def family_parameters(family) -> dict[str, float]:
    """Parameter names of a family with their default values."""
    return dict(_DEFAULTS[Family(family)])


# ---------------------------------------------------------------------------
# jet algebra


def _jet3_const(shape, value=0.0) -> Jet3:
    z = np.zeros(shape)
    return Jet3(z + value, z, z, z, z, z, z, z, z, z)


def _compose(phi, t: Jet3) -> Jet3:
    """Jet of ``phi(t(x, y))`` given ``phi`` and its first three derivatives at ``t``."""
    p0, p1, p2, p3 = phi
    tx, ty = t.fx, t.fy
    return Jet3(
        p0,
        p1 * tx,
        p1 * ty,
        p2 * tx ** 2 + p1 * t.fxx,
        p2 * tx * ty + p1 * t.fxy,
        p2 * ty ** 2 + p1 * t.fyy,
        p3 * tx ** 3 + 3 * p2 * tx * t.fxx + p1 * t.fxxx,
        p3 * tx ** 2 * ty + p2 * (t.fxx * ty + 2 * tx * t.fxy) + p1 * t.fxxy,
        p3 * tx * ty ** 2 + p2 * (t.fyy * tx + 2 * ty * t.fxy) + p1 * t.fxyy,
        p3 * ty ** 3 + 3 * p2 * ty * t.fyy + p1 * t.fyyy,
    )


def _harmonic(g) -> Jet3:
    """Jet of ``Re g(z)`` for holomorphic ``g``; ``g`` lists g, g', g'', g''' at z = x + iy.

    Uses d/dx = d/dz and d/dy = i d/dz on holomorphic functions.
    """
    g0, g1, g2, g3 = g
    return Jet3(
        g0.real,
        g1.real,
        -g1.imag,
        g2.real,
        -g2.imag,
        -g2.real,
        g3.real,
        -g3.imag,
        -g3.real,
        g3.imag,
    )


def _arcsin_derivs(t, a, b):
    """arcsin(a t) + b and three t-derivatives."""
    d = 1.0 - (a * t) ** 2
    return (
        np.arcsin(a * t) + b,
        a / np.sqrt(d),
        a ** 3 * t / d ** 1.5,
        a ** 3 * (1.0 + 2.0 * (a * t) ** 2) / d ** 2.5,
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolutionSpec:
    """A catalog family with concrete constants.

    ``params`` must only contain names of :func:`family_parameters`; missing
    names take their defaults.
    """

    family: Family
    params: Mapping[str, float] = field(default_factory=dict)
    eps_dom: float = EPS_DOM

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        merged = family_parameters(fam)
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ValueError(f"unknown parameter(s) {sorted(unknown)} for family {fam.value}")
        merged.update({k: float(v) for k, v in self.params.items()})
        object.__setattr__(self, "params", MappingProxyType(merged))
        if fam in (Family.ArcsinY,) and not merged["a"] > 0:
            raise ValueError("ArcsinY requires a > 0")
        if fam is Family.UmbilicalGraph and not umbilical_j(merged["c1"], merged["c2"], merged["c3"]) > 0:
            raise ValueError("UmbilicalGraph requires j = 1 - c2^2 - 2 c1 c3 > 0")
        if fam is Family.GeodesicCylinder and not merged["c1"] ** 2 + merged["c2"] > 0:
            raise ValueError("GeodesicCylinder requires c1^2 + c2 > 0")

    def __getitem__(self, name: str) -> float:
        return self.params[name]

    @property
    def is_graph(self) -> bool:
        return self.family not in VERTICAL

    def describe(self) -> str:
        args = " ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family.value} {args}"

    # -- domain -----------------------------------------------------------

    def margin(self, x, y):
        """Normalised slack of the admissibility condition (positive inside).

        For unconstrained families this is +inf.
        """
        fam, P = self.family, self.params
        x = np.asarray(x, dtype=float) - P.get("x_shift", 0.0)
        y = np.asarray(y, dtype=float)
        if fam is Family.ArcsinY:
            return 1.0 - (P["a"] * y) ** 2
        if fam is Family.ArcsinInvY:
            return 1.0 - (P["a"] * y / (x ** 2 + y ** 2)) ** 2
        if fam is Family.UmbilicalGraph:
            jc = umbilical_j(P["c1"], P["c2"], P["c3"])
            lam = umbilical_lambda(DomainPoint(x, y), P["c1"], P["c2"], P["c3"])
            return (jc - lam ** 2) / jc
        if fam is Family.GeodesicCylinder:
            # x plays the role of the profile parameter u
            r2 = P["c1"] ** 2 + P["c2"]
            return (-(x ** 2) + 2 * P["c1"] * x + P["c2"]) / r2
        if fam is Family.VerticalPlane:
            return np.where(x > 0, np.inf, -np.inf)
        return np.full(np.broadcast(x, y).shape, np.inf)

    def admissible(self, x, y):
        y = np.asarray(y, dtype=float)
        if self.family is Family.GeodesicCylinder or self.family is Family.VerticalPlane:
            return self.margin(x, y) > self.eps_dom
        return (y > 0) & (self.margin(x, y) > self.eps_dom)

    def check_domain(self, p: DomainPoint) -> None:
        if not np.all(self.admissible(p.x, p.y)):
            raise DomainViolation(f"point ({p.x!r}, {p.y!r}) outside the domain of {self.describe()}")

    # -- evaluation -------------------------------------------------------

    def jet(self, x, y) -> Jet3:
        """Analytic jet through third order at (x, y); broadcasts over arrays."""
        if not self.is_graph:
            raise TypeError(f"{self.family.value} is a vertical surface, not a graph")
        p = DomainPoint(x, y)
        self.check_domain(p)
        fam, P = self.family, self.params
        x = np.asarray(x, dtype=float) - P["x_shift"]
        y = np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape
        if fam is Family.HorizontalPlane:
            return _jet3_const(shape, P["c"])
        if fam is Family.Plane:
            z = np.zeros(shape)
            return Jet3(P["a"] * x + P["b"] + z, P["a"] + z, z, z, z, z, z, z, z, z)
        if fam is Family.ArcsinY:
            z = np.zeros(shape)
            t = Jet3(y + z, z, z + 1.0, z, z, z, z, z, z, z)
            return _compose(_arcsin_derivs(t.f, P["a"], P["b"]), t)
        z = x + 1j * y
        if fam is Family.Funnel:
            a = P["a"]
            g = (2 * a * np.log(z) + P["b"], 2 * a / z, -2 * a / z ** 2, 4 * a / z ** 3)
            return _harmonic(g)
        if fam is Family.RationalX:
            c = P["c"]
            return _harmonic((c / z, -c / z ** 2, 2 * c / z ** 3, -6 * c / z ** 4))
        if fam is Family.ArcsinInvY:
            # y / (x^2 + y^2) = Re(i / z)
            t = _harmonic((1j / z, -1j / z ** 2, 2j / z ** 3, -6j / z ** 4))
            return _compose(_arcsin_derivs(t.f, P["a"], P["b"]), t)
        if fam is Family.UmbilicalGraph:
            return self._umbilical_jet(x, y)
        raise AssertionError(fam)

    def _umbilical_jet(self, x, y) -> Jet3:
        c1, c2, c3 = self["c1"], self["c2"], self["c3"]
        jc = umbilical_j(c1, c2, c3)
        q = 0.5 * c1 * x ** 2 + c2 * x - c3
        dq = c1 * x + c2
        lam = Jet3(
            q / y + 0.5 * c1 * y,
            dq / y,
            -q / y ** 2 + 0.5 * c1,
            c1 / y,
            -dq / y ** 2,
            2 * q / y ** 3,
            0.0 * x * y,
            -c1 / y ** 2,
            2 * dq / y ** 3,
            -6 * q / y ** 4,
        )
        t = lam.f
        gap = jc - t ** 2
        phi = (
            np.arctan(t / np.sqrt(gap)) + self["c"],
            1.0 / np.sqrt(gap),
            t / gap ** 1.5,
            (jc + 2 * t ** 2) / gap ** 2.5,
        )
        return _compose(phi, lam)

    def value(self, x, y):
        return self.jet(x, y).f

    def profile(self, u) -> VerticalProfile:
        """Profile a(u) of a geodesic cylinder, with derivatives."""
        if self.family is not Family.GeodesicCylinder:
            raise TypeError("profile() is defined for GeodesicCylinder only")
        if not np.all(self.admissible(u, 1.0)):
            raise DomainViolation(f"u={u!r} outside the interval of {self.describe()}")
        c1, c2 = self["c1"], self["c2"]
        a = math.sqrt(-(u ** 2) + 2 * c1 * u + c2)
        return VerticalProfile(a, (c1 - u) / a, -(c1 ** 2 + c2) / a ** 3)

    def parametrization(self, u, v):
        """Point of the surface in (x, y, z) for the family's natural parameters."""
        if self.family is Family.GeodesicCylinder:
            return (u, self.profile(u).a, v)
        if self.family is Family.VerticalPlane:
            if not u > 0:
                raise DomainViolation("vertical plane needs u > 0")
            return (self["c"], u, v)
        return (u, v, float(self.value(u, v)))

    # -- sampling ---------------------------------------------------------

    def default_region(self) -> tuple[float, float, float, float]:
        fam, P = self.family, self.params
        s = P.get("x_shift", 0.0)
        if fam is Family.ArcsinY:
            return (s - 1.0, s + 1.0, 0.02 / P["a"], 1.0 / P["a"])
        if fam in (Family.Funnel, Family.RationalX):
            return (s - 2.0, s + 2.0, 0.25, 2.5)
        if fam is Family.ArcsinInvY:
            a = P["a"]
            return (s + 0.6 * a, s + 2.0 * a, 0.05 * a, 1.5 * a)
        if fam is Family.UmbilicalGraph:
            return (s - 3.0, s + 3.0, 0.05, 4.0)
        if fam is Family.GeodesicCylinder:
            r = math.sqrt(P["c1"] ** 2 + P["c2"])
            return (P["c1"] - r, P["c1"] + r, 1.0, 1.0)
        if fam is Family.VerticalPlane:
            return (0.5, 2.0, 1.0, 1.0)
        return (s - 1.0, s + 1.0, 0.5, 2.0)

    def sample_points(self, n: int, region=None, min_margin: float = 0.0, seed: int = 0):
        """``n`` quasi-random admissible points (Halton sequence) as an (n, 2) array.

        Points need ``margin > max(eps_dom, min_margin)``.  For vertical
        families only the first column (the profile parameter) is meaningful.
        """
        x0, x1, y0, y1 = region if region is not None else self.default_region()
        sampler = qmc.Halton(d=2, scramble=True, seed=seed)
        out = []
        count = 0
        for _ in range(64):
            u = sampler.random(max(4 * n, 256))
            pts = np.column_stack([x0 + (x1 - x0) * u[:, 0], y0 + (y1 - y0) * u[:, 1]])
            pts = pts[pts[:, 1] > 0]
            keep = self.admissible(pts[:, 0], pts[:, 1]) & (
                self.margin(pts[:, 0], pts[:, 1]) > min_margin
            )
            out.append(pts[keep])
            count += int(keep.sum())
            if count >= n:
                break
        pts = np.concatenate(out)[:n]
        if len(pts) < n:
            raise DomainViolation(f"found only {len(pts)} admissible points for {self.describe()}")
        return pts


def jets(spec: SolutionSpec, p: DomainPoint) -> Jet3:
    return spec.jet(p.x, p.y)


def make(family, **params) -> SolutionSpec:
    return SolutionSpec(Family(family), params)


def special_umbilical(c3: float, c: float = 0.0, check_points: int = 25) -> SolutionSpec:
    """Umbilical graph with c1 = c2 = 0, i.e. ``-arcsin(c3 / y) + const`` on y > |c3|.

    The agreement with the closed form is checked at ``check_points`` values
    of y in (|c3|, 10 |c3|] after fixing the constant at y = 2 |c3|.
    """
    if c3 == 0:
        raise ValueError("c3 = 0 degenerates to a horizontal plane")
    spec = SolutionSpec(Family.UmbilicalGraph, {"c1": 0.0, "c2": 0.0, "c3": c3, "c": c})
    m = abs(c3)
    anchor = 2.0 * m
    offset = spec.value(0.0, anchor) - (-math.asin(c3 / anchor) + c)
    ys = np.linspace(m * (1.0 + 1e-3), 10.0 * m, check_points)
    xs = np.linspace(-1.0, 1.0, check_points)
    defect = np.max(np.abs(spec.value(xs, ys) - (-np.arcsin(c3 / ys) + c) - offset))
    if defect > 1e-10:
        raise AssertionError(f"umbilical graph does not reduce to -arcsin(c3/y): defect {defect:g}")
    return spec


@dataclass(frozen=True)
class ExpectedProperties:
    """Properties the closed-form family is known to have.

    ``complete`` is metadata only (``None`` when no claim is made);
    ``gauss_rank`` is ``None`` for vertical surfaces and unclassified graphs.
    """

    minimal: bool
    totally_geodesic: bool
    umbilical: bool
    gauss_rank: int | None
    complete: bool | None


def list_expected_properties(spec: SolutionSpec) -> ExpectedProperties:
    fam, P = spec.family, spec.params
    if fam is Family.Plane:
        flat = P["a"] == 0
        return ExpectedProperties(True, flat, flat, 0 if flat else 1, True)
    if fam is Family.HorizontalPlane:
        return ExpectedProperties(True, True, True, 0, True)
    if fam is Family.ArcsinY:
        return ExpectedProperties(True, False, False, 1, None)
    if fam is Family.Funnel:
        return ExpectedProperties(True, P["a"] == 0, P["a"] == 0, 1 if P["a"] else 0, True)
    if fam is Family.RationalX:
        return ExpectedProperties(True, P["c"] == 0, P["c"] == 0, 2 if P["c"] else 0, True)
    if fam is Family.ArcsinInvY:
        return ExpectedProperties(True, False, False, 2, False)
    if fam is Family.UmbilicalGraph:
        return ExpectedProperties(False, False, True, None, None)
    # vertical families
    return ExpectedProperties(True, True, True, None, None)
