import math

import numpy as np
import pytest

from h2xr.ambient import DomainPoint
from h2xr.catalog import (
    Family,
    SolutionSpec,
    family_parameters,
    list_expected_properties,
    make,
    special_umbilical,
)
from h2xr.errors import DomainViolation
from h2xr.shape import (
    codazzi_identity_residual,
    codazzi_system_residual,
    minimal_residual,
    shape_operator,
    umbilical_lambda,
    umbilicity_residual,
)

GRAPH_SPECS = [
    make(Family.Plane, a=0.7, b=-1),
    make(Family.ArcsinY, a=0.5, b=0.2),
    make(Family.Funnel, a=1.3, b=0.4),
    make(Family.RationalX, c=-2.0),
    make(Family.ArcsinInvY, a=0.8, b=1.0),
    make(Family.UmbilicalGraph, c1=0.3, c2=-0.2, c3=-0.8, c=0.5),
    make(Family.HorizontalPlane, c=3.0),
    make(Family.Funnel, a=1.0, x_shift=1.5),
]

CLOSED_FORMS = {
    Family.Plane: lambda P, x, y: P["a"] * x + P["b"],
    Family.ArcsinY: lambda P, x, y: math.asin(P["a"] * y) + P["b"],
    Family.Funnel: lambda P, x, y: P["a"] * math.log(x * x + y * y) + P["b"],
    Family.RationalX: lambda P, x, y: P["c"] * x / (x * x + y * y),
    Family.ArcsinInvY: lambda P, x, y: math.asin(P["a"] * y / (x * x + y * y)) + P["b"],
    Family.HorizontalPlane: lambda P, x, y: P["c"],
}


def _ids(spec):
    return spec.describe().replace(" ", "_")


@pytest.mark.parametrize("spec", [s for s in GRAPH_SPECS if s.family in CLOSED_FORMS], ids=_ids)
def test_values_match_closed_forms(spec):
    for x, y in spec.sample_points(30, min_margin=0.05):
        expect = CLOSED_FORMS[spec.family](spec.params, x - spec["x_shift"], y)
        assert abs(spec.value(x, y) - expect) <= 1e-13 * (1 + abs(expect))


def test_umbilical_value_closed_form():
    spec = make(Family.UmbilicalGraph, c1=0.3, c2=-0.2, c3=-0.8, c=0.5)
    j = 1 - 0.04 - 2 * 0.3 * -0.8
    for x, y in spec.sample_points(30, min_margin=0.05):
        lam = float(umbilical_lambda(DomainPoint(x, y), 0.3, -0.2, -0.8))
        assert abs(spec.value(x, y) - (math.atan(lam / math.sqrt(j - lam * lam)) + 0.5)) <= 1e-13


@pytest.mark.parametrize("spec", GRAPH_SPECS, ids=_ids)
def test_jets_match_finite_differences(spec):
    h = 1e-5
    for x, y in spec.sample_points(12, min_margin=0.1):
        j = spec.jet(x, y)

        def d(attr, dx, dy):
            return (getattr(spec.jet(x + dx * h, y + dy * h), attr) - getattr(spec.jet(x - dx * h, y - dy * h), attr)) / (2 * h)

        pairs = [
            (j.fx, d("f", 1, 0)), (j.fy, d("f", 0, 1)),
            (j.fxx, d("fx", 1, 0)), (j.fxy, d("fx", 0, 1)), (j.fyy, d("fy", 0, 1)),
            (j.fxxx, d("fxx", 1, 0)), (j.fxxy, d("fxx", 0, 1)),
            (j.fxyy, d("fxy", 0, 1)), (j.fyyy, d("fyy", 0, 1)),
        ]
        for exact, fd in pairs:
            assert abs(exact - fd) <= 1e-5 * (1 + abs(exact))


@pytest.mark.parametrize("spec", GRAPH_SPECS, ids=_ids)
def test_expected_properties_hold(spec):
    props = list_expected_properties(spec)
    pts = spec.sample_points(200, min_margin=0.01)
    p = DomainPoint(pts[:, 0], pts[:, 1])
    j = spec.jet(p.x, p.y)
    res = np.max(np.abs(minimal_residual(p, j)))
    assert (res <= 1e-9) == props.minimal
    umb = np.max(umbilicity_residual(p, j))
    assert (umb <= 1e-8) == props.umbilical


def test_jets_broadcast():
    spec = make(Family.ArcsinInvY)
    X, Y = np.meshgrid(np.linspace(1, 2, 4), np.linspace(0.5, 1, 3))
    j = spec.jet(X, Y)
    assert j.fyyy.shape == (3, 4)
    assert j.f[1, 2] == spec.value(X[1, 2], Y[1, 2])


def test_domain_violations():
    with pytest.raises(DomainViolation):
        make(Family.ArcsinY, a=1).jet(0.0, 1.5)
    with pytest.raises(DomainViolation):
        make(Family.ArcsinInvY, a=1).jet(0.0, 0.5)
    with pytest.raises(DomainViolation):
        make(Family.Funnel).jet(0.0, -1.0)
    with pytest.raises(DomainViolation):
        make(Family.GeodesicCylinder, c1=0, c2=1).profile(1.5)


def test_parameter_validation():
    with pytest.raises(ValueError):
        make(Family.Funnel, c=1)
    with pytest.raises(ValueError):
        make(Family.ArcsinY, a=0)
    with pytest.raises(ValueError):
        make(Family.UmbilicalGraph, c1=0, c2=1, c3=0)
    with pytest.raises(ValueError):
        make(Family.GeodesicCylinder, c1=0, c2=-1)
    with pytest.raises(ValueError):
        make("Catenoid")
    with pytest.raises(TypeError):
        make(Family.VerticalPlane).jet(1.0, 1.0)


def test_defaults_and_describe():
    assert family_parameters(Family.Funnel) == {"a": 1.0, "b": 0.0, "x_shift": 0.0}
    spec = SolutionSpec(Family.RationalX)
    assert spec["c"] == 1.0
    assert spec.describe() == "RationalX c=1 x_shift=0"


def test_sample_points_deterministic_and_admissible():
    spec = make(Family.ArcsinInvY)
    a = spec.sample_points(100, seed=3)
    b = spec.sample_points(100, seed=3)
    np.testing.assert_array_equal(a, b)
    assert np.all(spec.admissible(a[:, 0], a[:, 1]))


@pytest.mark.parametrize("c3", [-2.0, -0.5, 0.3, 1.7])
def test_special_umbilical_reduces_to_arcsin(c3):
    spec = special_umbilical(c3, c=0.25)
    ys = np.linspace(abs(c3) * 1.01, 5 * abs(c3), 11)
    diff = spec.value(0.4, ys) - (-np.arcsin(c3 / ys))
    assert np.ptp(diff) <= 1e-10


def test_special_umbilical_rejects_zero():
    with pytest.raises(ValueError):
        special_umbilical(0.0)


def test_umbilical_shape_operator_is_lambda_identity():
    c = (0.3, -0.2, -0.8)
    spec = make(Family.UmbilicalGraph, c1=c[0], c2=c[1], c3=c[2])
    for x, y in spec.sample_points(20, min_margin=0.05):
        p = DomainPoint(x, y)
        j = spec.jet(x, y)
        k = shape_operator(p, j).principal_curvatures()
        lam = float(umbilical_lambda(p, *c))
        assert abs(k[1] - k[0]) <= 1e-8
        assert abs(k.mean() - lam) <= 1e-8
        assert codazzi_system_residual(p, j, *c) <= 1e-8
        assert codazzi_identity_residual(p, j, *c) <= 1e-10


def test_geodesic_cylinder_profile():
    spec = make(Family.GeodesicCylinder, c1=1.0, c2=3.0)
    vp = spec.profile(0.5)
    assert abs(vp.a - math.sqrt(-0.25 + 1.0 + 3.0)) <= 1e-15
    assert spec.parametrization(0.5, 2.0) == (0.5, vp.a, 2.0)


def test_expected_property_table():
    assert list_expected_properties(make(Family.Funnel)).gauss_rank == 1
    assert list_expected_properties(make(Family.RationalX)).gauss_rank == 2
    assert list_expected_properties(make(Family.Plane)).gauss_rank == 0
    assert list_expected_properties(make(Family.ArcsinInvY)).complete is False
    assert not list_expected_properties(make(Family.UmbilicalGraph)).minimal
    assert list_expected_properties(make(Family.VerticalPlane)).totally_geodesic
