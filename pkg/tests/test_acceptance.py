"""Acceptance gate: one test per criterion, at the stated tolerances."""

import time

import numpy as np
import pytest

from h2xr import cli
from h2xr.ambient import DomainPoint
from h2xr.catalog import Family, make, special_umbilical
from h2xr.pde import GridField, max_error, solve_dirichlet
from h2xr.shape import (
    Jet2,
    VerticalProfile,
    codazzi_identity_residual,
    codazzi_system_residual,
    first_forms,
    gauss_pca_rank,
    gauss_rank,
    minimal_residual,
    second_forms,
    shape_operator,
    umbilical_j,
    umbilical_lambda,
    umbilicity_residual,
    vertical_plane_data,
    vertical_surface_data,
    w_factor,
)
from h2xr.variational import (
    area_comparison,
    flat_laplacian,
    induced_laplacian,
    level_curve_curvature,
    level_curve_identity_residual,
    standard_bumps,
)

MINIMAL_SPECS = {
    Family.Plane: (make(Family.Plane, a=0.8, b=0.1), (-2.0, 2.0, 0.1, 3.0)),
    Family.ArcsinY: (make(Family.ArcsinY, a=0.5), (-2.0, 2.0, 0.05, 2.0)),
    Family.Funnel: (make(Family.Funnel, a=1.0), (-2.0, 2.0, 0.1, 3.0)),
    Family.RationalX: (make(Family.RationalX, c=1.0), (-2.0, 2.0, 0.1, 3.0)),
    Family.ArcsinInvY: (make(Family.ArcsinInvY, a=1.0), (-2.0, 2.0, 0.05, 2.5)),
}
ARCSIN_Y = make(Family.ArcsinY, a=0.5)
SOLVE_BOX = (1.0, 2.0, 0.5, 1.5)


def _points(spec, region, n, margin=0.0):
    pts = spec.sample_points(n, region, min_margin=margin)
    return DomainPoint(pts[:, 0], pts[:, 1])


@pytest.fixture(scope="module")
def solved_65():
    gf = GridField.from_function(ARCSIN_Y.value, *SOLVE_BOX, 65, 65)
    return solve_dirichlet(gf)


@pytest.mark.criterion(1, "catalog minimality, 500 points, <= 1e-9, < 1 s")
def test_catalog_minimality():
    start = time.perf_counter()
    worst = {}
    for fam, (spec, region) in MINIMAL_SPECS.items():
        p = _points(spec, region, 500)
        assert p.x.size == 500
        worst[fam] = float(np.max(np.abs(minimal_residual(p, spec.jet(p.x, p.y)))))
    elapsed = time.perf_counter() - start
    assert all(v <= 1e-9 for v in worst.values()), worst
    assert elapsed < 1.0, elapsed


@pytest.mark.criterion(2, "totally geodesic classification, <= 1e-10")
def test_totally_geodesic():
    spec = make(Family.HorizontalPlane, c=1.5)
    p = _points(spec, (-3.0, 3.0, 0.05, 5.0), 200)
    L, M, N = second_forms(p, spec.jet(p.x, p.y))
    assert max(np.max(np.abs(L)), np.max(np.abs(M)), np.max(np.abs(N))) <= 1e-10

    for c1, c2 in [(0.0, 1.0), (1.0, 3.0), (-2.0, 0.5)]:
        cyl = make(Family.GeodesicCylinder, c1=c1, c2=c2)
        u0, u1, _, _ = cyl.default_region()
        for u in np.linspace(u0, u1, 52)[1:-1]:
            vp = cyl.profile(u)
            assert abs(vp.a * vp.app + vp.ap ** 2 + 1) <= 1e-10
            d = vertical_surface_data(vp, u)
            assert max(abs(d.L), abs(d.M), abs(d.N)) <= 1e-10

    for u in np.linspace(0.1, 5.0, 20):
        d = vertical_plane_data(u, c=-1.0)
        assert max(abs(d.L), abs(d.M), abs(d.N)) <= 1e-10

    for a in (0.2, 1.0, 7.0):
        d = vertical_surface_data(VerticalProfile(a, 0.0, 0.0), 0.3)
        assert abs(d.H + 0.5) <= 1e-10


@pytest.mark.criterion(3, "umbilical classification over 20 random constants")
def test_umbilical():
    rng = np.random.default_rng(2024)
    done = 0
    while done < 20:
        c = rng.uniform(-1.5, 1.5, 3)
        if umbilical_j(*c) <= 0.05:
            continue
        spec = make(Family.UmbilicalGraph, c1=c[0], c2=c[1], c3=c[2])
        p = _points(spec, None, 50, margin=1e-2)
        j = spec.jet(p.x, p.y)
        assert np.max(umbilicity_residual(p, j)) <= 1e-8
        assert np.max(codazzi_system_residual(p, j, *c)) <= 1e-8
        assert np.max(codazzi_identity_residual(p, j, *c)) <= 1e-10
        lam = umbilical_lambda(p, *c)
        for k in range(p.x.size):
            q = DomainPoint(p.x[k], p.y[k])
            kk = shape_operator(q, spec.jet(q.x, q.y)).principal_curvatures()
            assert abs(kk[1] - kk[0]) <= 1e-8
            assert abs(kk.mean() - lam[k]) <= 1e-8
        done += 1
    for c3 in (-1.0, 0.4, 2.5):
        special_umbilical(c3)  # raises if the defect exceeds 1e-10


@pytest.mark.criterion(4, "Gauss-map ranks 1 / 2 / 0 under sigma and PCA policies")
def test_gauss_ranks():
    cases = [
        (make(Family.Funnel, a=1.0), (0.5, 2.0, 0.5, 2.0), 1),
        (make(Family.RationalX, c=1.0), (-1.0, 1.0, 0.5, 2.0), 2),
        (make(Family.HorizontalPlane, c=0.7), (-1.0, 1.0, 0.5, 2.0), 0),
    ]
    for spec, region, rank in cases:
        assert gauss_rank(spec, region) == rank, spec.describe()
        assert gauss_pca_rank(spec, region) == rank, spec.describe()


@pytest.mark.criterion(5, "solver order 2.0 +- 0.3, 65^2 error <= 5e-4, < 30 s")
def test_solver_convergence():
    start = time.perf_counter()
    errs = []
    for n in (17, 33, 65):
        sol, rep = solve_dirichlet(GridField.from_function(ARCSIN_Y.value, *SOLVE_BOX, n, n))
        assert rep.converged
        errs.append(max_error(sol, ARCSIN_Y.value))
    elapsed = time.perf_counter() - start
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2.0) <= 0.3), orders
    assert errs[-1] <= 5e-4
    assert elapsed < 30.0


@pytest.mark.criterion(6, "area increases under 5 bumps, eps in +-0.01, +-0.1")
def test_area_minimality(solved_65):
    sol, _ = solved_65
    bumps = standard_bumps(sol, 5)
    for b in bumps:
        t = area_comparison(sol, b, [-0.1, -0.01, 0.01, 0.1])
        assert all(d > 0 for _, d in t.rows), t.rows
        for eps in (0.01, 0.1):
            # odd part of A(f + eps b) - A(f) is negligible next to the even part
            assert abs(t.first_order(eps)) <= 0.05 * t.second_order(eps)


@pytest.mark.criterion(7, "induced Laplacian <= 1e-6 on minimal members; f = y fails")
def test_harmonicity():
    specs = dict(MINIMAL_SPECS)
    specs[Family.HorizontalPlane] = (make(Family.HorizontalPlane, c=2.0), (-2.0, 2.0, 0.1, 3.0))
    for spec, region in specs.values():
        p = _points(spec, region, 200, margin=0.05)
        worst = max(abs(induced_laplacian(spec, DomainPoint(x, y))) for x, y in zip(p.x, p.y))
        assert worst <= 1e-6, (spec.describe(), worst)

    def height(x, y):
        return Jet2(y, 0.0, 1.0, 0.0, 0.0, 0.0)

    assert abs(induced_laplacian(height, DomainPoint(0.0, 1.0))) > 1e-2


@pytest.mark.criterion(8, "level-curve identity <= 1e-8; Funnel geodesic, ArcsinY horocycle")
def test_level_curves():
    for fam, (spec, region) in MINIMAL_SPECS.items():
        p = _points(spec, region, 300, margin=0.05)
        j = spec.jet(p.x, p.y)
        keep = j.fy != 0
        if not np.any(keep):
            continue
        q = DomainPoint(p.x[keep], p.y[keep])
        jk = Jet2(*(np.broadcast_to(v, p.x.shape)[keep] for v in j.jet2().as_tuple()))
        assert np.max(np.abs(level_curve_identity_residual(q, jk))) <= 1e-8, fam

    spec, region = MINIMAL_SPECS[Family.Funnel]
    p = _points(spec, region, 300)
    j = spec.jet(p.x, p.y)
    assert np.max(np.abs(level_curve_curvature(p, j))) <= 1e-9
    assert np.all(flat_laplacian(j) == 0)

    spec, region = MINIMAL_SPECS[Family.ArcsinY]
    p = _points(spec, region, 300)
    j = spec.jet(p.x, p.y)
    assert np.all(level_curve_curvature(p, j) == 1.0)
    assert np.all(flat_laplacian(j) != 0)


@pytest.mark.criterion(9, "EG - F^2 = w^2 to 1e-12 relative on 10^4 random jets")
def test_structural_identity():
    rng = np.random.default_rng(99)
    n = 10_000
    p = DomainPoint(rng.uniform(-10, 10, n), 10.0 ** rng.uniform(-1, 1, n))
    j = Jet2(np.zeros(n), *rng.standard_normal((5, n)))
    E, F, G = first_forms(p, j)
    w = w_factor(p, j)
    assert np.max(np.abs(E * G - F * F - w * w) / (w * w)) <= 1e-12


@pytest.mark.criterion(10, "export and solve byte-identical across runs")
def test_determinism(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path))
    outputs = []
    for k in range(2):
        assert cli.main(["export", "family=ArcsinInvY", "n=17", f"out=m{k}.obj"]) == 0
        assert cli.main(["solve", "family=ArcsinY", "a=0.5", "region=[1,2]x[0.5,1.5]", "nx=33",
                         f"out=s{k}.csv", f"report=r{k}.txt"]) == 0
        outputs.append([(tmp_path / name).read_bytes() for name in (f"m{k}.obj", f"s{k}.csv", f"r{k}.txt")])
    assert outputs[0] == outputs[1]
