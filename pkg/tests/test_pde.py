import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from h2xr.catalog import Family, make
from h2xr.errors import NonConvergence
from h2xr.pde import (
    GridField,
    SolveReport,
    assemble_jacobian,
    assemble_residual,
    max_error,
    maximum_principle_excess,
    solve_dirichlet,
)

ARCSIN_Y = make(Family.ArcsinY, a=0.5)
BOX = (1.0, 2.0, 0.5, 1.5)


def sampled(spec, n, box=BOX):
    return GridField.from_function(spec.value, *box, n, n)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridField(0, 1, 0.0, 1, 5, 5, np.zeros((5, 5)))
    with pytest.raises(ValueError):
        GridField(0, 1, 0.5, 1, 2, 5, np.zeros((5, 2)))
    with pytest.raises(ValueError):
        GridField(1, 0, 0.5, 1, 3, 3, np.zeros((3, 3)))


def test_linear_in_x_has_zero_residual():
    gf = sampled(make(Family.Plane, a=1.7, b=-0.3), 9)
    assert np.max(np.abs(assemble_residual(gf))) <= 1e-12


def test_exact_data_residual_is_second_order():
    r = [np.max(np.abs(assemble_residual(sampled(ARCSIN_Y, n)))) for n in (17, 33, 65)]
    ratios = [r[0] / r[1], r[1] / r[2]]
    assert all(3.0 <= q <= 5.0 for q in ratios), ratios


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_jacobian_matches_directional_derivative(seed):
    rng = np.random.default_rng(seed)
    gf = sampled(make(Family.Funnel, a=0.7), 9)
    gf = gf.with_values(gf.values + 0.1 * rng.standard_normal(gf.values.shape))
    v = np.zeros_like(gf.values)
    v[1:-1, 1:-1] = rng.standard_normal((7, 7))
    eps = 1e-6
    fd = (assemble_residual(gf.with_values(gf.values + eps * v)) - assemble_residual(gf.with_values(gf.values - eps * v))) / (2 * eps)
    jv = assemble_jacobian(gf) @ v[1:-1, 1:-1].ravel()
    np.testing.assert_allclose(jv, fd.ravel(), atol=1e-6 * (1 + np.max(np.abs(fd))))


def test_constant_boundary_converges_in_one_pass():
    gf = GridField(0.0, 1.0, 1.0, 2.0, 9, 9, np.full((9, 9), 2.5))
    sol, rep = solve_dirichlet(gf)
    assert rep.converged and rep.iterations == 1
    assert np.max(np.abs(sol.values - 2.5)) <= 1e-13


def test_convergence_order_arcsin():
    errs = []
    for n in (17, 33, 65):
        sol, rep = solve_dirichlet(sampled(ARCSIN_Y, n))
        assert rep.converged
        errs.append(max_error(sol, ARCSIN_Y.value))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 2.0) <= 0.3), orders
    assert errs[-1] <= 5e-4


def test_funnel_recovered():
    spec = make(Family.Funnel, a=1.0)
    sol, rep = solve_dirichlet(sampled(spec, 33, (0.5, 1.5, 0.5, 1.5)))
    assert rep.converged
    assert max_error(sol, spec.value) <= 1e-3


def test_maximum_principle():
    rng = np.random.default_rng(4)
    gf = GridField(-1.0, 1.0, 0.5, 2.0, 17, 17, np.zeros((17, 17)))
    v = gf.values.copy()
    v[gf.boundary_mask] = rng.uniform(-1, 1, gf.boundary_mask.sum())
    sol, rep = solve_dirichlet(gf.with_values(v))
    assert rep.converged
    assert maximum_principle_excess(sol) <= 1e-12


def test_translation_invariance_in_x():
    gf = sampled(ARCSIN_Y, 17)
    a, _ = solve_dirichlet(gf)
    b, _ = solve_dirichlet(gf.shifted(3.0))
    np.testing.assert_allclose(a.values, b.values, atol=1e-10)


def test_non_convergence_reports_iterate():
    with pytest.raises(NonConvergence) as info:
        solve_dirichlet(sampled(ARCSIN_Y, 17), max_iter=1)
    assert info.value.report.iterations == 1
    assert not info.value.report.converged
    assert isinstance(info.value.iterate, GridField)


def test_from_edges_layout():
    gf = GridField.from_edges(0, 1, 1, 2, [1, 2, 3], [7, 8, 9], [1, 4, 7], [3, 6, 9])
    np.testing.assert_array_equal(gf.values, [[1, 2, 3], [4, 0, 6], [7, 8, 9]])
    with pytest.raises(ValueError):
        GridField.from_edges(0, 1, 1, 2, [1, 2, 3], [7, 8], [1, 4, 7], [3, 6, 9])


def test_csv_round_trip_bit_identical(tmp_path):
    rng = np.random.default_rng(0)
    gf = GridField(-0.3, 1.1, 0.2, 0.9, 5, 4, rng.standard_normal((4, 5)) * 1e3)
    path = tmp_path / "g.csv"
    gf.write_csv(path)
    back = GridField.read_csv(path)
    assert (back.x0, back.x1, back.y0, back.y1, back.nx, back.ny) == (gf.x0, gf.x1, gf.y0, gf.y1, 5, 4)
    assert back.values.tobytes() == gf.values.tobytes()
    assert back.to_csv() == path.read_text()


def test_csv_rejects_bad_shape():
    with pytest.raises(ValueError):
        GridField.from_csv("0,1,1,2,3,3\n1,2,3\n4,5,6\n")


def test_report_round_trip():
    rep = SolveReport(4, 1e-12, True, [1.0, 0.5], [1.0, 0.1, 1e-12], 0, 3e-7)
    assert SolveReport.from_text(rep.to_text()) == rep
