"""Dirichlet problem for the minimal surfaces equation on rectangles.

The equation is discretised in flux form,

    div( grad f / sqrt(1 + y^2 |grad f|^2) ) = 0,

with fluxes on cell faces (y taken at the face centre) and centred
differences for the divergence.  The resulting residual is, up to sign and
cell area, the gradient of the area functional, which is what the
gradient-descent fallback exploits.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonConvergence, SingularJacobian
from .fileio import atomic_write_text, fmt

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 50
ARMIJO_C = 1e-4
MAX_HALVINGS = 20


@dataclass
class GridField:
    """Scalar field on a uniform grid over [x0, x1] x [y0, y1].

    ``values[j, i]`` is the value at ``(x_i, y_j)``.  The outer ring of nodes
    is the Dirichlet boundary.
    """

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.x0, self.x1, self.y0, self.y1 = map(float, (self.x0, self.x1, self.y0, self.y1))
        self.nx, self.ny = int(self.nx), int(self.ny)
        if not self.y0 > 0:
            raise ValueError(f"grid must lie in the upper half-plane, got y0={self.y0}")
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError("empty rectangle")
        if self.nx < 3 or self.ny < 3:
            raise ValueError("need at least 3 nodes per direction")
        self.values = np.array(self.values, dtype=float).reshape(self.ny, self.nx)

    @property
    def hx(self) -> float:
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y1 - self.y0) / (self.ny - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y0, self.y1, self.ny)

    def mesh(self):
        return np.meshgrid(self.xs, self.ys)

    @property
    def boundary_mask(self) -> np.ndarray:
        m = np.zeros((self.ny, self.nx), dtype=bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m

    @property
    def boundary_values(self) -> np.ndarray:
        return self.values[self.boundary_mask]

    def with_values(self, values) -> "GridField":
        return GridField(self.x0, self.x1, self.y0, self.y1, self.nx, self.ny, values)

    def shifted(self, s: float) -> "GridField":
        """Same data over the rectangle translated by ``s`` in x."""
        return GridField(self.x0 + s, self.x1 + s, self.y0, self.y1, self.nx, self.ny, self.values.copy())

    @classmethod
    def from_function(cls, fn, x0, x1, y0, y1, nx, ny) -> "GridField":
        """Sample ``fn(X, Y)`` (vectorised) on every node."""
        g = cls(x0, x1, y0, y1, nx, ny, np.zeros((int(ny), int(nx))))
        X, Y = g.mesh()
        g.values = np.asarray(fn(X, Y), dtype=float) + np.zeros_like(X)
        return g

    @classmethod
    def from_edges(cls, x0, x1, y0, y1, bottom, top, left, right) -> "GridField":
        """Boundary data from per-edge value lists; interior set to zero.

        ``bottom``/``top`` run along x (length nx), ``left``/``right`` along
        y (length ny).  Corner nodes are taken from ``bottom`` and ``top``.
        """
        bottom, top = np.asarray(bottom, float), np.asarray(top, float)
        left, right = np.asarray(left, float), np.asarray(right, float)
        nx, ny = len(bottom), len(left)
        if len(top) != nx or len(right) != ny:
            raise ValueError("opposite edges must have equal lengths")
        v = np.zeros((ny, nx))
        v[:, 0], v[:, -1] = left, right
        v[0, :], v[-1, :] = bottom, top
        return cls(x0, x1, y0, y1, nx, ny, v)

    # -- CSV --------------------------------------------------------------

    def to_csv(self) -> str:
        lines = [",".join(fmt(v) for v in (self.x0, self.x1, self.y0, self.y1)) + f",{self.nx},{self.ny}"]
        lines += [",".join(fmt(v) for v in row) for row in self.values]
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        atomic_write_text(path, self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "GridField":
        rows = [r for r in text.strip().splitlines() if r.strip()]
        head = rows[0].split(",")
        if len(head) != 6:
            raise ValueError("grid CSV header must be x0,x1,y0,y1,nx,ny")
        x0, x1, y0, y1 = map(float, head[:4])
        nx, ny = int(head[4]), int(head[5])
        if len(rows) - 1 != ny:
            raise ValueError(f"expected {ny} value rows, found {len(rows) - 1}")
        vals = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
        if vals.shape != (ny, nx):
            raise ValueError(f"expected {ny}x{nx} values, found {vals.shape}")
        return cls(x0, x1, y0, y1, nx, ny, vals)

    @classmethod
    def read_csv(cls, path) -> "GridField":
        with open(path) as fh:
            return cls.from_csv(fh.read())


@dataclass
class SolveReport:
    iterations: int
    final_residual_norm: float
    converged: bool
    damping: list[float] = field(default_factory=list)
    residual_history: list[float] = field(default_factory=list)
    descent_steps: int = 0
    max_error: float | None = None

    def to_text(self) -> str:
        items = [
            ("converged", str(self.converged).lower()),
            ("iterations", str(self.iterations)),
            ("final_residual_norm", fmt(self.final_residual_norm)),
            ("descent_steps", str(self.descent_steps)),
            ("damping", ";".join(fmt(d) for d in self.damping)),
            ("residual_history", ";".join(fmt(r) for r in self.residual_history)),
        ]
        if self.max_error is not None:
            items.append(("max_error", fmt(self.max_error)))
        return "".join(f"{k} = {v}\n" for k, v in items)

    @classmethod
    def from_text(cls, text: str) -> "SolveReport":
        kv = {}
        for line in text.splitlines():
            if "=" in line:
                k, v = line.split("=", 1)
                kv[k.strip()] = v.strip()

        def floats(s):
            return [float(t) for t in s.split(";") if t]

        return cls(
            iterations=int(kv["iterations"]),
            final_residual_norm=float(kv["final_residual_norm"]),
            converged=kv["converged"] == "true",
            damping=floats(kv.get("damping", "")),
            residual_history=floats(kv.get("residual_history", "")),
            descent_steps=int(kv.get("descent_steps", 0)),
            max_error=float(kv["max_error"]) if "max_error" in kv else None,
        )


# ---------------------------------------------------------------------------
# discrete operator


def _faces(f: np.ndarray, ys: np.ndarray, hx: float, hy: float):
    """Face gradients and y values: x-faces (interior rows) and y-faces (interior columns)."""
    # x-faces between columns k and k+1, rows 1..ny-2
    px = (f[1:-1, 1:] - f[1:-1, :-1]) / hx
    qx = (f[2:, :-1] - f[:-2, :-1] + f[2:, 1:] - f[:-2, 1:]) / (4 * hy)
    yx = ys[1:-1, None]
    # y-faces between rows k and k+1, columns 1..nx-2
    qy = (f[1:, 1:-1] - f[:-1, 1:-1]) / hy
    py = (f[:-1, 2:] - f[:-1, :-2] + f[1:, 2:] - f[1:, :-2]) / (4 * hx)
    yy = (0.5 * (ys[:-1] + ys[1:]))[:, None]
    return (px, qx, yx), (py, qy, yy)


def assemble_residual(gf: GridField) -> np.ndarray:
    """Flux-form residual at interior nodes, shape ``(ny - 2, nx - 2)``."""
    (px, qx, yx), (py, qy, yy) = _faces(gf.values, gf.ys, gf.hx, gf.hy)
    Fx = px / np.sqrt(1.0 + yx ** 2 * (px ** 2 + qx ** 2))
    Fy = qy / np.sqrt(1.0 + yy ** 2 * (py ** 2 + qy ** 2))
    return (Fx[:, 1:] - Fx[:, :-1]) / gf.hx + (Fy[1:, :] - Fy[:-1, :]) / gf.hy


def assemble_jacobian(gf: GridField) -> sp.csr_matrix:
    """Exact derivative of :func:`assemble_residual` w.r.t. interior values."""
    nx, ny, hx, hy = gf.nx, gf.ny, gf.hx, gf.hy
    (px, qx, yx), (py, qy, yy) = _faces(gf.values, gf.ys, hx, hy)
    nint = (nx - 2) * (ny - 2)
    unknown = -np.ones((ny, nx), dtype=np.int64)
    unknown[1:-1, 1:-1] = np.arange(nint).reshape(ny - 2, nx - 2)

    rows, cols, vals = [], [], []

    def add(r_row, r_col, n_row, n_col, v):
        # residual node (r_row, r_col) depends on grid node (n_row, n_col) with weight v
        r_row, r_col, n_row, n_col, v = np.broadcast_arrays(r_row, r_col, n_row, n_col, v)
        ok = (r_col >= 1) & (r_col <= nx - 2) & (r_row >= 1) & (r_row <= ny - 2)
        u = unknown[n_row, n_col]
        ok &= u >= 0
        rows.append(unknown[r_row[ok], r_col[ok]])
        cols.append(u[ok])
        vals.append(v[ok])

    # x-face fluxes: face k sits between columns k and k+1 on row j
    s3 = (1.0 + yx ** 2 * (px ** 2 + qx ** 2)) ** 1.5
    dFdp = (1.0 + yx ** 2 * qx ** 2) / s3
    dFdq = -(yx ** 2) * px * qx / s3
    J, K = np.meshgrid(np.arange(1, ny - 1), np.arange(nx - 1), indexing="ij")
    deps = [
        (J, K + 1, dFdp / hx),
        (J, K, -dFdp / hx),
        (J + 1, K, dFdq / (4 * hy)),
        (J - 1, K, -dFdq / (4 * hy)),
        (J + 1, K + 1, dFdq / (4 * hy)),
        (J - 1, K + 1, -dFdq / (4 * hy)),
    ]
    for n_row, n_col, d in deps:
        add(J, K, n_row, n_col, d / hx)  # right face of node (j, k)
        add(J, K + 1, n_row, n_col, -d / hx)  # left face of node (j, k+1)

    # y-face fluxes: face k sits between rows k and k+1 on column i
    s3 = (1.0 + yy ** 2 * (py ** 2 + qy ** 2)) ** 1.5
    dGdq = (1.0 + yy ** 2 * py ** 2) / s3
    dGdp = -(yy ** 2) * py * qy / s3
    K, I = np.meshgrid(np.arange(ny - 1), np.arange(1, nx - 1), indexing="ij")
    deps = [
        (K + 1, I, dGdq / hy),
        (K, I, -dGdq / hy),
        (K, I + 1, dGdp / (4 * hx)),
        (K, I - 1, -dGdp / (4 * hx)),
        (K + 1, I + 1, dGdp / (4 * hx)),
        (K + 1, I - 1, -dGdp / (4 * hx)),
    ]
    for n_row, n_col, d in deps:
        add(K, I, n_row, n_col, d / hy)
        add(K + 1, I, n_row, n_col, -d / hy)

    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nint, nint)
    )


def _laplacian_extension(gf: GridField) -> np.ndarray:
    """Flat harmonic extension of the boundary values (5-point Laplacian)."""
    nx, ny = gf.nx, gf.ny
    mx, my = nx - 2, ny - 2
    ax, ay = 1.0 / gf.hx ** 2, 1.0 / gf.hy ** 2
    Lx = sp.diags([ax, -2 * ax, ax], [-1, 0, 1], shape=(mx, mx))
    Ly = sp.diags([ay, -2 * ay, ay], [-1, 0, 1], shape=(my, my))
    A = (sp.kron(sp.identity(my), Lx) + sp.kron(Ly, sp.identity(mx))).tocsc()
    v = gf.values
    rhs = np.zeros((my, mx))
    rhs[:, 0] -= ax * v[1:-1, 0]
    rhs[:, -1] -= ax * v[1:-1, -1]
    rhs[0, :] -= ay * v[0, 1:-1]
    rhs[-1, :] -= ay * v[-1, 1:-1]
    out = v.copy()
    out[1:-1, 1:-1] = spla.spsolve(A, rhs.ravel()).reshape(my, mx)
    return out


def _solve_linear(J, rhs, iterate):
    with warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            delta = spla.spsolve(J.tocsc(), rhs)
        except (spla.MatrixRankWarning, RuntimeError) as exc:
            raise SingularJacobian(f"singular Jacobian: {exc}", iterate=iterate) from exc
    if not np.all(np.isfinite(delta)):
        raise SingularJacobian("Newton step is not finite", iterate=iterate)
    return delta


def solve_dirichlet(
    gf: GridField,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    initial: str = "harmonic",
) -> tuple[GridField, SolveReport]:
    """Solve the discrete minimal surfaces equation with the boundary of ``gf``.

    Damped Newton with Armijo backtracking on the residual 2-norm (halving
    up to 20 times).  When no damping factor decreases the residual, one
    explicit area-descent step is taken instead.

    ``iterations`` in the report counts loop passes, each of which evaluates
    the residual; the pass that detects convergence is included, so data
    that is already a solution reports 1.

    Raises
    ------
    NonConvergence
        If the residual is still above ``tol`` after ``max_iter`` passes.
    SingularJacobian
        If a Newton system cannot be solved.
    """
    if not np.all(np.isfinite(gf.boundary_values)):
        raise ValueError("boundary data must be finite")
    if initial == "harmonic":
        u = _laplacian_extension(gf)
    elif initial == "given":
        u = gf.values.copy()
    else:
        raise ValueError(f"unknown initial guess {initial!r}")

    cur = gf.with_values(u)
    report = SolveReport(iterations=0, final_residual_norm=np.inf, converged=False)
    tau = 0.2 * min(gf.hx, gf.hy) ** 2

    R = assemble_residual(cur)
    for it in range(1, max_iter + 1):
        rn = float(np.max(np.abs(R))) if R.size else 0.0
        report.iterations = it
        report.final_residual_norm = rn
        report.residual_history.append(rn)
        log.debug("pass %d residual %.3e", it, rn)
        if rn <= tol:
            report.converged = True
            return cur, report
        if it == max_iter:
            break
        delta = _solve_linear(assemble_jacobian(cur), -R.ravel(), cur)
        r2 = np.linalg.norm(R)
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = cur.values.copy()
            trial[1:-1, 1:-1] += t * delta.reshape(R.shape)
            cand = cur.with_values(trial)
            Rc = assemble_residual(cand)
            if np.linalg.norm(Rc) <= (1.0 - ARMIJO_C * t) * r2:
                cur, R = cand, Rc
                report.damping.append(t)
                break
            t *= 0.5
        else:
            # area gradient is -R (per unit cell area), so descend along +R
            trial = cur.values.copy()
            trial[1:-1, 1:-1] += tau * R
            cur = cur.with_values(trial)
            R = assemble_residual(cur)
            report.damping.append(0.0)
            report.descent_steps += 1

    raise NonConvergence(
        f"no convergence after {report.iterations} passes (residual {report.final_residual_norm:.3e})",
        report=report,
        iterate=cur,
    )


def max_error(gf: GridField, exact) -> float:
    X, Y = gf.mesh()
    return float(np.max(np.abs(gf.values - exact(X, Y))))


def maximum_principle_excess(solution: GridField) -> float:
    """How far interior values leave [min, max] of the boundary data (0 if inside)."""
    b = solution.boundary_values
    inner = solution.values[1:-1, 1:-1]
    return float(max(0.0, b.min() - inner.min(), inner.max() - b.max()))
