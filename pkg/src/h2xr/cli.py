"""Command-line interface.

Every subcommand takes ``key=value`` settings, optionally preceded by a
``--config FILE`` with one ``key = value`` per line; command-line settings
override the file.  Relative output paths are resolved against
``$H2XR_OUTPUT_DIR`` (default: the current directory).

Exit codes: 0 success, 1 property or convergence failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import catalog, shape, variational
from .ambient import DomainPoint
from .catalog import Family, SolutionSpec, list_expected_properties
from .errors import ConfigError, DomainViolation, NonConvergence, SingularJacobian
from .fileio import atomic_write_text, csv_table, fmt, grid_mesh
from .pde import DEFAULT_MAX_ITER, DEFAULT_TOL, GridField, max_error, solve_dirichlet

log = logging.getLogger("h2xr")

OUTPUT_ENV = "H2XR_OUTPUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

MINIMAL_TOL = 1e-9
GEODESIC_TOL = 1e-10
UMBILIC_TOL = 1e-8
CODAZZI_TOL = 1e-10

_PARAM_KEYS = {k for fam in Family for k in catalog.family_parameters(fam)}

COMMAND_KEYS = {
    "verify": {"family", "region", "samples", "margin"},
    "solve": {"family", "region", "nx", "ny", "tol", "max_iter", "bottom", "top", "left", "right",
              "out", "report"},
    "curvature": {"family", "point", "out"},
    "area": {"family", "region", "n", "grid", "bumps", "epsilons", "out"},
    "gaussmap": {"family", "region", "n", "rmin", "rmax", "out"},
    "export": {"family", "region", "n", "nu", "nv", "out"},
}

# default plotting windows for mesh and Gauss-map output
FIGURE_REGIONS = {
    Family.Funnel: (-2.0, 2.0, 0.25, 2.0),
    Family.RationalX: (-2.0, 2.0, 0.25, 2.0),
    Family.ArcsinInvY: (0.6, 2.0, 0.05, 1.5),
    Family.UmbilicalGraph: (-2.0, 2.0, 1.001, 3.0),
    Family.ArcsinY: (-1.0, 1.0, 0.05, 0.95),
}


# ---------------------------------------------------------------------------
# configuration


def parse_settings(tokens) -> dict[str, str]:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ConfigError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        k = k.strip()
        if not k:
            raise ConfigError(f"empty key in {tok!r}")
        out[k] = v.strip()
    return out


def read_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    return parse_settings(lines)


def load_config(command: str, tokens, config_path=None) -> dict[str, str]:
    cfg = read_config_file(config_path) if config_path else {}
    cfg.update(parse_settings(tokens))
    allowed = COMMAND_KEYS[command] | _PARAM_KEYS
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) for {command}: {', '.join(unknown)}")
    return cfg


def _float(cfg, key, default=None) -> float:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return float(default)
    try:
        v = float(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {cfg[key]!r}") from exc
    if not math.isfinite(v):
        raise ConfigError(f"{key} must be finite")
    return v


def _int(cfg, key, default=None, minimum=1) -> int:
    v = _float(cfg, key, default)
    if v != int(v) or v < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}")
    return int(v)


_NUM = r"\s*([-+0-9.eE]+)\s*"
_REGION = re.compile(rf"^\[{_NUM},{_NUM}\]\s*x\s*\[{_NUM},{_NUM}\]$")


def parse_region(text: str) -> tuple[float, float, float, float]:
    """Parse ``[x0,x1]x[y0,y1]``."""
    m = _REGION.match(text.strip())
    if not m:
        raise ConfigError(f"region must look like [x0,x1]x[y0,y1], got {text!r}")
    try:
        x0, x1, y0, y1 = (float(g) for g in m.groups())
    except ValueError as exc:
        raise ConfigError(f"bad number in region {text!r}") from exc
    if not (x1 > x0 and y1 > y0):
        raise ConfigError(f"empty region {text!r}")
    return x0, x1, y0, y1


def parse_point(text: str) -> tuple[float, float]:
    parts = text.strip().strip("()").split(",")
    if len(parts) != 2:
        raise ConfigError(f"point must be (x,y), got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"bad point {text!r}") from exc


def parse_list(text: str) -> list[float]:
    try:
        return [float(t) for t in re.split(r"[;,\s]+", text.strip()) if t]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def spec_from_config(cfg) -> SolutionSpec:
    if "family" not in cfg:
        raise ConfigError("missing required key 'family'")
    try:
        fam = Family(cfg["family"])
    except ValueError as exc:
        names = ", ".join(f.value for f in Family)
        raise ConfigError(f"unknown family {cfg['family']!r} (choose from {names})") from exc
    names = catalog.family_parameters(fam)
    params = {k: _float(cfg, k) for k in names if k in cfg}
    stray = sorted(k for k in cfg if k in _PARAM_KEYS and k not in names)
    if stray:
        raise ConfigError(f"parameter(s) {', '.join(stray)} do not apply to {fam.value}")
    try:
        return SolutionSpec(fam, params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def output_path(name: str) -> Path:
    p = Path(name)
    if p.is_absolute():
        return p
    return Path(os.environ.get(OUTPUT_ENV, ".")) / p


# ---------------------------------------------------------------------------
# verify


def _check_line(name, value, tol, ok) -> str:
    return f"{name:<28} {value:<24} {tol:<10} {'PASS' if ok else 'FAIL'}"


def verify_spec(spec: SolutionSpec, region, samples: int = 500, margin: float = 1e-2):
    """Run the expected-property suite; returns a list of (name, value, tol, ok)."""
    props = list_expected_properties(spec)
    checks = []
    if not spec.is_graph:
        x0, x1 = region[0], region[1]
        us = np.linspace(x0, x1, samples + 2)[1:-1]
        us = us[spec.admissible(us, 1.0)]
        if len(us) == 0:
            raise DomainViolation(f"no admissible parameter values in [{x0}, {x1}]")
        if spec.family is Family.GeodesicCylinder:
            data = [(spec.profile(u), shape.vertical_surface_data(spec.profile(u), u)) for u in us]
            ode = max(abs(shape.profile_ode_residual(vp)) for vp, _ in data)
            checks.append(("profile_ode", ode, GEODESIC_TOL, ode <= GEODESIC_TOL))
        else:
            data = [(None, shape.vertical_plane_data(u, spec["c"])) for u in us if u > 0]
        second = max(max(abs(d.L), abs(d.M), abs(d.N)) for _, d in data)
        checks.append(("second_form_max", second, GEODESIC_TOL, second <= GEODESIC_TOL))
        mean = max(abs(d.H) for _, d in data)
        checks.append(("mean_curvature_max", mean, GEODESIC_TOL, mean <= GEODESIC_TOL))
        return checks

    pts = spec.sample_points(samples, region, min_margin=margin)
    p = DomainPoint(pts[:, 0], pts[:, 1])
    j = spec.jet(p.x, p.y)
    if props.minimal:
        r = float(np.max(np.abs(shape.minimal_residual(p, j))))
        checks.append(("minimal_residual_max", r, MINIMAL_TOL, r <= MINIMAL_TOL))
    if props.totally_geodesic:
        r = float(np.max(shape.totally_geodesic_residual(p, j)))
        checks.append(("totally_geodesic_max", r, GEODESIC_TOL, r <= GEODESIC_TOL))
    if props.umbilical:
        r = float(np.max(shape.umbilicity_residual(p, j)))
        checks.append(("umbilicity_max", r, UMBILIC_TOL, r <= UMBILIC_TOL))
        if spec.family is Family.UmbilicalGraph:
            c = (spec["c1"], spec["c2"], spec["c3"])
            shifted = DomainPoint(p.x - spec["x_shift"], p.y)
            r = float(np.max(shape.codazzi_identity_residual(shifted, j, *c)))
            checks.append(("codazzi_identity_max", r, CODAZZI_TOL, r <= CODAZZI_TOL))
    if props.gauss_rank is not None:
        rank = shape.gauss_rank(spec, region, points=pts[: max(shape.MIN_RANK_SAMPLES, 100)])
        checks.append(("gauss_rank", rank, props.gauss_rank, rank == props.gauss_rank))
    return checks


def cmd_verify(cfg) -> int:
    spec = spec_from_config(cfg)
    region = parse_region(cfg["region"]) if "region" in cfg else spec.default_region()
    samples = _int(cfg, "samples", 500)
    margin = _float(cfg, "margin", 1e-2)
    checks = verify_spec(spec, region, samples, margin)
    print(f"# verify {spec.describe()} region={list(region)}")
    print(f"{'check':<28} {'value':<24} {'tol':<10} result")
    for name, value, tol, ok in checks:
        v = str(value) if isinstance(value, (int, np.integer)) else f"{value:.6e}"
        t = str(tol) if isinstance(tol, int) else f"{tol:.0e}"
        print(_check_line(name, v, t, ok))
    ok = all(c[3] for c in checks)
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# solve


def cmd_solve(cfg) -> int:
    tol = _float(cfg, "tol", DEFAULT_TOL)
    max_iter = _int(cfg, "max_iter", DEFAULT_MAX_ITER)
    spec = None
    if "family" in cfg:
        spec = spec_from_config(cfg)
        if "region" not in cfg:
            raise ConfigError("solve needs region=[x0,x1]x[y0,y1]")
        x0, x1, y0, y1 = parse_region(cfg["region"])
        nx = _int(cfg, "nx", 33, minimum=3)
        ny = _int(cfg, "ny", nx, minimum=3)
        gf = GridField.from_function(spec.value, x0, x1, y0, y1, nx, ny)
    else:
        edges = ("bottom", "top", "left", "right")
        missing = [e for e in edges if e not in cfg]
        if missing or "region" not in cfg:
            raise ConfigError("solve needs family=... or region plus bottom/top/left/right lists")
        x0, x1, y0, y1 = parse_region(cfg["region"])
        try:
            gf = GridField.from_edges(x0, x1, y0, y1, *(parse_list(cfg[e]) for e in edges))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    out = output_path(cfg.get("out", "solution.csv"))
    report_path = output_path(cfg.get("report", "solve_report.txt"))
    try:
        solution, report = solve_dirichlet(gf, tol=tol, max_iter=max_iter)
    except NonConvergence as exc:
        atomic_write_text(report_path, exc.report.to_text())
        print(f"NonConvergence: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except SingularJacobian as exc:
        print(f"SingularJacobian: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if spec is not None:
        report.max_error = max_error(solution, spec.value)
    solution.write_csv(out)
    atomic_write_text(report_path, report.to_text())
    print(report.to_text(), end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# pointwise curvature


def curvature_record(spec: SolutionSpec, x: float, y: float) -> dict:
    p = DomainPoint(x, y)
    j = spec.jet(x, y)
    rec = {"x": x, "y": y}
    rec.update(shape.surface_data(p, j).as_dict())
    A = shape.shape_operator(p, j)
    k1, k2 = A.principal_curvatures()
    rec.update(
        H=shape.mean_curvature(p, j),
        k1=k1,
        k2=k2,
        minimal_residual=shape.minimal_residual(p, j),
        totally_geodesic_residual=shape.totally_geodesic_residual(p, j),
        umbilicity_residual=shape.umbilicity_residual(p, j),
    )
    return {k: float(v) for k, v in rec.items()}


def cmd_curvature(cfg) -> int:
    spec = spec_from_config(cfg)
    if "point" not in cfg:
        raise ConfigError("curvature needs point=(x,y)")
    x, y = parse_point(cfg["point"])
    rec = curvature_record(spec, x, y)
    text = "".join(f"{k} = {fmt(v)}\n" for k, v in rec.items())
    print(text, end="")
    if "out" in cfg:
        atomic_write_text(output_path(cfg["out"]), csv_table(list(rec), [list(rec.values())]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# area


def cmd_area(cfg) -> int:
    if "grid" in cfg:
        gf = GridField.read_csv(cfg["grid"])
        rep = variational.area(gf)
        rows = [("area", rep.area), ("estimated_quadrature_error", rep.estimated_quadrature_error)]
        if "bumps" in cfg:
            eps = parse_list(cfg.get("epsilons", "-0.1,-0.01,0.01,0.1"))
            table_rows = []
            for k, b in enumerate(variational.standard_bumps(gf, _int(cfg, "bumps"))):
                t = variational.area_comparison(gf, b, eps)
                table_rows += [(str(k), e, d) for e, d in t.rows]
            text = csv_table(["bump", "eps", "area_difference"], table_rows)
            print(text, end="")
            if "out" in cfg:
                atomic_write_text(output_path(cfg["out"]), text)
            return EXIT_OK if all(d > 0 for _, e, d in table_rows if e != 0) else EXIT_FAIL
    else:
        spec = spec_from_config(cfg)
        region = parse_region(cfg["region"]) if "region" in cfg else spec.default_region()
        n = _int(cfg, "n", variational.DEFAULT_AREA_NODES, minimum=3)
        rep = variational.area(spec, region, n)
        rows = [("area", rep.area), ("estimated_quadrature_error", rep.estimated_quadrature_error)]
    text = csv_table(["quantity", "value"], rows)
    print(text, end="")
    if "out" in cfg:
        atomic_write_text(output_path(cfg["out"]), text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Gauss map samples


def gaussmap_rows(spec: SolutionSpec, region, n: int, rmin=None, rmax=None):
    x0, x1, y0, y1 = region
    xs, ys = np.linspace(x0, x1, n), np.linspace(y0, y1, n)
    X, Y = np.meshgrid(xs, ys)
    xi = shape.gauss_map(DomainPoint(X, Y), spec.jet(X, Y)).as_array()
    r = np.hypot(X - spec.params.get("x_shift", 0.0), Y)
    mask = np.ones_like(X, dtype=bool)
    if rmin is not None:
        mask &= r >= rmin
    if rmax is not None:
        mask &= r <= rmax
    return [
        (X.flat[k], Y.flat[k], *xi.reshape(-1, 3)[k], "1" if mask.flat[k] else "0")
        for k in range(X.size)
    ]


def cmd_gaussmap(cfg) -> int:
    spec = spec_from_config(cfg)
    if not spec.is_graph:
        raise ConfigError("gaussmap is defined for graph families")
    region = parse_region(cfg["region"]) if "region" in cfg else FIGURE_REGIONS.get(
        spec.family, spec.default_region())
    n = _int(cfg, "n", 41, minimum=2)
    rmin = _float(cfg, "rmin") if "rmin" in cfg else None
    rmax = _float(cfg, "rmax") if "rmax" in cfg else None
    rows = gaussmap_rows(spec, region, n, rmin, rmax)
    atomic_write_text(
        output_path(cfg.get("out", "gaussmap.csv")),
        csv_table(["x", "y", "xi1", "xi2", "xi3", "mask"], rows),
    )
    print(f"gauss_rank = {shape.gauss_rank(spec, region)}")
    print(f"pca_rank = {shape.gauss_pca_rank(spec, region)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# mesh export


def surface_points(spec: SolutionSpec, region, nu: int, nv: int) -> np.ndarray:
    u0, u1, v0, v1 = region
    us, vs = np.linspace(u0, u1, nu), np.linspace(v0, v1, nv)
    if spec.is_graph:
        U, V = np.meshgrid(us, vs)
        Z = spec.value(U, V) + np.zeros_like(U)
        return np.stack([U, V, Z], axis=-1)
    pts = np.empty((nv, nu, 3))
    for a, v in enumerate(vs):
        for b, u in enumerate(us):
            pts[a, b] = spec.parametrization(u, v)
    return pts


def cmd_export(cfg) -> int:
    spec = spec_from_config(cfg)
    if "region" in cfg:
        region = parse_region(cfg["region"])
    elif spec.family is Family.GeodesicCylinder:
        u0, u1, _, _ = spec.default_region()
        pad = 1e-3 * (u1 - u0)
        region = (u0 + pad, u1 - pad, -1.0, 1.0)
    elif spec.family is Family.VerticalPlane:
        region = (0.5, 2.0, -1.0, 1.0)
    else:
        region = FIGURE_REGIONS.get(spec.family, spec.default_region())
    n = _int(cfg, "n", 33, minimum=2)
    nu, nv = _int(cfg, "nu", n, minimum=2), _int(cfg, "nv", n, minimum=2)
    mesh = grid_mesh(surface_points(spec, region, nu, nv))
    out = output_path(cfg.get("out", f"{spec.family.value}.obj"))
    mesh.write_obj(out, comment=f"{spec.describe()}\nregion {' '.join(fmt(r) for r in region)}")
    print(f"wrote {out} ({len(mesh.vertices)} vertices, {len(mesh.faces)} faces)")
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "solve": cmd_solve,
    "curvature": cmd_curvature,
    "area": cmd_area,
    "gaussmap": cmd_gaussmap,
    "export": cmd_export,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="h2xr", description="Minimal and umbilical graphs in H^2 x R."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="file with key = value lines")
        p.add_argument("settings", nargs="*", metavar="key=value")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = load_config(args.command, args.settings, args.config)
        return COMMANDS[args.command](cfg)
    except (ConfigError, DomainViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
