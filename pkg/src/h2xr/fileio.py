"""File formats: number formatting, atomic writes, OBJ meshes, CSV tables."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(v), ".17g")


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_table(header, rows) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray  # (n, 3)
    faces: np.ndarray  # (m, 3), 0-based

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        f = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("face index out of range")
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise ValueError("degenerate face")

    def to_obj(self, comment: str | None = None) -> str:
        lines = []
        if comment:
            lines += [f"# {c}" for c in comment.splitlines()]
        lines += ["v " + " ".join(fmt(c) for c in v) for v in self.vertices]
        lines += ["f " + " ".join(str(i + 1) for i in f) for f in self.faces]
        return "\n".join(lines) + "\n"

    def write_obj(self, path, comment: str | None = None) -> None:
        atomic_write_text(path, self.to_obj(comment))


def grid_mesh(points: np.ndarray) -> Mesh:
    """Triangulate an (nv, nu, 3) array of surface points, two triangles per cell.

    Vertices are numbered row by row (u fastest).
    """
    nv, nu, _ = points.shape
    idx = np.arange(nu * nv).reshape(nv, nu)
    a = idx[:-1, :-1].ravel()
    b = idx[:-1, 1:].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[1:, :-1].ravel()
    tris = np.empty((2 * a.size, 3), dtype=np.int64)
    tris[0::2] = np.column_stack([a, b, c])
    tris[1::2] = np.column_stack([a, c, d])
    return Mesh(points.reshape(-1, 3), tris)
