"""The ambient space H^2 x R in the upper half-plane model.

Metric ``g = (dx^2 + dy^2) / y^2 + dz^2``.  Vectors are usually carried in
the orthonormal left-invariant frame ``E1 = y d/dx, E2 = y d/dy, E3 = d/dz``;
coordinate components are used only inside the covariant derivative.

All functions broadcast over numpy arrays of points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation

# central-difference step for derivative oracles, scaled by max(1, |coord|)
FD_STEP = 1e-5


def fd_step(t, base: float = FD_STEP):
    return base * np.maximum(1.0, np.abs(t))


@dataclass(frozen=True)
class DomainPoint:
    """Point (x, y) of the upper half-plane; ``y`` must be positive."""

    x: float
    y: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if not np.all(np.isfinite(y)) or np.any(y <= 0.0):
            raise DomainViolation(f"upper half-plane requires y > 0, got y={self.y!r}")
        if not np.all(np.isfinite(np.asarray(self.x, dtype=float))):
            raise DomainViolation(f"x must be finite, got x={self.x!r}")

    def shifted(self, dx=0.0, dy=0.0) -> "DomainPoint":
        return DomainPoint(self.x + dx, self.y + dy)


@dataclass(frozen=True)
class FrameVector:
    """Components with respect to the orthonormal frame (E1, E2, E3)."""

    c1: float
    c2: float
    c3: float

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(self.c1, self.c2, self.c3), axis=-1).astype(float)

    @classmethod
    def from_array(cls, a) -> "FrameVector":
        a = np.asarray(a, dtype=float)
        return cls(a[..., 0], a[..., 1], a[..., 2])

    def norm2(self):
        return self.c1 ** 2 + self.c2 ** 2 + self.c3 ** 2

    def norm(self):
        return np.sqrt(self.norm2())

    def __add__(self, other: "FrameVector") -> "FrameVector":
        return FrameVector(self.c1 + other.c1, self.c2 + other.c2, self.c3 + other.c3)

    def __sub__(self, other: "FrameVector") -> "FrameVector":
        return FrameVector(self.c1 - other.c1, self.c2 - other.c2, self.c3 - other.c3)

    def __mul__(self, s) -> "FrameVector":
        return FrameVector(s * self.c1, s * self.c2, s * self.c3)

    __rmul__ = __mul__


def inner(v: FrameVector, w: FrameVector):
    """g(v, w); the frame is orthonormal so this is the Euclidean dot product."""
    return v.c1 * w.c1 + v.c2 * w.c2 + v.c3 * w.c3


def frame_to_coordinates(v: FrameVector, p: DomainPoint) -> np.ndarray:
    """Coordinate components (v^x, v^y, v^z) of a frame vector at ``p``."""
    return np.stack(np.broadcast_arrays(p.y * v.c1, p.y * v.c2, v.c3), axis=-1).astype(float)


def coordinates_to_frame(v, p: DomainPoint) -> FrameVector:
    v = np.asarray(v, dtype=float)
    return FrameVector(v[..., 0] / p.y, v[..., 1] / p.y, v[..., 2])


def metric_tensor(p: DomainPoint) -> np.ndarray:
    """Metric in the coordinate basis, shape ``(..., 3, 3)``."""
    y = np.asarray(p.y, dtype=float)
    g = np.zeros(y.shape + (3, 3))
    g[..., 0, 0] = 1.0 / y ** 2
    g[..., 1, 1] = 1.0 / y ** 2
    g[..., 2, 2] = 1.0
    return g


@dataclass(frozen=True)
class ChristoffelTable:
    """Christoffel symbols of the coordinate basis (d/dx, d/dy, d/dz).

    ``gamma[i, j, k]`` holds the symbol with lower indices ``i, j`` and upper
    index ``k``, 0-based.  Use :meth:`symbol` for the 1-based convention.
    """

    gamma: np.ndarray

    def symbol(self, upper: int, i: int, j: int):
        """1-based lookup of Gamma^upper_{i j}."""
        return self.gamma[..., i - 1, j - 1, upper - 1]

    def labelled(self) -> dict[str, float]:
        """All 27 entries keyed ``G^k_ij`` with 1-based labels (scalar points only)."""
        return {
            f"G^{k}_{i}{j}": float(self.symbol(k, i, j))
            for k in range(1, 4)
            for i in range(1, 4)
            for j in range(1, 4)
        }


def christoffels(p: DomainPoint) -> ChristoffelTable:
    y = np.asarray(p.y, dtype=float)
    gam = np.zeros(y.shape + (3, 3, 3))
    inv = 1.0 / y
    gam[..., 0, 1, 0] = -inv
    gam[..., 1, 0, 0] = -inv
    gam[..., 1, 1, 1] = -inv
    gam[..., 0, 0, 1] = inv
    return ChristoffelTable(gam)


def geodesic_curvature_graph_curve(y, yp, ypp):
    """Geodesic curvature in H^2 of the curve x -> (x, y(x)).

    Orientation follows the rotation J(a E1 + b E2) = -b E1 + a E2, for
    which horocycles ``y = const`` have curvature +1 and semicircles
    centred on the boundary axis have curvature 0.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0.0):
        raise DomainViolation("geodesic curvature requires y > 0")
    return (y * ypp + yp ** 2 + 1.0) / (1.0 + yp ** 2) ** 1.5


def covariant_derivative_along(
    value: FrameVector, dvalue: FrameVector, velocity: FrameVector, p: DomainPoint
) -> FrameVector:
    """Levi-Civita derivative of a field along a curve through ``p``.

    ``value`` is the field at ``p``, ``dvalue`` the ordinary derivative of its
    frame components along the curve, ``velocity`` the curve's velocity.
    """
    X = frame_to_coordinates(velocity, p)
    V = frame_to_coordinates(value, p)
    y = np.asarray(p.y, dtype=float)
    # d/dt of coordinate components: (y c)' = y c' + y' c, with y' = X^y
    dV = np.stack(
        np.broadcast_arrays(
            y * dvalue.c1 + X[..., 1] * value.c1,
            y * dvalue.c2 + X[..., 1] * value.c2,
            dvalue.c3,
        ),
        axis=-1,
    ).astype(float)
    gam = christoffels(p).gamma
    dV = dV + np.einsum("...ijk,...i,...j->...k", gam, X, V)
    return coordinates_to_frame(dV, p)


def covariant_derivative(
    value: FrameVector, jacobian, direction: FrameVector, p: DomainPoint
) -> FrameVector:
    """Covariant derivative of a frame-vector field in a given direction.

    Parameters
    ----------
    value : FrameVector
        Field components at ``p``.
    jacobian : array_like, shape (3, 3)
        ``jacobian[a, b]`` is the partial derivative of the frame component
        ``c_{a+1}`` with respect to coordinate ``b`` (x, y, z).
    direction : FrameVector
        Direction vector at ``p`` in frame components.
    p : DomainPoint
    """
    X = frame_to_coordinates(direction, p)
    dc = np.einsum("...ab,...b->...a", np.asarray(jacobian, dtype=float), X)
    return covariant_derivative_along(value, FrameVector.from_array(dc), direction, p)


def covariant_derivative_fd(field, direction: FrameVector, p: DomainPoint, z: float = 0.0):
    """Covariant derivative of a callable field ``field(x, y, z) -> FrameVector``.

    Partial derivatives are central differences with step ``FD_STEP``.
    """
    jac = np.zeros((3, 3))
    coords = [float(p.x), float(p.y), float(z)]
    for b in range(3):
        h = float(fd_step(coords[b]))
        up = list(coords)
        dn = list(coords)
        up[b] += h
        dn[b] -= h
        jac[:, b] = (field(*up).as_array() - field(*dn).as_array()) / (2 * h)
    return covariant_derivative(field(*coords), jac, direction, p)
