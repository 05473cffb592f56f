"""Grids, symmetric tensor fields, and isotropic elasticity operations.

All fields live on the cube [0, 2*pi]^3 sampled on a uniform lattice of
m >= 3 nodes per axis, x_i = 2*pi*t/(m-1) for t = 0..m-1.  Symmetric rank-2
tensor fields store their six independent components in the fixed order
(11, 22, 33, 23, 13, 12).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PERIOD = 2.0 * np.pi

COMPONENTS = ("11", "22", "33", "23", "13", "12")
_COMP_INDEX = {name: q for q, name in enumerate(COMPONENTS)}

#: Boundary faces in reporting order; "x1-" is the face x1 = 0, "x1+" is x1 = 2*pi.
FACES = ("x1-", "x1+", "x2-", "x2+", "x3-", "x3+")


@dataclass(frozen=True)
class ElasticConstants:
    """Isotropic Hooke parameters (Young modulus, Poisson ratio)."""

    young: float = 1.0
    poisson: float = 0.28

    def __post_init__(self):
        if not (self.young > 0.0):
            raise ValueError(f"Young modulus must be positive, got {self.young}")
        if not (-1.0 < self.poisson < 0.5):
            raise ValueError(f"Poisson ratio must lie in (-1, 0.5), got {self.poisson}")


@dataclass(frozen=True)
class Grid3:
    """Uniform node lattice on the cube, endpoints included."""

    m: int

    def __post_init__(self):
        if self.m < 3:
            raise ValueError(f"grid needs at least 3 nodes per axis, got m={self.m}")

    @property
    def h(self) -> float:
        return PERIOD / (self.m - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, PERIOD, self.m)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.m, self.m, self.m)


def _check_lattice(data: np.ndarray, lead: int, grid: Grid3, what: str) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    expected = (lead, grid.m, grid.m, grid.m)
    if data.shape != expected:
        raise ValueError(f"{what} lattice must have shape {expected}, got {data.shape}")
    return data


def require_finite(data: np.ndarray, names) -> None:
    """Reject NaN/inf values, reporting the offending component and node."""
    bad = ~np.isfinite(data)
    if bad.any():
        comp, i1, i2, i3 = (int(v[0]) for v in np.nonzero(bad))
        raise ValueError(
            f"non-finite value in component {names[comp]} at node ({i1}, {i2}, {i3})"
        )


class SymTensorField3:
    """Symmetric tensor field; ``data`` has shape (6, m, m, m)."""

    def __init__(self, grid: Grid3, data: np.ndarray):
        self.grid = grid
        self.data = _check_lattice(data, 6, grid, "symmetric tensor")

    @classmethod
    def zeros(cls, grid: Grid3) -> "SymTensorField3":
        return cls(grid, np.zeros((6, grid.m, grid.m, grid.m)))

    @classmethod
    def from_components(cls, grid: Grid3, comps) -> "SymTensorField3":
        field = cls.zeros(grid)
        for name, values in comps.items():
            field.data[_COMP_INDEX[name]] = values
        return field

    def component(self, name: str) -> np.ndarray:
        return self.data[_COMP_INDEX[name]]

    @property
    def tau(self) -> np.ndarray:
        """Shear triple (s23, s13, s12), shape (3, m, m, m)."""
        return self.data[3:]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data)))


class VectorField3:
    """Vector field; ``data`` has shape (3, m, m, m)."""

    def __init__(self, grid: Grid3, data: np.ndarray):
        self.grid = grid
        self.data = _check_lattice(data, 3, grid, "vector")

    @classmethod
    def zeros(cls, grid: Grid3) -> "VectorField3":
        return cls(grid, np.zeros((3, grid.m, grid.m, grid.m)))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data)))


def hooke_strain_from_stress(sigma: SymTensorField3, constants: ElasticConstants) -> SymTensorField3:
    """Strain from stress for an isotropic material.

    eps_ii = (s_ii - nu*(sum of the other two diagonals)) / E and
    eps_ij = (1 + nu) * s_ij / E for i != j.
    """
    require_finite(sigma.data, COMPONENTS)
    E, nu = constants.young, constants.poisson
    s11, s22, s33, s23, s13, s12 = sigma.data
    shear = (1.0 + nu) / E
    out = np.stack(
        [
            (s11 - nu * (s22 + s33)) / E,
            (s22 - nu * (s11 + s33)) / E,
            (s33 - nu * (s11 + s22)) / E,
            shear * s23,
            shear * s13,
            shear * s12,
        ]
    )
    return SymTensorField3(sigma.grid, out)


def hooke_stress_from_strain(eps: SymTensorField3, constants: ElasticConstants) -> SymTensorField3:
    """Exact inverse of :func:`hooke_strain_from_stress` (Lame form)."""
    require_finite(eps.data, COMPONENTS)
    E, nu = constants.young, constants.poisson
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E / (2.0 * (1.0 + nu))
    e11, e22, e33, e23, e13, e12 = eps.data
    trace = e11 + e22 + e33
    out = np.stack(
        [
            lam * trace + 2.0 * mu * e11,
            lam * trace + 2.0 * mu * e22,
            lam * trace + 2.0 * mu * e33,
            2.0 * mu * e23,
            2.0 * mu * e13,
            2.0 * mu * e12,
        ]
    )
    return SymTensorField3(eps.grid, out)


# Row j of the divergence pulls the components (sigma_1j, sigma_2j, sigma_3j).
_DIV_ROWS = (("11", "12", "13"), ("12", "22", "23"), ("13", "23", "33"))


def divergence_fd(sigma: SymTensorField3) -> VectorField3:
    """Finite-difference divergence, second order inside and on the boundary.

    Central differences at interior nodes and one-sided three-point stencils
    on the boundary (both O(h^2)).  Requires m >= 5 so the boundary stencils
    do not straddle the domain.
    """
    grid = sigma.grid
    if grid.m < 5:
        raise ValueError(f"divergence_fd needs m >= 5, got m={grid.m}")
    require_finite(sigma.data, COMPONENTS)
    h = grid.h
    out = np.zeros((3,) + grid.shape)
    for row, names in enumerate(_DIV_ROWS):
        for axis, name in enumerate(names):
            out[row] += np.gradient(sigma.component(name), h, axis=axis, edge_order=2)
    return VectorField3(grid, out)


def traction_on_boundary(sigma: SymTensorField3) -> dict[str, np.ndarray]:
    """Traction vectors sigma . n on the six faces, outward normals.

    Returns a dict keyed by :data:`FACES`; each value has shape (m, m, 3)
    over the two in-face axes in ascending coordinate order.
    """
    require_finite(sigma.data, COMPONENTS)
    result: dict[str, np.ndarray] = {}
    for axis in range(3):
        names = _DIV_ROWS[axis]  # row axis+1 of sigma: components (sigma_{axis+1,j})_j
        for side, face in ((0, FACES[2 * axis]), (-1, FACES[2 * axis + 1])):
            sign = -1.0 if side == 0 else 1.0
            index: list = [slice(None)] * 3
            index[axis] = side
            vecs = [sign * sigma.component(name)[tuple(index)] for name in names]
            result[face] = np.stack(vecs, axis=-1)
    return result


def max_traction(sigma: SymTensorField3) -> float:
    """Largest traction magnitude component over all six faces."""
    faces = traction_on_boundary(sigma)
    return max(float(np.max(np.abs(v))) for v in faces.values())
