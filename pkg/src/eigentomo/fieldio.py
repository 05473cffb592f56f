"""Plain-text export of sampled tensor fields (CSV and legacy VTK)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .fields import COMPONENTS, SymTensorField3

_CSV_HEADER = "x1,x2,x3,s11,s22,s33,s23,s13,s12"


def write_csv(field: SymTensorField3, path) -> None:
    """One row per node: x1,x2,x3 then the six components.

    Nodes are listed with x3 varying fastest, then x2, then x1.
    """
    grid = field.grid
    x = grid.nodes()
    lines = [_CSV_HEADER]
    for i1 in range(grid.m):
        for i2 in range(grid.m):
            for i3 in range(grid.m):
                vals = [x[i1], x[i2], x[i3]]
                vals.extend(field.data[q, i1, i2, i3] for q in range(6))
                lines.append(",".join(repr(float(v)) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")


def write_vtk(field: SymTensorField3, path, title: str = "eigentomo field") -> None:
    """Legacy ASCII VTK structured-points file with six scalar arrays.

    VTK expects the x index to vary fastest, which matches a Fortran-order
    ravel of our (i1, i2, i3) lattices.
    """
    grid = field.grid
    m, h = grid.m, grid.h
    parts = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {m} {m} {m}",
        "ORIGIN 0.0 0.0 0.0",
        f"SPACING {h!r} {h!r} {h!r}",
        f"POINT_DATA {m ** 3}",
    ]
    for q, name in enumerate(COMPONENTS):
        parts.append(f"SCALARS s{name} double 1")
        parts.append("LOOKUP_TABLE default")
        values = np.asarray(field.data[q]).ravel(order="F")
        parts.extend(repr(float(v)) for v in values)
    Path(path).write_text("\n".join(parts) + "\n")
