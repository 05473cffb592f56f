"""Fitting binary images with one stress component of the invisible fields.

Every basis generator produces a stress field the measurement setup cannot
see.  On a fixed slice x3 = const, the s11 values of those fields span a
function space; projecting a binary +-1 image onto it shows how much of an
arbitrary pattern the blind subspace can carry.  Enlarging N can only grow
the span (a generator padded with zero high modes is still a generator), so
the fit residual is monotone in N.

Image convention: values[row, col] with row along x1 and col along x2, pixel
(0, 0) at the corner x1 = x2 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ElasticConstants
from .nullspace import (
    MODE_BASIS,
    NullGenerator,
    coeffs_from_generator,
    mode_coefficients,
)


def _as_binary(values: np.ndarray) -> np.ndarray:
    out = np.where(np.asarray(values, dtype=float) > 0, 1.0, -1.0)
    return out


@dataclass(frozen=True)
class BinaryTarget:
    """A +-1 image to be approximated on the slice."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("target image must be 2-D")
        if not np.all(np.isin(v, (-1.0, 1.0))):
            raise ValueError("target image entries must be +1 or -1")
        object.__setattr__(self, "values", v)

    @classmethod
    def checkerboard(cls, cells: int = 16, resolution: int = 64) -> "BinaryTarget":
        """Checkerboard with ``cells`` sign changes per axis, cell-centered.

        Parity is taken from the nearest cell center, which leaves the
        pattern symmetric under reflection about the slice midpoint.  A
        corner-anchored parity would instead be antisymmetric there and
        exactly orthogonal to every design column, so nothing could fit it.
        """
        x = np.linspace(0.0, 2.0 * np.pi, resolution)
        idx = np.floor(x * cells / (2.0 * np.pi) + 0.5).astype(int)
        parity = (idx[:, None] + idx[None, :]) % 2
        return cls(np.where(parity == 0, 1.0, -1.0))

    @classmethod
    def disk(cls, resolution: int = 64, radius: float = np.pi / 2) -> "BinaryTarget":
        x = np.linspace(0.0, 2.0 * np.pi, resolution)
        r2 = (x[:, None] - np.pi) ** 2 + (x[None, :] - np.pi) ** 2
        return cls(np.where(r2 <= radius * radius, 1.0, -1.0))

    @classmethod
    def from_csv(cls, path) -> "BinaryTarget":
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        return cls(_as_binary(data))

    @classmethod
    def from_pgm(cls, path) -> "BinaryTarget":
        with open(path, "rb") as fh:
            raw = fh.read()
        magic, fields, offset = _parse_pgm_header(raw)
        width, height, maxval = fields
        count = width * height
        if magic == "P2":
            text = b"\n".join(line.split(b"#")[0] for line in raw[offset:].split(b"\n"))
            pixels = np.array(text.split()[:count], dtype=float)
        else:
            if maxval > 255:
                raise ValueError("16-bit PGM not supported")
            pixels = np.frombuffer(raw, dtype=np.uint8, count=count, offset=offset).astype(float)
        if pixels.size != count:
            raise ValueError("truncated PGM pixel data")
        grid = pixels.reshape(height, width)
        return cls(np.where(grid * 2 >= maxval, 1.0, -1.0))

    def resample(self, resolution: int) -> "BinaryTarget":
        """Nearest-neighbour resample onto a resolution x resolution slice grid."""
        src_h, src_w = self.values.shape
        pos = np.linspace(0.0, 1.0, resolution)
        rows = np.minimum((pos * src_h).astype(int), src_h - 1)
        cols = np.minimum((pos * src_w).astype(int), src_w - 1)
        return BinaryTarget(self.values[np.ix_(rows, cols)])


def _parse_pgm_header(raw: bytes):
    if raw[:2] not in (b"P2", b"P5"):
        raise ValueError("not a PGM file (expected P2 or P5)")
    magic = raw[:2].decode()
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("malformed PGM header")
        fields.append(int(raw[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if width <= 0 or height <= 0 or maxval <= 0:
        raise ValueError("malformed PGM header")
    return magic, (width, height, maxval), pos


def write_pgm(values: np.ndarray, path) -> None:
    """Write a 2-D array as ASCII PGM, linearly rescaled to 0..255."""
    v = np.asarray(values, dtype=float)
    lo = float(v.min())
    hi = float(v.max())
    if hi > lo:
        scaled = np.rint((v - lo) / (hi - lo) * 255).astype(int)
    else:
        scaled = np.full(v.shape, 128, dtype=int)
    lines = ["P2", f"{v.shape[1]} {v.shape[0]}", "255"]
    for row in scaled:
        lines.append(" ".join(str(int(p)) for p in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def slice_design_matrix(
    basis: np.ndarray,
    N: int,
    resolution: int = 64,
    slice_x3: float = np.pi / 2,
    constants: ElasticConstants = ElasticConstants(),
) -> np.ndarray:
    """s11 slice values of every basis generator, one column per generator.

    Rows run over slice nodes (i1, i2) in C order on the uniform
    resolution x resolution grid covering [0, 2pi]^2.
    """
    if basis.ndim != 2 or basis.shape[0] != N ** 3:
        raise ValueError("basis must have N^3 rows")
    x = np.linspace(0.0, 2.0 * np.pi, resolution)
    freq = np.arange(1.0, N + 1.0)
    cos1 = np.cos(np.outer(freq, x))
    cos2 = cos1
    cos3 = np.cos(freq * slice_x3)
    if MODE_BASIS["11"] != ("cos", "cos", "cos"):
        raise AssertionError("s11 mode basis changed")
    design = np.empty((resolution * resolution, basis.shape[1]))
    for q in range(basis.shape[1]):
        gen = NullGenerator.from_flat(N, basis[:, q])
        pot = coeffs_from_generator(gen, constants)
        c11 = mode_coefficients(pot)["11"]
        sl = np.einsum("jkl,ja,kb,l->ab", c11, cos1, cos2, cos3, optimize=True)
        design[:, q] = sl.reshape(-1)
    return design


@dataclass(frozen=True)
class FitResult:
    N: int
    resolution: int
    slice_x3: float
    coefficients: np.ndarray
    rms_residual: float
    fitted: np.ndarray

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "resolution": self.resolution,
            "slice_x3": self.slice_x3,
            "coefficients": [float(c) for c in self.coefficients],
            "rms_residual": self.rms_residual,
        }


def fit_target(
    target: BinaryTarget,
    basis: np.ndarray,
    N: int,
    resolution: int = 64,
    slice_x3: float = np.pi / 2,
    constants: ElasticConstants = ElasticConstants(),
) -> FitResult:
    """Least-squares projection of the target onto the blind slice span.

    Uses the minimum-norm solution, so collinear basis columns are harmless.
    """
    resampled = target.resample(resolution)
    design = slice_design_matrix(basis, N, resolution, slice_x3, constants)
    rhs = resampled.values.reshape(-1)
    coeff, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    fitted = design @ coeff
    rms = float(np.sqrt(np.mean((fitted - rhs) ** 2)))
    return FitResult(
        N=N,
        resolution=resolution,
        slice_x3=float(slice_x3),
        coefficients=coeff,
        rms_residual=rms,
        fitted=fitted.reshape(resolution, resolution),
    )


def combined_generator(basis: np.ndarray, coefficients: np.ndarray, N: int) -> NullGenerator:
    """Collapse a fitted coefficient vector back into a single generator."""
    return NullGenerator.from_flat(N, basis @ np.asarray(coefficients, dtype=float))
