"""Complex sample grids with signed index ranges.

Every array in the package (pilots, channels, received signals, filter
outputs) lives on a :class:`ComplexGrid`. Rows are the Doppler/frequency
axis, columns the delay/time axis. Reads outside the declared ranges are
zero, which is what the linear and twisted convolutions rely on.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, TextIO

import numpy as np


class GridIndex(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True, eq=False)
class ComplexGrid:
    """Immutable 2D complex array anchored at ``(row_min, col_min)``.

    Parameters
    ----------
    data : array_like
        2D complex samples. Copied and made read-only.
    row_min, col_min : int
        Signed index of ``data[0, 0]``.
    delta_f : float
        Hz per row step.
    delta_t : float
        Seconds per column step.
    """

    data: np.ndarray
    row_min: int = 0
    col_min: int = 0
    delta_f: float = 1.0
    delta_t: float = 1.0

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.complex128, copy=True)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2:
            raise ValueError(f"grid data must be 2D, got shape {arr.shape}")
        if not (self.delta_f > 0 and self.delta_t > 0):
            raise ValueError("delta_f and delta_t must be positive")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "row_min", int(self.row_min))
        object.__setattr__(self, "col_min", int(self.col_min))
        object.__setattr__(self, "delta_f", float(self.delta_f))
        object.__setattr__(self, "delta_t", float(self.delta_t))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def row_max(self) -> int:
        return self.row_min + self.data.shape[0] - 1

    @property
    def col_max(self) -> int:
        return self.col_min + self.data.shape[1] - 1

    @property
    def row_range(self) -> tuple[int, int]:
        return (self.row_min, self.row_max)

    @property
    def col_range(self) -> tuple[int, int]:
        return (self.col_min, self.col_max)

    def rows(self) -> np.ndarray:
        return np.arange(self.row_min, self.row_max + 1)

    def cols(self) -> np.ndarray:
        return np.arange(self.col_min, self.col_max + 1)

    def contains(self, row: int, col: int) -> bool:
        return self.row_min <= row <= self.row_max and self.col_min <= col <= self.col_max

    def at(self, row: int, col: int) -> complex:
        """Sample at a signed index, zero outside the support."""
        if not self.contains(row, col):
            return 0j
        return complex(self.data[row - self.row_min, col - self.col_min])

    def __getitem__(self, index) -> complex:
        row, col = index
        return self.at(row, col)

    def window(self, row_range: tuple[int, int], col_range: tuple[int, int]) -> np.ndarray:
        """Copy of the inclusive index window, zero-filled outside the support."""
        r0, r1 = row_range
        c0, c1 = col_range
        out = np.zeros((max(r1 - r0 + 1, 0), max(c1 - c0 + 1, 0)), dtype=np.complex128)
        lo_r, hi_r = max(r0, self.row_min), min(r1, self.row_max)
        lo_c, hi_c = max(c0, self.col_min), min(c1, self.col_max)
        if lo_r <= hi_r and lo_c <= hi_c:
            out[lo_r - r0:hi_r - r0 + 1, lo_c - c0:hi_c - c0 + 1] = self.data[
                lo_r - self.row_min:hi_r - self.row_min + 1,
                lo_c - self.col_min:hi_c - self.col_min + 1,
            ]
        return out

    def replace(self, data=None, row_min=None, col_min=None) -> "ComplexGrid":
        return ComplexGrid(
            self.data if data is None else data,
            self.row_min if row_min is None else row_min,
            self.col_min if col_min is None else col_min,
            self.delta_f,
            self.delta_t,
        )

    def equals(self, other: "ComplexGrid", atol: float = 0.0) -> bool:
        """Same ranges and samples within ``atol`` (exact by default)."""
        if self.row_range != other.row_range or self.col_range != other.col_range:
            return False
        return bool(np.all(np.abs(self.data - other.data) <= atol))


def zeros(row_range, col_range, delta_f=1.0, delta_t=1.0) -> ComplexGrid:
    shape = (row_range[1] - row_range[0] + 1, col_range[1] - col_range[0] + 1)
    return ComplexGrid(np.zeros(shape), row_range[0], col_range[0], delta_f, delta_t)


def delta(row: int = 0, col: int = 0, value: complex = 1.0, delta_f=1.0, delta_t=1.0) -> ComplexGrid:
    """Single-sample grid ``value`` at ``(row, col)``."""
    return ComplexGrid(np.array([[value]]), row, col, delta_f, delta_t)


def energy(g: ComplexGrid) -> float:
    """Sum of squared magnitudes over the support."""
    return float(np.sum(np.abs(g.data) ** 2))


def normalize_energy(g: ComplexGrid) -> ComplexGrid:
    """Scale ``g`` to unit energy."""
    e = energy(g)
    if e == 0.0:
        raise ValueError("cannot normalise an all-zero grid")
    return g.replace(data=g.data / np.sqrt(e))


def translate(g: ComplexGrid, shift) -> ComplexGrid:
    """Move the grid by ``shift = (rows, cols)``; samples are unchanged."""
    dr, dc = shift
    return g.replace(row_min=g.row_min + int(dr), col_min=g.col_min + int(dc))


def embed(g: ComplexGrid, row_range, col_range) -> ComplexGrid:
    """Re-window ``g`` onto the given index ranges (crop or zero-pad)."""
    return ComplexGrid(g.window(row_range, col_range), row_range[0], col_range[0], g.delta_f, g.delta_t)


# -- text dump ---------------------------------------------------------------

_HEADER_RE = re.compile(
    r"#\s*rows=\[(-?\d+),(-?\d+)\]\s+cols=\[(-?\d+),(-?\d+)\]"
    r"\s+delta_f=(\S+)\s+delta_t=(\S+)"
)


def fmt_num(x: float) -> str:
    """9 significant digits, locale independent."""
    # adding 0.0 turns -0.0 into 0.0
    return f"{x + 0.0:.9g}"


def fmt_complex(z: complex) -> str:
    return f"{z.real + 0.0:.9g}{z.imag + 0.0:+.9g}j"


def format_grid(g: ComplexGrid) -> str:
    buf = io.StringIO()
    write_grid(g, buf)
    return buf.getvalue()


def write_grid(g: ComplexGrid, fh: TextIO) -> None:
    fh.write(
        f"# rows=[{g.row_min},{g.row_max}] cols=[{g.col_min},{g.col_max}] "
        f"delta_f={fmt_num(g.delta_f)} delta_t={fmt_num(g.delta_t)}\n"
    )
    for row in g.data:
        fh.write(",".join(fmt_complex(z) for z in row))
        fh.write("\n")


def parse_grid(text: str) -> ComplexGrid:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty grid dump")
    m = _HEADER_RE.match(lines[0])
    if m is None:
        raise ValueError(f"bad grid header: {lines[0]!r}")
    r0, r1, c0, c1 = (int(v) for v in m.groups()[:4])
    delta_f, delta_t = float(m.group(5)), float(m.group(6))
    body = lines[1:]
    if len(body) != r1 - r0 + 1:
        raise ValueError(f"expected {r1 - r0 + 1} rows, found {len(body)}")
    data = np.array([[complex(tok) for tok in ln.split(",")] for ln in body])
    if data.shape != (r1 - r0 + 1, c1 - c0 + 1):
        raise ValueError(f"grid body has shape {data.shape}, header implies {(r1 - r0 + 1, c1 - c0 + 1)}")
    return ComplexGrid(data, r0, c0, delta_f, delta_t)


def load_grid(path) -> ComplexGrid:
    return parse_grid(Path(path).read_text())


def write_triplets(g: ComplexGrid, fh: TextIO, physical: bool = True) -> None:
    """Magnitude surface as gnuplot ``x y z`` lines.

    ``x`` is the delay axis and ``y`` the Doppler axis (physical units
    unless ``physical`` is false). One block per row, blank-line separated,
    so ``splot`` reads it as a grid.
    """
    mag = np.abs(g.data)
    cols = g.cols()
    for i, row in enumerate(g.rows()):
        y = row * g.delta_f if physical else row
        for j, col in enumerate(cols):
            x = col * g.delta_t if physical else col
            fh.write(f"{fmt_num(x)} {fmt_num(y)} {fmt_num(mag[i, j])}\n")
        fh.write("\n")
