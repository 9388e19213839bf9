"""Plain-text bitmaps for cell sets and phase fields.

Layout::

    d h n_1 ... n_d
    # origin x_1 ... x_d        (optional; default origin is 0)
    <one row per index tuple of the first d-1 axes, C order>

Set rows are strings of 0/1 characters of length n_d.  Phase-field rows hold
n_d whitespace-separated decimals.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .grid import CellSet, GridError, GridSpec, PhaseField


class BitmapFormatError(GridError):
    pass


def _header(grid: GridSpec):
    head = f"{grid.dimension} {grid.cell_size!r} " + " ".join(str(n) for n in grid.counts)
    origin = "# origin " + " ".join(repr(float(x)) for x in grid.origin)
    return head + "\n" + origin + "\n"


def format_cellset(s: CellSet) -> str:
    rows = s.indicator.reshape(-1, s.grid.counts[-1]).astype(np.uint8) + ord("0")
    body = "\n".join(r.tobytes().decode("ascii") for r in rows)
    return _header(s.grid) + body + "\n"


def format_phasefield(u: PhaseField) -> str:
    rows = u.values.reshape(-1, u.grid.counts[-1])
    body = "\n".join(" ".join(repr(float(v)) for v in r) for r in rows)
    return _header(u.grid) + body + "\n"


def _parse(text: str, budget=None):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise BitmapFormatError("empty bitmap")
    try:
        head = lines[0].split()
        d = int(head[0])
        h = float(head[1])
        counts = tuple(int(x) for x in head[2:])
    except (ValueError, IndexError) as exc:
        raise BitmapFormatError(f"bad header {lines[0]!r}") from exc
    if len(counts) != d:
        raise BitmapFormatError("header must list one count per dimension")
    origin = (0.0,) * d
    rows = lines[1:]
    if rows and rows[0].startswith("#"):
        parts = rows[0][1:].split()
        if parts and parts[0] == "origin":
            origin = tuple(float(x) for x in parts[1:])
        rows = rows[1:]
    kw = {} if budget is None else {"budget": budget}
    grid = GridSpec(d, h, origin, counts, **kw)
    n_rows = grid.n_cells // counts[-1]
    if len(rows) != n_rows:
        raise BitmapFormatError(f"expected {n_rows} rows, found {len(rows)}")
    return grid, rows


def parse_cellset(text: str, budget=None) -> CellSet:
    grid, rows = _parse(text, budget)
    n = grid.counts[-1]
    if any(len(r) != n or set(r) - {"0", "1"} for r in rows):
        raise BitmapFormatError(f"set rows must be {n} characters of 0/1")
    data = np.frombuffer("".join(rows).encode("ascii"), dtype=np.uint8) == ord("1")
    return CellSet(grid, data.reshape(grid.shape))


def parse_phasefield(text: str, budget=None) -> PhaseField:
    grid, rows = _parse(text, budget)
    try:
        data = np.array([[float(v) for v in r.split()] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise BitmapFormatError("phase-field rows must be decimals") from exc
    if data.shape != (len(rows), grid.counts[-1]):
        raise BitmapFormatError("phase-field row length mismatch")
    return PhaseField(grid, data.reshape(grid.shape))


def read_cellset(path, budget=None) -> CellSet:
    return parse_cellset(Path(path).read_text(), budget)


def write_cellset(path, s: CellSet):
    Path(path).write_text(format_cellset(s))


def read_phasefield(path, budget=None) -> PhaseField:
    return parse_phasefield(Path(path).read_text(), budget)


def write_phasefield(path, u: PhaseField):
    Path(path).write_text(format_phasefield(u))
