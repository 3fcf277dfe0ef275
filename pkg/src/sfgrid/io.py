"""CSV formats for grids, fields, solutions and bench reports.

All reals are written with 17 significant digits so a grid read back
reproduces the written coordinates exactly.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, TextIO

import numpy as np

from .bench import BenchReport, ConvergenceRow
from .gridgen import Grid1D, peclet_profile
from .solver import Solution, TransportProblem, exact_solution

GRID_HEADER = ["index", "x", "h_next", "peclet_next"]
FIELD_HEADER = ["x", "k", "h"]
SOLUTION_HEADER = ["x", "u_numeric", "u_exact", "abs_err"]
REPORT_HEADER = ["label", "node_count", "linf", "l2w", "max_peclet", "min_step", "max_step"]
CONVERGENCE_HEADER = ["h", "linf", "observed_order"]
ERROR_MARKER = "ERR"


def fmt(value: float) -> str:
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".17g")


def _dump(header: list[str], rows: Iterable[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def grid_csv(grid: Grid1D, b: float, mu: float) -> str:
    steps = grid.steps
    pe = peclet_profile(grid, b, mu)
    rows = []
    for i, x in enumerate(grid.nodes):
        if i < len(steps):
            rows.append([str(i), fmt(x), fmt(steps[i]), fmt(pe[i])])
        else:
            rows.append([str(i), fmt(x), "", ""])
    return _dump(GRID_HEADER, rows)


def read_grid(stream: TextIO) -> Grid1D:
    """Parse a grid CSV; only the ``x`` column is used.

    Raises:
        ValueError: on a missing ``x`` column, unparsable numbers, or nodes
            that violate :class:`Grid1D` invariants.
    """
    reader = csv.DictReader(stream)
    if reader.fieldnames is None or "x" not in reader.fieldnames:
        raise ValueError("grid CSV has no 'x' column")
    xs = []
    for lineno, row in enumerate(reader, start=2):
        try:
            xs.append(float(row["x"]))
        except (TypeError, ValueError):
            raise ValueError(f"line {lineno}: bad x value {row['x']!r}") from None
    return Grid1D(np.array(xs))


def load_grid(path: str) -> Grid1D:
    with open(path, newline="") as fh:
        return read_grid(fh)


def field_csv(x, k, h) -> str:
    return _dump(FIELD_HEADER, ([fmt(a), fmt(b), fmt(c)] for a, b, c in zip(x, k, h)))


def solution_csv(sol: Solution, prob: TransportProblem) -> str:
    exact = exact_solution(prob, sol.x)
    rows = (
        [fmt(x), fmt(u), fmt(ue), fmt(abs(u - ue))]
        for x, u, ue in zip(sol.x, sol.values, exact)
    )
    return _dump(SOLUTION_HEADER, rows)


def report_csv(report: BenchReport) -> str:
    rows = []
    for e in report.entries:
        if e.ok:
            rows.append([e.label, str(e.node_count), fmt(e.linf), fmt(e.l2w),
                         fmt(e.max_peclet), fmt(e.min_step), fmt(e.max_step)])
        else:
            rows.append([e.label] + [ERROR_MARKER] * (len(REPORT_HEADER) - 1))
    return _dump(REPORT_HEADER, rows)


def convergence_csv(rows: list[ConvergenceRow]) -> str:
    return _dump(CONVERGENCE_HEADER, ([fmt(r.h), fmt(r.linf), fmt(r.observed_order)] for r in rows))


def write_text(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)
