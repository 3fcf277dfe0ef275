"""Grid-vs-grid comparisons and convergence tables."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .gridgen import Grid1D, peclet, peclet_profile, uniform_grid
from .solver import TransportProblem, error_norms, solve

__all__ = ["BenchEntry", "BenchReport", "compare", "ConvergenceRow", "convergence_study"]


@dataclass(frozen=True)
class BenchEntry:
    label: str
    node_count: int = 0
    linf: float = math.nan
    l2w: float = math.nan
    max_peclet: float = math.nan
    min_step: float = math.nan
    max_step: float = math.nan
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class BenchReport:
    problem: TransportProblem
    entries: list[BenchEntry] = field(default_factory=list)

    def __getitem__(self, label: str) -> BenchEntry:
        for entry in self.entries:
            if entry.label == label:
                return entry
        raise KeyError(label)


def _measure(prob: TransportProblem, label: str, grid: Union[Grid1D, Exception]) -> BenchEntry:
    if isinstance(grid, Exception):
        return BenchEntry(label=label, error=str(grid))
    try:
        norms = error_norms(solve(prob, grid), prob)
        steps = grid.steps
        return BenchEntry(
            label=label,
            node_count=len(grid),
            linf=norms["linf"],
            l2w=norms["l2w"],
            max_peclet=float(np.max(peclet_profile(grid, prob.b, prob.mu))),
            min_step=float(np.min(steps)),
            max_step=float(np.max(steps)),
        )
    except (ValueError, ArithmeticError) as exc:
        return BenchEntry(label=label, node_count=len(grid), error=str(exc))


def compare(
    prob: TransportProblem,
    grids: Iterable[tuple[str, Union[Grid1D, Exception]]],
    workers: int = 1,
) -> BenchReport:
    """Solve ``prob`` on every labelled grid and collect error and mesh metrics.

    A grid slot may hold an exception (e.g. a grid that failed to load);
    it and any solver failure become an entry with ``error`` set instead of
    aborting the report. Entry order follows ``grids`` for any ``workers``.
    """
    items: Sequence = list(grids)
    if not items:
        raise ValueError("compare needs at least one grid")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(lambda item: _measure(prob, *item), items))
    else:
        entries = [_measure(prob, label, grid) for label, grid in items]
    return BenchReport(problem=prob, entries=entries)


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    linf: float
    observed_order: float = math.nan


# below this the error is round-off and an order estimate is meaningless
ROUNDOFF_FLOOR = 1e-12


def convergence_study(prob: TransportProblem, h0: float, levels: int) -> list[ConvergenceRow]:
    """L-infinity error on uniform grids ``h0, h0/2, ...`` with observed orders.

    ``observed_order`` is ``log2`` of successive error ratios; it is NaN on
    the first level and whenever either error is at round-off.
    """
    if levels < 2:
        raise ValueError(f"levels must be >= 2, got {levels}")
    if peclet(h0, abs(prob.b), prob.mu) >= 1.0:
        raise ValueError("start below the Péclet limit for a clean study")
    rows: list[ConvergenceRow] = []
    for level in range(levels):
        h = h0 / 2**level
        linf = error_norms(solve(prob, uniform_grid(prob.lo, prob.hi, h)), prob)["linf"]
        order = math.nan
        if rows and rows[-1].linf > ROUNDOFF_FLOOR and linf > ROUNDOFF_FLOOR:
            order = math.log2(rows[-1].linf / linf)
        rows.append(ConvergenceRow(h=h, linf=linf, observed_order=order))
    return rows
