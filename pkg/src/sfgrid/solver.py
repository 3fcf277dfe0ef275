"""Steady diffusion-transport ``-mu u'' + b u' = 0`` on nonuniform 1D grids.

Second derivative: three-point nonuniform stencil. First derivative:
one-sided from the inflow side (backward for ``b > 0``). The resulting
matrix is an M-matrix, so the Thomas sweep runs without pivoting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gridgen import Grid1D

__all__ = [
    "TransportProblem",
    "TridiagonalSystem",
    "Solution",
    "exact_solution",
    "boundary_layer_approx",
    "assemble",
    "solve_tridiagonal",
    "solve",
    "error_norms",
    "trapezoid_weights",
]

PIVOT_TOL = 1e-300


@dataclass(frozen=True)
class TransportProblem:
    mu: float
    b: float
    lo: float = 0.0
    hi: float = 1.0
    u_lo: float = 0.0
    u_hi: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.b == 0:
            raise ValueError("b must be nonzero")
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got lo={self.lo}, hi={self.hi}")


@dataclass(frozen=True)
class TridiagonalSystem:
    """Rows ``sub[i-1]*x[i-1] + diag[i]*x[i] + sup[i]*x[i+1] = rhs[i]``."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        for name in ("sub", "diag", "sup", "rhs"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.diag.size
        if n < 1:
            raise ValueError("empty system")
        if self.sub.size != n - 1 or self.sup.size != n - 1 or self.rhs.size != n:
            raise ValueError(
                f"inconsistent lengths: sub={self.sub.size}, diag={n}, "
                f"sup={self.sup.size}, rhs={self.rhs.size}"
            )

    @property
    def n(self) -> int:
        return int(self.diag.size)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)


@dataclass(frozen=True, eq=False)
class Solution:
    grid: Grid1D
    values: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes


def exact_solution(prob: TransportProblem, x):
    """Closed-form solution of the boundary-value problem at ``x``.

    Uses ``expm1`` ratios, switching to the form scaled by
    ``exp(r (x - hi))`` when ``r L`` is large so nothing overflows.
    """
    x_arr = np.asarray(x, dtype=float)
    span = prob.hi - prob.lo
    if np.any(x_arr < prob.lo - 1e-15 * span) or np.any(x_arr > prob.hi + 1e-15 * span):
        raise ValueError(f"x outside the domain [{prob.lo}, {prob.hi}]")
    x_arr = np.clip(x_arr, prob.lo, prob.hi)
    r = prob.b / prob.mu
    if r * span > 50.0:
        tail = math.exp(-r * span)
        shape = (np.exp(r * (x_arr - prob.hi)) - tail) / (1.0 - tail)
    else:
        shape = np.expm1(r * (x_arr - prob.lo)) / math.expm1(r * span)
    u = prob.u_lo + (prob.u_hi - prob.u_lo) * shape
    return float(u) if u.ndim == 0 else u


def boundary_layer_approx(prob: TransportProblem, x):
    """Dominant-transport approximation ``exp((b/mu)(x - 1))``."""
    u = np.exp(prob.b / prob.mu * (np.asarray(x, dtype=float) - 1.0))
    return float(u) if u.ndim == 0 else u


def assemble(prob: TransportProblem, grid: Grid1D) -> TridiagonalSystem:
    """Upwind finite-difference system with Dirichlet boundary rows."""
    x = grid.nodes
    n = x.size
    if n < 3:
        raise ValueError("no interior nodes")
    hm = x[1:-1] - x[:-2]
    hp = x[2:] - x[1:-1]
    mu, b = prob.mu, prob.b

    # -mu * u'' part
    lower = -mu * 2.0 / (hm * (hm + hp))
    center = mu * 2.0 / (hm * hp)
    upper = -mu * 2.0 / (hp * (hm + hp))
    # b * u' part, one-sided from the inflow side
    if b > 0:
        lower = lower - b / hm
        center = center + b / hm
    else:
        center = center - b / hp
        upper = upper + b / hp

    diag = np.concatenate(([1.0], center, [1.0]))
    sub = np.concatenate((lower, [0.0]))
    sup = np.concatenate(([0.0], upper))
    rhs = np.zeros(n)
    rhs[0], rhs[-1] = prob.u_lo, prob.u_hi
    return TridiagonalSystem(sub=sub, diag=diag, sup=sup, rhs=rhs)


def solve_tridiagonal(sys: TridiagonalSystem) -> np.ndarray:
    """Thomas algorithm: forward elimination and back substitution, no pivoting."""
    a, b, c, d = sys.sub, sys.diag, sys.sup, sys.rhs
    n = sys.n
    cp = np.empty(max(n - 1, 0))
    dp = np.empty(n)

    pivot = b[0]
    if abs(pivot) < PIVOT_TOL:
        raise ValueError("singular tridiagonal system")
    if n > 1:
        cp[0] = c[0] / pivot
    dp[0] = d[0] / pivot
    for i in range(1, n):
        pivot = b[i] - a[i - 1] * cp[i - 1]
        if abs(pivot) < PIVOT_TOL:
            raise ValueError("singular tridiagonal system")
        if i < n - 1:
            cp[i] = c[i] / pivot
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / pivot

    out = np.empty(n)
    out[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return out


def solve(prob: TransportProblem, grid: Grid1D) -> Solution:
    if not (math.isclose(grid.lo, prob.lo, abs_tol=1e-12) and math.isclose(grid.hi, prob.hi, abs_tol=1e-12)):
        raise ValueError(f"grid [{grid.lo}, {grid.hi}] does not span the domain [{prob.lo}, {prob.hi}]")
    values = solve_tridiagonal(assemble(prob, grid))
    # Dirichlet rows are identity rows; pin them against round-off anyway
    values[0], values[-1] = prob.u_lo, prob.u_hi
    return Solution(grid=grid, values=values)


def trapezoid_weights(grid: Grid1D) -> np.ndarray:
    h = grid.steps
    w = np.zeros(len(grid))
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def error_norms(sol: Solution, prob: TransportProblem) -> dict[str, float]:
    """Nodal max error and trapezoid-weighted discrete L2 error."""
    err = np.asarray(sol.values, dtype=float) - exact_solution(prob, sol.grid.nodes)
    w = trapezoid_weights(sol.grid)
    return {
        "linf": float(np.max(np.abs(err))),
        "l2w": float(math.sqrt(math.fsum(w * err * err))),
    }
