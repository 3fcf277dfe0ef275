"""Step laws and 1D grid generation.

Grid steps follow from the field as ``h = A / k`` (or, between two
contiguous nodes, ``A`` over the mean of their field values). For the
boundary-layer problem the field grows exponentially in ``x`` at a rate
chosen so the local Peclet number reaches exactly 1 at the refinement
onset ``xi``; nodes beyond ``xi`` are laid down by stepping with that
profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kfield import EvolutionParams, GradientHistory

__all__ = [
    "Grid1D",
    "BoundaryLayerSpec",
    "step_between",
    "step_field",
    "h_case2_linearized",
    "h_case3",
    "calibrate",
    "step_profile",
    "generate_boundary_layer_grid",
    "uniform_grid",
    "peclet",
    "peclet_profile",
    "LATTICE_TOL",
    "MERGE_FRACTION",
    "MAX_NODES",
]

LATTICE_TOL = 1e-9
# a clamped last gap shorter than this fraction of the previous one is merged
MERGE_FRACTION = 0.25
# the recursion's steps decay exponentially; a steep profile never reaches hi
MAX_NODES = 1_000_000


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Strictly increasing node coordinates covering ``[nodes[0], nodes[-1]]``."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("a grid needs at least 2 nodes")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("node coordinates must be finite")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes not strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    def __eq__(self, other):
        if not isinstance(other, Grid1D):
            return NotImplemented
        return np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())

    def __len__(self):
        return int(self.nodes.size)

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)


@dataclass(frozen=True)
class BoundaryLayerSpec:
    """Calibrated exponential step profile ``h(x) = h1 * exp(-rate * x)``.

    Build with :func:`calibrate`; direct construction is allowed for
    degenerate profiles (e.g. ``rate = 0``) and skips the calibration
    identity.
    """

    h1: float
    b: float
    mu: float
    xi: float
    rate: float

    def __post_init__(self):
        if not (self.h1 > 0 and self.b > 0 and self.mu > 0):
            raise ValueError("h1, b and mu must be positive")
        if not self.rate >= 0:
            raise ValueError(f"rate must be non-negative, got {self.rate}")

    @property
    def log_argument(self) -> float:
        """Peclet number of the coarse step, ``b h1 / (2 mu)``."""
        return self.b * self.h1 / (2.0 * self.mu)

    @property
    def A(self) -> float:
        """Step-law constant for unit initial field, ``A = h1 * c`` with ``c = 1``."""
        return self.h1


def _positive(**values):
    for name, v in values.items():
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")


def step_between(k_i: float, k_j: float, A: float) -> float:
    """Step between contiguous nodes: ``A`` over the mean of their field values."""
    _positive(k_i=k_i, k_j=k_j, A=A)
    return 2.0 * A / (k_i + k_j)


def step_field(k: float, A: float) -> float:
    """Pointwise step law ``h = A / k``."""
    _positive(k=k, A=A)
    return A / k


def h_case2_linearized(c: float, A: float, m: float, S: float, t: float) -> float:
    """Homogeneous step ``(A/c)(1 - m t / S)`` for a small constant rate.

    Valid for ``t`` in ``[0, S/m]`` when ``m > 0`` and for any ``t >= 0``
    otherwise.
    """
    _positive(c=c, A=A, S=S)
    if t < 0 or (m > 0 and t > S / m):
        raise ValueError("linearization window exceeded")
    return (A / c) * (1.0 - m * t / S)


def h_case3(c: float, A: float, params: EvolutionParams, hist: GradientHistory) -> float:
    """Step under the first-order gradient/viscosity law.

    ``mu^2 S A / (c (mu^2 S + mu^2 m0 t + mu m1 l1 + m2 l2sq))``; the step
    goes to zero as ``mu -> 0`` whenever ``m2 * l2sq > 0``.
    """
    _positive(c=c, A=A)
    mu, S = params.mu, params.S
    mu2 = mu * mu
    denom = c * (mu2 * S + mu2 * params.m0 * hist.t + mu * params.m1 * hist.l1 + params.m2 * hist.l2sq)
    if not denom > 0:
        raise ValueError("step law out of range")
    return mu2 * S * A / denom


def calibrate(b: float, mu: float, h1: float, xi: float) -> BoundaryLayerSpec:
    """Choose the growth rate so the local Peclet number is exactly 1 at ``xi``.

    ``rate = log(b h1 / (2 mu)) / xi``. Requires ``h1 > 2 mu / b``.
    """
    _positive(b=b, mu=mu, h1=h1, xi=xi)
    arg = b * h1 / (2.0 * mu)
    if not arg > 1.0:
        raise ValueError(
            f"log argument not greater than 1, refinement impossible (b*h1/(2*mu) = {arg!r})"
        )
    return BoundaryLayerSpec(h1=h1, b=b, mu=mu, xi=xi, rate=math.log(arg) / xi)


def step_profile(spec: BoundaryLayerSpec, x: float) -> float:
    """Step ``h1 / exp(rate * x)`` of the calibrated profile at ``x``."""
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    return spec.h1 * math.exp(-spec.rate * x)


def generate_boundary_layer_grid(spec: BoundaryLayerSpec, lo: float, hi: float) -> Grid1D:
    """Uniform ``h1`` nodes on ``[lo, xi]``, then profile steps up to ``hi``.

    Above ``xi`` each node is ``x + step_profile(spec, x)``. The first node
    past ``hi`` is replaced by ``hi``; if that leaves a last gap shorter
    than ``MERGE_FRACTION`` of the previous one, the previous node is
    dropped, provided the merged gap still has Peclet number <= 1.

    Raises:
        ValueError: if ``xi`` is not in ``(lo, hi)``, is not ``lo + n*h1``
            to within ``LATTICE_TOL``, or the steps shrink so fast that
            ``hi`` is not reached within ``MAX_NODES`` nodes.
    """
    if not lo < spec.xi < hi:
        raise ValueError(f"need lo < xi < hi, got lo={lo}, xi={spec.xi}, hi={hi}")
    n_coarse = round((spec.xi - lo) / spec.h1)
    if n_coarse < 1 or abs(lo + n_coarse * spec.h1 - spec.xi) > LATTICE_TOL:
        raise ValueError("xi must lie on the coarse lattice")

    nodes = [lo + i * spec.h1 for i in range(n_coarse)]
    x = spec.xi
    while x < hi:
        if len(nodes) >= MAX_NODES:
            raise ValueError(
                f"step profile collapses before reaching hi={hi} "
                f"(more than {MAX_NODES} nodes); lower b*h1/(2*mu) or raise xi"
            )
        nodes.append(x)
        x = x + step_profile(spec, x)
    nodes.append(hi)

    if len(nodes) >= 3 and nodes[-3] >= spec.xi:
        last, prev = nodes[-1] - nodes[-2], nodes[-2] - nodes[-3]
        merged = nodes[-1] - nodes[-3]
        if last < MERGE_FRACTION * prev and peclet(merged, spec.b, spec.mu) <= 1.0:
            del nodes[-2]
    return Grid1D(np.array(nodes))


def uniform_grid(lo: float, hi: float, h: float) -> Grid1D:
    """Nodes ``lo, lo+h, ...`` closed by ``hi``; the last step may be shorter."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    length = hi - lo
    if not length > 0:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    if h > length * (1 + LATTICE_TOL):
        raise ValueError(f"h={h} exceeds the domain length {length}")
    n = max(1, math.ceil(length / h - LATTICE_TOL))
    if abs(n * h - length) <= LATTICE_TOL * max(1.0, length):
        return Grid1D(np.linspace(lo, hi, n + 1))
    nodes = lo + h * np.arange(n, dtype=float)
    return Grid1D(np.append(nodes, hi))


def peclet(h, b: float, mu: float):
    """Local Peclet number ``b h / (2 mu)``; ``h`` may be an array."""
    _positive(b=b, mu=mu)
    h_arr = np.asarray(h, dtype=float)
    if not np.all(h_arr > 0):
        raise ValueError("h must be positive")
    pe = b * h_arr / (2.0 * mu)
    return float(pe) if pe.ndim == 0 else pe


def peclet_profile(grid: Grid1D, b: float, mu: float) -> np.ndarray:
    """Peclet number of every gap, indexed by the gap's left node."""
    return peclet(grid.steps, abs(b), mu)
