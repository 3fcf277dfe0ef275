"""Grid-field dynamics.

The grid field ``k`` is a positive value attached to every node. It grows
by preferential attachment: node ``i`` changes at a rate proportional to
its share ``k_i / sum(k)`` of the total field, scaled by a per-node rate
``m_i``. Closed forms cover constant ``m`` and the Taylor-expanded
viscosity/gradient law; ``evolve_explicit`` handles arbitrary rate
histories by forward Euler.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "GridField",
    "SMode",
    "EvolutionParams",
    "GradientHistory",
    "attachment_probabilities",
    "evolve_constant_m",
    "evolve_explicit",
    "k_case3_exponent",
    "k_case3_exact",
    "k_case3_first_order",
    "accumulate_gradient",
]

RateHistory = Union[float, Sequence[float], np.ndarray, Callable[[np.ndarray, float], object]]


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridField:
    """Per-node field values ``k`` with their initial values ``c`` at ``time``."""

    positions: np.ndarray
    k: np.ndarray
    c: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        positions = _frozen(self.positions)
        k = _frozen(self.k)
        c = _frozen(self.c)
        if positions.ndim != 1 or k.shape != positions.shape or c.shape != positions.shape:
            raise ValueError("positions, k and c must be 1D arrays of equal length")
        if positions.size == 0:
            raise ValueError("empty field")
        if not np.all(c > 0):
            raise ValueError("non-positive initial value")
        if not np.all(k > 0):
            raise ValueError("non-positive field value")
        if self.time < 0:
            raise ValueError(f"time must be non-negative, got {self.time}")
        if self.time == 0 and not np.array_equal(k, c):
            raise ValueError("at time 0 the field must equal its initial values")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def initial(cls, positions, c) -> "GridField":
        """Field at ``t = 0``; a scalar ``c`` is broadcast to every node."""
        positions = np.asarray(positions, dtype=float)
        c = np.broadcast_to(np.asarray(c, dtype=float), positions.shape)
        return cls(positions=positions, k=c.copy(), c=c.copy(), time=0.0)

    @property
    def size(self) -> int:
        return int(self.k.size)

    @property
    def total(self) -> float:
        return float(math.fsum(self.k))


class SMode(enum.Enum):
    """How the field sum in the rate denominator is obtained."""

    FIXED = "fixed"
    SELF_CONSISTENT = "self-consistent"


@dataclass(frozen=True)
class EvolutionParams:
    """Coefficients of the rate law ``m = m0 + m1*g/mu + m2*(g/mu)**2``.

    ``S`` is the field sum used in the rate denominator and ``mu`` the
    dynamic viscosity ``g`` is scaled by.
    """

    m0: float = 0.0
    m1: float = 0.0
    m2: float = 0.0
    S: float = 1.0
    mu: float = 1.0
    s_mode: SMode = SMode.FIXED

    def __post_init__(self):
        if not self.S > 0:
            raise ValueError("non-positive field sum")
        if not self.mu > 0:
            raise ValueError("viscosity must be positive")

    def rate(self, grad_mag):
        """Node rate ``m`` for a gradient magnitude (scalar or array)."""
        ratio = np.asarray(grad_mag, dtype=float) / self.mu
        return self.m0 + self.m1 * ratio + self.m2 * ratio**2


@dataclass(frozen=True)
class GradientHistory:
    """Running time integrals of ``|grad u|`` (``l1``) and ``|grad u|**2`` (``l2sq``)."""

    l1: float = 0.0
    l2sq: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if self.l1 < 0 or self.l2sq < 0 or self.t < 0:
            raise ValueError("gradient history entries must be non-negative")
        if self.t == 0 and (self.l1 != 0 or self.l2sq != 0):
            raise ValueError("gradient history must be zero at t = 0")


def attachment_probabilities(field: GridField | Sequence[float] | np.ndarray) -> np.ndarray:
    """Share ``k_i / sum_j k_j`` of each node in the total field.

    Accepts a :class:`GridField` or a bare sequence of field values.
    """
    k = field.k if isinstance(field, GridField) else np.asarray(field, dtype=float)
    if k.size == 0:
        raise ValueError("empty field")
    if not np.all(k > 0):
        raise ValueError("non-positive field value")
    p = k / math.fsum(k)
    # one renormalization pass absorbs the rounding of the division
    return p / math.fsum(p)


def evolve_constant_m(c, m: float, S: float, t: float) -> np.ndarray:
    """Closed-form field ``c_i * exp(m t / S)`` for a uniform, constant rate."""
    if not S > 0:
        raise ValueError("non-positive field sum")
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    c = np.asarray(c, dtype=float)
    if not np.all(c > 0):
        raise ValueError("non-positive initial value")
    return c * math.exp(m * t / S)


def _rate_at(m_of_node_time: RateHistory, positions: np.ndarray, t: float) -> np.ndarray:
    if callable(m_of_node_time):
        m = m_of_node_time(positions, t)
    else:
        m = m_of_node_time
    return np.broadcast_to(np.asarray(m, dtype=float), positions.shape)


def evolve_explicit(
    field: GridField,
    params: EvolutionParams,
    m_of_node_time: RateHistory,
    t_end: float,
    dt: float,
) -> GridField:
    """Advance ``dk_i/dt = m_i k_i / S`` by forward Euler up to ``t_end``.

    ``m_of_node_time`` is a scalar, a per-node array, or a callable
    ``m(positions, t)``; it is sampled at the start of each step. With
    ``SMode.FIXED`` the denominator is ``params.S``; with
    ``SMode.SELF_CONSISTENT`` it is the current field sum. The final step
    is shortened to land on ``t_end`` exactly.

    Raises:
        ValueError: if ``dt <= 0``, ``t_end`` precedes the field time, or a
            step would drive any ``k_i`` non-positive.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end < field.time:
        raise ValueError(f"t_end={t_end} precedes field time {field.time}")

    k = field.k.copy()
    t0 = field.time
    n_steps = math.ceil((t_end - t0) / dt - 1e-12)
    for step in range(n_steps):
        t = t0 + step * dt
        h = min(dt, t_end - t)
        m = _rate_at(m_of_node_time, field.positions, t)
        denom = params.S if params.s_mode is SMode.FIXED else math.fsum(k)
        growth = 1.0 + h * m / denom
        if not np.all(growth > 0):
            raise ValueError("field positivity violated, reduce dt")
        k = k * growth
    return replace(field, k=k, time=float(t_end))


def k_case3_exponent(params: EvolutionParams, hist: GradientHistory) -> float:
    """Exponent ``m0 t/S + m1 l1/(mu S) + m2 l2sq/(mu^2 S)`` of the gradient law."""
    if not params.mu > 0:
        raise ValueError("viscosity must be positive")
    mu, S = params.mu, params.S
    return (
        params.m0 * hist.t / S
        + params.m1 * hist.l1 / (mu * S)
        + params.m2 * hist.l2sq / (mu * mu * S)
    )


def k_case3_exact(c: float, params: EvolutionParams, hist: GradientHistory) -> float:
    """Field value under the time-constant gradient/viscosity rate law."""
    if not c > 0:
        raise ValueError("non-positive initial value")
    return c * math.exp(k_case3_exponent(params, hist))


def k_case3_first_order(c: float, params: EvolutionParams, hist: GradientHistory) -> float:
    """First-order expansion ``c (1 + exponent)`` of :func:`k_case3_exact`."""
    if not c > 0:
        raise ValueError("non-positive initial value")
    value = c * (1.0 + k_case3_exponent(params, hist))
    if not value > 0:
        raise ValueError("first-order expansion invalid, use exact form")
    return value


def accumulate_gradient(hist: GradientHistory, grad_mag: float, dt: float) -> GradientHistory:
    """Add one left-endpoint rectangle of width ``dt`` to the gradient integrals."""
    if grad_mag < 0:
        raise ValueError(f"gradient magnitude must be non-negative, got {grad_mag}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return GradientHistory(
        l1=hist.l1 + grad_mag * dt,
        l2sq=hist.l2sq + grad_mag * grad_mag * dt,
        t=hist.t + dt,
    )
