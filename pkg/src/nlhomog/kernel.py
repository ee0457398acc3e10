"""1-periodic piecewise-constant weights and their exact antiderivatives.

A weight ``a`` is stored as segments ``[b_i, b_{i+1})`` with constant value
``v_i`` on each, extended 1-periodically to the whole line. Double integrals
of ``a((x-y)/eps)`` over rectangles reduce to corner evaluations of the second
antiderivative ``B`` of ``a``, which we keep in the decomposed form

    B(t) = mean * t^2 / 2 + b1 * t + B_per(t),

where ``B_per`` is 1-periodic and bounded. The quadratic part of the four
corner terms of a rectangle telescopes to ``mean * area`` and the linear part
to zero, so only ``B_per`` is ever evaluated numerically. That keeps the
computation exact (up to roundoff) even when corner arguments grow like
``1/eps``; subtracting raw ``B`` values would lose one digit per decade of
``1/eps``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .util import ArgumentRangeError

# Beyond this the fractional part of a float64 argument has fewer than ~4
# significant digits left, so periodic reduction t - floor(t) is meaningless.
PERIODIC_REDUCTION_RANGE = 1e12


def _validate_breakpoints(breakpoints: np.ndarray) -> None:
    if breakpoints.ndim != 1 or breakpoints.size == 0:
        raise ValueError("breakpoints must be a non-empty 1-d sequence")
    if breakpoints[0] != 0.0:
        raise ValueError("first breakpoint must be 0")
    if breakpoints[-1] >= 1.0:
        raise ValueError("breakpoints must lie in [0, 1)")
    if np.any(np.diff(breakpoints) <= 0):
        raise ValueError("breakpoints must be strictly increasing")


class PeriodicStepFunction:
    """Real-valued step function on the unit circle (no sign restriction).

    Segments are left-closed/right-open; the value at a breakpoint comes from
    the segment starting there, which makes evaluation deterministic.
    """

    def __init__(self, breakpoints, values):
        bp = np.asarray(breakpoints, dtype=float)
        vals = np.asarray(values, dtype=float)
        _validate_breakpoints(bp)
        if vals.shape != bp.shape:
            raise ValueError("values must match breakpoints in length")
        self.breakpoints = bp
        self.values = vals
        self.segment_lengths = np.diff(np.append(bp, 1.0))

    def eval(self, t):
        """a(t mod 1); accepts scalars or arrays."""
        t = np.asarray(t, dtype=float)
        u = t - np.floor(t)
        idx = np.searchsorted(self.breakpoints, u, side="right") - 1
        out = self.values[idx]
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    def mean(self) -> float:
        return float(np.dot(self.values, self.segment_lengths))

    def to_json(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "PeriodicStepFunction":
        return cls(obj["breakpoints"], obj["values"])


@dataclass(frozen=True)
class AntiderivativeTable:
    """Precomputed data for B(t) = mean*t^2/2 + b1*t + B_per(t).

    ``q0, q1, q2`` are per-segment coefficients of the periodic remainder in
    the local variable u = t - b_i:  B_per(t) = q0_i + q1_i*u + q2_i*u^2.
    """

    mean: float
    A_at_breakpoints: np.ndarray  # A(b_i) with A(t) = integral of a over [0, t]
    b1: float                     # linear coefficient, = int_0^1 A  -  mean/2
    q0: np.ndarray
    q1: np.ndarray
    q2: np.ndarray


def _build_antiderivative_table(bp: np.ndarray, vals: np.ndarray) -> AntiderivativeTable:
    seg = np.diff(np.append(bp, 1.0))
    # A(b_i) and B(b_i) by exact cumulative sums over segments
    A_nodes = np.concatenate([[0.0], np.cumsum(vals * seg)])     # length m+1, A(1) = mean
    B_incr = A_nodes[:-1] * seg + 0.5 * vals * seg * seg
    B_nodes = np.concatenate([[0.0], np.cumsum(B_incr)])          # B(b_i), B(1) = int_0^1 A
    mean = float(A_nodes[-1])
    b1 = float(B_nodes[-1] - 0.5 * mean)
    A_i = A_nodes[:-1]
    B_i = B_nodes[:-1]
    q0 = B_i - 0.5 * mean * bp * bp - b1 * bp
    q1 = A_i - mean * bp - b1
    q2 = 0.5 * (vals - mean)
    # B_per(0) must be exactly 0 so whole-period corner arguments cancel exactly
    q0[0] = 0.0
    return AntiderivativeTable(mean=mean, A_at_breakpoints=A_i, b1=b1, q0=q0, q1=q1, q2=q2)


class PeriodicStepKernel(PeriodicStepFunction):
    """Strictly positive periodic step weight with exact antiderivative data."""

    def __init__(self, breakpoints, values):
        super().__init__(breakpoints, values)
        if np.any(self.values <= 0):
            raise ValueError("kernel values must be strictly positive")
        self.table = _build_antiderivative_table(self.breakpoints, self.values)

    def periodic_part(self, t):
        """B_per(t mod 1), the bounded 1-periodic remainder of B; vectorized."""
        t = np.asarray(t, dtype=float)
        u = t - np.floor(t)
        idx = np.searchsorted(self.breakpoints, u, side="right") - 1
        du = u - self.breakpoints[idx]
        out = self.table.q0[idx] + du * (self.table.q1[idx] + du * self.table.q2[idx])
        return float(out) if out.ndim == 0 else out

    def second_antiderivative(self, t):
        """Decomposition of B(t): returns (polynomial part, periodic part).

        B(t) = poly + per with poly = mean*t^2/2 + b1*t. B'' = a at segment
        interiors; callers cancel the polynomial part symbolically.
        """
        t_arr = np.asarray(t, dtype=float)
        if np.any(np.abs(t_arr) > PERIODIC_REDUCTION_RANGE):
            raise ArgumentRangeError(
                f"|t| exceeds the periodic reduction range {PERIODIC_REDUCTION_RANGE:g}"
            )
        poly = 0.5 * self.table.mean * t_arr * t_arr + self.table.b1 * t_arr
        per = self.periodic_part(t_arr)
        if t_arr.ndim == 0:
            return float(poly), float(per)
        return poly, per

    def jump_sizes(self) -> np.ndarray:
        """|value jumps| at each breakpoint, wrap-around included."""
        return np.abs(self.values - np.roll(self.values, 1))

    @classmethod
    def from_json(cls, obj: dict) -> "PeriodicStepKernel":
        return cls(obj["breakpoints"], obj["values"])


def make_lambda_kernel(alpha: float, beta: float, lam: float) -> PeriodicStepKernel:
    """Two-value weight: alpha on [0, lam/2) and [1-lam/2, 1), beta between.

    The alpha band is an arc of total measure ``lam`` centered (mod 1) at 0,
    the beta band an arc of measure ``1-lam`` centered at 1/2, so the weight
    is symmetric about 1/2. Mean is lam*alpha + (1-lam)*beta.
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    return PeriodicStepKernel([0.0, lam / 2.0, 1.0 - lam / 2.0], [alpha, beta, alpha])


def kernel_mean(k: PeriodicStepFunction) -> float:
    """Exact integral over one period (sum of value * segment length)."""
    return k.mean()
