"""Step functions on (0,1), the triple-well potential, and admissibility.

A pair energy with the triple-well potential is finite only when the function
takes at most two values at gap exactly 1; such functions decompose as
u = z + chi with chi a {0,1}-valued indicator. The decomposition, the
admissible-interval bookkeeping, and oscillating microstructure profiles all
live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .util import ResourceLimitError

DEFAULT_VALUE_TOL = 1e-12
DEFAULT_BREAKPOINT_CAP = 1_000_000

Arc = Tuple[float, float]


class StepFunction:
    """Piecewise-constant function on (0,1): value[i] on [b_i, b_{i+1})."""

    def __init__(self, breakpoints, values):
        bp = np.asarray(breakpoints, dtype=float)
        vals = np.asarray(values, dtype=float)
        if bp.ndim != 1 or bp.size == 0 or bp[0] != 0.0:
            raise ValueError("breakpoints must start at 0")
        if bp[-1] >= 1.0 or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing within [0, 1)")
        if vals.shape != bp.shape:
            raise ValueError("values must match breakpoints in length")
        self.breakpoints = bp
        self.values = vals

    @property
    def endpoints(self) -> np.ndarray:
        """Interval endpoints including the implicit final 1."""
        return np.append(self.breakpoints, 1.0)

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.endpoints)

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, None)
        out = self.values[idx]
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    def ess_inf(self) -> float:
        return float(np.min(self.values))

    def ess_sup(self) -> float:
        return float(np.max(self.values))

    def shifted(self, c: float) -> "StepFunction":
        return StepFunction(self.breakpoints, self.values + c)

    def to_json(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "StepFunction":
        return cls(obj["breakpoints"], obj["values"])

    @classmethod
    def constant(cls, c: float) -> "StepFunction":
        return cls([0.0], [c])


def integrate(u: StepFunction) -> float:
    """Exact integral over (0,1): sum of value * interval length."""
    return float(np.dot(u.values, u.lengths))


@dataclass(frozen=True)
class TripleWellPotential:
    """Cost of a pairwise increment: 0 at -1 and 1, 1 at 0, cap elsewhere.

    cap=None means the uncapped potential (infinite off the wells); a finite
    cap >= 1 gives the everywhere-finite variant that increases to the
    uncapped one as cap grows.
    """

    cap: Optional[float] = None

    def __post_init__(self):
        if self.cap is not None and self.cap < 1.0:
            raise ValueError("cap must be >= 1")

    @property
    def kind(self) -> str:
        return "infinite" if self.cap is None else "capped"

    def value(self, z: float, tol: float = 0.0) -> float:
        if tol < 0:
            raise ValueError("tol must be >= 0")
        wells = (-1.0, 0.0, 1.0)
        dists = [abs(z - w) for w in wells]
        i = int(np.argmin(dists))
        if dists[i] <= tol or z == wells[i]:
            return 0.0 if wells[i] != 0.0 else 1.0
        return math.inf if self.cap is None else float(self.cap)

    def to_json(self) -> dict:
        if self.cap is None:
            return {"kind": "infinite"}
        return {"kind": "capped", "cap": self.cap}

    @classmethod
    def from_json(cls, obj: dict) -> "TripleWellPotential":
        kind = obj.get("kind", "infinite")
        if kind == "infinite":
            return cls()
        if kind == "capped":
            return cls(cap=float(obj["cap"]))
        raise ValueError(f"unknown potential kind {kind!r}")


def eval_potential(p: TripleWellPotential, z: float, tol: float = 0.0) -> float:
    """Potential value with snapping: |z - w| <= tol counts as the well w."""
    return p.value(z, tol)


@dataclass(frozen=True)
class AdmissibleDecomposition:
    z: float
    chi: StepFunction

    def reconstruct(self) -> StepFunction:
        return StepFunction(self.chi.breakpoints, self.z + self.chi.values)


@dataclass(frozen=True)
class NotAdmissible:
    """Witness of inadmissibility: a value pair whose gap is not in {0, 1}."""

    value_a: float
    value_b: float

    @property
    def gap(self) -> float:
        return abs(self.value_b - self.value_a)


def decompose(
    u: StepFunction, tol: float = DEFAULT_VALUE_TOL
) -> Union[AdmissibleDecomposition, NotAdmissible]:
    """Split u into base level z plus a {0,1} indicator, if possible.

    Values are clustered with tolerance tol first. A single cluster gives
    chi == 0; two clusters at gap 1 (within tol) give the indicator of the
    upper-cluster intervals; anything else returns NotAdmissible with an
    offending pair. z is chosen as the smaller cluster value.
    """
    order = np.argsort(u.values)
    sorted_vals = u.values[order]
    reps = [sorted_vals[0]]
    for v in sorted_vals[1:]:
        if v - reps[-1] > tol:
            reps.append(v)
    if len(reps) == 1:
        chi = StepFunction(u.breakpoints, np.zeros_like(u.values))
        return AdmissibleDecomposition(z=float(reps[0]), chi=chi)
    if len(reps) == 2 and abs((reps[1] - reps[0]) - 1.0) <= tol:
        z = float(reps[0])
        chi_vals = (u.values > z + 0.5).astype(float)
        return AdmissibleDecomposition(z=z, chi=StepFunction(u.breakpoints, chi_vals))
    if len(reps) == 2:
        return NotAdmissible(value_a=float(reps[0]), value_b=float(reps[1]))
    # three or more levels: some pair must have a gap outside {0, 1}
    for a, b in zip(reps, reps[1:]):
        if abs((b - a) - 1.0) > tol:
            return NotAdmissible(value_a=float(a), value_b=float(b))
    # all adjacent gaps are 1, so the extremes are >= 2 apart
    return NotAdmissible(value_a=float(reps[0]), value_b=float(reps[-1]))


@dataclass(frozen=True)
class AdmissibleInterval:
    iota: float
    sigma: float

    @property
    def empty(self) -> bool:
        return self.iota > self.sigma


def admissible_interval(u: StepFunction) -> AdmissibleInterval:
    """[integral - ess inf, integral - ess sup + 1]; empty iff oscillation > 1."""
    m = integrate(u)
    return AdmissibleInterval(iota=m - u.ess_inf(), sigma=m - u.ess_sup() + 1.0)


def _validate_arcs(arcs: Sequence[Arc]) -> list:
    prev_end = 0.0
    out = []
    for a, b in arcs:
        if not (0.0 <= a < b <= 1.0):
            raise ValueError("arcs must be non-degenerate subintervals of [0, 1]")
        if a < prev_end:
            raise ValueError("arcs must be disjoint and sorted")
        prev_end = b
        out.append((float(a), float(b)))
    return out


def _arcs_from_indicator(profile) -> list:
    """Contiguous {0,1} cell runs of a grid profile, as arcs in [0, 1]."""
    values = np.asarray(profile.values, dtype=float)
    if np.any((values != 0.0) & (values != 1.0)):
        raise ValueError("grid profile must be {0,1}-valued to serve as an indicator")
    n = values.size
    arcs = []
    start = None
    for i in range(n):
        if values[i] == 1.0 and start is None:
            start = i
        if values[i] == 0.0 and start is not None:
            arcs.append((start / n, i / n))
            start = None
    if start is not None:
        arcs.append((start / n, 1.0))
    return arcs


def oscillating_profile(
    z: float,
    arcs,
    eps: float,
    max_breakpoints: int = DEFAULT_BREAKPOINT_CAP,
) -> StepFunction:
    """The step function x -> z + chi_arcs(x/eps mod 1) on (0,1).

    The indicator's support within the unit cell is given either as a list of
    arcs or as a {0,1}-valued grid profile (anything with a ``values``
    attribute). Intervals of equal value arising across period boundaries are
    merged, so the breakpoint count is at most 2*len(arcs)/eps + O(1).
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    if hasattr(arcs, "values"):
        arcs = _arcs_from_indicator(arcs)
    arcs = _validate_arcs(arcs)
    n_periods = math.ceil(1.0 / eps - 1e-12)
    est = 2 * max(len(arcs), 1) * n_periods + 2
    if est > max_breakpoints:
        raise ResourceLimitError(
            f"profile would need ~{est} breakpoints (cap {max_breakpoints})"
        )
    cuts = [0.0]
    flags = []  # indicator value on [cuts[i], cuts[i+1])
    for j in range(n_periods):
        base = j * eps
        pos = base
        for a, b in arcs:
            # single rounding per cut keeps whole-period grids exact
            xa, xb = (j + a) * eps, (j + b) * eps
            if xa >= 1.0:
                break
            if xa > pos and pos < 1.0:
                flags.append(0.0)
                cuts.append(min(xa, 1.0))
                pos = min(xa, 1.0)
            if pos >= 1.0:
                break
            flags.append(1.0)
            cuts.append(min(xb, 1.0))
            pos = min(xb, 1.0)
        period_end = min((j + 1) * eps, 1.0)
        if pos < period_end:
            flags.append(0.0)
            cuts.append(period_end)
    # drop zero-length pieces, merge equal neighbours
    bp, vals = [], []
    for i, f in enumerate(flags):
        if cuts[i + 1] <= cuts[i]:
            continue
        if vals and vals[-1] == f:
            continue
        bp.append(cuts[i])
        vals.append(f)
    return StepFunction(np.array(bp), z + np.array(vals))
