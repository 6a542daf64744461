"""Mean-field dynamics of block propagation with five miner states.

Miners are ignorants (i), spreaders (s), unspreaders (u), refusers (r) and
evildoers (e).  The densities obey

    di/dt = P_r e - P_e i - k (1 - P_e) s i
    ds/dt = k P_f (1 - P_e) s i - P_i (1 + k s) s
    du/dt = k (1 - P_f) (1 - P_e) s i - P_i u
    dr/dt = P_i (1 + k s) s + P_i u
    de/dt = P_e i - P_r e

and the final consensus level r(inf) solves ``r = 1 - exp(-sigma r)`` with
``sigma = (1 - P_e) P_f / P_i + 1``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _rk4
from .params import ParameterError, PropagationProbabilities

STATE_NAMES = ("i", "s", "u", "r", "e")

DEFAULT_STEP = 0.01
DEFAULT_HORIZON = 500.0

_NORM_TOL = 1e-9
_CLAMP_SLACK = 1e-12
_BLOWUP_SLACK = 1e-3


@dataclass(frozen=True)
class StateDensities:
    i: float
    s: float
    u: float
    r: float
    e: float

    def __post_init__(self):
        vals = self.as_array()
        if np.any(vals < -_CLAMP_SLACK) or np.any(vals > 1 + _CLAMP_SLACK):
            raise ParameterError("state", f"densities must lie in [0, 1], got {tuple(vals)}")
        if abs(vals.sum() - 1.0) > _NORM_TOL:
            raise ParameterError("state", f"densities must sum to 1, got {vals.sum()!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.i, self.s, self.u, self.r, self.e], dtype=float)

    @classmethod
    def from_array(cls, values) -> "StateDensities":
        v = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
        return cls(*map(float, v))


@dataclass(frozen=True)
class EpidemicTrajectory:
    times: np.ndarray   # (T,)
    states: np.ndarray  # (T, 5), clamped to [0, 1]
    probs: PropagationProbabilities
    k: int

    def __len__(self):
        return len(self.times)

    def state(self, j: int) -> StateDensities:
        return StateDensities.from_array(self.states[j])

    @property
    def terminal(self) -> StateDensities:
        return self.state(-1)

    def column(self, name: str) -> np.ndarray:
        return self.states[:, STATE_NAMES.index(name)]

    def at_times(self, times) -> np.ndarray:
        """States at the requested grid times (must be on the grid)."""
        step = self.times[1] - self.times[0] if len(self.times) > 1 else 1.0
        idx = np.rint(np.asarray(times, dtype=float) / step).astype(int)
        return self.states[idx]


@dataclass(frozen=True)
class SteadyState:
    sigma: float
    r_infinity: float
    nontrivial: bool  # False when sigma <= 1 and only the zero root exists


def initial_densities(n: int) -> StateDensities:
    """One spreader among ``n`` miners, everybody else ignorant."""
    if n < 2:
        raise ParameterError("n_miners", f"need at least 2 miners, got {n}")
    return StateDensities((n - 1) / n, 1.0 / n, 0.0, 0.0, 0.0)


def _rhs_array(x, p_f, p_e, p_i, p_r, k):
    i, s, u, r, e = x
    contact = k * (1.0 - p_e) * s * i
    removal = p_i * (1.0 + k * s) * s
    return np.stack([
        p_r * e - p_e * i - contact,
        p_f * contact - removal,
        (1.0 - p_f) * contact - p_i * u,
        removal + p_i * u,
        p_e * i - p_r * e,
    ])


def ode_rhs(state: StateDensities, probs: PropagationProbabilities, k: int) -> np.ndarray:
    """Time derivatives ``(di, ds, du, dr, de)`` at ``state``."""
    return _rhs_array(state.as_array(), probs.p_f, probs.p_e, probs.p_i, probs.p_r, k)


def _check_step(j, y, step):
    if np.any(y < -_BLOWUP_SLACK) or np.any(y > 1.0 + _BLOWUP_SLACK):
        raise ValueError(
            f"densities left [0, 1] at step {j}; use a smaller step than {step}")


def integrate(start: StateDensities, probs: PropagationProbabilities, k: int,
              horizon: float = DEFAULT_HORIZON, step: float = DEFAULT_STEP) -> EpidemicTrajectory:
    """Fixed-step RK4 trajectory on ``[0, horizon]`` including ``t = 0``."""
    steps = _rk4.n_steps(horizon, step)

    def f(y):
        return _rhs_array(y, probs.p_f, probs.p_e, probs.p_i, probs.p_r, k)

    path = _rk4.integrate(f, start.as_array(), step, steps,
                          callback=lambda j, y: _check_step(j, y, step))
    times = np.arange(steps + 1) * step
    return EpidemicTrajectory(times, np.clip(path, 0.0, 1.0), probs, k)


@dataclass(frozen=True)
class BatchResult:
    """Summary of many trajectories integrated side by side."""

    final: np.ndarray            # (B, 5) terminal densities, unclamped
    max_mass_error: np.ndarray   # (B,) max |sum - 1| over every grid point
    min_component: np.ndarray    # (B,) smallest density seen along the path
    peak: np.ndarray             # (B, 5) per-state maximum along the path


def integrate_batch(start: StateDensities, probs: Sequence[PropagationProbabilities], k: int,
                    horizon: float = DEFAULT_HORIZON, step: float = DEFAULT_STEP) -> BatchResult:
    """Integrate one start state under many probability sets at once.

    Only running summaries are kept, so large grids over long horizons stay cheap.
    """
    steps = _rk4.n_steps(horizon, step)
    cols = np.array([[p.p_f, p.p_e, p.p_i, p.p_r] for p in probs], dtype=float).T
    p_f, p_e, p_i, p_r = cols
    y = np.repeat(start.as_array()[:, None], len(probs), axis=1)
    max_err = np.abs(y.sum(axis=0) - 1.0)
    min_comp = y.min(axis=0)
    peak = y.copy()

    def f(x):
        return _rhs_array(x, p_f, p_e, p_i, p_r, k)

    for j in range(1, steps + 1):
        y = _rk4.rk4_step(f, y, step)
        _check_step(j, y, step)
        np.maximum(max_err, np.abs(y.sum(axis=0) - 1.0), out=max_err)
        np.minimum(min_comp, y.min(axis=0), out=min_comp)
        np.maximum(peak, y, out=peak)
    return BatchResult(y.T.copy(), max_err, min_comp, peak.T.copy())


def sigma(probs: PropagationProbabilities) -> float:
    return (1.0 - probs.p_e) * probs.p_f / probs.p_i + 1.0


def solve_consensus_level(sig: float, tol: float = 1e-14, max_iter: int = 200) -> float:
    """Nontrivial root of ``x = 1 - exp(-sig x)`` for ``sig > 1`` by bisection.

    Works on the convex auxiliary ``f(x) = x + exp(-sig x) - 1``, which is
    negative just right of zero and equals ``exp(-sig) > 0`` at one, so the
    bracket ``[1e-9, 1]`` never converges onto the trivial root.
    """
    if sig <= 1.0:
        return 0.0

    def f(x):
        return x + math.expm1(-sig * x)

    lo, hi = 1e-9, 1.0
    if f(lo) >= 0.0:
        # root closer to zero than the bracket start; sigma is within ~1e-9 of 1
        return lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def steady_state(probs: PropagationProbabilities) -> SteadyState:
    sig = sigma(probs)
    r = solve_consensus_level(sig)
    return SteadyState(sig, r, sig > 1.0)


@dataclass(frozen=True)
class ConsensusSurface:
    row_axis: str
    row_values: np.ndarray
    col_axis: str
    col_values: np.ndarray
    fixed: dict
    values: np.ndarray  # (len(row_values), len(col_values))


_AXES = ("p_f", "p_e", "p_i")


def consensus_level_surface(row_axis: str, row_values, col_axis: str, col_values,
                            fixed: dict) -> ConsensusSurface:
    """``r(inf)`` over a grid of two probabilities with the remaining one fixed.

    >>> s = consensus_level_surface("p_f", [0.5], "p_i", [0.3], {"p_e": 0.1})
    >>> round(float(s.values[0, 0]), 4)
    0.8926
    """
    if row_axis not in _AXES or col_axis not in _AXES or row_axis == col_axis:
        raise ParameterError("axes", f"need two distinct axes from {_AXES}, got {row_axis}, {col_axis}")
    rows = np.asarray(row_values, dtype=float)
    cols = np.asarray(col_values, dtype=float)
    out = np.empty((rows.size, cols.size))
    for a, rv in enumerate(rows):
        for b, cv in enumerate(cols):
            probs = PropagationProbabilities(**{**fixed, row_axis: rv, col_axis: cv})
            out[a, b] = steady_state(probs).r_infinity
    return ConsensusSurface(row_axis, rows, col_axis, cols, dict(fixed), out)


def write_trajectory_csv(traj: EpidemicTrajectory, path: str | Path, every: int = 1) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t",) + STATE_NAMES)
        for j in range(0, len(traj.times), every):
            w.writerow([repr(float(traj.times[j]))] + [repr(float(v)) for v in traj.states[j]])
    return path


def write_surface_csv(surface: ConsensusSurface, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{surface.row_axis}\\{surface.col_axis}"] + [repr(float(c)) for c in surface.col_values])
        for rv, row in zip(surface.row_values, surface.values):
            w.writerow([repr(float(rv))] + [repr(float(v)) for v in row])
    return path
