"""Evolutionary forwarding game between block propagators and receivers.

``x`` is the share of propagators that forward, ``y`` the share of receivers
that forward.  Replicator dynamics:

    dx/dt = x (1 - x) [y (dI + dP + eR) + dU - eR]
    dy/dt = x y (1 - y) (dI + dU)
"""
from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _rk4
from .params import ParameterError, PayoffParams

GAME_STEP = 0.05
STEPS_PER_EPOCH = 20


@dataclass(frozen=True)
class GameState:
    x: float
    y: float

    def __post_init__(self):
        for name in ("x", "y"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(name, f"forwarding probability must lie in [0, 1], got {v}")


class Stability(enum.Enum):
    ESS = "ESS"
    SADDLE = "Saddle"
    UNSTABLE = "Unstable"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class Revenues:
    g1y: float
    g1n: float
    g1: float
    g2y: float
    g2n: float
    g2: float


@dataclass(frozen=True)
class EquilibriumReport:
    point: GameState
    det_j: float
    tr_j: float
    classification: Stability
    jacobian: np.ndarray  # full 2x2 linearisation at ``point``

    def as_record(self) -> dict:
        return {"point": [self.point.x, self.point.y], "det": self.det_j,
                "tr": self.tr_j, "class": self.classification.value}


def expected_revenues(state: GameState, pay: PayoffParams) -> Revenues:
    x, y = state.x, state.y
    di, dp, du, er = pay.delta_i, pay.delta_p, pay.delta_u, pay.eps_r
    g1y = y * di + du + dp - (1.0 - y) * er
    g1n = (1.0 - y) * dp
    g2y = x * (di + du + dp)
    g2n = x * dp
    return Revenues(g1y, g1n, x * g1y + (1.0 - x) * g1n,
                    g2y, g2n, y * g2y + (1.0 - y) * g2n)


def _rhs_xy(x, y, pay: PayoffParams):
    a = pay.delta_i + pay.delta_p + pay.eps_r
    dx = x * (1.0 - x) * (y * a + pay.delta_u - pay.eps_r)
    dy = x * y * (1.0 - y) * (pay.delta_i + pay.delta_u)
    return dx, dy


def replicator_rhs(state: GameState, pay: PayoffParams) -> tuple[float, float]:
    return _rhs_xy(state.x, state.y, pay)


def jacobian(state: GameState, pay: PayoffParams) -> np.ndarray:
    """Closed-form partial derivatives of the replicator field."""
    x, y = state.x, state.y
    a = pay.delta_i + pay.delta_p + pay.eps_r
    b = pay.delta_i + pay.delta_u
    return np.array([
        [(1.0 - 2.0 * x) * (y * a + pay.delta_u - pay.eps_r), x * (1.0 - x) * a],
        [y * (1.0 - y) * b, x * b * (1.0 - 2.0 * y)],
    ])


def receiver_threshold(pay: PayoffParams) -> float:
    """Receiver share above which forwarding pays off for propagators.

    Negative values mean propagators always gain from forwarding, values above
    one mean they never do.
    """
    denom = pay.delta_i + pay.delta_p + pay.eps_r
    if denom == 0:
        raise ParameterError("payoff", "dI + dP + eps*R is zero; threshold undefined")
    return (-pay.delta_u + pay.eps_r) / denom


def classify(det_j: float, tr_j: float) -> Stability:
    if det_j > 0 and tr_j < 0:
        return Stability.ESS
    if det_j > 0 and tr_j > 0:
        return Stability.UNSTABLE
    if det_j < 0:
        return Stability.SADDLE
    # det == 0: linearisation inconclusive; kept as a saddle unless the trace vanishes too
    if det_j == 0 and tr_j != 0:
        return Stability.SADDLE
    return Stability.DEGENERATE


def classify_point(state: GameState, pay: PayoffParams) -> Stability:
    """Classify any state from its numerically evaluated Jacobian."""
    j = jacobian(state, pay)
    return classify(float(np.linalg.det(j)), float(np.trace(j)))


def classify_equilibria(pay: PayoffParams) -> list[EquilibriumReport]:
    """Determinant/trace test at the pure equilibria (0,0), (1,0) and (1,1).

    The reported determinant and trace follow the published closed forms.  At
    (1, 0) those differ from the Jacobian evaluated at that point (available
    as ``report.jacobian``), whose determinant is ``(eR - dU)(dI + dU)``.
    """
    di, dp, du, er = pay.delta_i, pay.delta_p, pay.delta_u, pay.eps_r
    closed = [
        (GameState(0.0, 0.0), 0.0, du - er),
        (GameState(1.0, 0.0), 0.0, di + dp + du),
        (GameState(1.0, 1.0), (di + du) * (di + dp + du), -2.0 * (di + du) - dp),
    ]
    return [EquilibriumReport(pt, det, tr, classify(det, tr), jacobian(pt, pay))
            for pt, det, tr in closed]


@dataclass(frozen=True)
class GameSolution:
    """Replicator trajectory sampled once per epoch (plus the terminal state)."""

    epochs: np.ndarray  # (T,) epoch index, float if the run stopped mid-epoch
    x: np.ndarray
    y: np.ndarray
    converged: bool
    steps: int

    @property
    def terminal(self) -> GameState:
        return GameState(float(np.clip(self.x[-1], 0, 1)), float(np.clip(self.y[-1], 0, 1)))


def solve_game(x0: float, y0: float, pay: PayoffParams, max_epochs: int = 500,
               tol: float = 1e-6, step: float = GAME_STEP,
               steps_per_epoch: int = STEPS_PER_EPOCH, run_full: bool = False) -> GameSolution:
    """Integrate the replicator dynamics from ``(x0, y0)``.

    Stops once ``max(|dx/dt|, |dy/dt|) < tol`` (unless ``run_full``) or after
    ``max_epochs``.  A run that hits the epoch cap is returned with
    ``converged=False`` rather than raising.
    """
    GameState(x0, y0)

    def f(v):
        return np.array(_rhs_xy(v[0], v[1], pay))

    v = np.array([x0, y0], dtype=float)
    epochs, xs, ys = [0.0], [x0], [y0]
    converged = float(np.max(np.abs(f(v)))) < tol
    steps = 0
    max_steps = max_epochs * steps_per_epoch
    while steps < max_steps and (run_full or not converged):
        v = _rk4.rk4_step(f, v, step)
        steps += 1
        converged = float(np.max(np.abs(f(v)))) < tol
        if steps % steps_per_epoch == 0:
            epochs.append(steps / steps_per_epoch)
            xs.append(v[0])
            ys.append(v[1])
        elif converged and not run_full:
            epochs.append(steps / steps_per_epoch)
            xs.append(v[0])
            ys.append(v[1])
    return GameSolution(np.array(epochs), np.array(xs), np.array(ys), converged, steps)


def phase_portrait(pay: PayoffParams, starts: Sequence[GameState], **kwargs) -> list[GameSolution]:
    return [solve_game(s.x, s.y, pay, **kwargs) for s in starts]


def start_grid(n: int = 9) -> list[GameState]:
    """Interior ``n x n`` grid of starting points, e.g. 0.1 .. 0.9 for n = 9."""
    pts = np.arange(1, n + 1) / (n + 1)
    return [GameState(float(a), float(b)) for a in pts for b in pts]


def write_solution_csv(sol: GameSolution, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("epoch", "x", "y"))
        for e, x, y in zip(sol.epochs, sol.x, sol.y):
            w.writerow((repr(float(e)), repr(float(x)), repr(float(y))))
    return path


def write_equilibria_json(reports: Sequence[EquilibriumReport], path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps([r.as_record() for r in reports], indent=2) + "\n")
    return path
