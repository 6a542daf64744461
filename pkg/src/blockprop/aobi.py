"""Closed-form Age of Block Information (AoBI).

The minimum average AoBI of a public blockchain is the sum of three terms:

* monitoring: half the transaction inter-generation interval at its bound,
  ``(T_p + T_mine) / 2``;
* validation: ``rounds * R_v N B_max^2 / (4 C tau T_p)``;
* communication: ``rounds * P_size tau T_p omega N / (M R_c W)``;

where ``rounds`` is the number of forward-and-validate cycles needed for the
block to cover all ``N`` miners.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .params import OMEGA_K_ONE_TOL, NetworkParams, ParameterError

# keeps an exactly-integral log from being pushed up a round by rounding error
_CEIL_NUDGE = 1e-9


class Branch(enum.Enum):
    OMEGA_K_EQUALS_ONE = "omega_k_equals_one"
    OMEGA_K_GREATER_ONE = "omega_k_greater_one"


@dataclass(frozen=True)
class ConsensusRounds:
    rounds: int
    branch: Branch


@dataclass(frozen=True)
class AobiBreakdown:
    monitoring_term: float
    validation_term: float
    communication_term: float
    total: float
    rounds: ConsensusRounds
    tau: float


@dataclass(frozen=True)
class MonotonicityReport:
    condition_value: float
    monotone_increasing: bool
    tau_star: float          # unconstrained minimiser of a*tau + b/tau
    tau_star_clipped: float  # minimiser over the feasible tau interval
    slope_a: float
    slope_b: float


def consensus_rounds(n: int, k: int, omega_bar: float) -> ConsensusRounds:
    """Rounds ``m + 1`` until ``sum_{j<=m} k (omega k)^j >= n``.

    >>> consensus_rounds(4000, 3, 0.8).rounds
    9
    """
    if n < 1 or k < 1:
        raise ParameterError("n/k", f"miner and adjacency counts must be >= 1 (n={n}, k={k})")
    wk = omega_bar * k
    if wk < 1.0 - OMEGA_K_ONE_TOL:
        raise ParameterError(
            "omega_bar", f"omega_bar * k = {wk:g} < 1; geometric coverage never reaches {n} miners")
    if abs(wk - 1.0) <= OMEGA_K_ONE_TOL:
        return ConsensusRounds(-(-n // k), Branch.OMEGA_K_EQUALS_ONE)
    arg = (n * (wk - 1.0) + k) / k
    rounds = math.ceil(math.log(arg) / math.log(wk) - _CEIL_NUDGE)
    return ConsensusRounds(max(1, rounds), Branch.OMEGA_K_GREATER_ONE)


def network_rounds(p: NetworkParams) -> ConsensusRounds:
    return consensus_rounds(p.n_miners, p.k_adjacent, p.omega_bar)


def validation_per_round(p: NetworkParams) -> float:
    """Per-miner mean validation time bound ``R_v N B_max^2 / (4 C tau T_p)``."""
    return p.r_validate * p.n_miners * p.b_max ** 2 / (4.0 * p.cloud_compute * p.tau * p.t_pack)


def communication_per_round(p: NetworkParams) -> float:
    """Per-miner mean communication time bound with ``N/M`` miners per station."""
    return (p.p_size * p.tau * p.t_pack * p.omega_bar * p.n_miners
            / (p.n_base_stations * p.r_c * p.bandwidth_w))


def validation_time_bound(p: NetworkParams) -> float:
    """Lower bound on the network's mean validation time, in seconds."""
    return network_rounds(p).rounds * validation_per_round(p)


def communication_time_bound(p: NetworkParams) -> float:
    """Lower bound on the network's mean communication time, in seconds."""
    return network_rounds(p).rounds * communication_per_round(p)


def monitoring_term(p: NetworkParams) -> float:
    """``1/(2 lambda)`` with lambda at its largest admissible value."""
    return 0.5 * (p.t_pack + p.t_mine)


def min_average_aobi(p: NetworkParams) -> AobiBreakdown:
    rounds = network_rounds(p)
    mon = monitoring_term(p)
    val = rounds.rounds * validation_per_round(p)
    com = rounds.rounds * communication_per_round(p)
    return AobiBreakdown(mon, val, com, mon + val + com, rounds, p.tau)


def average_aobi(p: NetworkParams) -> float:
    """Average AoBI at the configured ``lambda_rate`` rather than its bound."""
    b = min_average_aobi(p)
    return 0.5 / p.lambda_rate + b.validation_term + b.communication_term


def monotonicity_condition(p: NetworkParams) -> MonotonicityReport:
    """Check whether the minimum AoBI grows with tau over the whole feasible range.

    The per-round cost is ``a*tau + b/tau``; it is increasing on
    ``[1/T_p, B_max/T_p]`` exactly when ``B_max sqrt(R_v M R_c W / (C P_size omega)) < 2``.
    """
    value = p.b_max * math.sqrt(
        p.r_validate * p.n_base_stations * p.r_c * p.bandwidth_w
        / (p.cloud_compute * p.p_size * p.omega_bar))
    a = p.p_size * p.t_pack * p.omega_bar * p.n_miners / (p.n_base_stations * p.r_c * p.bandwidth_w)
    b = p.r_validate * p.n_miners * p.b_max ** 2 / (4.0 * p.cloud_compute * p.t_pack)
    tau_star = math.sqrt(b / a) if a > 0 else math.inf
    lo, hi = p.tau_bounds
    return MonotonicityReport(value, value < 2.0, tau_star, min(max(tau_star, lo), hi), a, b)


def aobi_tau_sweep(p: NetworkParams, tau_grid: Iterable[float]) -> list[tuple[float, AobiBreakdown]]:
    return [(float(t), min_average_aobi(p.replace(tau=float(t)))) for t in tau_grid]


SWEEP_COLUMNS = ("tau", "monitoring_s", "validation_s", "communication_s", "total_s",
                 "rounds", "branch")


def sweep_rows(sweep: Sequence[tuple[float, AobiBreakdown]]):
    for tau, b in sweep:
        yield (repr(tau), repr(b.monitoring_term), repr(b.validation_term),
               repr(b.communication_term), repr(b.total), b.rounds.rounds, b.rounds.branch.value)


def write_sweep_csv(sweep: Sequence[tuple[float, AobiBreakdown]], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        w.writerows(sweep_rows(sweep))
    return path
