"""Forwarding-probability policies compared in the mechanism experiments.

Each mechanism hands the simulator a per-miner forwarding probability at the
start of every epoch and may adapt it from what happened during the epoch.
The probability is consulted when an ignorant miner first accepts the block:
it becomes a spreader with that probability and an unspreader otherwise.

Gossip, probabilistic flooding and greedy forwarding are behavioural models
of the baselines; BPIM drives the probability with the receivers' share
``y(t)`` from the replicator dynamics.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import evogame
from ..params import ParameterError, PayoffParams


@dataclass
class Feedback:
    """What miners observed during one epoch."""

    received: np.ndarray   # bool (n,), got at least one block message while not an evildoer
    redundant: np.ndarray  # bool (n,), sent at least one message that found no taker


class Policy:
    """Running per-miner forwarding probabilities for one simulation."""

    def __init__(self, p: np.ndarray):
        self.p = p

    def update(self, epoch: int, feedback: Feedback) -> None:
        """Called after ``epoch`` completes; sets the probabilities for the next one."""


def _check_prob(name, v):
    if not 0.0 <= v <= 1.0:
        raise ParameterError(name, f"must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class Gossip:
    """Relay with a fixed probability."""

    p_fixed: float = 0.2
    name: str = "gossip"

    def __post_init__(self):
        _check_prob("p_fixed", self.p_fixed)

    @property
    def label(self):
        return self.name

    def start(self, net, epochs):
        return Policy(np.full(net.n, self.p_fixed))


class _FloodingPolicy(Policy):
    def __init__(self, p, rate):
        super().__init__(p)
        self.rate = rate

    def update(self, epoch, feedback):
        net = feedback.received.astype(np.int64) - feedback.redundant.astype(np.int64)
        self.p = np.clip(self.p * (1.0 + self.rate) ** net, 0.0, 1.0)


@dataclass(frozen=True)
class ProbabilisticFlooding:
    """Per-miner probability adapted multiplicatively from message exchanges.

    A miner that receives the block from a peer raises its probability by
    ``1 + learning_rate``; a miner whose messages found no taker (recipient
    already had the block, or was an evildoer) lowers it by the same factor.
    Updates happen once per epoch; a miner doing both keeps its value.
    """

    learning_rate: float = 0.05
    p_initial: float = 0.2
    name: str = "flooding"

    def __post_init__(self):
        _check_prob("p_initial", self.p_initial)
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ParameterError("learning_rate", f"must lie in [0, 1], got {self.learning_rate}")

    @property
    def label(self):
        return self.name

    def start(self, net, epochs):
        return _FloodingPolicy(np.full(net.n, self.p_initial), self.learning_rate)


class _GreedyPolicy(Policy):
    def __init__(self, net, pay, y_initial):
        self.net = net
        self.pay = pay
        super().__init__(self._best_response(np.full(net.n, y_initial)))

    def _best_response(self, y_est):
        pay = self.pay
        g1y = y_est * pay.delta_i + pay.delta_u + pay.delta_p - (1.0 - y_est) * pay.eps_r
        g1n = (1.0 - y_est) * pay.delta_p
        return np.where(g1y > g1n, 1.0, 0.0)

    def update(self, epoch, feedback):
        y_est = self.p[self.net.adjacency].mean(axis=1)
        self.p = self._best_response(y_est)


@dataclass(frozen=True)
class Greedy:
    """Myopic best response: forward with certainty whenever it pays right now.

    Each miner estimates the receivers' share from its graph neighbours'
    current choices.
    """

    pay: PayoffParams = field(default_factory=PayoffParams)
    y_initial: float = 0.2
    name: str = "greedy"

    @property
    def label(self):
        return self.name

    def start(self, net, epochs):
        return _GreedyPolicy(net, self.pay, self.y_initial)


class _SeriesPolicy(Policy):
    def __init__(self, n, series):
        self.series = series
        self.n = n
        super().__init__(np.full(n, series[0]))

    def update(self, epoch, feedback):
        idx = min(epoch, len(self.series) - 1)
        self.p = np.full(self.n, self.series[idx])


@dataclass(frozen=True)
class Bpim:
    """Forwarding probability follows the receivers' replicator share y(t).

    The game is solved once per configuration; epoch ``t`` uses ``y(t)``.
    """

    pay: PayoffParams = field(default_factory=PayoffParams)
    x0: float = 0.2
    y0: float = 0.2
    name: str = "bpim"

    def __post_init__(self):
        _check_prob("x0", self.x0)
        _check_prob("y0", self.y0)

    @property
    def label(self):
        return self.name

    def forwarding_series(self, epochs: int) -> np.ndarray:
        sol = evogame.solve_game(self.x0, self.y0, self.pay, max_epochs=max(epochs, 1),
                                 run_full=True)
        return np.clip(sol.y, 0.0, 1.0)

    def start(self, net, epochs):
        return _SeriesPolicy(net.n, self.forwarding_series(epochs))


Mechanism = Gossip | ProbabilisticFlooding | Greedy | Bpim
