"""Monte-Carlo AoBI for simulated propagation traces.

For miner ``i`` the age of a block is the gap between the freshest
transaction and the end of mining, plus the validation and communication
time spent on every hop until the block is available at ``i``:

    AoBI_i = mu_i + sum_{hops} (t_vm + t_cm)

``mu_i`` is a uniform cut of the transaction inter-generation interval
``1/lambda`` (mean ``1/(2 lambda)``); each hop costs exponential validation
and communication times whose means are the per-round bounds from
:mod:`blockprop.aobi`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import aobi
from ..params import NetworkParams
from .simulation import SimTrace

_CHUNK = 256


@dataclass(frozen=True, eq=False)
class BlockTimeline:
    """One block's timeline for the miners it reached (times relative to mining end)."""

    freshest_tx_time: np.ndarray  # alpha, <= mining_end
    mining_end: float             # beta
    availability: np.ndarray      # gamma = beta + validation + communication
    validation: np.ndarray        # summed validation draws per miner
    communication: np.ndarray     # summed communication draws per miner
    miners: np.ndarray            # indices of the reached miners

    @property
    def aobi(self) -> np.ndarray:
        return self.availability - self.freshest_tx_time


def _service_means(params: NetworkParams, omega_bar):
    if omega_bar is not None:
        params = params.replace(omega_bar=omega_bar) if omega_bar * params.k_adjacent >= 1 else params
    return aobi.validation_per_round(params), aobi.communication_per_round(params)


def _hops(trace: SimTrace):
    if not trace.complete:
        raise ValueError("trace still has spreaders or unspreaders; AoBI is undefined "
                         "before consensus completes (run more epochs)")
    miners = np.flatnonzero(trace.first_reached >= 0)
    return miners, trace.first_reached[miners].astype(float)


def _gamma_sum(rng, hops, mean, size):
    """Sum of ``hops`` exponential draws with the given mean, per miner."""
    if mean == 0.0:
        return np.zeros(size)
    out = np.zeros(size)
    pos = hops > 0
    out[..., pos] = rng.gamma(hops[pos], mean, size=size[:-1] + (int(pos.sum()),))
    return out


def draw_block_timeline(trace: SimTrace, params: NetworkParams, rng: np.random.Generator,
                        omega_bar: float | None = None) -> BlockTimeline:
    miners, hops = _hops(trace)
    v_mean, c_mean = _service_means(params, omega_bar)
    mu = rng.uniform(0.0, 1.0 / params.lambda_rate, size=miners.size)
    val = _gamma_sum(rng, hops, v_mean, (miners.size,))
    com = _gamma_sum(rng, hops, c_mean, (miners.size,))
    beta = 0.0
    return BlockTimeline(beta - mu, beta, beta + val + com, val, com, miners)


def empirical_aobi(trace: SimTrace, params: NetworkParams, rng: np.random.Generator,
                   n_runs: int = 1, omega_bar: float | None = None) -> float:
    """Mean AoBI over the reached miners, averaged over ``n_runs`` independent blocks.

    ``omega_bar`` overrides the forwarding density used in the communication
    mean, e.g. with the density realised in the trace.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    miners, hops = _hops(trace)
    v_mean, c_mean = _service_means(params, omega_bar)
    total = 0.0
    done = 0
    while done < n_runs:
        size = (min(_CHUNK, n_runs - done), miners.size)
        mu = rng.uniform(0.0, 1.0 / params.lambda_rate, size=size)
        age = mu + _gamma_sum(rng, hops, v_mean, size) + _gamma_sum(rng, hops, c_mean, size)
        total += float(age.mean(axis=1).sum())
        done += size[0]
    return total / n_runs
