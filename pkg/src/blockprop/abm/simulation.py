"""Discrete-time agent simulation of block propagation.

One epoch applies, in order: ignorants turn evil, spreaders transmit and the
contacted miners react, spreaders and unspreaders become refusers, evildoers
recover.  With ``substeps > 1`` each epoch is split into equal sub-steps whose
per-step probabilities are the epoch probabilities times ``dt = 1/substeps``;
this is the regime in which epoch-averaged densities follow the mean-field
equations with one epoch per time unit.

``mixing="graph"`` sends each spreader's messages to its fixed neighbours.
``mixing="annealed"`` draws ``k`` fresh uniformly random recipients per
spreader per step, which is the homogeneous-mixing assumption behind the
mean-field equations.
"""
from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..params import PropagationProbabilities
from .mechanisms import Feedback, Gossip
from .network import RNG_ALGORITHM, MinerNetwork, make_rng

MIXING_MODES = ("graph", "annealed")


class MinerState(enum.IntEnum):
    IGNORANT = 0
    SPREADER = 1
    UNSPREADER = 2
    REFUSER = 3
    EVILDOER = 4


I, S, U, R, E = (int(m) for m in MinerState)


@dataclass
class StepResult:
    states: np.ndarray
    transmissions: int
    reached: np.ndarray    # miners that accepted the block this step
    received: np.ndarray   # bool (n,)
    redundant: np.ndarray  # bool (n,)


def step(net: MinerNetwork, states: np.ndarray, probs: PropagationProbabilities,
         rng: np.random.Generator, p_forward=None, dt: float = 1.0,
         mixing: str = "graph") -> StepResult:
    """Advance every miner by one (sub-)step; ``states`` is not modified.

    ``p_forward`` overrides ``probs.p_f`` per miner.  A contacted ignorant
    accepts with overall probability ``1 - p_e`` whatever ``dt`` is: phase 1
    already removes a ``p_e * dt`` share, the rest is filtered at contact.
    """
    n = net.n
    if p_forward is None:
        p_forward = np.full(n, probs.p_f)
    st = states.copy()
    was_s = st == S
    was_u = st == U
    was_e = st == E

    # 1. ignorants turn evil
    ign = np.flatnonzero(st == I)
    st[ign[rng.random(ign.size) < probs.p_e * dt]] = E

    # 2. spreaders transmit
    senders = np.flatnonzero(was_s)
    if mixing == "graph":
        targets = net.adjacency[senders]
    elif mixing == "annealed":
        targets = rng.integers(0, n - 1, size=(senders.size, net.k))
        targets += targets >= senders[:, None]
    else:
        raise ValueError(f"unknown mixing mode {mixing!r}; expected one of {MIXING_MODES}")
    src = np.repeat(senders, net.k)
    targets = targets.reshape(-1)
    if dt < 1.0:
        keep = rng.random(targets.size) < dt
        targets, src = targets[keep], src[keep]
    t_state = st[targets]

    hit = np.unique(targets[t_state == I])
    accept_p = (1.0 - probs.p_e) / (1.0 - probs.p_e * dt) if probs.p_e * dt < 1.0 else 1.0
    reached = hit[rng.random(hit.size) < accept_p]
    forwards = rng.random(reached.size) < p_forward[reached]

    hits_on_s = np.bincount(targets[t_state == S], minlength=n)
    contacted_s = np.flatnonzero(hits_on_s)
    immune = contacted_s[rng.random(contacted_s.size) < 1.0 - (1.0 - probs.p_i) ** hits_on_s[contacted_s]]

    received = np.zeros(n, dtype=bool)
    received[targets[t_state != E]] = True
    redundant = np.zeros(n, dtype=bool)
    redundant[src[t_state != I]] = True

    # 3. spreaders and unspreaders that interacted become refusers
    still_s = was_s.copy()
    still_s[immune] = False
    s_idx = np.flatnonzero(still_s)
    s_done = s_idx[rng.random(s_idx.size) < probs.p_i * dt]
    u_idx = np.flatnonzero(was_u)
    u_done = u_idx[rng.random(u_idx.size) < probs.p_i * dt]

    # 4. evildoers recover
    e_idx = np.flatnonzero(was_e)
    back = e_idx[rng.random(e_idx.size) < probs.p_r * dt]

    st[immune] = R
    st[s_done] = R
    st[u_done] = R
    st[back] = I
    st[reached[forwards]] = S
    st[reached[~forwards]] = U
    return StepResult(st, int(targets.size), reached, received, redundant)


@dataclass(frozen=True, eq=False)
class SimTrace:
    counts: np.ndarray          # (T, 5) miners per state at each epoch boundary
    p_f_effective: np.ndarray   # (T,) mean forwarding probability in force from that epoch on
    transmissions: np.ndarray   # (T,) messages sent during the epoch ending there
    first_reached: np.ndarray   # (n,) epoch a miner accepted the block, -1 if never
    seed: int
    label: str = ""

    @property
    def n(self) -> int:
        return int(self.counts[0].sum())

    @property
    def epochs(self) -> int:
        return len(self.counts) - 1

    @property
    def densities(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def complete(self) -> bool:
        """No spreaders or unspreaders left, so validation has finished."""
        last = self.counts[-1]
        return bool(last[S] == 0 and last[U] == 0)


TRACE_COLUMNS = ("epoch", "count_i", "count_s", "count_u", "count_r", "count_e",
                 "p_f_effective", "transmissions")


def initial_states(n: int, rng: np.random.Generator) -> np.ndarray:
    st = np.zeros(n, dtype=np.int8)
    st[rng.integers(n)] = S
    return st


def run_simulation(net: MinerNetwork, probs: PropagationProbabilities, epochs: int, seed: int,
                   mechanism=None, substeps: int = 1, mixing: str = "graph",
                   stop_on_absorption: bool = False) -> SimTrace:
    """Run from one uniformly chosen spreader for ``epochs`` epochs.

    Without a mechanism the forwarding probability is ``probs.p_f`` throughout.
    With ``stop_on_absorption`` the run ends early once no spreader or
    unspreader remains.
    """
    if epochs < 0:
        raise ValueError(f"epochs must be >= 0, got {epochs}")
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    if mixing not in MIXING_MODES:
        raise ValueError(f"unknown mixing mode {mixing!r}; expected one of {MIXING_MODES}")
    mechanism = mechanism if mechanism is not None else Gossip(probs.p_f, name="fixed")
    rng = make_rng(seed)
    n = net.n
    states = initial_states(n, rng)
    policy = mechanism.start(net, epochs)
    dt = 1.0 / substeps

    first = np.full(n, -1, dtype=np.int64)
    first[states == S] = 0
    counts = [np.bincount(states, minlength=5)]
    p_eff = [float(policy.p.mean())]
    sent = [0]
    for epoch in range(1, epochs + 1):
        received = np.zeros(n, dtype=bool)
        redundant = np.zeros(n, dtype=bool)
        total = 0
        for _ in range(substeps):
            res = step(net, states, probs, rng, policy.p, dt, mixing)
            states = res.states
            total += res.transmissions
            received |= res.received
            redundant |= res.redundant
            first[res.reached[first[res.reached] < 0]] = epoch
        policy.update(epoch, Feedback(received, redundant))
        counts.append(np.bincount(states, minlength=5))
        p_eff.append(float(policy.p.mean()))
        sent.append(total)
        if stop_on_absorption and counts[-1][S] == 0 and counts[-1][U] == 0:
            break
    return SimTrace(np.array(counts, dtype=np.int64), np.array(p_eff),
                    np.array(sent, dtype=np.int64), first, int(seed), mechanism.label)


@dataclass(frozen=True, eq=False)
class MechanismSeries:
    label: str
    forwarding: np.ndarray  # (T,) seed-averaged mean forwarding probability
    densities: np.ndarray   # (T, 5) seed-averaged state densities

    @property
    def refusers(self) -> np.ndarray:
        return self.densities[:, R]

    @property
    def evildoers(self) -> np.ndarray:
        return self.densities[:, E]


def average_traces(traces: Sequence[SimTrace], label: str = "") -> MechanismSeries:
    """Average over seeds, in the order given."""
    forwarding = np.mean([t.p_f_effective for t in traces], axis=0)
    densities = np.mean([t.densities for t in traces], axis=0)
    return MechanismSeries(label or traces[0].label, forwarding, densities)


def compare_mechanisms(net: MinerNetwork, mechanisms: Sequence, probs: PropagationProbabilities,
                       epochs: int, seeds: Sequence[int], **sim_kwargs) -> dict[str, MechanismSeries]:
    """Run every mechanism over every seed and average per mechanism."""
    out = {}
    for mech in mechanisms:
        traces = [run_simulation(net, probs, epochs, s, mechanism=mech, **sim_kwargs) for s in seeds]
        out[mech.label] = average_traces(traces, mech.label)
    return out


def write_trace_csv(trace: SimTrace, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for epoch, (c, p, tx) in enumerate(zip(trace.counts, trace.p_f_effective, trace.transmissions)):
            w.writerow([epoch, *map(int, c), repr(float(p)), int(tx)])
    return path


def write_series_csv(series: MechanismSeries, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("epoch", "forwarding", "i", "s", "u", "r", "e"))
        for epoch, (p, d) in enumerate(zip(series.forwarding, series.densities)):
            w.writerow([epoch, repr(float(p))] + [repr(float(v)) for v in d])
    return path


def run_manifest(net: MinerNetwork, probs: PropagationProbabilities, epochs: int, seed: int,
                 mechanism=None, **extra) -> dict:
    mech = repr(mechanism) if mechanism is not None else None
    return {"seed": int(seed), "n": net.n, "k": net.k, "graph_seed": net.seed,
            "probs": {"p_f": probs.p_f, "p_e": probs.p_e, "p_i": probs.p_i, "p_r": probs.p_r},
            "mechanism": mech, "rng_algorithm": RNG_ALGORITHM, "epochs": epochs, **extra}


def write_manifest(manifest: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
