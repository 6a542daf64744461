"""Validated parameter containers shared by the model modules.

All containers are frozen dataclasses that check their invariants on
construction, so an instance that exists is always usable.  Values default to
the simulation settings used throughout the package (4000 miners, 3 adjacent
miners, 100 base stations, ...).
"""
from __future__ import annotations

import configparser
import dataclasses
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

# omega_bar * k within this distance of 1 selects the linear (ceil(N/k)) branch
OMEGA_K_ONE_TOL = 1e-12
# relative slack for range checks that are met with equality by design
_REL_TOL = 1e-12

DEFAULT_BANDWIDTH = 1e4


class ParameterError(ValueError):
    """A parameter is outside its admissible range."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _le(a: float, b: float) -> bool:
    return a <= b + _REL_TOL * max(abs(a), abs(b))


def _positive_int(name, value):
    if isinstance(value, bool) or int(value) != value:
        raise ParameterError(name, f"expected an integer, got {value!r}")
    if value < 1:
        raise ParameterError(name, f"must be >= 1, got {value}")


def _positive(name, value, allow_inf=False):
    if math.isnan(value) or value <= 0:
        raise ParameterError(name, f"must be > 0, got {value}")
    if math.isinf(value) and not allow_inf:
        raise ParameterError(name, "must be finite")


@dataclass(frozen=True)
class NetworkParams:
    """Physical and blockchain constants of the miner network.

    ``cloud_compute`` and ``bandwidth_w`` may be ``math.inf`` to express the
    limit where validation or communication cost vanishes.
    """

    n_miners: int = 4000
    n_base_stations: int = 100
    k_adjacent: int = 3
    cloud_compute: float = 1e13
    b_max: int = 100
    t_pack: float = 20.0
    t_mine: float = 600.0
    r_validate: float = 1e6
    p_size: float = 300.0
    r_c: float = 200.0
    bandwidth_w: float = DEFAULT_BANDWIDTH
    omega_bar: float = 0.8
    tau: float = 1.0
    lambda_rate: float = 1.0 / 620.0

    def __post_init__(self):
        for name in ("n_miners", "n_base_stations", "k_adjacent", "b_max"):
            _positive_int(name, getattr(self, name))
        for name in ("t_pack", "t_mine", "r_validate", "p_size", "r_c", "tau",
                     "lambda_rate"):
            _positive(name, float(getattr(self, name)))
        _positive("cloud_compute", float(self.cloud_compute), allow_inf=True)
        _positive("bandwidth_w", float(self.bandwidth_w), allow_inf=True)

        if not 0.0 < self.omega_bar <= 1.0:
            raise ParameterError("omega_bar", f"must lie in (0, 1], got {self.omega_bar}")
        if self.omega_k < 1.0 - OMEGA_K_ONE_TOL:
            raise ParameterError(
                "omega_bar",
                f"omega_bar * k_adjacent = {self.omega_k:g} < 1; coverage never reaches all miners")

        lo, hi = self.tau_bounds
        if not _le(lo, self.tau):
            raise ParameterError("tau", f"tau below 1/T_p = {lo:g} (got {self.tau:g})")
        if not _le(self.tau, hi):
            raise ParameterError("tau", f"tau above B_max/T_p = {hi:g} (got {self.tau:g})")

        lam_max = 1.0 / (self.t_pack + self.t_mine)
        if not _le(self.lambda_rate, lam_max):
            raise ParameterError(
                "lambda_rate",
                f"violates 1/lambda >= T_p + T_mine: lambda={self.lambda_rate:g} > {lam_max:g}")

    @property
    def omega_k(self) -> float:
        return self.omega_bar * self.k_adjacent

    @property
    def tau_bounds(self) -> tuple[float, float]:
        """Feasible packing rates ``[1/T_p, B_max/T_p]``."""
        return 1.0 / self.t_pack, self.b_max / self.t_pack

    @property
    def block_size(self) -> float:
        """Transactions per block, ``tau * T_p``."""
        return self.tau * self.t_pack

    @property
    def miners_per_station(self) -> float:
        return self.n_miners / self.n_base_stations

    def replace(self, **changes) -> "NetworkParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class PropagationProbabilities:
    """Forwarding, evil, recovery and immunity probabilities."""

    p_f: float = 0.5
    p_e: float = 0.1
    p_r: float = 0.3
    p_i: float = 0.2

    def __post_init__(self):
        for name in ("p_f", "p_e", "p_r"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(name, f"must lie in [0, 1], got {v}")
        if not 0.0 < self.p_i <= 1.0:
            raise ParameterError("p_i", f"must lie in (0, 1], got {self.p_i}")

    def replace(self, **changes) -> "PropagationProbabilities":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class PayoffParams:
    """Rewards and costs of the two-population forwarding game.

    Built from the raw validation reward/cost ``(P, Q)`` and propagation
    reward/cost ``(I, M)``; the net quantities ``delta_p = P - Q`` and
    ``delta_u = I - M`` are derived, never stored, so they cannot drift.
    """

    reward_validate: float = 0.6
    cost_validate: float = 0.1
    reward_propagate: float = 0.4
    cost_propagate: float = 0.2
    extra_reward: float = 0.3
    punishment_risk: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self):
        if not self.delta_p > 0:
            raise ParameterError(
                "cost_validate",
                f"validation reward must exceed its cost (P - Q = {self.delta_p:g})")
        if self.extra_reward < 0:
            raise ParameterError("extra_reward", f"must be >= 0, got {self.extra_reward}")
        if self.punishment_risk < 0:
            raise ParameterError("punishment_risk", f"must be >= 0, got {self.punishment_risk}")
        if not self.epsilon > 0:
            raise ParameterError("epsilon", f"must be > 0, got {self.epsilon}")

    @classmethod
    def from_deltas(cls, delta_i, delta_p, delta_u, epsilon=0.1, punishment_risk=1.0):
        """Build from net rewards; raw costs are chosen so the nets are exact."""
        reward_propagate = max(delta_u, 0.0)
        return cls(
            reward_validate=delta_p,
            cost_validate=0.0,
            reward_propagate=reward_propagate,
            cost_propagate=reward_propagate - delta_u,
            extra_reward=delta_i,
            punishment_risk=punishment_risk,
            epsilon=epsilon,
        )

    @property
    def delta_p(self) -> float:
        return self.reward_validate - self.cost_validate

    @property
    def delta_u(self) -> float:
        return self.reward_propagate - self.cost_propagate

    @property
    def delta_i(self) -> float:
        return self.extra_reward

    @property
    def eps_r(self) -> float:
        """Expected punishment cost ``epsilon * R``."""
        return self.epsilon * self.punishment_risk

    def replace(self, **changes) -> "PayoffParams":
        return dataclasses.replace(self, **changes)


_INT_FIELDS = {"n_miners", "n_base_stations", "k_adjacent", "b_max"}


def _coerce(cls, mapping: Mapping[str, Any]) -> dict:
    out = {}
    for f in fields(cls):
        if f.name not in mapping:
            continue
        value = mapping[f.name]
        if isinstance(value, str):
            value = float(value)
        if f.name in _INT_FIELDS:
            as_float = float(value)
            if as_float != int(as_float):
                raise ParameterError(f.name, f"expected an integer, got {value!r}")
            value = int(as_float)
        else:
            value = float(value)
        out[f.name] = value
    return out


def validate_network_params(raw: Mapping[str, Any]) -> NetworkParams:
    """Build :class:`NetworkParams` from a loose mapping (strings allowed).

    Missing keys take their defaults; unknown keys are ignored so one config
    file can hold several parameter groups.
    """
    try:
        return NetworkParams(**_coerce(NetworkParams, raw))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError("config", str(exc)) from exc


def probabilities_from_mapping(raw: Mapping[str, Any]) -> PropagationProbabilities:
    return PropagationProbabilities(**_coerce(PropagationProbabilities, raw))


def payoffs_from_mapping(raw: Mapping[str, Any]) -> PayoffParams:
    return PayoffParams(**_coerce(PayoffParams, raw))


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a flat ``key = value`` file or a JSON object.

    Values from a key/value file come back as strings, JSON values keep their
    JSON types.  Keys are field names of the parameter containers plus any
    experiment-level options.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ParameterError("config", f"{path}: top level must be an object")
        return data
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    parser.read_string("[config]\n" + text, source=str(path))
    return dict(parser["config"])
