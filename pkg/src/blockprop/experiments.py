"""Named experiments and the runner that writes their CSV/JSON outputs.

An :class:`ExperimentSpec` is plain data (kind + flat parameter dict), so it
can come from a preset, a config file, command-line flags, or any mix of the
three.  ``run_experiment`` validates it, runs the models and writes
deterministic data files plus a ``manifest.json`` describing the run.
"""
from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import aobi, epidemic, evogame
from .abm import (
    RNG_ALGORITHM,
    Bpim,
    Gossip,
    Greedy,
    ProbabilisticFlooding,
    average_traces,
    build_network,
    compare_mechanisms,
    run_manifest,
    run_simulation,
    write_manifest,
    write_series_csv,
    write_trace_csv,
)
from .params import (
    ParameterError,
    PayoffParams,
    PropagationProbabilities,
    payoffs_from_mapping,
    probabilities_from_mapping,
    validate_network_params,
)


class ExperimentKind(enum.Enum):
    AOBI_SWEEP = "AobiSweep"
    EPIDEMIC_RUN = "EpidemicRun"
    STEADY_STATE_SURFACE = "SteadyStateSurface"
    GAME_PORTRAIT = "GamePortrait"
    ABM_RUN = "AbmRun"
    MECHANISM_COMPARE = "MechanismCompare"


STOCHASTIC = {ExperimentKind.ABM_RUN, ExperimentKind.MECHANISM_COMPARE}


@dataclass
class ExperimentSpec:
    name: str
    kind: ExperimentKind
    parameters: dict[str, Any] = field(default_factory=dict)
    output_dir: Path = Path("out")
    seeds: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind.value, "parameters": self.parameters,
                "output_dir": str(self.output_dir), "seeds": list(self.seeds)}


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# --------------------------------------------------------------------------- parsing


def _payoffs(raw: dict) -> PayoffParams:
    if "delta_p" in raw or "delta_u" in raw:
        return PayoffParams.from_deltas(
            float(raw.get("delta_i", 0.0)), float(raw["delta_p"]), float(raw["delta_u"]),
            epsilon=float(raw.get("epsilon", 0.1)),
            punishment_risk=float(raw.get("punishment_risk", 1.0)))
    return payoffs_from_mapping(raw)


def mechanism_from_dict(raw: dict):
    kind = raw.get("kind")
    name = raw.get("name", kind)
    if kind == "gossip":
        return Gossip(float(raw.get("p_fixed", 0.2)), name=name)
    if kind == "flooding":
        return ProbabilisticFlooding(float(raw.get("learning_rate", 0.05)),
                                     float(raw.get("p_initial", 0.2)), name=name)
    if kind == "greedy":
        return Greedy(_payoffs(raw.get("pay", {})), float(raw.get("y_initial", 0.2)), name=name)
    if kind == "bpim":
        return Bpim(_payoffs(raw.get("pay", {})), float(raw.get("x0", 0.2)),
                    float(raw.get("y0", 0.2)), name=name)
    raise ParameterError("mechanisms", f"unknown mechanism kind {kind!r}")


def _floats(value, key) -> list[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ParameterError(key, f"expected a list of numbers, got {value!r}") from exc


def _vary(params: dict) -> tuple[str | None, list]:
    vary = params.get("vary")
    if not vary:
        return None, [None]
    if not isinstance(vary, dict) or len(vary) != 1:
        raise ParameterError("vary", "expected a single {field: [values]} entry")
    (key, values), = vary.items()
    return key, _floats(values, "vary")


def _tag(key, value) -> str:
    return "" if key is None else f"_{key}_{value:g}"


def validate_spec(spec: ExperimentSpec) -> None:
    """Check kind-specific parameters without running anything."""
    if not spec.name:
        raise ParameterError("name", "experiment needs a name")
    if not isinstance(spec.kind, ExperimentKind):
        raise ParameterError("kind", f"unknown kind {spec.kind!r}")
    if spec.kind in STOCHASTIC and not spec.seeds:
        raise ParameterError("seeds", f"{spec.kind.value} needs at least one seed")
    p = spec.parameters
    key, values = _vary(p)
    for v in values:
        q = dict(p) if key is None else {**p, key: v}
        if spec.kind is ExperimentKind.AOBI_SWEEP:
            base = validate_network_params(q)
            for t in _floats(q.get("tau_grid", [base.tau]), "tau_grid"):
                base.replace(tau=t)
        elif spec.kind is ExperimentKind.EPIDEMIC_RUN:
            probabilities_from_mapping(q)
            _start(q)
        elif spec.kind is ExperimentKind.STEADY_STATE_SURFACE:
            for axis in ("row_axis", "col_axis", "row_values", "col_values"):
                if axis not in q:
                    raise ParameterError(axis, "required for SteadyStateSurface")
        elif spec.kind is ExperimentKind.GAME_PORTRAIT:
            _payoffs(q)
        elif spec.kind is ExperimentKind.ABM_RUN:
            probabilities_from_mapping(q)
            if q.get("mechanism"):
                mechanism_from_dict(q["mechanism"])
        elif spec.kind is ExperimentKind.MECHANISM_COMPARE:
            probabilities_from_mapping(q)
            mechs = q.get("mechanisms")
            if not mechs:
                raise ParameterError("mechanisms", "MechanismCompare needs a mechanism list")
            for m in mechs:
                mechanism_from_dict(m)


# --------------------------------------------------------------------------- runners


def _run_aobi(spec, out):
    files = []
    key, values = _vary(spec.parameters)
    for v in values:
        q = dict(spec.parameters) if key is None else {**spec.parameters, key: v}
        base = validate_network_params(q)
        grid = _floats(q.get("tau_grid", [base.tau]), "tau_grid")
        sweep = aobi.aobi_tau_sweep(base, grid)
        files.append(aobi.write_sweep_csv(sweep, out / f"aobi{_tag(key, v)}.csv"))
    return files


def _start(q) -> epidemic.StateDensities:
    if "start" in q:
        return epidemic.StateDensities(*_floats(q["start"], "start"))
    return epidemic.initial_densities(int(q.get("n_miners", 4000)))


def _run_epidemic(spec, out):
    files = []
    p = spec.parameters
    step = float(p.get("step", epidemic.DEFAULT_STEP))
    horizon = float(p.get("horizon", epidemic.DEFAULT_HORIZON))
    every = max(1, int(round(float(p.get("output_interval", 1.0)) / step)))
    key, values = _vary(p)
    for v in values:
        q = dict(p) if key is None else {**p, key: v}
        probs = probabilities_from_mapping(q)
        start = _start(q)
        traj = epidemic.integrate(start, probs, int(q.get("k_adjacent", 3)), horizon, step)
        files.append(epidemic.write_trajectory_csv(traj, out / f"epidemic{_tag(key, v)}.csv", every))
    return files


def _run_surface(spec, out):
    p = spec.parameters
    surface = epidemic.consensus_level_surface(
        p["row_axis"], _floats(p["row_values"], "row_values"),
        p["col_axis"], _floats(p["col_values"], "col_values"), dict(p.get("fixed", {})))
    return [epidemic.write_surface_csv(surface, out / "consensus_surface.csv")]


def _run_game(spec, out):
    p = spec.parameters
    pay = _payoffs(p)
    if "starts" in p:
        starts = [evogame.GameState(float(a), float(b)) for a, b in p["starts"]]
    else:
        starts = evogame.start_grid(int(p.get("grid", 9)))
    sols = evogame.phase_portrait(pay, starts, max_epochs=int(p.get("max_epochs", 500)),
                                  tol=float(p.get("tol", 1e-6)))
    files = [evogame.write_equilibria_json(evogame.classify_equilibria(pay), out / "equilibria.json")]
    for s, sol in zip(starts, sols):
        files.append(evogame.write_solution_csv(sol, out / f"game_x{s.x:g}_y{s.y:g}.csv"))
    return files


def _sim_kwargs(p):
    return {"substeps": int(p.get("substeps", 20)), "mixing": p.get("mixing", "annealed")}


def _run_abm(spec, out):
    p = spec.parameters
    probs = probabilities_from_mapping(p)
    net = build_network(int(p.get("n_miners", 4000)), int(p.get("k_adjacent", 3)),
                        int(p.get("graph_seed", 0)))
    epochs = int(p.get("epochs", 60))
    mech = mechanism_from_dict(p["mechanism"]) if p.get("mechanism") else None
    kw = _sim_kwargs(p)
    files, traces = [], []
    for seed in spec.seeds:
        trace = run_simulation(net, probs, epochs, seed, mechanism=mech, **kw)
        traces.append(trace)
        files.append(write_trace_csv(trace, out / f"trace_seed{seed}.csv"))
        files.append(write_manifest(run_manifest(net, probs, epochs, seed, mech, **kw),
                                    out / f"run_seed{seed}.json"))
    files.append(write_series_csv(average_traces(traces, "mean"), out / "mean.csv"))
    return files


def _run_compare(spec, out):
    p = spec.parameters
    probs = probabilities_from_mapping(p)
    net = build_network(int(p.get("n_miners", 1000)), int(p.get("k_adjacent", 3)),
                        int(p.get("graph_seed", 0)))
    mechs = [mechanism_from_dict(m) for m in p["mechanisms"]]
    series = compare_mechanisms(net, mechs, probs, int(p.get("epochs", 40)), spec.seeds,
                                **_sim_kwargs(p))
    return [write_series_csv(s, out / f"mechanism_{label}.csv") for label, s in series.items()]


_RUNNERS: dict[ExperimentKind, Callable] = {
    ExperimentKind.AOBI_SWEEP: _run_aobi,
    ExperimentKind.EPIDEMIC_RUN: _run_epidemic,
    ExperimentKind.STEADY_STATE_SURFACE: _run_surface,
    ExperimentKind.GAME_PORTRAIT: _run_game,
    ExperimentKind.ABM_RUN: _run_abm,
    ExperimentKind.MECHANISM_COMPARE: _run_compare,
}


def run_experiment(spec: ExperimentSpec) -> dict:
    """Run ``spec`` and return its manifest (also written to ``manifest.json``)."""
    validate_spec(spec)
    out = Path(spec.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ParameterError("output_dir", f"cannot create {out}: {exc}") from exc
    t0 = time.perf_counter()
    files = _RUNNERS[spec.kind](spec, out)
    manifest = {
        "spec": spec.to_dict(),
        "artifact_version": _version(),
        "rng_algorithm": RNG_ALGORITHM,
        "wall_time_s": time.perf_counter() - t0,
        "files": [f.name for f in files],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    return manifest


# --------------------------------------------------------------------------- presets

# BPIM payoffs for incentive strength I/M = 2 and 4 (M = 0.25).  Chosen so the
# receivers' forwarding share needs roughly 20 vs 10 epochs to saturate.
_PAY_IM2 = {"reward_validate": 0.6, "cost_validate": 0.1, "reward_propagate": 0.5,
            "cost_propagate": 0.25, "extra_reward": 0.05, "punishment_risk": 1.0, "epsilon": 0.1}
_PAY_IM4 = {**_PAY_IM2, "reward_propagate": 1.0}

_PROBS = {"p_f": 0.5, "p_e": 0.1, "p_i": 0.2, "p_r": 0.3}
_TAUS = [0.5 * j for j in range(1, 11)]
_SEEDS = list(range(30))

FIG4_MECHANISMS = [
    {"kind": "gossip", "name": "gossip", "p_fixed": 0.2},
    {"kind": "flooding", "name": "flooding", "learning_rate": 0.05, "p_initial": 0.2},
    {"kind": "greedy", "name": "greedy", "pay": _PAY_IM2, "y_initial": 0.2},
    {"kind": "bpim", "name": "bpim_im2", "pay": _PAY_IM2, "x0": 0.2, "y0": 0.2},
    {"kind": "bpim", "name": "bpim_im4", "pay": _PAY_IM4, "x0": 0.2, "y0": 0.2},
]

_PRESETS: dict[str, tuple[str, ExperimentKind, dict, list[int]]] = {
    "fig3a": ("forwarding game, dI + dU > 0 with receivers above threshold",
              ExperimentKind.GAME_PORTRAIT,
              {"delta_i": 0.3, "delta_p": 0.5, "delta_u": 0.2, "epsilon": 0.1,
               "punishment_risk": 1.0, "grid": 9}, []),
    "fig3b": ("forwarding game, dI + dU < 0 with receivers above threshold",
              ExperimentKind.GAME_PORTRAIT,
              {"delta_i": 0.1, "delta_p": 0.5, "delta_u": -0.3, "epsilon": 0.1,
               "punishment_risk": 1.0, "starts": [[0.2, 0.9], [0.5, 0.9], [0.2, 0.8], [0.5, 0.8]]},
              []),
    "fig3c": ("forwarding game, dI + dU < 0 with receivers below threshold",
              ExperimentKind.GAME_PORTRAIT,
              {"delta_i": 0.1, "delta_p": 0.2, "delta_u": -0.5, "epsilon": 0.1,
               "punishment_risk": 1.0, "grid": 9}, []),
    "fig4": ("receivers' forwarding probability: gossip, flooding, greedy, BPIM at I/M = 2 and 4",
             ExperimentKind.MECHANISM_COMPARE,
             {**_PROBS, "n_miners": 1000, "k_adjacent": 3, "graph_seed": 0, "epochs": 40,
              "substeps": 20, "mixing": "annealed", "mechanisms": FIG4_MECHANISMS}, _SEEDS),
    "fig5": ("refuser density over time for several forwarding probabilities",
             ExperimentKind.EPIDEMIC_RUN,
             {**_PROBS, "n_miners": 4000, "k_adjacent": 3, "horizon": 100.0,
              "vary": {"p_f": [0.3, 0.5, 0.7, 0.9]}}, []),
    "fig6": ("spreader density over time for several forwarding probabilities",
             ExperimentKind.EPIDEMIC_RUN,
             {**_PROBS, "n_miners": 4000, "k_adjacent": 3, "horizon": 100.0,
              "vary": {"p_f": [0.3, 0.5, 0.7, 0.9]}}, []),
    "fig7": ("minimum AoBI vs packing rate in the monotone and U-shaped regimes",
             ExperimentKind.AOBI_SWEEP,
             {"n_miners": 4000, "k_adjacent": 3, "omega_bar": 0.8, "tau_grid": _TAUS,
              "vary": {"cloud_compute": [1e13, 1e19]}}, []),
    "fig8": ("minimum AoBI vs packing rate for several forwarding densities",
             ExperimentKind.AOBI_SWEEP,
             {"n_miners": 4000, "k_adjacent": 3, "tau_grid": _TAUS,
              "vary": {"omega_bar": [0.6, 0.7, 0.8, 0.9, 1.0]}}, []),
    "fig9": ("minimum AoBI vs packing rate for several network sizes",
             ExperimentKind.AOBI_SWEEP,
             {"k_adjacent": 3, "omega_bar": 0.8, "tau_grid": _TAUS,
              "vary": {"n_miners": [1000, 2000, 3000, 4000]}}, []),
    "fig10": ("minimum AoBI vs packing rate for several fan-outs",
              ExperimentKind.AOBI_SWEEP,
              {"n_miners": 1000, "omega_bar": 0.5, "tau_grid": _TAUS,
               "vary": {"k_adjacent": [2, 3, 4, 5, 6]}}, []),
    "fig11": ("unspreader density over time for several recovery probabilities",
              ExperimentKind.EPIDEMIC_RUN,
              {**_PROBS, "n_miners": 4000, "k_adjacent": 3, "horizon": 100.0,
               "vary": {"p_r": [0.1, 0.3, 0.5, 0.7, 0.9]}}, []),
    "fig12": ("evildoer density over time for several forwarding probabilities",
              ExperimentKind.EPIDEMIC_RUN,
              {**_PROBS, "n_miners": 4000, "k_adjacent": 3, "horizon": 100.0,
               "vary": {"p_f": [0.3, 0.5, 0.7, 0.9]}}, []),
    "fig12-abm": ("seed-averaged agent simulation behind the evildoer curves",
                  ExperimentKind.ABM_RUN,
                  {**_PROBS, "n_miners": 4000, "k_adjacent": 3, "graph_seed": 0, "epochs": 60,
                   "substeps": 20, "mixing": "annealed"}, _SEEDS),
    "consensus-surface": ("consensus level r(inf) over forwarding and immunity probabilities",
                          ExperimentKind.STEADY_STATE_SURFACE,
                          {"row_axis": "p_f", "row_values": [0.05 * j for j in range(1, 21)],
                           "col_axis": "p_i", "col_values": [0.05 * j for j in range(1, 21)],
                           "fixed": {"p_e": 0.1}}, []),
}


def list_experiments() -> dict[str, str]:
    """Preset name -> one-line description."""
    return {name: desc for name, (desc, *_rest) in _PRESETS.items()}


def preset(name: str, output_dir: str | Path | None = None) -> ExperimentSpec:
    if name not in _PRESETS:
        raise ParameterError("preset", f"unknown preset {name!r}; try one of {sorted(_PRESETS)}")
    _, kind, params, seeds = _PRESETS[name]
    return ExperimentSpec(name, kind, json.loads(json.dumps(params)),
                          Path(output_dir) if output_dir else Path("out") / name, list(seeds))


def default_spec(kind: ExperimentKind, output_dir: str | Path | None = None) -> ExperimentSpec:
    """Starting point for a subcommand: the first preset of that kind."""
    for name, (_, k, _p, _s) in _PRESETS.items():
        if k is kind:
            spec = preset(name, output_dir)
            spec.name = kind.value
            return spec
    raise ParameterError("kind", f"no default for {kind}")


def seeds_array(spec: ExperimentSpec) -> np.ndarray:
    return np.asarray(spec.seeds, dtype=np.int64)
