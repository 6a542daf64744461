"""Agent-based block propagation on a random k-regular miner graph."""
from .mechanisms import Bpim, Feedback, Gossip, Greedy, Mechanism, ProbabilisticFlooding
from .network import RNG_ALGORITHM, MinerNetwork, build_network, make_rng
from .simulation import (
    MIXING_MODES,
    MechanismSeries,
    MinerState,
    SimTrace,
    StepResult,
    average_traces,
    compare_mechanisms,
    initial_states,
    run_manifest,
    run_simulation,
    step,
    write_manifest,
    write_series_csv,
    write_trace_csv,
)
from .timeline import BlockTimeline, draw_block_timeline, empirical_aobi

__all__ = [
    "Bpim", "Feedback", "Gossip", "Greedy", "Mechanism", "ProbabilisticFlooding",
    "RNG_ALGORITHM", "MinerNetwork", "build_network", "make_rng",
    "MIXING_MODES", "MechanismSeries", "MinerState", "SimTrace", "StepResult",
    "average_traces", "compare_mechanisms", "initial_states", "run_manifest",
    "run_simulation", "step", "write_manifest", "write_series_csv", "write_trace_csv",
    "BlockTimeline", "draw_block_timeline", "empirical_aobi",
]
