"""Block propagation under the age of block information (AoBI).

Submodules: :mod:`aobi` (closed-form AoBI and rounds), :mod:`epidemic`
(five-state mean-field model), :mod:`evogame` (forwarding game),
:mod:`abm` (agent simulation) and :mod:`experiments` / :mod:`cli`.
"""
from . import abm, aobi, epidemic, evogame
from .params import (
    NetworkParams,
    ParameterError,
    PayoffParams,
    PropagationProbabilities,
    load_config,
)

__all__ = ["abm", "aobi", "epidemic", "evogame", "NetworkParams", "ParameterError",
           "PayoffParams", "PropagationProbabilities", "load_config"]
