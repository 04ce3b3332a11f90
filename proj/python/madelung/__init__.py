"""Madelung quantum-hydrodynamics lab.

Thin re-export of the compiled core. Errors raised by the core are
MadelungError with args (kind, message).
"""

from ._core import (
    Config,
    MadelungError,
    Result,
    State,
    prepare_states,
    render,
    run_scenario,
    scenario_names,
    shaded_area,
    tune_beam_splitter,
)

__all__ = [
    "Config",
    "MadelungError",
    "Result",
    "State",
    "prepare_states",
    "render",
    "run_scenario",
    "scenario_names",
    "shaded_area",
    "tune_beam_splitter",
]
