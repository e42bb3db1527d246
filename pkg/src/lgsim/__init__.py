"""Triplex landing-gear control system: guarded-event simulator, runtime
requirement monitor, and bounded explorer with counterexample traces."""

from .config import Mutant, SimConfig
from .state import SystemState, initial_state, fingerprint, canonical_record
from .scenario import Scenario
from .kernel import Kernel, run, replay, Trace
from .explorer import ExploreConfig, explore, minimize
from . import monitor

__all__ = [
    "Mutant",
    "SimConfig",
    "SystemState",
    "initial_state",
    "fingerprint",
    "canonical_record",
    "Scenario",
    "Kernel",
    "run",
    "replay",
    "Trace",
    "ExploreConfig",
    "explore",
    "minimize",
    "monitor",
]
