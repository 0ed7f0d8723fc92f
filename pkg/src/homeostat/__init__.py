"""Behavioral simulator of a homeostatic synaptic-scaling gain control loop.

A log-domain DPI synapse drives an integrate-and-fire neuron; a bang-bang
comparator and an ultra-low-leakage cell slowly steer the synaptic gain so the
neuron's rate settles back to its set point.
"""

__version__ = "0.1.0"

from .engine import run, run_fast_equivalence, sweep  # noqa: E402
from .kernel import BACKEND  # noqa: E402
from .scenario import Scenario, Trace, load_scenario  # noqa: E402

__all__ = ["BACKEND", "Scenario", "Trace", "load_scenario", "run", "run_fast_equivalence", "sweep"]
