"""Exact geometric scaling for linear optimization over 0/1 polytopes."""

from .model import (BitVertex, Instance, Polytope, make_simplex,
                    objective_geometric, objective_linear, parse_instance,
                    random_polytope, write_instance)
from .oracles import Policy, PolicyKind, brute_force_opt
from .scaling import EngineConfig, Trace, Variant, check_invariants, run

__version__ = "0.1.0"

__all__ = [
    "BitVertex",
    "Instance",
    "Polytope",
    "make_simplex",
    "objective_linear",
    "objective_geometric",
    "random_polytope",
    "parse_instance",
    "write_instance",
    "Policy",
    "PolicyKind",
    "brute_force_opt",
    "EngineConfig",
    "Variant",
    "Trace",
    "run",
    "check_invariants",
]
