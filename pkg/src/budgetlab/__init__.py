"""budgetlab: randomised search heuristics, exact Markov-chain oracles and
closed-form approximation-error envelopes, verifiable at desk scale."""

from ._backend import kernel_backend
from .fitness import BitString, FitnessSpec, compare_exact, error, evaluate, optimum
from .heuristics import AlgorithmSpec, RngStream, ea_step, rls_step, run_trajectory, sa_step

__version__ = "0.1.0"

__all__ = [
    "AlgorithmSpec",
    "BitString",
    "FitnessSpec",
    "RngStream",
    "compare_exact",
    "ea_step",
    "error",
    "evaluate",
    "kernel_backend",
    "optimum",
    "rls_step",
    "run_trajectory",
    "sa_step",
    "__version__",
]
