from lobnet.fitnessmodel.ensemble import ExponentComparison, compare_exponents, run_ensemble
from lobnet.fitnessmodel.model import FitnessAgent, build_pools, simulate_day

__all__ = [
    "FitnessAgent",
    "build_pools",
    "simulate_day",
    "run_ensemble",
    "compare_exponents",
    "ExponentComparison",
]
