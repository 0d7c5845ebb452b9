"""Minimum-length scheduling of backlogged link queues under interference."""
from .colgen import (CgReport, cardinality_cg, price_cardinality, price_exact, price_heuristic,
                     reduced_cardinality_lp, solve_cardinality, solve_cg, solve_full_lp,
                     solve_uniform_cardinality)
from .conditions import (CertificateReport, check_cardinality_corollaries, check_condition1,
                         check_condition2, check_condition3, check_condition4, schedule_h1,
                         schedule_hn)
from .errors import (BudgetExceeded, DomainError, GenerationError, InfeasibleStrategy,
                     LinkdrainError, SchemaError)
from .framework import FrameworkConfig, run_framework
from .instance import GeneratorParams, Instance, cardinality_instance, generate, load, save
from .lp_core import MasterProblem, simplex
from .rate_model import (BinaryOracle, BpskOracle, CardinalityOracle, ChannelMatrix,
                         ShannonOracle, verify_monotonicity)
from .schedule import Schedule

__version__ = "0.1.0"

__all__ = [
    "BinaryOracle",
    "BpskOracle",
    "BudgetExceeded",
    "CardinalityOracle",
    "CertificateReport",
    "CgReport",
    "ChannelMatrix",
    "DomainError",
    "FrameworkConfig",
    "GenerationError",
    "GeneratorParams",
    "InfeasibleStrategy",
    "Instance",
    "LinkdrainError",
    "MasterProblem",
    "Schedule",
    "SchemaError",
    "ShannonOracle",
    "cardinality_cg",
    "cardinality_instance",
    "check_cardinality_corollaries",
    "check_condition1",
    "check_condition2",
    "check_condition3",
    "check_condition4",
    "generate",
    "load",
    "price_cardinality",
    "price_exact",
    "price_heuristic",
    "reduced_cardinality_lp",
    "run_framework",
    "save",
    "schedule_h1",
    "schedule_hn",
    "simplex",
    "solve_cardinality",
    "solve_cg",
    "solve_full_lp",
    "solve_uniform_cardinality",
    "verify_monotonicity",
]
