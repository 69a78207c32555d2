# Convexity testers over discrete grids
from .config import config
from .core import (
    DiscreteDistribution, DomainError, FormatError, GridDomain, GridFunction, LazyGridFunction,
    QueryOracle, Rng, make_oracle, read_distribution, read_function, write_distribution, write_function,
)
from .line_tester import TestReport, Verdict, convexity_test_1d, convexity_test_1d_distribution_free
from .stripe_tester import convexity_test_stripe

__all__ = [
    "config", "DiscreteDistribution", "DomainError", "FormatError", "GridDomain", "GridFunction",
    "LazyGridFunction", "QueryOracle", "Rng", "make_oracle", "read_distribution", "read_function",
    "write_distribution", "write_function", "TestReport", "Verdict", "convexity_test_1d",
    "convexity_test_1d_distribution_free", "convexity_test_stripe",
]
