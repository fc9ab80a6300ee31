"""Exact Green functions, Martin kernels and boundary diagnostics for
Markov chains on the word space of self-similar fractals."""

from .adjacency import EquivalenceRules, WordSpace, audit_transitivity, check_B2, equivalent
from .boundary import address_point, boundary_equivalent, homeomorphism_diagnostic
from .chain import KernelTable, MarkovChain, MassDistribution
from .config import FractalConfig, load
from .ifs import IFS, Similitude
from .kernel import (
    MetricWeights,
    extended_kernel,
    kernel_via_theorem,
    martin_kernel,
    martin_kernel_hom,
    martin_metric,
)
from .words import EMPTY, EventuallyPeriodic, format_word, parse_infinite, parse_word

__version__ = "0.1.0"
