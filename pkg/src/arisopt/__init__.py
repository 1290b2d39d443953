"""Sum-rate optimization for active-RIS-aided multiuser MISO downlinks
under transceiver and RIS hardware impairments.

Library layout:

  scenario      geometry, path loss, Rician channels, budgets, config I/O
  hwi           distortion statistics and phase-noise moments/sampling
  rate          effective channels, SINR, average rate, power accounting
  fp            quadratic-transform reformulation and subproblem assembly
  beamformer    MM + Lagrangian-dual bisection for the transmit matrix
  reflection    MM + price mechanism + element-wise sweep for the surface
  orchestrator  BCD outer loop, initialization, baselines
  validation    independent oracles (moments, surrogates, grid search, MC)
  cli           run / sweep / validate experiment driver
"""

from .errors import (
    BracketFailure,
    InfeasibleReflection,
    InvalidInput,
    InvalidModel,
    NonMonotoneObjective,
)
from .hwi import HwiModel
from .orchestrator import SCHEMES, SolveReport, run_baseline, run_bcd_aso
from .rate import (
    Beamformer,
    ReflectionCoefficients,
    amplification_power,
    monte_carlo_rate,
    sum_rate,
    total_power,
)
from .scenario import (
    ChannelSet,
    ScenarioConfig,
    generate_channels,
    load_config,
    split_budget,
    split_budget_passive,
)

__all__ = [
    "Beamformer",
    "BracketFailure",
    "ChannelSet",
    "HwiModel",
    "InfeasibleReflection",
    "InvalidInput",
    "InvalidModel",
    "NonMonotoneObjective",
    "ReflectionCoefficients",
    "SCHEMES",
    "ScenarioConfig",
    "SolveReport",
    "amplification_power",
    "generate_channels",
    "load_config",
    "monte_carlo_rate",
    "run_baseline",
    "run_bcd_aso",
    "split_budget",
    "split_budget_passive",
    "sum_rate",
    "total_power",
]

__version__ = "0.1.0"
