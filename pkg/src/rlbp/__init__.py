"""Trace-driven branch prediction with tabular Q-learning and policy-gradient predictors."""

from .env import BranchEnv, EnvConfig, StepResult
from .harness import (
    ExperimentConfig,
    RunStats,
    SweepResult,
    TraceSource,
    aggregate_stats,
    budget_to_entries,
    run_single,
    sweep,
)
from .predictors import (
    GEHL,
    Bimodal,
    GQLAg,
    Gshare,
    Perceptron,
    PolGAg,
    PredictorConfig,
    TabularQL,
    make_predictor,
)
from .trace import (
    NT,
    T,
    BranchRecord,
    Direction,
    GlobalHistory,
    SyntheticSpec,
    Trace,
    generate_synthetic,
    load_trace,
    push_history,
    write_trace,
)

__version__ = "0.1.0"

__all__ = [
    "BranchEnv", "EnvConfig", "StepResult",
    "ExperimentConfig", "RunStats", "SweepResult", "TraceSource", "aggregate_stats",
    "budget_to_entries", "run_single", "sweep",
    "GEHL", "Bimodal", "GQLAg", "Gshare", "Perceptron", "PolGAg", "PredictorConfig", "TabularQL",
    "make_predictor",
    "NT", "T", "BranchRecord", "Direction", "GlobalHistory", "SyntheticSpec", "Trace",
    "generate_synthetic", "load_trace", "push_history", "write_trace",
]
