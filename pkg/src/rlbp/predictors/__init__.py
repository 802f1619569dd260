"""Branch predictors and the configuration model that builds them."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

from ..validation import check_choice, check_int, check_probability, check_real, check_table_entries
from .base import BasePredictor
from .counters import (
    Bimodal,
    Gshare,
    counter_predictor_step,
    fold_history,
    index_bimodal,
    index_gshare,
)
from .perceptron import (
    GEHL,
    Perceptron,
    default_threshold,
    gehl_step,
    geometric_lengths,
    perceptron_output,
    perceptron_train,
)
from .polgag import PolGAg, polgag_policy, polgag_select, polgag_update
from .qlearning import (
    GQLAg,
    QEntry,
    TabularQL,
    epsilon_greedy_select,
    gqlag_predict,
    gqlag_update,
    tabular_q_update,
)

PREDICTORS: dict[str, type[BasePredictor]] = {
    cls.kind: cls for cls in (Bimodal, Gshare, GQLAg, TabularQL, Perceptron, PolGAg, GEHL)
}


@dataclass(frozen=True)
class PredictorConfig:
    """Declarative predictor settings.

    Fields left as ``None`` fall back to the predictor class's default. Only
    the fields a kind understands are passed on; ``unbounded=True`` forces
    per-pc storage for the kinds that support it.
    """

    kind: str
    table_entries: int | None = None
    unbounded: bool = False
    history_length: int | None = None
    learning_rate: float | None = None
    discount: float | None = None
    epsilon: float | None = None
    weight_dtype: str | None = None
    q_precision: str | None = None
    selection: str | None = None
    counter_bits: int | None = None
    threshold: int | None = None
    n_tables: int | None = None
    min_history: int | None = None
    ratio: float | None = None
    seed: int | None = None

    def __post_init__(self):
        check_choice(self.kind, "kind", tuple(PREDICTORS))
        check_table_entries(self.table_entries)
        if self.unbounded and self.kind not in ("perceptron", "polgag"):
            raise ValueError(f"{self.kind} has no unbounded mode")
        if self.history_length is not None:
            check_int(self.history_length, "history_length", 0)
        if self.learning_rate is not None:
            check_real(self.learning_rate, "learning_rate", 0.0, lo_open=True)
        if self.discount is not None:
            check_real(self.discount, "discount", 0.0, 1.0, hi_open=True)
        if self.epsilon is not None:
            check_probability(self.epsilon, "epsilon")
        unknown = [f.name for f in fields(self)
                   if f.name not in ("kind", "unbounded", "seed")
                   and getattr(self, f.name) is not None and f.name not in self.params_for_kind()]
        if unknown:
            raise ValueError(f"{self.kind} does not take {', '.join(unknown)}")

    @property
    def predictor_class(self) -> type[BasePredictor]:
        return PREDICTORS[self.kind]

    def params_for_kind(self) -> set[str]:
        return set(self.predictor_class._get_param_names()) - {"random_state"}

    def params(self) -> dict:
        """Estimator keyword arguments for this config."""
        names = self.params_for_kind()
        out = {k: v for k, v in asdict(self).items() if k in names and v is not None}
        if self.unbounded:
            out["table_entries"] = None
        if "random_state" in self.predictor_class._get_param_names():
            out["random_state"] = self.seed
        return out

    def full_params(self) -> dict:
        """Defaults merged with explicit settings."""
        return {**self.predictor_class().get_params(), **self.params()}

    def entry_bits(self) -> int:
        return self.predictor_class.entry_bits(self.full_params())

    def build(self, **overrides) -> BasePredictor:
        return self.predictor_class(**{**self.params(), **overrides})

    def with_(self, **changes) -> "PredictorConfig":
        return replace(self, **changes)


def make_predictor(config: PredictorConfig | str, **overrides) -> BasePredictor:
    if isinstance(config, str):
        config = PredictorConfig(config)
    return config.build(**overrides)


__all__ = [
    "BasePredictor", "Bimodal", "Gshare", "GQLAg", "TabularQL", "Perceptron", "PolGAg", "GEHL",
    "PREDICTORS", "PredictorConfig", "QEntry", "make_predictor",
    "counter_predictor_step", "default_threshold", "epsilon_greedy_select", "fold_history",
    "gehl_step", "geometric_lengths", "gqlag_predict", "gqlag_update", "index_bimodal",
    "index_gshare", "perceptron_output", "perceptron_train", "polgag_policy", "polgag_select",
    "polgag_update", "tabular_q_update",
]
