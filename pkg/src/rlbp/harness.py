"""Trace-driven evaluation: run loop, storage budgets, sweeps and CSV reports."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from joblib import Parallel, delayed

from .predictors import BasePredictor, PredictorConfig
from .trace import GlobalHistory, SyntheticSpec, Trace, generate_synthetic, load_trace
from .validation import check_choice, check_int

log = logging.getLogger(__name__)

DEFAULT_WARMUP = 1000

CSV_COLUMNS = ("predictor", "kind", "history_len", "trace", "branches", "mispred",
               "instructions", "mpki", "mpkb", "seed")
AGGREGATE_COLUMNS = ("mean", "std")

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, run_index: int) -> int:
    """Per-run seed: ``splitmix64(splitmix64(master) ^ run_index)``."""
    return splitmix64(splitmix64(master_seed & _MASK64) ^ (run_index & _MASK64))


# --- run-level accounting --------------------------------------------------


@dataclass(frozen=True)
class RunStats:
    branches: int
    mispredictions: int
    instructions: int
    warmup_skipped: int = 0

    def __post_init__(self):
        if not 0 <= self.mispredictions <= self.branches:
            raise ValueError("mispredictions must be within [0, branches]")
        if self.instructions < self.branches:
            raise ValueError("instructions must be >= branches")

    @property
    def mpki(self) -> float:
        return 1000.0 * self.mispredictions / self.instructions if self.instructions else 0.0

    @property
    def mpkb(self) -> float:
        return 1000.0 * self.mispredictions / self.branches if self.branches else 0.0

    @property
    def accuracy(self) -> float:
        return 1.0 - self.mispredictions / self.branches if self.branches else 1.0

    def metric(self, name: str) -> float:
        return getattr(self, check_choice(name, "metric", ("mpki", "mpkb")))


def budget_to_entries(kind: str, bits_per_entry: int | None, budget_bits: int) -> int:
    """Largest power of two ``N`` with ``N * bits_per_entry <= budget_bits``.

    ``bits_per_entry=None`` takes the default row width of ``kind``.
    """
    if bits_per_entry is None:
        bits_per_entry = PredictorConfig(kind).entry_bits()
    check_int(bits_per_entry, "bits_per_entry", 1)
    check_int(budget_bits, "budget_bits", 1)
    if budget_bits < bits_per_entry:
        raise ValueError(f"budget of {budget_bits} bits cannot hold one {bits_per_entry}-bit entry")
    return 1 << ((budget_bits // bits_per_entry).bit_length() - 1)


def entries_for_budget(config: PredictorConfig, budget_bits: int) -> int:
    return budget_to_entries(config.kind, config.entry_bits(), budget_bits)


def run_single(predictor: BasePredictor, trace: Trace, warmup: int = DEFAULT_WARMUP,
               pcs: Iterable[int] | None = None, reset: bool = True,
               record: bool = False):
    """Drive ``predictor`` over ``trace``.

    Every record's outcome enters the global history; when ``pcs`` is given
    only those branches are predicted, trained and counted. The first
    ``warmup`` predicted branches train the predictor but are not counted.
    With ``record=True`` the prediction sequence is returned as well.
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    check_int(warmup, "warmup", 0)
    if reset or not hasattr(predictor, "history_"):
        predictor.reset()
    keep = None if pcs is None else frozenset(pcs)
    h = GlobalHistory(predictor.history_capacity())
    predict, update, push = predictor.predict_branch, predictor.update, h.push
    seen = branches = miss = insts = 0
    preds = [] if record else None
    for rec in trace.records:
        actual = rec.outcome
        if keep is None or rec.pc in keep:
            pred = predict(rec.pc, h)
            update(actual)
            if record:
                preds.append(pred)
            if seen >= warmup:
                branches += 1
                insts += rec.inst_gap
                if pred != actual:
                    miss += 1
            seen += 1
        push(actual)
    stats = RunStats(branches, miss, insts, min(seen, warmup))
    return (stats, preds) if record else stats


def aggregate_stats(cells: Sequence[RunStats], metric: str = "mpkb") -> tuple[float, float]:
    """Mean and population standard deviation of ``metric`` over ``cells``."""
    if not cells:
        raise ValueError("cannot aggregate an empty list of runs")
    values = np.array([c.metric(metric) for c in cells], dtype=np.float64)
    return float(values.mean()), float(values.std())


# --- sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class TraceSource:
    """A trace given by file path, synthetic recipe, or an in-memory Trace."""

    name: str
    path: str | None = None
    spec: SyntheticSpec | None = None
    trace: Trace | None = None

    def load(self) -> Trace:
        if self.trace is not None:
            return self.trace
        if self.spec is not None:
            t = generate_synthetic(self.spec)
        else:
            t = load_trace(self.path)
        return Trace(self.name, t.records)


@dataclass(frozen=True)
class ExperimentConfig:
    predictors: dict[str, PredictorConfig]
    traces: tuple[TraceSource, ...]
    history_lengths: tuple[int, ...] = (0,)
    budget_bits: int | None = None
    metric: str | None = None
    warmup: int = DEFAULT_WARMUP
    master_seed: int = 0
    output: str | None = None
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "traces", tuple(self.traces))
        object.__setattr__(self, "history_lengths", tuple(int(x) for x in self.history_lengths))
        if not self.predictors:
            raise ValueError("at least one predictor config is required")
        if not self.traces:
            raise ValueError("at least one trace is required")
        names = [t.name for t in self.traces]
        if len(set(names)) != len(names):
            raise ValueError("trace names must be unique")
        hl = self.history_lengths
        if not hl or any(x < 0 for x in hl) or any(b <= a for a, b in zip(hl, hl[1:])):
            raise ValueError("history lengths must be non-negative and strictly increasing")
        if self.budget_bits is not None and self.budget_bits <= 0:
            raise ValueError("budget must be > 0")
        if self.metric is not None:
            check_choice(self.metric, "metric", ("mpki", "mpkb"))
        check_int(self.warmup, "warmup", 0)
        check_int(self.n_jobs, "n_jobs")


@dataclass(frozen=True)
class Cell:
    predictor: str
    kind: str
    history_len: int
    trace: str
    seed: int
    stats: RunStats


@dataclass
class SweepResult:
    cells: list[Cell]
    metric: str
    aggregates: dict[tuple[str, int], tuple[float, float]] = field(default_factory=dict)

    def lookup(self, predictor: str, history_len: int, trace: str) -> RunStats:
        for c in self.cells:
            if (c.predictor, c.history_len, c.trace) == (predictor, history_len, trace):
                return c.stats
        raise KeyError((predictor, history_len, trace))

    def curve(self, predictor: str) -> list[tuple[int, float, float]]:
        """``(history_len, mean, std)`` for one predictor, in sweep order."""
        return [(hl, *v) for (p, hl), v in self.aggregates.items() if p == predictor]

    def to_csv(self) -> str:
        return emit_csv(self)


def _resolve_metric(cfg: ExperimentConfig, traces: Sequence[Trace]) -> str:
    if cfg.metric is not None:
        return cfg.metric
    has_gaps = any(t.total_instructions != len(t) for t in traces)
    return "mpki" if has_gaps else "mpkb"


def _run_cell(config: PredictorConfig, history_len: int, trace: Trace, seed: int,
              warmup: int, budget_bits: int | None) -> RunStats:
    changes = {"seed": seed}
    if "history_length" in config.params_for_kind():
        changes["history_length"] = history_len
    cfg = config.with_(**changes)
    if budget_bits is not None and not cfg.unbounded:
        if "table_entries" in cfg.params_for_kind():
            cfg = cfg.with_(table_entries=entries_for_budget(cfg, budget_bits))
    return run_single(cfg.build(), trace, warmup)


def sweep(cfg: ExperimentConfig) -> SweepResult:
    traces = [src.load() for src in cfg.traces]
    metric = _resolve_metric(cfg, traces)
    jobs = []
    for name, pconf in cfg.predictors.items():
        for hl in cfg.history_lengths:
            for t in traces:
                jobs.append((name, pconf, hl, t, derive_seed(cfg.master_seed, len(jobs))))

    def run(job):
        name, pconf, hl, t, seed = job
        try:
            return _run_cell(pconf, hl, t, seed, cfg.warmup, cfg.budget_bits)
        except Exception as exc:
            raise RuntimeError(f"sweep cell failed: predictor={name} history_len={hl} trace={t.name}: {exc}") from exc

    if cfg.n_jobs == 1:
        stats = [run(j) for j in jobs]
    else:
        stats = Parallel(n_jobs=cfg.n_jobs)(delayed(run)(j) for j in jobs)
    cells = [Cell(name, pconf.kind, hl, t.name, seed, s)
             for (name, pconf, hl, t, seed), s in zip(jobs, stats)]
    result = SweepResult(cells, metric)
    for name in cfg.predictors:
        for hl in cfg.history_lengths:
            group = [c.stats for c in cells if c.predictor == name and c.history_len == hl]
            result.aggregates[(name, hl)] = aggregate_stats(group, metric)
    log.info("sweep finished: %d cells, metric=%s", len(cells), metric)
    return result


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def emit_csv(result: SweepResult) -> str:
    """Cell rows, then one ``trace=ALL`` row per (predictor, history length)."""
    if not result.cells:
        raise ValueError("empty sweep result")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + AGGREGATE_COLUMNS)
    for c in result.cells:
        s = c.stats
        w.writerow([c.predictor, c.kind, c.history_len, c.trace, s.branches, s.mispredictions,
                    s.instructions, _fmt(s.mpki), _fmt(s.mpkb), c.seed, "", ""])
    kinds = {c.predictor: c.kind for c in result.cells}
    for (name, hl), (mean, std) in result.aggregates.items():
        group = [c.stats for c in result.cells if c.predictor == name and c.history_len == hl]
        w.writerow([name, kinds[name], hl, "ALL", sum(s.branches for s in group),
                    sum(s.mispredictions for s in group), sum(s.instructions for s in group),
                    "", "", "", _fmt(mean), _fmt(std)])
    return buf.getvalue()


def emit_report(result: SweepResult, path) -> None:
    text = emit_csv(result)
    with open(path, "w", newline="") as fh:
        fh.write(text)
