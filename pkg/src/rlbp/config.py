"""Line-oriented experiment config files.

Sections::

    [trace]              synthetic trace recipe (also [trace.NAME])
    [predictor.NAME]     one predictor configuration
    [sweep]              sweep settings

Values are ``key = value``; lists are comma separated. Unknown sections or
keys are errors. :func:`dump_config` writes the canonical form, and parsing
a canonical file then dumping it returns the same text.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field, fields

from .harness import DEFAULT_WARMUP, ExperimentConfig, TraceSource
from .predictors import PredictorConfig
from .trace import SyntheticSpec


class ConfigError(ValueError):
    pass


SPEC_KEYS = ("kind", "length", "seed", "pc", "pattern", "i", "j", "weights", "bias", "flip", "p", "parts")
SWEEP_KEYS = ("predictors", "traces", "trace_seeds", "history_lengths", "budget_bits", "metric",
              "warmup", "seed", "output", "jobs")
PREDICTOR_KEYS = tuple(f.name for f in fields(PredictorConfig))


@dataclass
class SweepSettings:
    predictors: list[str] = field(default_factory=list)
    traces: list[str] = field(default_factory=list)
    trace_seeds: list[int] = field(default_factory=list)
    history_lengths: list[int] = field(default_factory=lambda: [0])
    budget_bits: int | None = None
    metric: str | None = None
    warmup: int = DEFAULT_WARMUP
    seed: int = 0
    output: str | None = None
    jobs: int = 1


@dataclass
class ConfigFile:
    traces: dict[str, SyntheticSpec] = field(default_factory=dict)
    predictors: dict[str, PredictorConfig] = field(default_factory=dict)
    sweep: SweepSettings | None = None

    def trace_spec(self, section: str = "trace") -> SyntheticSpec:
        if section not in self.traces:
            raise ConfigError(f"no [{section}] section in config")
        return self.traces[section]

    def experiment(self, master_seed: int | None = None, n_jobs: int | None = None,
                   output: str | None = None) -> ExperimentConfig:
        if self.sweep is None:
            raise ConfigError("config has no [sweep] section")
        s = self.sweep
        names = s.predictors or list(self.predictors)
        missing = [n for n in names if n not in self.predictors]
        if missing:
            raise ConfigError(f"undefined predictor(s): {', '.join(missing)}")
        sources = []
        for entry in s.traces or [n for n in self.traces]:
            if entry in self.traces:
                spec = self.traces[entry]
                label = entry[len("trace."):] if entry.startswith("trace.") else entry
                if s.trace_seeds:
                    for seed in s.trace_seeds:
                        sources.append(TraceSource(f"{label}@{seed}",
                                                   spec=dataclasses.replace(spec, seed=seed)))
                else:
                    sources.append(TraceSource(label, spec=spec))
            else:
                if not os.path.exists(entry):
                    raise ConfigError(f"trace not found: {entry}")
                sources.append(TraceSource(os.path.splitext(os.path.basename(entry))[0], path=entry))
        return ExperimentConfig(
            predictors={n: self.predictors[n] for n in names},
            traces=tuple(sources),
            history_lengths=tuple(s.history_lengths),
            budget_bits=s.budget_bits,
            metric=s.metric,
            warmup=s.warmup,
            master_seed=s.seed if master_seed is None else master_seed,
            output=output if output is not None else s.output,
            n_jobs=s.jobs if n_jobs is None else n_jobs,
        )


# --- value codecs ----------------------------------------------------------


def _int(v: str) -> int:
    return int(v, 0)


def _list(v: str) -> list[str]:
    return [x.strip() for x in v.split(",") if x.strip()]


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _optional(conv):
    def parse(v: str):
        return None if v.strip().lower() in ("", "none") else conv(v)
    return parse


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


PREDICTOR_TYPES = {
    "kind": str, "table_entries": _int, "unbounded": _bool, "history_length": _int,
    "learning_rate": float, "discount": float, "epsilon": float, "weight_dtype": str,
    "q_precision": str, "selection": str, "counter_bits": _int, "threshold": _int,
    "n_tables": _int, "min_history": _int, "ratio": float, "seed": _int,
}


def _parse_section(section, allowed, where):
    unknown = [k for k in section if k not in allowed]
    if unknown:
        raise ConfigError(f"[{where}]: unknown key(s): {', '.join(unknown)}")
    return dict(section)


def _spec_from(raw: dict, where: str, sections) -> SyntheticSpec:
    kw = {}
    try:
        for k, v in raw.items():
            if k in ("kind", "pattern"):
                kw[k] = v.strip()
            elif k in ("length", "seed", "pc", "i", "j"):
                kw[k] = _int(v)
            elif k in ("bias", "flip", "p"):
                kw[k] = float(v)
            elif k == "weights":
                kw[k] = tuple(float(x) for x in _list(v))
            elif k == "parts":
                parts = []
                for name in _list(v):
                    sect = name if name.startswith("trace.") else f"trace.{name}"
                    if sect not in sections:
                        raise ConfigError(f"[{where}]: part {name!r} has no [{sect}] section")
                    sub = _parse_section(sections[sect], SPEC_KEYS, sect)
                    sub.setdefault("length", "1")
                    part = _spec_from(sub, sect, sections)
                    parts.append(dataclasses.replace(part, name=sect[len("trace."):]))
                kw[k] = tuple(parts)
        if "kind" not in kw or "length" not in kw:
            raise ConfigError(f"[{where}]: 'kind' and 'length' are required")
        return SyntheticSpec(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}]: {exc}") from exc


def parse_config(text: str, source: str = "<config>") -> ConfigFile:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__",
                                   inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    out = ConfigFile()
    for name in cp.sections():
        sect = cp[name]
        if name == "trace" or name.startswith("trace."):
            raw = _parse_section(sect, SPEC_KEYS, name)
            out.traces[name] = _spec_from(raw, name, cp)
        elif name.startswith("predictor."):
            pname = name[len("predictor."):]
            raw = _parse_section(sect, PREDICTOR_KEYS, name)
            try:
                kw = {k: _optional(PREDICTOR_TYPES[k])(v) for k, v in raw.items()}
                if "kind" not in kw:
                    kw["kind"] = pname
                out.predictors[pname] = PredictorConfig(**kw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"[{name}]: {exc}") from exc
        elif name == "sweep":
            raw = _parse_section(sect, SWEEP_KEYS, name)
            s = SweepSettings()
            try:
                for k, v in raw.items():
                    if k in ("predictors", "traces"):
                        setattr(s, k, _list(v))
                    elif k in ("trace_seeds", "history_lengths"):
                        setattr(s, k, [_int(x) for x in _list(v)])
                    elif k in ("budget_bits",):
                        s.budget_bits = _optional(_int)(v)
                    elif k in ("metric", "output"):
                        setattr(s, k, _optional(str)(v.strip()))
                    else:
                        setattr(s, k, _int(v))
            except ValueError as exc:
                raise ConfigError(f"[sweep]: {exc}") from exc
            out.sweep = s
        else:
            raise ConfigError(f"{source}: unknown section [{name}]")
    return out


def load_config(path) -> ConfigFile:
    path = os.fspath(path)
    if not os.path.exists(path):
        raise ConfigError(f"config not found: {path}")
    with open(path) as fh:
        return parse_config(fh.read(), path)


def _spec_lines(name: str, spec: SyntheticSpec, lines: list[str]) -> None:
    lines.append(f"[{name}]")
    defaults = {f.name: f.default for f in fields(SyntheticSpec)}
    for k in SPEC_KEYS:
        v = getattr(spec, k)
        if k in ("kind", "length"):
            lines.append(f"{k} = {_fmt(v)}")
        elif k == "parts":
            if v:
                lines.append(f"parts = {', '.join(p.name for p in v)}")
        elif k == "pc":
            if v != defaults["pc"]:
                lines.append(f"pc = {v:#x}")
        elif v != defaults[k]:
            lines.append(f"{k} = {_fmt(v)}")
    lines.append("")


def dump_config(cfg: ConfigFile) -> str:
    lines: list[str] = []
    for name, spec in cfg.traces.items():
        _spec_lines(name, spec, lines)
    emitted = set(cfg.traces)
    for spec in cfg.traces.values():
        for p in spec.parts:
            sect = f"trace.{p.name}"
            if sect not in emitted:
                _spec_lines(sect, p, lines)
                emitted.add(sect)
    for name, pc in cfg.predictors.items():
        lines.append(f"[predictor.{name}]")
        for f in fields(PredictorConfig):
            v = getattr(pc, f.name)
            if f.name == "kind" or (v is not None and v != f.default):
                lines.append(f"{f.name} = {_fmt(v)}")
        lines.append("")
    if cfg.sweep is not None:
        s, d = cfg.sweep, SweepSettings()
        lines.append("[sweep]")
        for k in SWEEP_KEYS:
            v = getattr(s, k)
            if k == "history_lengths" or v != getattr(d, k):
                lines.append(f"{k} = {_fmt(v)}")
        lines.append("")
    return "\n".join(lines)
