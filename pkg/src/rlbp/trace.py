"""Branch-event data model, trace-text I/O and synthetic workload generators."""

from __future__ import annotations

import csv
import enum
import io
import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

TRACE_HEADER = ("pc_hex", "taken", "inst_gap")

SYNTHETIC_KINDS = ("pattern", "xor_of_history", "noisy_linear", "random_bias", "interleaved")

DEFAULT_PC = 0x1000


class TraceFormatError(ValueError):
    """Raised when a trace-text file cannot be parsed."""


class Direction(enum.IntEnum):
    NT = 0
    T = 1

    def flip(self) -> "Direction":
        return Direction.NT if self is Direction.T else Direction.T

    @property
    def sign(self) -> int:
        return 1 if self is Direction.T else -1

    @classmethod
    def from_char(cls, ch: str) -> "Direction":
        ch = ch.upper()
        if ch == "T":
            return cls.T
        if ch in ("N", "NT"):
            return cls.NT
        raise ValueError(f"not a direction: {ch!r}")


T = Direction.T
NT = Direction.NT


@dataclass(frozen=True)
class BranchRecord:
    pc: int
    outcome: Direction
    inst_gap: int = 1

    def __post_init__(self):
        if not 0 <= self.pc < 1 << 64:
            raise ValueError(f"pc out of 64-bit range: {self.pc:#x}")
        if self.inst_gap < 1:
            raise ValueError("inst_gap must be >= 1")


@dataclass(frozen=True)
class Trace:
    name: str
    records: tuple[BranchRecord, ...]
    total_instructions: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "total_instructions", sum(r.inst_gap for r in self.records))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def pcs(self) -> list[int]:
        return [r.pc for r in self.records]

    @property
    def outcomes(self) -> list[Direction]:
        return [r.outcome for r in self.records]

    @classmethod
    def from_outcomes(cls, outcomes: Iterable, pc: int = DEFAULT_PC, name: str = "trace") -> "Trace":
        return cls(name, tuple(BranchRecord(pc, Direction(int(o))) for o in outcomes))


class GlobalHistory:
    """Shift register of the most recent outcomes, newest first.

    Bit ``k`` of :attr:`value` (0-based) holds the outcome ``k + 1`` branches
    ago, 1 for taken. Positions not yet filled read as 0 in the ±1 view.
    """

    __slots__ = ("capacity", "value", "length")

    def __init__(self, capacity: int, bits: Sequence = ()):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity = capacity
        self.value = 0
        self.length = 0
        for d in reversed(list(bits)[:capacity]):
            self.push(d)

    def push(self, d) -> None:
        if self.capacity == 0:
            return
        self.value = ((self.value << 1) | int(d)) & ((1 << self.capacity) - 1)
        if self.length < self.capacity:
            self.length += 1

    def copy(self) -> "GlobalHistory":
        h = GlobalHistory(self.capacity)
        h.value, h.length = self.value, self.length
        return h

    @property
    def bits(self) -> list[Direction]:
        return [Direction((self.value >> k) & 1) for k in range(self.length)]

    def as_pm1(self, width: int | None = None) -> np.ndarray:
        """±1 view (T -> +1, NT -> -1), zero-padded past :attr:`length`."""
        width = self.capacity if width is None else width
        out = np.zeros(width, dtype=np.int64)
        n = min(width, self.length)
        v = self.value
        for k in range(n):
            out[k] = 1 if (v >> k) & 1 else -1
        return out

    def pm1_list(self, width: int) -> list[int]:
        v, n = self.value, min(width, self.length)
        return [((v >> k) & 1) * 2 - 1 for k in range(n)] + [0] * (width - n)

    @classmethod
    def from_pm1(cls, q: Sequence[int], capacity: int | None = None) -> "GlobalHistory":
        """Inverse of :meth:`as_pm1`; the first zero entry ends the filled part."""
        q = list(q)
        bits = []
        for x in q:
            if x == 0:
                break
            bits.append(T if x > 0 else NT)
        return cls(len(q) if capacity is None else capacity, bits)

    def __eq__(self, other):
        if not isinstance(other, GlobalHistory):
            return NotImplemented
        return (self.capacity, self.value, self.length) == (other.capacity, other.value, other.length)

    def __len__(self) -> int:
        return self.length

    def __repr__(self):
        s = "".join("T" if b else "N" for b in self.bits)
        return f"GlobalHistory(capacity={self.capacity}, bits={s!r})"


def push_history(h: GlobalHistory, d: Direction) -> GlobalHistory:
    """Functional push: returns a new history with ``d`` as the newest bit."""
    out = h.copy()
    out.push(d)
    return out


# --- trace-text I/O --------------------------------------------------------


def _parse_rows(lines: Iterable[str], source: str) -> list[BranchRecord]:
    reader = csv.reader(lines)
    try:
        header = [c.strip() for c in next(reader)]
    except StopIteration:
        raise TraceFormatError(f"{source}: missing header")
    if header == list(TRACE_HEADER):
        has_gap = True
    elif header == list(TRACE_HEADER[:2]):
        has_gap = False
    else:
        raise TraceFormatError(f"{source}: missing header (expected {','.join(TRACE_HEADER)})")
    ncols = 3 if has_gap else 2
    records = []
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != ncols:
            raise TraceFormatError(f"{source}:{lineno}: expected {ncols} fields, got {len(row)}")
        pc_s, taken_s = row[0].strip(), row[1].strip()
        if not pc_s.lower().startswith("0x"):
            raise TraceFormatError(f"{source}:{lineno}: pc must be hex with 0x prefix: {pc_s!r}")
        try:
            pc = int(pc_s, 16)
        except ValueError:
            raise TraceFormatError(f"{source}:{lineno}: non-hex pc {pc_s!r}")
        if taken_s not in ("0", "1"):
            raise TraceFormatError(f"{source}:{lineno}: taken must be 0 or 1, got {taken_s!r}")
        gap = 1
        if has_gap:
            try:
                gap = int(row[2].strip())
            except ValueError:
                raise TraceFormatError(f"{source}:{lineno}: bad inst_gap {row[2]!r}")
            if gap < 1:
                raise TraceFormatError(f"{source}:{lineno}: inst_gap must be >= 1, got {gap}")
        try:
            records.append(BranchRecord(pc, Direction(int(taken_s)), gap))
        except ValueError as exc:
            raise TraceFormatError(f"{source}:{lineno}: {exc}")
    if not records:
        raise TraceFormatError(f"{source}: empty trace")
    return records


def load_trace(path, name: str | None = None) -> Trace:
    path = os.fspath(path)
    with open(path, newline="") as fh:
        records = _parse_rows(fh, path)
    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    return Trace(name, tuple(records))


def loads_trace(text: str, name: str = "trace") -> Trace:
    return Trace(name, tuple(_parse_rows(io.StringIO(text), name)))


def dumps_trace(trace: Trace) -> str:
    buf = io.StringIO()
    buf.write(",".join(TRACE_HEADER) + "\n")
    for r in trace.records:
        buf.write(f"{r.pc:#x},{int(r.outcome)},{r.inst_gap}\n")
    return buf.getvalue()


def write_trace(trace: Trace, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(dumps_trace(trace))


# --- synthetic workloads ---------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic trace.

    Per-kind parameters:

    * ``pattern``: ``pattern`` string over ``T``/``N``, repeated.
    * ``xor_of_history``: offsets ``i`` and ``j``; optional ``flip``
      probability applied to each generated outcome (0 keeps the recurrence exact).
    * ``noisy_linear``: ``weights`` and ``bias``; ``flip`` probability.
    * ``random_bias``: taken probability ``p``.
    * ``interleaved``: ``parts``, a sequence of sub-specs, each with its own ``pc``.
    """

    kind: str
    length: int
    seed: int = 0
    pc: int = DEFAULT_PC
    pattern: str = ""
    i: int = 1
    j: int = 2
    weights: tuple[float, ...] = ()
    bias: float = 0.0
    flip: float = 0.0
    p: float = 0.5
    parts: tuple["SyntheticSpec", ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "parts", tuple(self.parts))
        self.validate()

    def validate(self) -> None:
        if self.kind not in SYNTHETIC_KINDS:
            raise ValueError(f"unknown synthetic kind {self.kind!r}; expected one of {SYNTHETIC_KINDS}")
        if self.length <= 0:
            raise ValueError("length must be > 0")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for prob_name in ("flip", "p"):
            v = getattr(self, prob_name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{prob_name} must be in [0, 1], got {v}")
        if self.kind == "pattern":
            if not self.pattern or any(c not in "TN" for c in self.pattern.upper()):
                raise ValueError("pattern must be a non-empty string over 'T' and 'N'")
        elif self.kind == "xor_of_history":
            if self.i < 1 or self.j < 1:
                raise ValueError("history offsets must be >= 1")
            if self.i == self.j:
                raise ValueError("history offsets must differ")
        elif self.kind == "noisy_linear":
            if not self.weights:
                raise ValueError("noisy_linear needs a non-empty weight vector")
        elif self.kind == "interleaved":
            if not self.parts:
                raise ValueError("interleaved needs at least one part")
            pcs = [s.pc for s in self.parts]
            if len(set(pcs)) != len(pcs):
                raise ValueError("interleaved parts must use distinct pcs")

    @property
    def label(self) -> str:
        return self.name or f"{self.kind}-s{self.seed}"


def _outcomes(spec: SyntheticSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if spec.kind == "pattern":
        pat = np.array([c == "T" for c in spec.pattern.upper()], dtype=np.int8)
        return np.resize(pat, n)
    if spec.kind == "random_bias":
        return (rng.random(n) < spec.p).astype(np.int8)
    if spec.kind == "xor_of_history":
        warm = max(spec.i, spec.j)
        out = np.zeros(n, dtype=np.int8)
        out[: min(warm, n)] = rng.integers(0, 2, size=min(warm, n))
        noise = rng.random(n) < spec.flip if spec.flip > 0 else np.zeros(n, dtype=bool)
        for t in range(warm, n):
            out[t] = out[t - spec.i] ^ out[t - spec.j] ^ noise[t]
        return out
    if spec.kind == "noisy_linear":
        w = spec.weights
        depth = len(w)
        flips = rng.random(n) < spec.flip
        out = np.zeros(n, dtype=np.int8)
        q = [0] * depth  # newest first, 0 = not yet filled
        for t in range(n):
            y = spec.bias
            for k in range(depth):
                y += w[k] * q[k]
            bit = (1 if y >= 0 else 0) ^ int(flips[t])
            out[t] = bit
            q.insert(0, 2 * bit - 1)
            q.pop()
        return out
    raise AssertionError(spec.kind)


def generate_synthetic(spec: SyntheticSpec) -> Trace:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "interleaved":
        k = len(spec.parts)
        per = -(-spec.length // k)
        # each sub-stream draws from a child seed so part order is stable
        child_seeds = rng.integers(0, 2**63, size=k)
        streams = []
        for part, s in zip(spec.parts, child_seeds):
            sub = replace(part, length=per, seed=int(s))
            streams.append(generate_synthetic(sub).records)
        records = [streams[t % k][t // k] for t in range(spec.length)]
        return Trace(spec.label, tuple(records))
    bits = _outcomes(spec, spec.length, rng)
    pc = spec.pc
    return Trace(spec.label, tuple(BranchRecord(pc, T if b else NT) for b in bits))
