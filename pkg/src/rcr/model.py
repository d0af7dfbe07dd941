"""Discrete factor graphs with log-domain tables, UAI I/O, evaluation and evidence."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

# Reserved log(0). Anything at or below it is treated as an exact zero.
LOG_ZERO = -1e30

_ZERO_CUTOFF = LOG_ZERO / 2


class ModelError(ValueError):
    """Base class for malformed or unsupported models."""


class UAIParseError(ModelError):
    def __init__(self, line: int, expected: str, got: str | None = None):
        self.line = line
        self.expected = expected
        msg = f"line {line}: expected {expected}"
        if got is not None:
            msg += f", got {got!r}"
        super().__init__(msg)


class UnsupportedModelError(ModelError):
    pass


def is_log_zero(x) -> np.ndarray | bool:
    return np.asarray(x) <= _ZERO_CUTOFF


def saturate(x):
    """Clamp log values so the sentinel never drifts further negative."""
    return np.maximum(x, LOG_ZERO)


def to_log(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    out = np.full(values.shape, LOG_ZERO)
    pos = values > 0
    out[pos] = np.log(values[pos])
    return out


def to_linear(log_values) -> np.ndarray:
    log_values = np.asarray(log_values, dtype=float)
    return np.where(is_log_zero(log_values), 0.0, np.exp(np.minimum(log_values, 700.0)))


class CloneOf(NamedTuple):
    original: int
    factor: int


@dataclass(frozen=True)
class Variable:
    id: int
    cardinality: int
    origin: CloneOf | None = None

    def __post_init__(self):
        if self.cardinality < 2:
            raise UnsupportedModelError(
                f"variable {self.id} has cardinality {self.cardinality}; at least 2 required"
            )

    @property
    def is_clone(self) -> bool:
        return self.origin is not None


@dataclass(frozen=True)
class Potential:
    pass


@dataclass(frozen=True)
class Compensation:
    constraint: int
    side: str  # "original" or "clone"


@dataclass(frozen=True)
class Equivalence:
    constraint: int


POTENTIAL = Potential()


@dataclass(frozen=True, eq=False)
class Factor:
    """A log-domain table over an ordered scope.

    ``table`` has one axis per scope variable (row-major, last variable
    fastest), matching the UAI layout once flattened.
    """

    id: int
    scope: tuple[int, ...]
    table: np.ndarray
    kind: Potential | Compensation | Equivalence = POTENTIAL

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        table.setflags(write=False)
        object.__setattr__(self, "scope", tuple(int(v) for v in self.scope))
        object.__setattr__(self, "table", table)
        if len(set(self.scope)) != len(self.scope):
            raise ModelError(f"factor {self.id} repeats a variable in its scope {self.scope}")
        if table.ndim != len(self.scope):
            raise ModelError(
                f"factor {self.id}: table has {table.ndim} axes for scope of size {len(self.scope)}"
            )

    @property
    def arity(self) -> int:
        return len(self.scope)

    def entry(self, states: Sequence[int]) -> float:
        return float(self.table[tuple(states)])


def equivalence_factor(fid: int, x: int, xi: int, card: int, constraint: int) -> Factor:
    table = np.full((card, card), LOG_ZERO)
    np.fill_diagonal(table, 0.0)
    return Factor(fid, (x, xi), table, Equivalence(constraint))


@dataclass(frozen=True, eq=False)
class FactorGraph:
    variables: tuple[Variable, ...]
    factors: tuple[Factor, ...]
    _by_var: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        variables = tuple(self.variables)
        factors = tuple(self.factors)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "factors", factors)
        for i, v in enumerate(variables):
            if v.id != i:
                raise ModelError(f"variable ids must be contiguous from 0; found {v.id} at {i}")
        by_var: list[list[int]] = [[] for _ in variables]
        for pos, f in enumerate(factors):
            for v, n in zip(f.scope, f.table.shape):
                if not 0 <= v < len(variables):
                    raise ModelError(f"factor {f.id} references unknown variable {v}")
                if variables[v].cardinality != n:
                    raise ModelError(
                        f"factor {f.id}: axis for variable {v} has {n} states, "
                        f"variable has {variables[v].cardinality}"
                    )
                by_var[v].append(pos)
        object.__setattr__(self, "_by_var", tuple(tuple(b) for b in by_var))

    @classmethod
    def from_tables(cls, cards: Sequence[int], tables: Sequence[tuple[Sequence[int], np.ndarray]],
                    log: bool = True) -> "FactorGraph":
        """Build a graph from ``(scope, table)`` pairs; linear tables if ``log=False``."""
        variables = [Variable(i, int(c)) for i, c in enumerate(cards)]
        factors = []
        for i, (scope, table) in enumerate(tables):
            bad = [v for v in scope if not 0 <= v < len(cards)]
            if bad:
                raise ModelError(f"factor {i} references unknown variable {bad[0]}")
            table = np.asarray(table, dtype=float)
            shape = tuple(int(cards[v]) for v in scope)
            table = table.reshape(shape)
            factors.append(Factor(i, scope, table if log else to_log(table)))
        return cls(tuple(variables), tuple(factors))

    @property
    def cards(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def factors_of(self, v: int) -> list[Factor]:
        return [self.factors[p] for p in self._by_var[v]]

    def potentials(self) -> list[Factor]:
        return [f for f in self.factors if isinstance(f.kind, Potential)]

    def state_space_size(self) -> int:
        size = 1
        for c in self.cards:
            size *= c
        return size

    def with_factors(self, factors: Sequence[Factor]) -> "FactorGraph":
        return FactorGraph(self.variables, tuple(factors))


Assignment = np.ndarray


def _check_assignment(fg: FactorGraph, a) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    if a.shape != (fg.num_variables,):
        raise ValueError(
            f"assignment has {a.size} values; graph has {fg.num_variables} variables"
        )
    cards = np.asarray(fg.cards, dtype=np.int64)
    if np.any(a < 0) or np.any(a >= cards):
        bad = int(np.flatnonzero((a < 0) | (a >= cards))[0])
        raise ValueError(f"state {a[bad]} out of range for variable {bad}")
    return a


def evaluate(fg: FactorGraph, a) -> float:
    """Log value of a complete assignment (sum of selected table entries)."""
    a = _check_assignment(fg, a)
    total = 0.0
    for f in fg.factors:
        val = f.table[tuple(a[list(f.scope)])] if f.scope else f.table[()]
        if val <= _ZERO_CUTOFF:
            return LOG_ZERO
        total += float(val)
    return total


def condition(fg: FactorGraph, evidence: Mapping[int, int]) -> FactorGraph:
    """Zero out every table row inconsistent with ``evidence``; variables are kept."""
    for v, s in evidence.items():
        if not 0 <= v < fg.num_variables:
            raise ValueError(f"evidence on unknown variable {v}")
        if not 0 <= s < fg.variables[v].cardinality:
            raise ValueError(
                f"evidence state {s} out of range for variable {v} "
                f"(cardinality {fg.variables[v].cardinality})"
            )
    if not evidence:
        return fg
    factors = []
    for f in fg.factors:
        hit = [(axis, evidence[v]) for axis, v in enumerate(f.scope) if v in evidence]
        if not hit:
            factors.append(f)
            continue
        table = np.array(f.table)
        for axis, s in hit:
            idx = [slice(None)] * table.ndim
            mask = np.ones(table.shape[axis], dtype=bool)
            mask[s] = False
            idx[axis] = mask
            table[tuple(idx)] = LOG_ZERO
        factors.append(Factor(f.id, f.scope, table, f.kind))
    return fg.with_factors(factors)


# ---------------------------------------------------------------------------
# UAI format


def _tokens(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        for tok in line.split():
            yield lineno, tok


class _Reader:
    def __init__(self, text: str):
        self._toks = list(_tokens(text))
        self._pos = 0
        self._last_line = len(text.splitlines()) or 1

    def _next(self, expected: str) -> tuple[int, str]:
        if self._pos >= len(self._toks):
            raise UAIParseError(self._last_line, expected, "end of input")
        item = self._toks[self._pos]
        self._pos += 1
        return item

    def word(self, expected: str) -> tuple[int, str]:
        return self._next(expected)

    def int(self, expected: str, minimum: int = 0) -> int:
        line, tok = self._next(expected)
        try:
            val = int(tok)
        except ValueError:
            raise UAIParseError(line, expected, tok) from None
        if val < minimum:
            raise UAIParseError(line, f"{expected} >= {minimum}", tok)
        return val

    def float(self, expected: str) -> float:
        line, tok = self._next(expected)
        try:
            val = float(tok)
        except ValueError:
            raise UAIParseError(line, expected, tok) from None
        if not np.isfinite(val) or val < 0:
            raise UAIParseError(line, "a finite non-negative table value", tok)
        return val

    def line(self) -> int:
        if self._pos < len(self._toks):
            return self._toks[self._pos][0]
        return self._last_line

    def at_end(self) -> bool:
        return self._pos >= len(self._toks)


def parse_uai(text: str) -> FactorGraph:
    """Parse a UAI-format model (MARKOV or BAYES) into log-domain tables."""
    r = _Reader(text)
    line, preamble = r.word("preamble MARKOV or BAYES")
    if preamble.upper() not in ("MARKOV", "BAYES"):
        raise UAIParseError(line, "preamble MARKOV or BAYES (unknown preamble)", preamble)
    nvars = r.int("variable count")
    cards = []
    for i in range(nvars):
        line = r.line()
        c = r.int(f"cardinality of variable {i}")
        if c < 2:
            raise UnsupportedModelError(
                f"line {line}: variable {i} has cardinality {c}; at least 2 required"
            )
        cards.append(c)
    nfactors = r.int("factor count")
    scopes = []
    for j in range(nfactors):
        size = r.int(f"scope size of factor {j}")
        scope = []
        for _ in range(size):
            line = r.line()
            v = r.int(f"variable index in scope of factor {j}")
            if v >= nvars:
                raise UAIParseError(line, f"variable index < {nvars}", str(v))
            scope.append(v)
        if len(set(scope)) != len(scope):
            raise UAIParseError(line, f"distinct variables in scope of factor {j}", str(scope))
        scopes.append(tuple(scope))
    tables = []
    for j, scope in enumerate(scopes):
        expected = int(np.prod([cards[v] for v in scope], dtype=np.int64))
        line = r.line()
        n = r.int(f"table size of factor {j}")
        if n != expected:
            raise UAIParseError(line, f"table size {expected} for factor {j}", str(n))
        vals = [r.float(f"table entry of factor {j}") for _ in range(n)]
        tables.append((scope, np.array(vals).reshape([cards[v] for v in scope])))
    if not r.at_end():
        raise UAIParseError(r.line(), "end of input after the last table")
    return FactorGraph.from_tables(cards, tables, log=False)


def write_uai(fg: FactorGraph, preamble: str = "MARKOV") -> str:
    """Serialize to UAI text with linear-domain values (17 significant digits)."""
    out = [preamble, str(fg.num_variables), " ".join(str(c) for c in fg.cards),
           str(len(fg.factors))]
    for f in fg.factors:
        out.append(" ".join([str(f.arity)] + [str(v) for v in f.scope]))
    out.append("")
    for f in fg.factors:
        vals = to_linear(f.table).ravel()
        out.append(str(vals.size))
        out.append(" ".join(f"{v:.17g}" for v in vals))
        out.append("")
    return "\n".join(out)


def parse_evidence(text: str) -> dict[int, int]:
    """Evidence file: a count followed by ``(variable, state)`` pairs."""
    r = _Reader(text)
    if r.at_end():
        return {}
    n = r.int("evidence count")
    evidence = {}
    for _ in range(n):
        v = r.int("evidence variable")
        evidence[v] = r.int("evidence state")
    if not r.at_end():
        raise UAIParseError(r.line(), "end of input after the evidence pairs")
    return evidence


def read_uai(path) -> FactorGraph:
    with open(path) as fh:
        return parse_uai(fh.read())


def read_evidence(path) -> dict[int, int]:
    with open(path) as fh:
        return parse_evidence(fh.read())
