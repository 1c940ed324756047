"""Fitness backends: DIMACS (W)CNF MAX-SAT plus synthetic test landscapes."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import IO

import numpy as np

from .core import BitString, RandomSource


class DimacsParseError(ValueError):
    """Malformed DIMACS input, with the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class CnfFormula:
    """A CNF formula in DIMACS convention.

    Clauses are tuples of nonzero signed integers: positive k is variable k,
    negative k its negation.  Variable k reads bit k-1 of an assignment.
    Optional per-clause weights make the satisfied-clause count weighted.
    """

    variable_count: int
    clauses: tuple[tuple[int, ...], ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        self.clauses = tuple(tuple(c) for c in self.clauses)
        if self.variable_count < 1:
            raise ValueError(f"variable count must be >= 1, got {self.variable_count}")
        for i, clause in enumerate(self.clauses):
            if not clause:
                raise ValueError(f"clause {i} is empty")
            for lit in clause:
                if lit == 0 or abs(lit) > self.variable_count:
                    raise ValueError(
                        f"clause {i} literal {lit} out of range for "
                        f"{self.variable_count} variables"
                    )
        if self.weights is not None:
            self.weights = tuple(float(w) for w in self.weights)
            if len(self.weights) != len(self.clauses):
                raise ValueError(
                    f"{len(self.weights)} weights for {len(self.clauses)} clauses"
                )
            if any(w <= 0 for w in self.weights):
                raise ValueError("clause weights must be positive")

    @property
    def clause_count(self) -> int:
        return len(self.clauses)

    @property
    def is_weighted(self) -> bool:
        return self.weights is not None

    @cached_property
    def _packed(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Padded literal matrix for vectorised evaluation.

        Returns (var_index, negated, pad_mask, weight) arrays; padding slots
        point at variable 0 and are masked out of the any() reduction.
        """
        width = max(len(c) for c in self.clauses)
        var = np.zeros((self.clause_count, width), dtype=np.int64)
        neg = np.zeros((self.clause_count, width), dtype=bool)
        pad = np.ones((self.clause_count, width), dtype=bool)
        for i, clause in enumerate(self.clauses):
            lits = np.array(clause, dtype=np.int64)
            var[i, : len(clause)] = np.abs(lits) - 1
            neg[i, : len(clause)] = lits < 0
            pad[i, len(clause) :] = False
        w = np.array(self.weights if self.weights is not None else [1.0] * self.clause_count)
        return var, neg, pad, w

    def satisfied_mask(self, bits: BitString) -> np.ndarray:
        """Boolean satisfaction per clause for one assignment."""
        var, neg, pad, _ = self._packed
        truth = (np.asarray(bits, dtype=bool)[var] ^ neg) & pad
        return truth.any(axis=1)


def parse_dimacs(source: str | IO[str]) -> CnfFormula:
    """Parse DIMACS CNF or WCNF text.

    Comment lines start with 'c'; a line starting with '%' ends the input
    (common end-of-file marker in benchmark archives).  The header is
    "p cnf <vars> <clauses>" or "p wcnf <vars> <clauses> [top]"; in wcnf each
    clause starts with its weight.  Clauses are 0-terminated and may span
    lines.  The clause count must match the header.
    """
    text = source if isinstance(source, str) else source.read()
    header: tuple[str, int, int] | None = None
    clauses: list[tuple[int, ...]] = []
    weights: list[float] = []
    current: list[int] = []
    pending_weight: float | None = None
    last_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        last_line = lineno
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if header is None:
            parts = line.split()
            if len(parts) < 4 or parts[0] != "p" or parts[1] not in ("cnf", "wcnf"):
                raise DimacsParseError(
                    f"expected 'p cnf <vars> <clauses>' header, got {line!r}", lineno
                )
            try:
                n_vars, n_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsParseError(f"non-integer header counts in {line!r}", lineno)
            header = (parts[1], n_vars, n_clauses)
            continue

        fmt, n_vars, n_clauses = header
        for token in line.split():
            if fmt == "wcnf" and pending_weight is None and not current:
                try:
                    pending_weight = float(token)
                except ValueError:
                    raise DimacsParseError(f"expected clause weight, got {token!r}", lineno)
                if pending_weight <= 0:
                    raise DimacsParseError(f"clause weight must be positive: {token}", lineno)
                continue
            try:
                lit = int(token)
            except ValueError:
                raise DimacsParseError(f"expected literal, got {token!r}", lineno)
            if lit == 0:
                if not current:
                    raise DimacsParseError("empty clause", lineno)
                clauses.append(tuple(current))
                if fmt == "wcnf":
                    weights.append(pending_weight)  # type: ignore[arg-type]
                current = []
                pending_weight = None
            else:
                if abs(lit) > n_vars:
                    raise DimacsParseError(
                        f"literal {lit} out of range for {n_vars} variables", lineno
                    )
                current.append(lit)

    if header is None:
        raise DimacsParseError("missing 'p cnf' header")
    if current or pending_weight is not None:
        raise DimacsParseError("unterminated final clause", last_line)
    fmt, n_vars, n_clauses = header
    if len(clauses) != n_clauses:
        raise DimacsParseError(
            f"header declares {n_clauses} clauses, found {len(clauses)}", last_line
        )
    return CnfFormula(n_vars, tuple(clauses), tuple(weights) if fmt == "wcnf" else None)


def to_dimacs(formula: CnfFormula) -> str:
    """Serialize back to DIMACS; parse(to_dimacs(f)) reproduces f."""
    fmt = "wcnf" if formula.is_weighted else "cnf"
    lines = [f"p {fmt} {formula.variable_count} {formula.clause_count}"]
    for i, clause in enumerate(formula.clauses):
        body = " ".join(str(lit) for lit in clause)
        if formula.is_weighted:
            w = formula.weights[i]
            wtext = str(int(w)) if w == int(w) else repr(w)
            lines.append(f"{wtext} {body} 0")
        else:
            lines.append(f"{body} 0")
    return "\n".join(lines) + "\n"


class FitnessFunction:
    """A pure objective over fixed-length bitstrings, maximised.

    Subclasses implement __call__; batch() has a generic fallback and is
    overridden where a vectorised form exists.
    """

    def __init__(self, size: int, optimum: float | None = None, name: str = ""):
        if size < 1:
            raise ValueError(f"problem size must be >= 1, got {size}")
        self.size = size
        self.optimum = optimum
        self.name = name or type(self).__name__

    def __call__(self, bits: BitString) -> float:
        raise NotImplementedError

    def batch(self, bits2d: np.ndarray) -> np.ndarray:
        return np.array([self(row) for row in bits2d])

    def _check_length(self, bits: BitString) -> None:
        if len(bits) != self.size:
            raise ValueError(f"expected {self.size} bits, got {len(bits)}")

    def __repr__(self) -> str:
        return f"{type(self).__name__}(size={self.size}, name={self.name!r})"


class MaxSat(FitnessFunction):
    """(Weighted) satisfied-clause count of a CNF formula."""

    def __init__(self, formula: CnfFormula, name: str = ""):
        super().__init__(
            size=formula.variable_count,
            optimum=None,
            name=name or f"maxsat-{formula.variable_count}v{formula.clause_count}c",
        )
        self.formula = formula

    def __call__(self, bits: BitString) -> float:
        self._check_length(bits)
        _, _, _, w = self.formula._packed
        return float(w @ self.formula.satisfied_mask(bits))

    def batch(self, bits2d: np.ndarray) -> np.ndarray:
        var, neg, pad, w = self.formula._packed
        truth = (np.asarray(bits2d, dtype=bool)[:, var] ^ neg) & pad
        return truth.any(axis=2) @ w


def maxsat_fitness(formula: CnfFormula, bits: BitString) -> float:
    """Sum of weights of clauses with at least one true literal."""
    return MaxSat(formula)(bits)


class OneMax(FitnessFunction):
    """Count of 1-bits; separable, optimum is the all-ones string."""

    def __init__(self, n: int):
        super().__init__(size=n, optimum=float(n), name=f"onemax-{n}")

    def __call__(self, bits: BitString) -> float:
        self._check_length(bits)
        return float(np.count_nonzero(bits))

    def batch(self, bits2d: np.ndarray) -> np.ndarray:
        return np.count_nonzero(bits2d, axis=1).astype(np.float64)


class PairTrap(FitnessFunction):
    """Deceptive adjacent-pair trap.

    Each gene pair scores optimum_value for 00, attractor_value for 11 and
    mixed_value for 01/10, so single-bit moves away from 00 are punished and
    the all-ones string is a strong but strictly suboptimal attractor.
    Requires optimum_value > attractor_value > mixed_value.
    """

    def __init__(
        self,
        pairs: int,
        optimum_value: float = 1.0,
        attractor_value: float = 0.9,
        mixed_value: float = 0.0,
    ):
        if pairs < 1:
            raise ValueError(f"pair count must be >= 1, got {pairs}")
        if not optimum_value > attractor_value > mixed_value:
            raise ValueError(
                "trap needs optimum_value > attractor_value > mixed_value, got "
                f"{optimum_value}, {attractor_value}, {mixed_value}"
            )
        super().__init__(
            size=2 * pairs, optimum=pairs * optimum_value, name=f"pairtrap-{pairs}"
        )
        self.pairs = pairs
        # Indexed by pair value 00, 01, 10, 11.
        self.pair_scores = np.array([optimum_value, mixed_value, mixed_value, attractor_value])

    def __call__(self, bits: BitString) -> float:
        self._check_length(bits)
        pairs = np.asarray(bits).reshape(self.pairs, 2)
        groups = 2 * pairs[:, 0] + pairs[:, 1]
        return float(self.pair_scores[groups].sum())

    def batch(self, bits2d: np.ndarray) -> np.ndarray:
        pairs = np.asarray(bits2d).reshape(len(bits2d), self.pairs, 2)
        groups = 2 * pairs[:, :, 0] + pairs[:, :, 1]
        return self.pair_scores[groups].sum(axis=1)


def onemax(n: int) -> FitnessFunction:
    return OneMax(n)


def pair_trap(pairs: int, **trap_values: float) -> FitnessFunction:
    return PairTrap(pairs, **trap_values)


def generate_uniform_3sat(n_vars: int, clause_count: int, rng: RandomSource) -> CnfFormula:
    """Random 3-SAT: three distinct variables per clause, each sign a coin flip."""
    if n_vars < 3:
        raise ValueError(f"uniform 3-SAT needs at least 3 variables, got {n_vars}")
    if clause_count < 1:
        raise ValueError(f"clause count must be >= 1, got {clause_count}")
    clauses = []
    for _ in range(clause_count):
        variables = rng.gen.choice(n_vars, size=3, replace=False) + 1
        signs = np.where(rng.gen.random(3) < 0.5, -1, 1)
        clauses.append(tuple(int(v * s) for v, s in zip(variables, signs)))
    return CnfFormula(n_vars, tuple(clauses))


def load_problem(source: str, name: str = "") -> FitnessFunction:
    """Resolve a problem reference to a fitness function.

    Synthetic specs: "onemax:N", "trap:PAIRS" and "3sat:VARS:CLAUSES:SEED"
    (generated on the fly, deterministic in SEED).  Anything else is read as
    a DIMACS CNF/WCNF file path.
    """
    kind, _, rest = source.partition(":")
    try:
        if kind == "onemax":
            problem = OneMax(int(rest))
        elif kind == "trap":
            problem = PairTrap(int(rest))
        elif kind == "3sat":
            n_vars, clause_count, seed = (int(p) for p in rest.split(":"))
            formula = generate_uniform_3sat(n_vars, clause_count, RandomSource(seed))
            problem = MaxSat(formula, name=f"3sat-{n_vars}v{clause_count}c-s{seed}")
        else:
            with open(source, "r", encoding="ascii") as handle:
                problem = MaxSat(parse_dimacs(handle))
    except (ValueError, OSError) as exc:
        raise ValueError(f"cannot load problem {source!r}: {exc}") from exc
    if name:
        problem.name = name
    return problem
