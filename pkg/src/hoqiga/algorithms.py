"""The three evolvers behind one interface.

* qiga_evolve: order-r contraction search.  Registers are observed to sample
  classical individuals; after each generation every non-best amplitude is
  scaled by the contraction factor and the amplitude matching the best-so-far
  individual absorbs the freed probability mass.
* qiga1_evolve: the classic order-1 baseline with per-qubit rotation gates
  driven by a lookup table.
* sga_evolve: generational GA with roulette selection, single-point crossover
  and per-bit mutation.

All evolvers consume exactly the configured fitness-evaluation budget and
record the best-so-far fitness at every evaluation, so runs with different
generation sizes plot on a common axis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BitString,
    QuantumChromosome,
    QuantumRegister,
    RENORM_TRIGGER,
    RandomSource,
    bits_to_group,
    chromosome_layout,
)
from .problems import FitnessFunction

logger = logging.getLogger(__name__)

RotationTable = dict[tuple[int, int, bool], float]


def default_rotation_table(angle: float = 0.01 * math.pi) -> RotationTable:
    """Rotate toward the best individual's bit only where there is a direction.

    No move when the observed bit already agrees with the best individual's,
    or when the observed individual is at least as fit (nothing better to
    steer toward).  Positive angles move probability toward bit value 1.
    """
    table: RotationTable = {}
    for x in (0, 1):
        for b in (0, 1):
            for at_least_best in (False, True):
                if x == b or at_least_best:
                    delta = 0.0
                else:
                    delta = angle if b == 1 else -angle
                table[(x, b, at_least_best)] = delta
    return table


@dataclass(frozen=True)
class QigaConfig:
    """Knobs of the order-r contraction evolver."""

    order: int = 2
    quantum_population_size: int = 10
    samples_per_individual: int = 1
    contraction_factor: float = 0.9918
    max_fitness_evaluations: int = 5000

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if self.quantum_population_size < 1:
            raise ValueError(
                f"quantum population size must be >= 1, got {self.quantum_population_size}"
            )
        if self.samples_per_individual < 1:
            raise ValueError(
                f"samples per individual must be >= 1, got {self.samples_per_individual}"
            )
        if not 0.0 < self.contraction_factor < 1.0:
            raise ValueError(
                f"contraction factor must be in (0, 1), got {self.contraction_factor}"
            )
        per_generation = self.quantum_population_size * self.samples_per_individual
        if self.max_fitness_evaluations < per_generation:
            raise ValueError(
                f"evaluation budget {self.max_fitness_evaluations} cannot cover one "
                f"generation of {per_generation} samples"
            )


@dataclass(frozen=True)
class Qiga1Config:
    """Knobs of the rotation-gate order-1 baseline."""

    rotation_table: tuple[tuple[tuple[int, int, bool], float], ...] = tuple(
        sorted(default_rotation_table().items())
    )
    epsilon_guard: float = 0.01
    quantum_population_size: int = 10
    max_fitness_evaluations: int = 5000

    def __post_init__(self):
        table = dict(self.rotation_table)
        expected = {(x, b, c) for x in (0, 1) for b in (0, 1) for c in (False, True)}
        if set(table) != expected:
            raise ValueError("rotation table must define all 8 (x, b, comparison) entries")
        if any(abs(v) >= math.pi / 2 for v in table.values()):
            raise ValueError("rotation angles must satisfy |angle| < pi/2")
        object.__setattr__(self, "rotation_table", tuple(sorted(table.items())))
        if not 0.0 <= self.epsilon_guard < 0.3:
            raise ValueError(f"epsilon guard must be in [0, 0.3), got {self.epsilon_guard}")
        if self.quantum_population_size < 1:
            raise ValueError(
                f"quantum population size must be >= 1, got {self.quantum_population_size}"
            )
        if self.max_fitness_evaluations < self.quantum_population_size:
            raise ValueError("evaluation budget cannot cover one generation")

    @classmethod
    def with_table(cls, table: RotationTable, **kwargs) -> "Qiga1Config":
        return cls(rotation_table=tuple(sorted(table.items())), **kwargs)

    def table_array(self) -> np.ndarray:
        """Angles as a (2, 2, 2) array indexed [x, b, comparison]."""
        arr = np.zeros((2, 2, 2))
        for (x, b, cmp_), delta in self.rotation_table:
            arr[x, b, int(cmp_)] = delta
        return arr


@dataclass(frozen=True)
class SgaConfig:
    """Knobs of the classical generational GA."""

    population_size: int = 100
    generations: int = 50
    crossover_probability: float = 0.65
    mutation_probability: float = 0.05

    def __post_init__(self):
        if self.population_size < 2 or self.population_size % 2 != 0:
            raise ValueError(
                f"population size must be even and >= 2, got {self.population_size}"
            )
        if self.generations < 1:
            raise ValueError(f"generations must be >= 1, got {self.generations}")
        for name, p in (
            ("crossover probability", self.crossover_probability),
            ("mutation probability", self.mutation_probability),
        ):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")

    @property
    def max_fitness_evaluations(self) -> int:
        return self.population_size * self.generations


@dataclass
class RunResult:
    """One evolver run: the best individual found and how it was reached."""

    best_bits: BitString
    best_fitness: float
    trajectory: np.ndarray
    evaluations: int
    generations: int


class _BestTracker:
    """Evaluation-budget bookkeeping shared by every evolver.

    Records the best-so-far fitness after each evaluation; ties keep the
    earliest individual, so the trajectory is nondecreasing and the winner is
    the first to reach the top fitness.
    """

    def __init__(self, budget: int):
        self.budget = budget
        self.count = 0
        self.best_bits: BitString | None = None
        self.best_fitness = -math.inf
        self.trajectory = np.empty(budget, dtype=np.float64)

    @property
    def exhausted(self) -> bool:
        return self.count >= self.budget

    def record(self, bits: BitString, fitness: float) -> None:
        if fitness > self.best_fitness:
            self.best_fitness = fitness
            self.best_bits = np.array(bits, dtype=np.uint8)
        self.trajectory[self.count] = self.best_fitness
        self.count += 1

    def result(self, generations: int) -> RunResult:
        assert self.best_bits is not None
        return RunResult(
            best_bits=self.best_bits,
            best_fitness=self.best_fitness,
            trajectory=self.trajectory[: self.count],
            evaluations=self.count,
            generations=generations,
        )


def contraction_update(reg: QuantumRegister, best_group: int, mu: float) -> QuantumRegister:
    """Scale every non-best amplitude by mu; the best one absorbs the slack.

    The amplitude at best_group becomes sqrt(1 - sum of the scaled others
    squared), so the register stays normalized and (for nonnegative inputs)
    the best amplitude never decreases.
    """
    dim = len(reg.amplitudes)
    if not 0 <= best_group < dim:
        raise ValueError(f"best group must be in [0, {dim}), got {best_group}")
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"contraction factor must be in (0, 1], got {mu}")
    scaled = reg.amplitudes * mu
    squares = scaled**2
    others = squares.sum() - squares[best_group]
    scaled[best_group] = math.sqrt(max(0.0, 1.0 - others))
    norm2 = float(np.sum(scaled**2))
    if abs(norm2 - 1.0) > RENORM_TRIGGER:
        scaled /= math.sqrt(norm2)
    return QuantumRegister(reg.order, scaled)


def _best_groups(b: BitString, layout: list[int]) -> list[int]:
    groups = []
    pos = 0
    for order in layout:
        groups.append(bits_to_group(b[pos : pos + order]))
        pos += order
    return groups


def update_quantum_population(
    population: list[QuantumChromosome], b: BitString, mu: float
) -> list[QuantumChromosome]:
    """Contract every register of every chromosome toward its group value in b."""
    updated = []
    for chrom in population:
        if len(b) != chrom.length:
            raise ValueError(
                f"best individual has {len(b)} bits, chromosome covers {chrom.length}"
            )
        groups = _best_groups(b, chrom.layout)
        regs = tuple(
            contraction_update(reg, group, mu)
            for reg, group in zip(chrom.registers, groups)
        )
        updated.append(QuantumChromosome(chrom.length, regs))
    return updated


class _PackedRegisters:
    """The quantum population as dense amplitude arrays.

    Block `main` holds the full-order registers of every individual, shape
    (population, registers, 2**order); `tail` holds the optional shorter
    final register, shape (population, 2**tail_order).  All operations here
    are float-identical to the per-register public operations, and the
    observation draws consume the random stream exactly like
    observe_chromosome.
    """

    def __init__(self, pop_size: int, n_bits: int, order: int):
        layout = chromosome_layout(n_bits, order)
        self.n_bits = n_bits
        self.order = layout[0]
        self.tail_order = layout[-1] if layout[-1] != self.order else 0
        self.n_main = len(layout) - (1 if self.tail_order else 0)
        dim = 2**self.order
        self.main = np.full((pop_size, self.n_main, dim), math.sqrt(1.0 / dim))
        if self.tail_order:
            tdim = 2**self.tail_order
            self.tail = np.full((pop_size, tdim), math.sqrt(1.0 / tdim))
        else:
            self.tail = None
        self._shifts = np.arange(self.order - 1, -1, -1)

    @property
    def registers_per_individual(self) -> int:
        return self.n_main + (1 if self.tail_order else 0)

    def observe(self, individual: int, rng: RandomSource) -> BitString:
        """Sample one bitstring from one individual's registers."""
        draws = rng.uniforms(self.registers_per_individual)
        probs = self.main[individual] ** 2
        thresholds = np.cumsum(probs, axis=1)
        values = np.sum(thresholds <= draws[: self.n_main, None], axis=1)
        np.minimum(values, probs.shape[1] - 1, out=values)
        bits = ((values[:, None] >> self._shifts) & 1).astype(np.uint8).ravel()
        if self.tail is None:
            return bits
        tprobs = self.tail[individual] ** 2
        tvalue = min(int(np.sum(np.cumsum(tprobs) <= draws[-1])), len(tprobs) - 1)
        tshifts = np.arange(self.tail_order - 1, -1, -1)
        tbits = ((tvalue >> tshifts) & 1).astype(np.uint8)
        return np.concatenate([bits, tbits])

    def contract(self, b: BitString, mu: float) -> None:
        """Contract every register of every individual toward b, in place."""
        if self.n_main:
            groups = (
                b[: self.n_main * self.order].reshape(self.n_main, self.order)
                @ (1 << self._shifts)
            ).astype(np.int64)
            idx = groups[None, :, None]
            self.main *= mu
            squares = self.main**2
            others = squares.sum(axis=2) - np.take_along_axis(squares, idx, axis=2)[:, :, 0]
            np.put_along_axis(
                self.main, idx, np.sqrt(np.maximum(0.0, 1.0 - others))[:, :, None], axis=2
            )
            norm2 = (self.main**2).sum(axis=2)
            drift = np.abs(norm2 - 1.0) > RENORM_TRIGGER
            if drift.any():
                self.main[drift] /= np.sqrt(norm2[drift])[:, None]
        if self.tail is not None:
            group = bits_to_group(b[self.n_main * self.order :])
            self.tail *= mu
            squares = self.tail**2
            others = squares.sum(axis=1) - squares[:, group]
            self.tail[:, group] = np.sqrt(np.maximum(0.0, 1.0 - others))
            norm2 = (self.tail**2).sum(axis=1)
            drift = np.abs(norm2 - 1.0) > RENORM_TRIGGER
            if drift.any():
                self.tail[drift] /= np.sqrt(norm2[drift])[:, None]


def _check_problem(problem: FitnessFunction) -> int:
    n = getattr(problem, "size", 0)
    if not n or n < 1:
        raise ValueError("problem has no genes to optimize (size must be >= 1)")
    return n


def qiga_evolve(
    problem: FitnessFunction, config: QigaConfig, rng: RandomSource
) -> RunResult:
    """Order-r contraction search under a fixed fitness-evaluation budget.

    Starts from uniform registers, samples `samples_per_individual` strings
    per quantum individual each generation, folds them into the global best
    b, then contracts every register toward b's group values.
    """
    n = _check_problem(problem)
    if config.order > n:
        raise ValueError(
            f"order must satisfy 1 <= order <= problem size, got order={config.order} "
            f"for {n} genes"
        )
    packed = _PackedRegisters(config.quantum_population_size, n, config.order)
    tracker = _BestTracker(config.max_fitness_evaluations)
    generations = 0
    while not tracker.exhausted:
        generations += 1
        for i in range(config.quantum_population_size):
            for _ in range(config.samples_per_individual):
                if tracker.exhausted:
                    break
                bits = packed.observe(i, rng)
                tracker.record(bits, problem(bits))
        if tracker.exhausted:
            break
        packed.contract(tracker.best_bits, config.contraction_factor)
    return tracker.result(generations)


def qiga1_evolve(
    problem: FitnessFunction, config: Qiga1Config, rng: RandomSource
) -> RunResult:
    """Order-1 rotation-gate baseline under the same budget bookkeeping.

    Each gene is an independent qubit [alpha, beta].  After evaluating a
    generation, every qubit is rotated by the table angle for (observed bit,
    best bit, observed-at-least-best), then clamped away from the poles by
    the epsilon guard so no outcome ever becomes unreachable.
    """
    n = _check_problem(problem)
    pop = config.quantum_population_size
    table = config.table_array()
    eps = config.epsilon_guard
    state = np.full((pop, n, 2), math.sqrt(0.5))
    tracker = _BestTracker(config.max_fitness_evaluations)
    generations = 0
    while not tracker.exhausted:
        generations += 1
        observed: list[tuple[int, BitString, float]] = []
        for i in range(pop):
            if tracker.exhausted:
                break
            draws = rng.uniforms(n)
            bits = (draws >= state[i, :, 0] ** 2).astype(np.uint8)
            fitness = problem(bits)
            tracker.record(bits, fitness)
            observed.append((i, bits, fitness))
        if tracker.exhausted:
            break
        b = tracker.best_bits
        for i, bits, fitness in observed:
            delta = table[bits, b, int(fitness >= tracker.best_fitness)]
            cos_d, sin_d = np.cos(delta), np.sin(delta)
            alpha = state[i, :, 0].copy()
            beta = state[i, :, 1].copy()
            state[i, :, 0] = cos_d * alpha - sin_d * beta
            state[i, :, 1] = sin_d * alpha + cos_d * beta
        if eps > 0.0:
            _clamp_poles(state, eps)
    return tracker.result(generations)


def _clamp_poles(state: np.ndarray, eps: float) -> None:
    """Keep both qubit amplitudes at magnitude >= eps, preserving signs."""
    big = math.sqrt(1.0 - eps * eps)
    alpha, beta = state[..., 0], state[..., 1]
    small_a = np.abs(alpha) < eps
    state[..., 0] = np.where(small_a, np.copysign(eps, alpha), alpha)
    state[..., 1] = np.where(small_a, np.copysign(big, beta), beta)
    alpha, beta = state[..., 0], state[..., 1]
    small_b = np.abs(beta) < eps
    state[..., 1] = np.where(small_b, np.copysign(eps, beta), beta)
    state[..., 0] = np.where(small_b, np.copysign(big, alpha), alpha)


def sga_evolve(
    problem: FitnessFunction, config: SgaConfig, rng: RandomSource
) -> RunResult:
    """Generational GA: roulette selection, single-point crossover, bit mutation.

    Roulette needs nonnegative fitness; a generation containing negatives is
    shifted up for selection only, and an all-zero generation falls back to
    uniform selection.  Both fallbacks are logged, never fatal.
    """
    n = _check_problem(problem)
    pop_size = config.population_size
    tracker = _BestTracker(config.max_fitness_evaluations)
    population = rng.gen.integers(0, 2, size=(pop_size, n), dtype=np.uint8)
    generations = 0
    while not tracker.exhausted:
        generations += 1
        fitnesses = problem.batch(population)
        for i in range(pop_size):
            if tracker.exhausted:
                break
            tracker.record(population[i], float(fitnesses[i]))
        if tracker.exhausted:
            break

        selection = fitnesses.astype(np.float64, copy=True)
        low = selection.min()
        if low < 0:
            selection += -low + 1.0
            logger.warning(
                "generation %d: negative fitness %g; shifted for roulette selection",
                generations,
                low,
            )
        total = selection.sum()
        if total <= 0:
            probabilities = np.full(pop_size, 1.0 / pop_size)
            logger.warning(
                "generation %d: all-zero fitness; uniform selection fallback", generations
            )
        else:
            probabilities = selection / total
        parents = population[rng.gen.choice(pop_size, size=pop_size, p=probabilities)]

        children = parents.copy()
        if n >= 2:
            pairs = pop_size // 2
            crossed = rng.gen.random(pairs) < config.crossover_probability
            cuts = rng.gen.integers(1, n, size=pairs)
            for k in np.flatnonzero(crossed):
                cut = cuts[k]
                children[2 * k, cut:] = parents[2 * k + 1, cut:]
                children[2 * k + 1, cut:] = parents[2 * k, cut:]
        flips = rng.gen.random((pop_size, n)) < config.mutation_probability
        children ^= flips.astype(np.uint8)
        population = children
    return tracker.result(generations)


def single_point_crossover(
    parent_a: BitString, parent_b: BitString, cut: int
) -> tuple[BitString, BitString]:
    """Swap the suffixes of two equal-length parents at cut in [1, N-1]."""
    if len(parent_a) != len(parent_b):
        raise ValueError("parents must have equal length")
    if not 1 <= cut <= len(parent_a) - 1:
        raise ValueError(f"cut must be in [1, {len(parent_a) - 1}], got {cut}")
    child_a = np.concatenate([parent_a[:cut], parent_b[cut:]])
    child_b = np.concatenate([parent_b[:cut], parent_a[cut:]])
    return child_a, child_b
