"""Genetic search over loop topologies at fixed values, then over values at fixed topology.

Lower cost is fitter. Every epoch evaluates the population, keeps the ``M - p``
lowest-cost individuals, refills by crossover of random survivor pairs and
finally applies mutation. The best genome ever evaluated is returned.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from .circuit import (
    ABSENT,
    Branch,
    BranchKind,
    Chain,
    Loop,
    PARAMETERS,
    circuit_to_dict,
    validate_topology,
)
from .constants import FF, GHZ, PH
from .objectives import CostSpec, cost as cost_of
from .quantization import DEFAULT_CHARGE_CUTOFF, DEFAULT_FOCK_CUTOFF, quantize
from .spectrum import spectrum

KINDS = tuple(BranchKind)
CROSSOVER_RETRIES = 1000
DUPLICATE_RETRIES = 20

# lower/upper bounds in SI units (farads, henries, hertz)
DEFAULT_BOUNDS = {
    "C": (0.15 * FF, 800 * FF),
    "L": (238 * PH, 15000 * PH),
    "CJ": (3 * FF, 6000 * FF),
    "EJ": (0.15 * GHZ, 200 * GHZ),
}


@dataclass(frozen=True)
class GAConfig:
    """``mutation_mode`` is ``"per-individual"`` (each individual mutates with
    probability ``mutation_rate``) or ``"single"`` (at most one random
    individual per epoch). With ``unique`` (default: on for topology search,
    off for parameter search) a crossover child that repeats a
    genome evaluated earlier in the run is redrawn, and mutated if redrawing
    keeps failing; this keeps the small population from collapsing onto a few
    genomes."""

    population: int = 16
    survivors: int | None = None
    mutation_rate: float = 0.01
    epochs: int = 50
    seed: int = 0
    mutation_mode: str = "per-individual"
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    workers: int | None = None
    unique: bool | None = None

    def __post_init__(self):
        if self.survivors is None:
            object.__setattr__(self, "survivors", self.population // 2)
        if not 1 <= self.survivors < self.population:
            raise ValueError("survivors must satisfy 1 <= M - p < M")
        if not 0 <= self.mutation_rate <= 1:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.mutation_mode not in ("per-individual", "single"):
            raise ValueError(f"unknown mutation mode {self.mutation_mode!r}")
        for name, (lo, hi) in self.bounds.items():
            if not 0 < lo < hi:
                raise ValueError(f"bound for {name} must satisfy 0 < lower < upper")


@dataclass
class GAState:
    population: list
    fitness: list[float]
    epoch: int
    best_genome: object
    best_cost: float
    history: list[float] = field(default_factory=list)
    rng: np.random.Generator | None = field(default=None, repr=False)


@dataclass
class GAResult:
    best_genome: object
    best_cost: float
    history: list[float]
    state: GAState
    circuit: Loop | Chain | None = None


# --- fitness -----------------------------------------------------------------


def evaluate_circuit(
    circuit: Loop | Chain,
    spec: CostSpec,
    truncations: tuple[int, int] = (DEFAULT_CHARGE_CUTOFF, DEFAULT_FOCK_CUTOFF),
    levels: int = 4,
    loop_levels: int | None = None,
) -> float:
    """Quantize, diagonalize and score one circuit; any failure scores ``+inf``."""
    try:
        system = quantize(circuit, *truncations, loop_levels=loop_levels)
        report = spectrum(system, levels, labels=(spec.operator_label,))
        value = cost_of(report, spec).total
    except (ValueError, ArithmeticError, KeyError, RuntimeError, MemoryError):
        return math.inf
    return value if math.isfinite(value) else math.inf


def _workers(config: GAConfig) -> int:
    if config.workers is not None:
        return max(1, config.workers)
    try:
        return max(1, int(os.environ.get("CIRCUITFORGE_THREADS", "1")))
    except ValueError:
        return 1


def _evaluate_all(fn: Callable, genomes: Sequence, config: GAConfig, cache: dict | None, key: Callable) -> list[float]:
    """Evaluate in input order; results never depend on scheduling."""
    keys = [key(g) for g in genomes]
    todo = {}
    for k, g in zip(keys, genomes):
        if (cache is None or k not in cache) and k not in todo:
            todo[k] = g
    n = _workers(config)
    items = list(todo.items())
    if n > 1 and len(items) > 1:
        with ThreadPoolExecutor(n) as pool:
            values = list(pool.map(lambda kv: _safe(fn, kv[1]), items))
    else:
        values = [_safe(fn, g) for _, g in items]
    found = dict(zip((k for k, _ in items), values))
    if cache is not None:
        cache.update(found)
    return [cache[k] if cache is not None else found[k] for k in keys]


def _safe(fn: Callable, genome) -> float:
    try:
        v = float(fn(genome))
    except Exception:  # a broken individual must never stop the run
        return math.inf
    return v if math.isfinite(v) else math.inf


# --- generic evolution loop ---------------------------------------------------


def _evolve(
    initial: list,
    fitness_fn: Callable,
    crossover: Callable,
    mutation: Callable,
    config: GAConfig,
    rng: np.random.Generator,
    key: Callable[[object], Hashable],
    cache: dict | None,
    unique: bool = False,
    observer: Callable | None = None,
) -> GAResult:
    population = list(initial)
    fitness = _evaluate_all(fitness_fn, population, config, cache, key)
    seen = {key(g) for g in population}
    best_i = int(np.argmin(fitness))
    state = GAState(population, fitness, 0, population[best_i], fitness[best_i], [fitness[best_i]], rng)
    for epoch in range(1, config.epochs + 1):
        order = sorted(range(len(population)), key=lambda i: (state.fitness[i], i))
        keep = order[: config.survivors]
        survivors = [state.population[i] for i in keep]
        surv_fit = [state.fitness[i] for i in keep]
        if observer is not None:
            observer(epoch, surv_fit, [state.fitness[i] for i in order[config.survivors :]])
        children = []
        taken = {key(g) for g in survivors} | set(seen)
        while len(survivors) + len(children) < config.population:
            for _ in range(DUPLICATE_RETRIES):
                a, b = rng.choice(len(survivors), size=2, replace=len(survivors) < 2)
                fitter = survivors[a] if surv_fit[a] <= surv_fit[b] else survivors[b]
                child = crossover(survivors[a], survivors[b], rng, fitter)
                if not unique or key(child) not in taken:
                    break
            else:
                # recombination only reproduces known genomes: force variation
                for _ in range(DUPLICATE_RETRIES):
                    child = mutation(child, rng, 1.0)
                    if key(child) not in taken:
                        break
            taken.add(key(child))
            children.append(child)
        population = survivors + children
        if config.mutation_mode == "single":
            if rng.random() < config.mutation_rate:
                i = int(rng.integers(len(population)))
                population[i] = mutation(population[i], rng, 1.0)
        else:
            population = [mutation(g, rng, config.mutation_rate) for g in population]
        fitness = _evaluate_all(fitness_fn, population, config, cache, key)
        seen.update(key(g) for g in population)
        state.population, state.fitness, state.epoch = population, fitness, epoch
        i = int(np.argmin(fitness))
        if fitness[i] < state.best_cost:
            state.best_genome, state.best_cost = population[i], fitness[i]
        state.history.append(state.best_cost)
    return GAResult(state.best_genome, state.best_cost, list(state.history), state)


def _rng(seed: int) -> np.random.Generator:
    # one stream drives selection, crossover and mutation; cost evaluation is deterministic
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])


# --- topology genomes ----------------------------------------------------------

Topology = tuple  # four BranchKind values, or a tuple of such tuples for a chain


def _is_chain_genome(g) -> bool:
    return bool(g) and isinstance(g[0], tuple)


def _valid(kinds) -> bool:
    if _is_chain_genome(kinds):
        return all(validate_topology(k).valid for k in kinds)
    return validate_topology(kinds).valid


def random_topology(rng: np.random.Generator, loops: int = 0) -> Topology:
    """A uniformly drawn valid loop topology (or a tuple of ``loops`` of them)."""
    if loops:
        return tuple(random_topology(rng) for _ in range(loops))
    while True:
        kinds = tuple(KINDS[i] for i in rng.integers(len(KINDS), size=4))
        if validate_topology(kinds).valid:
            return kinds


def _crossover_loop(a, b, rng) -> tuple | None:
    # node k separates branch k from branch k + 1, so cuts sit after B0, B1 or B2
    splices = [tuple(x[:cut]) + tuple(y[cut:]) for cut in (1, 2, 3) for x, y in ((a, b), (b, a))]
    if not any(validate_topology(c).valid for c in splices):
        return None  # redrawing cannot produce a valid child
    for _ in range(CROSSOVER_RETRIES):
        child = splices[int(rng.integers(len(splices)))]
        if validate_topology(child).valid:
            return child
    return None


def crossover_topology(parent_a, parent_b, rng: np.random.Generator, fitter=None):
    """Node-0 side (B0, B1) of one parent joined to the node-2 side (B2, B3) of the other.

    Invalid splices are redrawn; when no valid offspring exists within the
    retry budget the fitter parent (``parent_a`` if not given) is cloned.
    """
    fitter = parent_a if fitter is None else fitter
    if _is_chain_genome(parent_a):
        out = []
        for k, (a, b) in enumerate(zip(parent_a, parent_b)):
            child = _crossover_loop(a, b, rng)
            out.append(child if child is not None else fitter[k])
        return tuple(out)
    child = _crossover_loop(parent_a, parent_b, rng)
    return child if child is not None else tuple(fitter)


def mutate_topology(genome, rng: np.random.Generator, rate: float):
    """With probability ``rate`` re-draw the kind of one branch, keeping the loop valid."""
    if rate <= 0 or rng.random() >= rate:
        return genome
    if _is_chain_genome(genome):
        k = int(rng.integers(len(genome)))
        loops = list(genome)
        loops[k] = mutate_topology(genome[k], rng, 1.0)
        return tuple(loops)
    kinds = list(genome)
    options = [
        (pos, kind)
        for pos in range(4)
        for kind in KINDS
        if kind is not kinds[pos] and validate_topology(kinds[:pos] + [kind] + kinds[pos + 1 :]).valid
    ]
    pos, kind = options[int(rng.integers(len(options)))]
    kinds[pos] = kind
    return tuple(kinds)


def build_from_kinds(genome, fixed: dict[BranchKind, Branch], phi_x: float = 0.0, couplings=()) -> Loop | Chain:
    """Circuit for a topology genome using the fixed branch values per kind."""
    if _is_chain_genome(genome):
        loops = tuple(build_from_kinds(k, fixed, phi_x) for k in genome)
        return Chain(loops, tuple(couplings))
    return Loop(tuple(fixed.get(k, ABSENT) if k is not BranchKind.ABSENT else ABSENT for k in genome), phi_x)


def optimize_topology(
    cost: Callable[[Loop | Chain], float],
    fixed_params: dict[BranchKind, Branch],
    config: GAConfig = GAConfig(),
    loops: int = 0,
    couplings: Sequence[float] = (),
    phi_x: float = 0.0,
    cache: dict | None = None,
    observer: Callable | None = None,
) -> GAResult:
    """Evolve topologies at fixed component values.

    ``cost`` maps a circuit to its scalar cost. Topologies repeat often (there
    are only 225 single-loop ones), so costs are memoized in ``cache``; pass a
    shared dict to reuse it across runs. ``observer(epoch, survivor_costs,
    discarded_costs)`` is called after every selection step.
    """
    for kind in (BranchKind.CAPACITOR, BranchKind.INDUCTOR, BranchKind.JUNCTION):
        if kind not in fixed_params:
            raise ValueError(f"fixed_params lacks a value for {kind.value}")
    rng = _rng(config.seed)
    initial = [random_topology(rng, loops) for _ in range(config.population)]
    cache = {} if cache is None else cache

    def fitness(genome):
        return cost(build_from_kinds(genome, fixed_params, phi_x, couplings))

    unique = True if config.unique is None else config.unique
    result = _evolve(initial, fitness, crossover_topology, mutate_topology, config, rng, lambda g: g, cache, unique, observer)
    result.circuit = build_from_kinds(result.best_genome, fixed_params, phi_x, couplings)
    return result


# --- parameter genomes ------------------------------------------------------------


def parameter_bounds(circuit: Loop | Chain, bounds: dict = DEFAULT_BOUNDS) -> list[tuple[float, float]]:
    """Per-entry bounds matching ``circuit.parameter_vector()``; couplings use the capacitor bound."""
    loops = circuit.loops if isinstance(circuit, Chain) else (circuit,)
    out = [bounds[name] for loop in loops for b in loop.branches for name in PARAMETERS[b.kind]]
    if isinstance(circuit, Chain):
        out += [bounds["C"]] * len(circuit.couplings)
    return out


def crossover_parameters(a: np.ndarray, b: np.ndarray, rng: np.random.Generator, fitter=None) -> np.ndarray:
    """Concatenate ``a[:s]`` and ``b[s:]`` at one random split point ``s``."""
    n = len(a)
    if n < 2:
        return np.array(a if rng.random() < 0.5 else b, dtype=float)
    s = int(rng.integers(1, n))
    return np.concatenate([a[:s], b[s:]])


def mutate_parameters(genome: np.ndarray, rng: np.random.Generator, rate: float, bounds) -> np.ndarray:
    """With probability ``rate`` re-draw one entry uniformly inside its bound."""
    if rate <= 0 or rng.random() >= rate:
        return genome
    out = np.array(genome, dtype=float)
    i = int(rng.integers(len(out)))
    lo, hi = bounds[i]
    out[i] = rng.uniform(lo, hi)
    return out


def mutate(genome, rng: np.random.Generator, rate: float, bounds=None):
    """Topology genomes mutate a branch kind; parameter arrays re-draw one value within ``bounds``."""
    if isinstance(genome, np.ndarray):
        if bounds is None:
            raise ValueError("parameter mutation needs bounds")
        return mutate_parameters(genome, rng, rate, bounds)
    return mutate_topology(genome, rng, rate)


def optimize_parameters(
    topology_fixed: Loop | Chain,
    cost: Callable[[Loop | Chain], float],
    config: GAConfig = GAConfig(),
    initial: Sequence[np.ndarray] | None = None,
    observer: Callable | None = None,
) -> GAResult:
    """Evolve the packed component values of a fixed topology, always inside the bounds."""
    if isinstance(topology_fixed, Loop) and not validate_topology(topology_fixed).valid:
        raise ValueError("topology is not valid")
    bounds = parameter_bounds(topology_fixed, config.bounds)
    if not bounds:
        raise ValueError("topology has no parameters to optimize")
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    rng = _rng(config.seed)
    if initial is None:
        population = [rng.uniform(lo, hi) for _ in range(config.population)]
    else:
        population = [np.clip(np.asarray(g, dtype=float), lo, hi) for g in initial]
        if len(population) != config.population:
            raise ValueError("initial population size must equal config.population")

    def fitness(genome):
        return cost(topology_fixed.with_parameters(genome))

    result = _evolve(
        population,
        fitness,
        crossover_parameters,
        lambda g, r, rate: mutate_parameters(g, r, rate, bounds),
        config,
        rng,
        lambda g: tuple(np.asarray(g).tolist()),
        {},
        bool(config.unique),
        observer,
    )
    result.circuit = topology_fixed.with_parameters(result.best_genome)
    return result


# --- manifest -------------------------------------------------------------------


def _config_dict(config: GAConfig) -> dict:
    d = asdict(config)
    d["bounds"] = {k: list(v) for k, v in config.bounds.items()}
    d.pop("workers")
    return d


def run_manifest(result: GAResult, config: GAConfig, extra: dict | None = None) -> dict:
    """Structured record of a run: config, seed, per-epoch best cost and final genome."""
    genome = result.best_genome
    if isinstance(genome, np.ndarray):
        genome_out = genome.tolist()
    elif _is_chain_genome(genome):
        genome_out = [[k.value for k in loop] for loop in genome]
    else:
        genome_out = [k.value for k in genome]
    out = {
        "config": _config_dict(config),
        "seed": config.seed,
        "best_cost": _json_number(result.best_cost),
        "genome": genome_out,
        "history": [_json_number(h) for h in result.history],
    }
    if result.circuit is not None:
        out["circuit"] = circuit_to_dict(result.circuit)
    if extra:
        out.update(extra)
    return out


def _json_number(x: float):
    return x if math.isfinite(x) else None


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
