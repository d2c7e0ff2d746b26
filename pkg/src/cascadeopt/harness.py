"""
Replicated optimisation experiments.

One experiment fixes a single network and a single preference table, then
runs the GA ``replications`` times for each requested sender degree. Only
the GA seed changes between replications. Seeds are derived with SplitMix64::

    mix_seed(master, k1, k2, ...) = h_n, where
        h_0 = splitmix64(master)
        h_i = splitmix64(h_{i-1} XOR k_i)

    splitmix64(x):
        z = (x + 0x9E3779B97F4A7C15) mod 2**64
        z = ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
        z = ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2**64
        return z XOR (z >> 31)

The preference table uses ``mix_seed(master, 0)``; replication ``r`` of
sender ``j`` (0-based position in ``sender_degrees``) uses
``mix_seed(master, j + 1, r)``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .diffusion import (
    FIELDS,
    INTEGER_FIELDS,
    LOWER,
    UPPER,
    CascadeObjective,
    FilterConfig,
    MessageStyle,
    PreferenceTable,
)
from .errors import ConfigError, DegenerateNetworkError, GridTooLargeError
from .ga import GaConfig, GaResult, run_ga
from .netgen import DirectedGraph, NetworkConfig, generate_network, reachable_set

__all__ = [
    "splitmix64",
    "mix_seed",
    "ExperimentConfig",
    "SenderSummary",
    "ReplicationSummary",
    "ExperimentResult",
    "pick_sender",
    "summarize",
    "DEFAULT_GRID",
    "GRID_LIMIT",
    "grid_oracle",
    "build_context",
    "run_experiment",
    "write_outputs",
    "render_outputs",
    "worker_count",
]

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(master: int, *keys: int) -> int:
    h = splitmix64(master & _MASK64)
    for k in keys:
        h = splitmix64(h ^ (k & _MASK64))
    return h


PREFERENCE_STREAM = 0


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    ga: GaConfig = field(default_factory=GaConfig)
    replications: int = 50
    sender_degrees: Tuple[int, ...] = (5, 10, 170)
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sender_degrees", tuple(int(d) for d in self.sender_degrees))
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.sender_degrees:
            raise ConfigError("sender_degrees must not be empty")
        if len(set(self.sender_degrees)) != len(self.sender_degrees):
            raise ConfigError("sender_degrees must be distinct (they name the output files)")
        if any(d < 0 for d in self.sender_degrees):
            raise ConfigError("sender_degrees must be non-negative")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            unknown = set(data) - {f for f in cls.__dataclass_fields__}
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
            kwargs = dict(data)
            if "network" in kwargs:
                kwargs["network"] = NetworkConfig(**kwargs["network"])
            if "filter" in kwargs:
                kwargs["filter"] = FilterConfig(**kwargs["filter"])
            if "ga" in kwargs:
                kwargs["ga"] = GaConfig(**kwargs["ga"])
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sender_degrees"] = list(self.sender_degrees)
        return d


def summarize(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and standard error (``n - 1`` denominator); SE is 0 for one value."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty sample")
    mean = float(arr.mean())
    if arr.size == 1:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / np.sqrt(arr.size))


def pick_sender(graph: DirectedGraph, target_out_degree: int) -> int:
    """Node whose out-degree is nearest the target; lowest id on ties."""
    if graph.node_count == 0:
        raise DegenerateNetworkError("cannot pick a sender in an empty graph")
    gap = np.abs(graph.out_degrees() - int(target_out_degree))
    return int(np.argmin(gap))


DEFAULT_GRID: Dict[str, tuple] = {
    "polarity": (-1.0, -0.5, 0.0, 0.5, 1.0),
    "emotionality": (-1.0, -0.5, 0.0, 0.5, 1.0),
    "length": (1, 35, 70, 105, 140),
    "time": (0, 1, 2),
    "url_count": (0, 5, 10),
    "hashtag_count": (0, 5, 10),
}
GRID_LIMIT = 10**6


def _grid_axes(grid_spec: Dict[str, Sequence]) -> List[tuple]:
    missing = [name for name in FIELDS if name not in grid_spec]
    if missing:
        raise ConfigError(f"grid is missing axes: {', '.join(missing)}")
    axes = []
    for i, name in enumerate(FIELDS):
        values = tuple(grid_spec[name])
        if not values:
            raise ConfigError(f"grid axis {name!r} is empty")
        for v in values:
            if name in INTEGER_FIELDS and int(v) != v:
                raise ConfigError(f"grid axis {name!r} needs integers, got {v!r}")
            if not LOWER[i] <= v <= UPPER[i]:
                raise ConfigError(f"grid value {name}={v!r} outside its domain")
        axes.append(values)
    return axes


def grid_oracle(objective: CascadeObjective, grid_spec: Optional[Dict[str, Sequence]] = None, limit: int = GRID_LIMIT):
    """Exhaustively score a Cartesian grid of styles.

    Returns ``(best_style, best_fitness, points_evaluated)``; ties go to the
    first point in enumeration order (axes in field order, last varying fastest).
    """
    axes = _grid_axes(DEFAULT_GRID if grid_spec is None else grid_spec)
    size = int(np.prod([len(a) for a in axes]))
    if size > limit:
        raise GridTooLargeError(size, limit)
    rows = np.array(list(itertools.product(*axes)), dtype=np.float64)
    scores = np.concatenate([objective.scores(rows[i : i + 4096]) for i in range(0, size, 4096)])
    best = int(np.argmax(scores))
    return MessageStyle.from_array(rows[best]), int(scores[best]), size


@dataclass
class SenderSummary:
    target_degree: int
    sender: int
    sender_out_degree: int
    reachable: int
    fitness_mean: float
    fitness_se: float
    genome_mean: Dict[str, float]
    genome_se: Dict[str, float]
    # per generation, across replications
    curve_mean: List[float]
    curve_ci95: List[float]
    curve_population_mean: List[float]


@dataclass
class ReplicationSummary:
    replications: int
    graph_digest: str
    preferences_digest: str
    senders: List[SenderSummary]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    graph: DirectedGraph
    prefs: PreferenceTable
    summary: ReplicationSummary
    # runs[j][r]: GaResult of replication r for sender_degrees[j]
    runs: List[List[GaResult]]


def worker_count() -> int:
    """Worker processes allowed by ``CASCADE_THREADS`` (unset or 0 = all CPUs)."""
    raw = os.environ.get("CASCADE_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"CASCADE_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("CASCADE_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def build_context(config: ExperimentConfig) -> Tuple[DirectedGraph, PreferenceTable]:
    graph = generate_network(config.network)
    prefs = PreferenceTable.random(graph.node_count, np.random.default_rng(mix_seed(config.master_seed, PREFERENCE_STREAM)))
    return graph, prefs


def _run_one(task):
    objective, ga_config = task
    return run_ga(objective, ga_config)


def _summarize_sender(target, objective, results: Sequence[GaResult]) -> SenderSummary:
    finals = [r.best for r in results]
    fit_mean, fit_se = summarize([b.fitness for b in finals])
    genome_mean, genome_se = {}, {}
    for i, name in enumerate(FIELDS):
        genome_mean[name], genome_se[name] = summarize([b.genome.as_tuple()[i] for b in finals])
    best = np.array([[rec.best_fitness for rec in r.records] for r in results], dtype=np.float64)
    pop = np.array([[rec.mean_fitness for rec in r.records] for r in results], dtype=np.float64)
    n = best.shape[0]
    se = best.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(best.shape[1])
    return SenderSummary(
        target_degree=target,
        sender=objective.sender,
        sender_out_degree=len(objective.graph.out_edges[objective.sender]),
        reachable=len(reachable_set(objective.graph, objective.sender)),
        fitness_mean=fit_mean,
        fitness_se=fit_se,
        genome_mean=genome_mean,
        genome_se=genome_se,
        curve_mean=best.mean(axis=0).tolist(),
        curve_ci95=(1.96 * se).tolist(),
        curve_population_mean=pop.mean(axis=0).tolist(),
    )


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    """Run every sender type and replication on one shared network."""
    graph, prefs = build_context(config)
    objectives = [CascadeObjective(graph, prefs, pick_sender(graph, d), config.filter) for d in config.sender_degrees]
    tasks = [
        (obj, replace(config.ga, seed=mix_seed(config.master_seed, j + 1, r)))
        for j, obj in enumerate(objectives)
        for r in range(config.replications)
    ]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(_run_one, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        flat = [_run_one(t) for t in tasks]
    reps = config.replications
    runs = [flat[j * reps : (j + 1) * reps] for j in range(len(objectives))]
    summary = ReplicationSummary(
        replications=reps,
        graph_digest=graph.digest(),
        preferences_digest=hashlib.sha256(prefs.to_json().encode()).hexdigest(),
        senders=[_summarize_sender(d, obj, rs) for d, obj, rs in zip(config.sender_degrees, objectives, runs)],
    )
    return ExperimentResult(config=config, graph=graph, prefs=prefs, summary=summary, runs=runs)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _num(x) -> str:
    # repr round-trips, so aggregates can be recomputed from files exactly
    return repr(float(x)) if isinstance(x, float) else str(x)


def render_outputs(result: ExperimentResult) -> Dict[str, str]:
    """File name -> contents for every experiment artifact."""
    files = {}
    cfg = result.config
    for degree, runs in zip(cfg.sender_degrees, result.runs):
        files[f"trace_{degree}.csv"] = _csv_text(
            ("replication", "generation", "best_fitness", "mean_fitness"),
            (
                (r, rec.generation_index, rec.best_fitness, _num(rec.mean_fitness))
                for r, run in enumerate(runs)
                for rec in run.records
            ),
        )
        files[f"final_{degree}.csv"] = _csv_text(
            ("replication", "best_fitness") + FIELDS,
            ((r, run.best.fitness, *map(_num, run.best.genome.as_tuple())) for r, run in enumerate(runs)),
        )
    header = ["parameter"]
    for degree in cfg.sender_degrees:
        header += [f"{degree}_mean", f"{degree}_se"]
    rows = []
    for name in FIELDS:
        row = [name]
        for s in result.summary.senders:
            row += [_num(s.genome_mean[name]), _num(s.genome_se[name])]
        rows.append(row)
    row = ["best_fitness"]
    for s in result.summary.senders:
        row += [_num(s.fitness_mean), _num(s.fitness_se)]
    rows.append(row)
    files["stability.csv"] = _csv_text(header, rows)
    doc = {"config": cfg.to_dict(), **result.summary.to_dict()}
    files["summary.json"] = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    return files


def write_outputs(result: ExperimentResult, out_dir) -> List[Path]:
    """Write all artifacts, each via a temp file and atomic rename."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in render_outputs(result).items():
        fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, out_dir / name)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        written.append(out_dir / name)
    return written
