"""Experiment harness: named algorithms, normalized-length rows, and the delta sweep.

Every run is normalized by the CG-exact length of its instance.  Output is
plain CSV with reals printed to 12 significant digits, so identical specs
give byte-identical files as long as wall-clock timing is left off.
"""
from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .colgen import (solve_cardinality, solve_cg, solve_full_lp, solve_uniform_cardinality)
from .conditions import schedule_h1, schedule_hn
from .errors import DomainError
from .framework import FrameworkConfig, run_framework
from .instance import GeneratorParams, generate

FRAMEWORK_ALGORITHMS = ("tf-sr-exact", "tf-sr-heur", "tf-wsr-exact", "tf-wsr-heur",
                        "td-sr-exact", "td-sr-heur", "td-wsr-exact", "td-wsr-heur")
ALGORITHMS = FRAMEWORK_ALGORITHMS + ("cg-heur", "cg-exact")
# solver entry points reachable from the command line but not part of the experiment catalogue
EXTRA_ALGORITHMS = ("full-lp", "cardinality", "uniform-cardinality", "h1", "hn")
DEFAULT_DELTA = 0.5
DEFAULT_GRID = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
BASELINE = "cg-exact"
VERIFY_RTOL = 1e-6
CSV_HEADER = ("instance", "algorithm", "length", "normalized", "iterations", "wall_ms")
SWEEP_HEADER = ("algorithm", "delta", "mean_normalized", "instances")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def max_workers() -> int:
    """Worker cap: LINKDRAIN_THREADS if set, else the CPU count."""
    env = os.environ.get("LINKDRAIN_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise DomainError(f"LINKDRAIN_THREADS must be an integer, got {env!r}") from None
        return max(1, cap)
    return os.cpu_count() or 1


@dataclass
class ResultRow:
    instance: str
    algorithm: str
    length: float
    normalized: Optional[float]
    iterations: int
    wall_ms: Optional[float] = None

    def cells(self) -> list:
        return [self.instance, self.algorithm, fmt(self.length), fmt(self.normalized),
                fmt(self.iterations), fmt(self.wall_ms)]


@dataclass
class ExperimentSpec:
    count: int = 50
    params: GeneratorParams = field(default_factory=GeneratorParams)
    algorithms: tuple = ALGORITHMS
    deltas: tuple = DEFAULT_GRID
    delta: float = DEFAULT_DELTA
    seed: int = 0
    timing: bool = False

    def __post_init__(self):
        if self.count < 1:
            raise DomainError("instance count must be positive")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise DomainError(f"unknown algorithms {bad}; choose from {list(ALGORITHMS)}")
        d = np.asarray(self.deltas, dtype=float)
        if d.size == 0 or np.any(d <= 0) or np.any(np.diff(d) <= 0):
            raise DomainError("delta grid must be nonempty, positive and strictly ascending")
        if not self.delta > 0:
            raise DomainError("delta must be positive")

    def instance_seeds(self) -> list:
        return [self.seed + k for k in range(self.count)]

    def instances(self) -> list:
        """(id, Instance) pairs; instance k uses seed ``seed + k``."""
        out = []
        for s in self.instance_seeds():
            p = GeneratorParams(**{f.name: getattr(self.params, f.name) for f in fields(self.params)})
            p.seed = s
            out.append((instance_name(s), generate(p)))
        return out

    def header_lines(self) -> list:
        p = self.params
        items = [("count", self.count), ("seed", self.seed), ("n", p.n), ("rate", p.rate),
                 ("demand", ":".join(str(v) for v in p.demand)), ("area", p.area),
                 ("min_distance", p.min_distance), ("max_distance", p.max_distance),
                 ("exponent", p.exponent), ("power", p.power), ("sigma2", p.noise),
                 ("threshold", p.threshold), ("z", p.z), ("bandwidth", p.bandwidth),
                 ("delta", self.delta), ("deltas", " ".join(fmt(x) for x in self.deltas)),
                 ("baseline", BASELINE), ("timing", self.timing)]
        return [f"# {k}={v if isinstance(v, str) else fmt(v) if not isinstance(v, bool) else str(v).lower()}"
                for k, v in items]


def instance_name(seed: int) -> str:
    return f"inst-s{seed:06d}"


def run_algorithm(inst, name: str, delta: Optional[float] = DEFAULT_DELTA):
    """Run a named algorithm; returns (schedule, iteration count)."""
    if name in FRAMEWORK_ALGORITHMS:
        cfg = FrameworkConfig.from_name(name, delta)
        res = run_framework(inst, cfg)
        return res.schedule, res.iterations
    if name == "cg-exact":
        rep = solve_cg(inst, "exact")
        return rep.schedule, rep.iterations
    if name == "cg-heur":
        rep = solve_cg(inst, "heuristic")
        return rep.schedule, rep.iterations
    if name == "full-lp":
        return solve_full_lp(inst), 1
    if name == "cardinality":
        return solve_cardinality(inst), 1
    if name == "uniform-cardinality":
        return solve_uniform_cardinality(inst), 1
    if name == "h1":
        s = schedule_h1(inst)
        return s, len(s)
    if name == "hn":
        s = schedule_hn(inst)
        return s, len(s)
    raise DomainError(f"unknown algorithm {name!r}; choose from {list(ALGORITHMS + EXTRA_ALGORITHMS)}")


def timed_run(inst, name, delta=DEFAULT_DELTA, timing: bool = True):
    """Run and verify; returns (schedule, iterations, wall_ms or None)."""
    t0 = time.perf_counter()
    sched, iterations = run_algorithm(inst, name, delta)
    wall = (time.perf_counter() - t0) * 1e3 if timing else None
    sched.verify(inst, VERIFY_RTOL)
    return sched, iterations, wall


def make_row(instance_id, name, sched, iterations, baseline: Optional[float], wall=None) -> ResultRow:
    length = sched.total
    normalized = None if baseline is None else length / baseline
    if name == BASELINE and normalized is not None:
        normalized = 1.0 if abs(normalized - 1.0) <= 1e-12 else normalized
    return ResultRow(instance_id, name, length, normalized, iterations, wall)


def _instance_rows(task):
    """Worker: the baseline plus every requested (algorithm, delta) on one instance."""
    instance_id, inst, algorithms, deltas, timing = task
    base, base_it, base_wall = timed_run(inst, BASELINE, None, timing)
    baseline = base.total
    out = []
    for name in algorithms:
        for delta in (deltas if name.startswith("td-") else (None,)):
            if name == BASELINE:
                sched, it, wall = base, base_it, base_wall
            else:
                sched, it, wall = timed_run(inst, name, delta, timing)
            out.append((delta, make_row(instance_id, name, sched, it, baseline, wall)))
    return out


def _map(tasks, workers: Optional[int] = None):
    workers = min(workers or max_workers(), len(tasks))
    if workers <= 1:
        return [_instance_rows(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_instance_rows, tasks))


def run_experiment(spec: ExperimentSpec, instances=None, workers: Optional[int] = None) -> list:
    """All catalogue algorithms at ``spec.delta``; rows sorted by instance then algorithm."""
    instances = spec.instances() if instances is None else instances
    tasks = [(iid, inst, spec.algorithms, (spec.delta,), spec.timing) for iid, inst in instances]
    rows = [row for res in _map(tasks, workers) for _, row in res]
    return sorted(rows, key=lambda r: (r.instance, r.algorithm))


def run_sweep(spec: ExperimentSpec, instances=None, workers: Optional[int] = None):
    """Mean normalized length per (TD algorithm, delta); returns (summary, rows).

    ``rows`` holds (delta, ResultRow) pairs for every run.
    """
    instances = spec.instances() if instances is None else instances
    algs = tuple(a for a in spec.algorithms if a.startswith("td-"))
    if not algs:
        raise DomainError("the sweep needs at least one td-* algorithm")
    tasks = [(iid, inst, algs, tuple(spec.deltas), spec.timing) for iid, inst in instances]
    runs = [pair for res in _map(tasks, workers) for pair in res]
    summary = []
    for name in sorted(algs):
        for delta in spec.deltas:
            vals = [row.normalized for d, row in runs if row.algorithm == name and d == delta]
            summary.append((name, float(delta), float(np.mean(vals)), len(vals)))
    runs.sort(key=lambda p: (p[1].instance, p[1].algorithm, p[0]))
    return summary, runs


def rows_to_csv(rows: Sequence[ResultRow], header_lines: Sequence[str] = (), sink=None) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow(row.cells())
    return _emit(buf.getvalue(), sink)


def sweep_to_csv(summary, header_lines: Sequence[str] = (), sink=None) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for name, delta, mean, count in summary:
        w.writerow([name, fmt(delta), fmt(mean), count])
    return _emit(buf.getvalue(), sink)


def read_rows(source) -> list:
    """Parse a result CSV (comment lines skipped) back into ResultRows."""
    text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    out = []
    for rec in csv.DictReader(lines):
        out.append(ResultRow(rec["instance"], rec["algorithm"], float(rec["length"]),
                             float(rec["normalized"]) if rec["normalized"] else None,
                             int(rec["iterations"]),
                             float(rec["wall_ms"]) if rec["wall_ms"] else None))
    return out


def _emit(text: str, sink) -> str:
    if sink is not None:
        Path(sink).write_text(text)
    return text
