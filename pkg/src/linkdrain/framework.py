"""Greedy drain framework: pick a group, run it, update the queues, repeat.

Group selection maximizes either the sum-rate ``SR = sum_i r_iC`` or the
queue-weighted sum-rate ``WSR = sum_i q_i r_iC``, by exhaustive search over
the active links ("exact") or by a greedy pass over ranked links
("heuristic").  Activation runs the group until its first queue empties
("TF") or for at most ``delta`` seconds ("TD").
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, DomainError, InfeasibleStrategy
from .groups import all_submasks, members, popcount
from .instance import TABLE_CAP
from .schedule import Schedule

METRICS = ("SR", "WSR")
SELECTIONS = ("exact", "heuristic")
ACTIVATIONS = ("TF", "TD")
EXACT_CAP = 20
CLAMP_RTOL = 1e-9
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class FrameworkConfig:
    metric: str = "SR"
    selection: str = "exact"
    activation: str = "TF"
    delta: Optional[float] = None
    exact_cap: int = EXACT_CAP
    strict_keep: bool = False

    def __post_init__(self):
        if self.metric not in METRICS:
            raise DomainError(f"metric must be one of {METRICS}")
        if self.selection not in SELECTIONS:
            raise DomainError(f"selection must be one of {SELECTIONS}")
        if self.activation not in ACTIVATIONS:
            raise DomainError(f"activation must be one of {ACTIVATIONS}")
        if self.activation == "TD" and not (self.delta is not None and self.delta > 0):
            raise DomainError("TD activation needs a positive delta")

    @classmethod
    def from_name(cls, name: str, delta: Optional[float] = None, **kw) -> "FrameworkConfig":
        """Parse catalogue names such as ``tf-sr-exact`` or ``td-wsr-heur``."""
        try:
            act, metric, sel = name.lower().split("-")
        except ValueError:
            raise DomainError(f"not a framework algorithm name: {name!r}") from None
        acts = {"tf": "TF", "td": "TD"}
        sels = {"exact": "exact", "heur": "heuristic", "heuristic": "heuristic"}
        if act not in acts or metric.upper() not in METRICS or sel not in sels:
            raise DomainError(f"not a framework algorithm name: {name!r}")
        return cls(metric.upper(), sels[sel], acts[act], delta if act == "td" else None, **kw)

    @property
    def name(self) -> str:
        sel = "exact" if self.selection == "exact" else "heur"
        return f"{self.activation.lower()}-{self.metric.lower()}-{sel}"


@dataclass
class QueueState:
    residual: np.ndarray

    @property
    def active(self) -> int:
        return _active_mask(self.residual)


@dataclass
class FrameworkResult:
    schedule: Schedule
    trace: list = field(default_factory=list)  # (iteration, mask, duration, metric)

    @property
    def iterations(self) -> int:
        return len(self.trace)


def metric_value(metric: str, group: int, q, inst) -> float:
    r = inst.group_rates(group)
    if metric == "SR":
        return float(r.sum())
    if metric == "WSR":
        return float(np.dot(np.asarray(q, dtype=float), r))
    raise DomainError(f"unknown metric {metric!r}")


def _argmax_smallest(values: np.ndarray, masks: np.ndarray):
    """Best value, breaking near-ties toward the smallest mask (masks ascending)."""
    best = values.max()
    k = int(np.flatnonzero(values >= best - TIE_RTOL * abs(best))[0])
    return int(masks[k]), float(values[k])


class _Enumerator:
    """Exhaustive scan of the submasks of an active set, with per-set caching."""

    def __init__(self, inst, cap: int = EXACT_CAP):
        self.inst = inst
        self.cap = cap
        self._subs: dict = {}
        self._sr: Optional[np.ndarray] = None

    def submasks(self, active: int) -> np.ndarray:
        subs = self._subs.get(active)
        if subs is None:
            k = popcount(active)
            if k > self.cap:
                raise BudgetExceeded(f"exact selection over {k} active links exceeds the cap of {self.cap}")
            subs = all_submasks(active, cap=self.cap)
            if len(self._subs) > 64:
                self._subs.clear()
            self._subs[active] = subs
        return subs

    def best(self, weights: Optional[np.ndarray], active: int):
        """argmax over submasks of ``sum_i w_i r_iC`` (``w = None`` means unit weights)."""
        inst = self.inst
        subs = self.submasks(active)
        if inst.n <= TABLE_CAP:
            table = inst.rate_table
            if weights is None:
                if self._sr is None:
                    self._sr = table.sum(axis=1)
                values = self._sr[subs - 1]
            else:
                values = (table @ weights)[subs - 1]
            return _argmax_smallest(values, subs)
        best_mask, best_val = None, -np.inf
        step = 1 << 15
        for start in range(0, subs.size, step):
            chunk = subs[start:start + step]
            R = inst.oracle.rates(chunk)
            values = R.sum(axis=1) if weights is None else R @ weights
            m, v = _argmax_smallest(values, chunk)
            if best_mask is None or v > best_val + TIE_RTOL * abs(best_val):
                best_mask, best_val = m, v
        return best_mask, best_val


def _active_mask(q) -> int:
    m = 0
    for i in np.flatnonzero(np.asarray(q) > 0):
        m |= 1 << int(i)
    return m


def select_group_exact(metric: str, q, inst, cap: int = EXACT_CAP, _enum: Optional[_Enumerator] = None) -> int:
    """Best group over all nonempty subsets of the links with positive queue."""
    q = np.asarray(q, dtype=float)
    active = _active_mask(q)
    if not active:
        raise DomainError("no active links")
    enum = _enum or _Enumerator(inst, cap)
    return enum.best(None if metric == "SR" else q, active)[0]


def greedy_group(inst, active_idx, rank_key, weights, strict: bool = False, rotations: int = 3):
    """Greedy construction over ranked links, repeated for a few rotated rankings.

    Links are visited in descending ``rank_key`` order (ties by index),
    rotated to start at the 1st, 2nd, ... ranked link.  A visited link is kept
    when it does not lower ``sum_i w_i r_iC`` of the group built so far
    (``strict`` keeps it only on an increase).  Returns the best candidate
    and its metric; ties go to the smallest mask.
    """
    active_idx = np.asarray(active_idx, dtype=int)
    if active_idx.size == 0:
        raise DomainError("no active links")
    key = np.asarray(rank_key, dtype=float)[active_idx]
    ranked = active_idx[np.lexsort((active_idx, -key))].tolist()
    w = np.asarray(weights, dtype=float)

    def value(mask):
        return float(np.dot(w, inst.group_rates(mask)))

    best_mask, best_val = None, -np.inf
    for s in range(min(rotations, len(ranked))):
        order = ranked[s:] + ranked[:s]
        group = 1 << order[0]
        val = value(group)
        for link in order[1:]:
            trial = group | (1 << link)
            v = value(trial)
            keep = v > val + TIE_RTOL * abs(val) if strict else v >= val - TIE_RTOL * abs(val)
            if keep:
                group, val = trial, v
        if (best_mask is None or val > best_val + TIE_RTOL * abs(best_val)
                or (val >= best_val - TIE_RTOL * abs(best_val) and group < best_mask)):
            best_mask, best_val = group, val
    return best_mask, best_val


def select_group_heuristic(metric: str, q, inst, strict: bool = False) -> int:
    q = np.asarray(q, dtype=float)
    idx = np.flatnonzero(q > 0)
    weights = np.ones(inst.n) if metric == "SR" else q
    return greedy_group(inst, idx, q, weights, strict)[0]


def rate_floor(inst) -> float:
    """Smallest rate any member of a selected group can have (the ``r*`` of the iteration bound)."""
    if inst.oracle.variant == "binary":
        return 1.0
    return float(inst.group_rates(inst.grand).min())


def iteration_bound(inst, cfg: FrameworkConfig) -> float:
    n = inst.n
    if cfg.activation == "TF":
        return n
    return n * float(inst.demands.max()) / (cfg.delta * rate_floor(inst)) + n


def run_framework(inst, cfg: FrameworkConfig, max_iterations: int = 10_000_000) -> FrameworkResult:
    q = inst.demands.astype(float).copy()
    floor = CLAMP_RTOL * inst.demands
    sched = Schedule()
    trace = []
    enum = _Enumerator(inst, cfg.exact_cap) if cfg.selection == "exact" else None
    sr_cache: dict = {}
    it = 0
    while np.any(q > 0):
        if it >= max_iterations:
            raise RuntimeError("framework iteration limit reached")
        active = _active_mask(q)
        if cfg.selection == "exact":
            if cfg.metric == "SR":
                # the sum-rate ranking does not depend on q, only on the active set
                group = sr_cache.get(active)
                if group is None:
                    group = sr_cache[active] = enum.best(None, active)[0]
            else:
                group = enum.best(q, active)[0]
        else:
            group = select_group_heuristic(cfg.metric, q, inst, cfg.strict_keep)
        idx = np.array(members(group))
        r = inst.group_rates(group)[idx]
        if not np.any(r > 0):
            group, idx, r = _fallback_singleton(inst, q, cfg.metric)
        drain = r > 0
        times = np.full(idx.size, np.inf)
        times[drain] = q[idx[drain]] / r[drain]
        t_empty = float(times.min())
        t = t_empty if cfg.activation == "TF" else min(cfg.delta, t_empty)
        mval = metric_value(cfg.metric, group, q, inst)
        q[idx] -= r * t
        if t == t_empty:
            q[idx[times == t_empty]] = 0.0
        q[q < floor] = 0.0
        trace.append((it, group, t, mval))
        sched.append(group, t)
        it += 1
    return FrameworkResult(sched, trace)


def _fallback_singleton(inst, q, metric):
    best = None
    for i in np.flatnonzero(q > 0):
        ri = inst.group_rates(1 << int(i))[i]
        if ri <= 0:
            continue
        v = ri if metric == "SR" else q[i] * ri
        if best is None or v > best[0]:
            best = (v, int(i), ri)
    if best is None:
        raise InfeasibleStrategy("no remaining link can be served even alone")
    _, i, ri = best
    return 1 << i, np.array([i]), np.array([ri])


def trace_to_csv(trace, sink=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iter", "group_mask", "duration", "metric"])
    for it, mask, dur, metric in trace:
        w.writerow([it, mask, f"{dur:.12g}", f"{metric:.12g}"])
    text = buf.getvalue()
    if sink is not None:
        with open(sink, "w") as fh:
            fh.write(text)
    return text
