"""Exact solvers: full LP, column generation, and the cardinality-rate special cases."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, DomainError, InfeasibleStrategy
from .framework import EXACT_CAP, TIE_RTOL, _Enumerator, greedy_group
from .groups import all_submasks, full_mask
from .lp_core import MasterProblem, simplex
from .schedule import Schedule

FULL_LP_CAP = 16
PRICING_TOL = 1e-9


@dataclass
class CgReport:
    schedule: Schedule
    iterations: int
    columns_generated: int
    max_violation: float
    optimal: bool
    duals: np.ndarray
    objectives: list = field(default_factory=list)
    dual_bounds: list = field(default_factory=list)

    @property
    def length(self) -> float:
        return self.schedule.total

    def to_json_dict(self, inst=None) -> dict:
        return {"schedule": self.schedule.to_json_dict(inst), "iterations": self.iterations,
                "columns_generated": self.columns_generated,
                "max_violation": self.max_violation, "optimal": self.optimal}


def _require_servable(inst):
    r = inst.singleton_rates()
    bad = np.flatnonzero(r <= 0)
    if bad.size:
        raise InfeasibleStrategy(f"link {int(bad[0])} cannot be served by any group")


def solve_full_lp(inst, cap: int = FULL_LP_CAP) -> Schedule:
    """Optimal schedule by solving the LP over every group at once."""
    if inst.n > cap:
        raise BudgetExceeded(f"the full LP over {inst.n} links exceeds the cap of {cap}")
    _require_servable(inst)
    masks = all_submasks(full_mask(inst.n))
    R = inst.rates(masks)
    keep = R.any(axis=1)
    masks, A = masks[keep], R[keep].T
    pos = {int(m): k for k, m in enumerate(masks)}
    basis = [pos[1 << i] for i in range(inst.n)]
    res = simplex(A, inst.demands, np.ones(A.shape[1]), basis=basis)
    if res.status != "optimal":
        raise RuntimeError(f"full LP ended with status {res.status}")
    return Schedule([(int(masks[k]), float(res.x[k])) for k in sorted(res.basis) if res.x[k] > 0])


def price_exact(duals, active: int, inst, cap: int = EXACT_CAP, _enum=None):
    """Group maximizing ``sum_i r_iC pi_i`` over subsets of ``active``; returns (group, max - 1)."""
    enum = _enum or _Enumerator(inst, cap)
    group, value = enum.best(np.asarray(duals, dtype=float), active)
    return group, value - 1.0


def price_heuristic(duals, active: int, inst):
    """Greedy pricing: links ranked by dual price, metric ``sum_i pi_i r_iC``."""
    pi = np.asarray(duals, dtype=float)
    idx = [i for i in range(inst.n) if (active >> i) & 1]
    group, value = greedy_group(inst, idx, pi, pi)
    return group, value - 1.0


def _cardinality_pricer(r):
    """Closed-form pricing: for each size m the best group is the m largest duals."""
    r = np.asarray(r, dtype=float)

    def price(duals, active, inst):
        pi = np.asarray(duals, dtype=float)
        idx = np.array([i for i in range(inst.n) if (active >> i) & 1])
        order = idx[np.lexsort((idx, -pi[idx]))]
        vals = r[:order.size] * np.cumsum(pi[order])
        best = vals.max()
        m = int(np.flatnonzero(vals >= best - TIE_RTOL * abs(best))[0]) + 1
        group = 0
        for i in order[:m]:
            group |= 1 << int(i)
        return [(group, float(vals[m - 1]) - 1.0)]

    return price


def price_cardinality(duals, active: int, inst):
    """Closed-form pricing under size-dependent rates; returns (group, violation)."""
    _require_cardinality(inst)
    return _cardinality_pricer(inst.oracle.r)(duals, active, inst)[0]


def _single(pricer):
    return lambda pi, active, inst: [pricer(pi, active, inst)]


def _column_generation(inst, pricer, certified: bool, tol: float, max_iter: int) -> CgReport:
    """``pricer`` returns candidate (group, violation) pairs, most violated first."""
    _require_servable(inst)
    mp = MasterProblem(inst.demands, oracle=inst)
    active = full_mask(inst.n)
    objectives, bounds = [], []
    generated = 0
    for it in range(1, max_iter + 1):
        sol = mp.solve()
        if sol.status != "optimal":
            raise RuntimeError(f"restricted master ended with status {sol.status}")
        objectives.append(sol.objective)
        bounds.append(float(inst.demands @ sol.duals))
        candidates = pricer(sol.duals, active, inst)
        violation = candidates[0][1]
        if violation <= tol:
            break
        added = 0
        for group, v in candidates:
            if v > tol and mp.add_column(group, inst.group_rates(group)):
                added += 1
        if not added:
            # priced column already present: numerical stall
            certified = False
            break
        generated += added
    else:
        certified = False
    entries = [(m, t) for m, t in sol.support]
    return CgReport(Schedule(entries), it, generated, float(violation),
                    certified and violation <= tol, sol.duals, objectives, bounds)


def solve_cg(inst, pricing: str = "exact", tol: float = PRICING_TOL, cap: int = EXACT_CAP,
             max_iter: int = 100_000) -> CgReport:
    """Column generation seeded with the single-link groups.

    With ``pricing="exact"`` the pricing step searches every group and the
    result is a certified optimum; ``"heuristic"`` uses the greedy pricer and
    stops when it finds nothing, without a certificate.
    """
    if pricing == "exact":
        if inst.n > cap:
            raise BudgetExceeded(f"exact pricing over {inst.n} links exceeds the cap of {cap}")
        enum = _Enumerator(inst, cap)
        return _column_generation(inst, _single(lambda pi, a, x: price_exact(pi, a, x, cap, enum)),
                                  True, tol, max_iter)
    if pricing == "heuristic":
        return _column_generation(inst, _single(price_heuristic), False, tol, max_iter)
    raise DomainError(f"unknown pricing mode {pricing!r}")


def _require_cardinality(inst):
    if inst.oracle.variant != "cardinality":
        raise DomainError("this solver needs cardinality-based rates")


def cardinality_cg(inst, tol: float = PRICING_TOL, max_iter: int = 1_000_000) -> CgReport:
    """Column generation for size-dependent rates with closed-form pricing.

    For each size m the best group holds the m links with the largest dual
    prices, so each pricing step costs a sort instead of an enumeration.
    """
    _require_cardinality(inst)
    return _column_generation(inst, _cardinality_pricer(inst.oracle.r), True, tol, max_iter)


BLOCK_RTOL = 1e-7


def reduced_cardinality_lp(demands, r):
    """Dual LP restricted to nested constraints and sorted prices; returns (pi, bound).

    ``max d.pi`` s.t. ``r_m (pi_(N-m+1) + ... + pi_N) <= 1`` for every size m
    and ``0 <= pi_1 <= ... <= pi_N``, with demands in ascending order.
    """
    d = np.asarray(demands, dtype=float)
    r = np.asarray(r, dtype=float)
    n = d.size
    # columns: pi (n), size slacks (n), order slacks (n - 1)
    A = np.zeros((2 * n - 1, 3 * n - 1))
    for m in range(1, n + 1):
        A[m - 1, n - m:n] = r[m - 1]
        A[m - 1, n + m - 1] = 1.0
    k = np.arange(n - 1)
    A[n + k, k] = 1.0
    A[n + k, k + 1] = -1.0
    A[n + k, 2 * n + k] = 1.0
    b = np.r_[np.ones(n), np.zeros(n - 1)]
    c = np.r_[-d, np.zeros(2 * n - 1)]
    res = simplex(A, b, c, basis=np.arange(n, 3 * n - 1))
    if res.status != "optimal":
        raise RuntimeError(f"reduced LP ended with status {res.status}")
    return res.x[:n].copy(), -res.objective


def _tie_blocks(pi, rtol: float = BLOCK_RTOL):
    """Maximal runs [lo, hi) of (nearly) equal consecutive prices."""
    scale = float(np.abs(pi).max()) or 1.0
    cut = np.flatnonzero(np.diff(pi) > rtol * scale) + 1
    edges = np.r_[0, cut, pi.size]
    return list(zip(edges[:-1].tolist(), edges[1:].tolist()))


def _water_fill(e, cap, total):
    """``x = clip(e - lam, 0, cap)`` with ``sum(x) = total``: serve the largest residuals first."""
    lo, hi = float(e.min()) - cap, float(e.max())
    for _ in range(200):
        lam = 0.5 * (lo + hi)
        if np.clip(e - lam, 0.0, cap).sum() > total:
            lo = lam
        else:
            hi = lam
    x = np.clip(e - 0.5 * (lo + hi), 0.0, cap)
    if x.sum() > 0:
        x *= total / x.sum()
    return x


def _wrap_around(links, times, length, k):
    """McNaughton's rule: lay ``times`` end to end on k rows of ``length``; returns (subset, duration) slices."""
    times = np.minimum(times, length)
    ends = np.cumsum(times)
    starts = ends - times
    cuts = np.unique(np.r_[0.0, np.mod(ends[:-1], length), length])
    cuts = cuts[(cuts >= 0) & (cuts <= length)]
    out = []
    for t0, t1 in zip(cuts[:-1], cuts[1:]):
        if t1 - t0 <= 1e-13 * length:
            continue
        mid = 0.5 * (t0 + t1)
        subset = []
        for row in range(k):
            pos = row * length + mid
            j = int(np.searchsorted(ends, pos, side="right"))
            if j < len(links) and starts[j] <= pos:
                subset.append(links[j])
        out.append((subset, t1 - t0))
    return out


def _cardinality_primal(d, r, pi) -> Optional[Schedule]:
    """Optimal schedule built from groups tight at the sorted prices ``pi``.

    Size m uses the links with the m largest prices; inside the tie block at
    the cut any k_m members may be picked, so service there is a sum of
    scaled hypersimplices.  A small LP fixes the time per size, water-filling
    splits each block's service among sizes, and the wrap-around rule turns
    each split into explicit groups.
    """
    n = d.size
    blocks = _tie_blocks(pi)
    where = np.empty(n, dtype=int)
    for b, (lo, hi) in enumerate(blocks):
        where[lo:hi] = b
    # size m -> (block of the cut, k_m); k_m == 0 means the cut falls on a block edge
    sizes = []
    for m in range(1, n + 1):
        lo, hi = blocks[where[n - m]]
        k = hi - (n - m)
        sizes.append((where[n - m], 0 if n - m == lo else k))
    # coverage rows: for block b and s = 1..|b|, the top-s demands of b
    rows, rhs, eq = [], [], []
    for b, (lo, hi) in enumerate(blocks):
        dd = d[lo:hi][::-1]
        for s_ in range(1, hi - lo + 1):
            row = np.zeros(n)
            for m in range(1, n + 1):
                bm, k = sizes[m - 1]
                if n - m <= lo and not (bm == b and k):
                    row[m - 1] = s_ * r[m - 1]
                elif bm == b and k:
                    row[m - 1] = min(s_, k) * r[m - 1]
            rows.append(row)
            rhs.append(dd[:s_].sum())
            eq.append(s_ == hi - lo)
    rows = np.array(rows)
    ineq = ~np.array(eq)
    A = np.hstack([rows, -np.eye(len(rows))[:, ineq]])
    c = np.r_[np.ones(n), np.zeros(int(ineq.sum()))]
    res = simplex(A, np.array(rhs), c)
    if res.status != "optimal":
        return None
    T = res.x[:n]
    sched = Schedule()
    partial: dict = {}
    for m in range(1, n + 1):
        if T[m - 1] <= 0:
            continue
        b, k = sizes[m - 1]
        if k:
            partial.setdefault(b, []).append(m)
    for b, (lo, hi) in enumerate(blocks):
        uniform = sum(r[m - 1] * T[m - 1] for m in range(1, n + 1)
                      if n - m <= lo and not (sizes[m - 1][0] == b and sizes[m - 1][1]))
        e = np.maximum(d[lo:hi] - uniform, 0.0)
        for m in sorted(partial.get(b, ()), key=lambda m: -r[m - 1] * T[m - 1]):
            k = sizes[m - 1][1]
            cap = r[m - 1] * T[m - 1]
            x = _water_fill(e, cap, k * cap)
            e = np.maximum(e - x, 0.0)
            upper = full_mask(n) & ~full_mask(hi)
            for subset, dur in _wrap_around(list(range(lo, hi)), x / r[m - 1], T[m - 1], k):
                group = upper
                for i in subset:
                    group |= 1 << i
                sched.append(group, float(dur), merge=False)
    for m in range(1, n + 1):
        if T[m - 1] > 0 and not sizes[m - 1][1]:
            sched.append(full_mask(n) & ~full_mask(n - m), float(T[m - 1]), merge=False)
    return sched


def solve_cardinality(inst, tol: float = PRICING_TOL) -> Schedule:
    """Global optimum for size-dependent rates in polynomial time.

    The reduced dual gives optimal prices and the optimal length; a schedule
    of that length is then assembled from groups tight at those prices.  The
    result is accepted only when closed-form pricing at the prices finds no
    violated group and the length matches the dual bound; otherwise column
    generation takes over.
    """
    _require_cardinality(inst)
    _require_servable(inst)
    r = np.asarray(inst.oracle.r, dtype=float)[:inst.n]
    pi, bound = reduced_cardinality_lp(inst.demands, r)
    (_, violation), = _cardinality_pricer(r)(pi, full_mask(inst.n), inst)
    sched = _cardinality_primal(inst.demands, r, pi) if violation <= tol else None
    if (sched is not None and sched.is_feasible(inst, 1e-9)
            and abs(sched.total - bound) <= 1e-9 * bound):
        return sched
    return cardinality_cg(inst, tol).schedule


def best_group_size(r) -> int:
    """Size maximizing the sum-rate ``m r_m`` (smallest size on ties)."""
    r = np.asarray(r, dtype=float)
    sr = np.arange(1, r.size + 1) * r
    best = sr.max()
    return int(np.flatnonzero(sr >= best - TIE_RTOL * best)[0]) + 1


def solve_uniform_cardinality(inst) -> Schedule:
    """Closed form for equal demands: N cyclic windows of the best size, equal durations."""
    _require_cardinality(inst)
    d = inst.demands
    if np.any(np.abs(d - d[0]) > 1e-12 * d[0]):
        raise DomainError("closed form needs all demands equal")
    n = inst.n
    r = inst.oracle.r
    m = best_group_size(r)
    duration = float(d[0] / (m * r[m - 1]))
    if m == n:
        return Schedule([(full_mask(n), n * duration)])
    sched = Schedule()
    for i in range(n):
        group = 0
        for k in range(m):
            group |= 1 << ((i + k) % n)
        sched.append(group, duration, merge=False)
    return sched
