"""Base strategies (one-at-a-time and all-at-once) and their optimality certificates.

All link indices here are internal positions (ascending demand order).
Enumerating checkers scan groups in ascending mask order and report the
lowest violating mask as witness.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BudgetExceeded, DomainError, InfeasibleStrategy
from .groups import full_mask, members, membership, submask_blocks
from .lp_core import simplex
from .schedule import Schedule

CHECK_CAP = 20
TOL = 1e-12
DRAIN_RTOL = 1e-9


@dataclass
class CertificateReport:
    condition: str
    holds: bool
    strict: bool = False
    witness: object = None
    details: dict = field(default_factory=dict)
    skipped: bool = False

    def to_dict(self) -> dict:
        out = asdict(self)
        if isinstance(self.witness, np.ndarray):
            out["witness"] = self.witness.tolist()
        return out


def schedule_h1(inst) -> Schedule:
    """Serve the links one at a time, each until its queue is empty."""
    r = inst.singleton_rates()
    bad = np.flatnonzero(r <= 0)
    if bad.size:
        raise InfeasibleStrategy(f"link {int(bad[0])} has zero rate even when alone")
    return Schedule([(1 << i, float(inst.demands[i] / r[i])) for i in range(inst.n)])


def schedule_hn(inst) -> Schedule:
    """Activate every nonempty queue together until the next queue empties."""
    q = inst.demands.astype(float).copy()
    active = full_mask(inst.n)
    sched = Schedule()
    while active:
        idx = members(active)
        r = inst.group_rates(active)[idx]
        if np.any(r <= 0):
            k = idx[int(np.argmin(r))]
            raise InfeasibleStrategy(f"link {k} has zero rate in the group of all remaining links")
        t = float(np.min(q[idx] / r))
        q[idx] -= r * t
        emptied = [k for k in idx if q[k] <= DRAIN_RTOL * inst.demands[k]]
        if len(emptied) > 1:
            sched.degenerate = True
        for k in emptied:
            q[k] = 0.0
            active &= ~(1 << k)
        sched.append(mask_of_list(idx), t, merge=False)
    return sched


def mask_of_list(idx) -> int:
    m = 0
    for k in idx:
        m |= 1 << int(k)
    return m


def _blocks(inst, cap=CHECK_CAP):
    if inst.n > cap:
        raise BudgetExceeded(f"exhaustive check over {inst.n} links exceeds the cap of {cap}")
    for masks in submask_blocks(full_mask(inst.n)):
        yield masks, inst.rates(masks)


def check_condition1(inst, cap: int = CHECK_CAP) -> CertificateReport:
    """Sum over members of r_iC / r_ii is at most one for every multi-link group."""
    r1 = inst.singleton_rates()
    if np.any(r1 <= 0):
        raise DomainError("condition 1 needs positive single-link rates")
    worst = -np.inf
    witness = None
    for masks, R in _blocks(inst, cap):
        multi = membership(masks, inst.n).sum(axis=1) >= 2
        if not multi.any():
            continue
        s = (R[multi] / r1).sum(axis=1)
        worst = max(worst, float(s.max()))
        if witness is None:
            bad = np.flatnonzero(s > 1.0 + TOL)
            if bad.size:
                witness = int(masks[multi][bad[0]])
    holds = witness is None
    return CertificateReport("condition1", holds, holds and worst < 1.0 - TOL, witness,
                             {"max_ratio_sum": None if worst == -np.inf else worst})


def check_condition2(inst, i: int, j: int) -> CertificateReport:
    """Pair test that lets every group containing both i and j be discarded."""
    if i == j:
        raise DomainError("condition 2 needs two distinct links")
    grand = full_mask(inst.n)
    pair = (1 << i) | (1 << j)
    den_i = inst.rate(i, grand & ~(1 << j))
    den_j = inst.rate(j, grand & ~(1 << i))
    if den_i <= 0 or den_j <= 0:
        raise DomainError("condition 2 is undefined: a reference rate is zero")
    lhs = inst.rate(i, pair) / den_i + inst.rate(j, pair) / den_j
    holds = lhs <= 1.0 + TOL
    return CertificateReport("condition2", holds, lhs < 1.0 - TOL, None if holds else (i, j),
                             {"lhs": lhs})


def check_condition3(inst, group: int, tol: float = 1e-9) -> CertificateReport:
    """Is the rate vector of ``group`` beaten in every entry by a time-share of its subgroups?

    Solves ``max t`` s.t. ``sum_k lam_k r_(C - k) >= r_C + t``, ``lam`` in the
    simplex; the group is dominated (condition fails) iff ``t > tol``.
    """
    idx = members(group)
    n = len(idx)
    if n < 2:
        raise DomainError("condition 3 needs a group of at least two links")
    rc = inst.group_rates(group)[idx]
    sub = np.array([inst.group_rates(group & ~(1 << k))[idx] for k in idx])  # row k: drop link k
    # variables: lam (n), t+ , t-, surplus (n)
    A = np.zeros((n + 1, 2 * n + 2))
    A[:n, :n] = sub.T
    A[:n, n] = -1.0
    A[:n, n + 1] = 1.0
    A[:n, n + 2:] = -np.eye(n)
    A[n, :n] = 1.0
    b = np.r_[rc, 1.0]
    c = np.zeros(2 * n + 2)
    c[n], c[n + 1] = -1.0, 1.0
    res = simplex(A, b, c)
    t = -res.objective
    scale = max(1.0, float(np.abs(sub).max()), float(np.abs(rc).max()))
    dominated = t > tol * scale
    return CertificateReport("condition3", not dominated, t < -tol * scale,
                             res.x[:n].copy() if dominated else None,
                             {"margin": t, "members": idx})


def size_rate_bounds(inst, cap: int = CHECK_CAP):
    """Exact per-size extreme rates ``(rmin, rmax, excluded)`` by enumeration.

    ``rmin[m-1]`` only considers groups of size m whose members all have
    positive rate; it is ``nan`` when no such group exists.  ``excluded``
    counts the zero-rate groups left out of ``rmin``.
    """
    n = inst.n
    rmin = np.full(n, np.inf)
    rmax = np.zeros(n)
    excluded = 0
    for masks, R in _blocks(inst, cap):
        B = membership(masks, n)
        size = B.sum(axis=1)
        memb_min = np.where(B, R, np.inf).min(axis=1)
        memb_max = np.where(B, R, -np.inf).max(axis=1)
        positive = memb_min > 0
        excluded += int((~positive).sum())
        for m in np.unique(size):
            sel = size == m
            rmax[m - 1] = max(rmax[m - 1], float(memb_max[sel].max()))
            ok = sel & positive
            if ok.any():
                rmin[m - 1] = min(rmin[m - 1], float(memb_min[ok].min()))
    rmin[~np.isfinite(rmin)] = np.nan
    return rmin, rmax, excluded


def check_condition4(inst, rmin=None, rmax=None, cap: int = CHECK_CAP) -> CertificateReport:
    """Chain ``1/rmin_m + 1/rmin_(m-2) <= 2/rmax_(m-1)`` for m = 2..N, with ``1/rmin_0 = 0``.

    Without supplied bounds the exact extremes are found by enumeration.
    """
    details = {}
    if rmin is None and rmax is None:
        rmin, rmax, excluded = size_rate_bounds(inst, cap)
        details.update(mode="exact", excluded_zero_rate_groups=excluded)
    else:
        rmin = np.asarray(rmin, dtype=float)
        rmax = np.asarray(rmax, dtype=float)
        if rmin.shape != (inst.n,) or rmax.shape != (inst.n,):
            raise DomainError("bounds must have one entry per group size")
        if np.any(rmin > rmax) or np.any(rmin <= 0):
            raise DomainError("invalid bounds: need 0 < rmin <= rmax")
        details.update(mode="supplied")
    inv_min = np.where(np.isnan(rmin), np.inf, 1.0 / np.where(np.isnan(rmin), 1.0, rmin))
    holds, strict, witness = True, True, None
    slack = []
    for m in range(2, inst.n + 1):
        lhs = inv_min[m - 1] + (inv_min[m - 3] if m > 2 else 0.0)
        rhs = 2.0 / rmax[m - 2]
        slack.append(rhs - lhs)
        if lhs > rhs * (1 + TOL):
            holds = False
            if witness is None:
                witness = m
        if not lhs < rhs * (1 - TOL):
            strict = False
    details.update(rmin=rmin.tolist(), rmax=rmax.tolist(), slack=slack)
    return CertificateReport("condition4", holds, holds and strict, witness, details)


@dataclass
class CardinalityReport:
    h1_optimal: bool
    dominated_sizes: dict  # size m -> smaller sizes m' with m r_m <= m' r_m'
    sum_rate_monotone: dict  # size m -> (m-1) r_(m-1) <= m r_m
    chain: dict  # size m -> 1/r_m + 1/r_(m-2) <= 2/r_(m-1)

    @property
    def chain_holds(self) -> bool:
        return all(self.chain.values())

    @property
    def monotone(self) -> bool:
        return all(self.sum_rate_monotone.values())

    def to_dict(self) -> dict:
        return {"h1_optimal": self.h1_optimal,
                "dominated_sizes": {str(k): v for k, v in self.dominated_sizes.items()},
                "sum_rate_monotone": {str(k): v for k, v in self.sum_rate_monotone.items()},
                "chain": {str(k): v for k, v in self.chain.items()},
                "chain_holds": self.chain_holds}


def check_cardinality_corollaries(r) -> CardinalityReport:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(np.diff(r) > 0):
        raise DomainError("cardinality rates must be positive and nonincreasing")
    n = r.size
    sr = np.arange(1, n + 1) * r
    h1 = bool(np.all(sr[1:] <= r[0] * (1 + TOL)))
    dominated = {m: [mp for mp in range(1, m) if sr[m - 1] <= sr[mp - 1] * (1 + TOL)]
                 for m in range(2, n + 1)}
    monotone = {m: bool(sr[m - 2] <= sr[m - 1] * (1 + TOL)) for m in range(2, n + 1)}
    chain = {}
    for m in range(2, n + 1):
        lhs = 1.0 / r[m - 1] + (1.0 / r[m - 3] if m > 2 else 0.0)
        chain[m] = bool(lhs <= 2.0 / r[m - 2] * (1 + TOL))
    return CardinalityReport(h1, dominated, monotone, chain)
