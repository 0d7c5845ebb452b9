"""Dense revised primal simplex and the restricted master problem.

The master problem is the scheduling LP over a chosen set of group columns::

    min  sum_k T_k
    s.t. sum_k r_ik T_k = d_i    for every link i
         T >= 0

Its optimal basis yields the dual prices ``pi`` used to price new columns.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

PIVOT_TOL = 1e-10
OPT_TOL = 1e-9
FEAS_RTOL = 1e-6
REFACTOR_EVERY = 64


@dataclass
class LpResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray
    y: np.ndarray
    basis: np.ndarray
    objective: float
    iterations: int


class _Basis:
    """Explicit basis inverse with product-form rank-one updates."""

    def __init__(self, A, b, basis):
        self.A = A
        self.b = b
        self.basis = np.array(basis, dtype=int)
        self.pivots = 0
        self.refactor()

    def refactor(self):
        self.Binv = np.linalg.inv(self.A[:, self.basis])
        self.x = self.Binv @ self.b
        self.x[np.abs(self.x) < 1e-13 * (1.0 + np.abs(self.b).max())] = 0.0
        self.pivots = 0

    def pivot(self, r: int, j: int, u: np.ndarray):
        theta = self.x[r] / u[r]
        self.x -= theta * u
        self.x[r] = theta
        row = self.Binv[r] / u[r]
        self.Binv -= np.outer(u, row)
        self.Binv[r] = row
        self.basis[r] = j
        self.pivots += 1
        if self.pivots >= REFACTOR_EVERY:
            self.refactor()
        else:
            np.maximum(self.x, 0.0, out=self.x, where=self.x > -1e-12)


def _iterate(state: _Basis, c, frozen, artificial, max_iter):
    """Run primal simplex pivots from a feasible basis; returns (status, iterations)."""
    A = state.A
    m = A.shape[0]
    degenerate = 0
    for it in range(max_iter):
        y = c[state.basis] @ state.Binv
        d = c - y @ A
        d[state.basis] = 0.0
        d[frozen] = 0.0
        if degenerate >= 5 * m:
            cand = np.flatnonzero(d < -OPT_TOL)
            if cand.size == 0:
                return "optimal", it
            j = int(cand[0])
        else:
            j = int(np.argmin(d))
            if d[j] >= -OPT_TOL:
                return "optimal", it
        u = state.Binv @ A[:, j]
        ratios = np.full(m, np.inf)
        pos = u > PIVOT_TOL
        ratios[pos] = np.maximum(state.x[pos], 0.0) / u[pos]
        # artificial variables parked in the basis must stay at zero
        ratios[artificial[state.basis] & (np.abs(u) > PIVOT_TOL)] = 0.0
        theta = ratios.min()
        if not np.isfinite(theta):
            return "unbounded", it
        ties = np.flatnonzero(ratios <= theta * (1 + 1e-12) + 1e-15)
        if degenerate >= 5 * m:
            r = int(ties[np.argmin(state.basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(u[ties]))])
        state.pivot(r, j, u)
        degenerate = degenerate + 1 if theta <= 1e-12 else 0
    raise RuntimeError("simplex iteration limit reached")


def simplex(A, b, c, basis: Optional[Sequence[int]] = None, max_iter: Optional[int] = None) -> LpResult:
    """Minimize ``c @ x`` subject to ``A @ x = b, x >= 0``.

    ``basis`` may name a primal feasible starting basis; without it an
    artificial phase 1 is run first.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000
    total = 0
    if basis is not None:
        state = _Basis(A, b, basis)
        if np.any(state.x < -FEAS_RTOL * (1.0 + np.abs(b).max())):
            raise DomainError("starting basis is not primal feasible")
        artificial = np.zeros(n, dtype=bool)
        Aw, cw = A, c
    else:
        sign = np.where(b < 0, -1.0, 1.0)
        Aw = np.hstack([A * sign[:, None], np.eye(m)])
        b = b * sign
        artificial = np.r_[np.zeros(n, dtype=bool), np.ones(m, dtype=bool)]
        c1 = artificial.astype(float)
        state = _Basis(Aw, b, np.arange(n, n + m))
        status, it = _iterate(state, c1, np.zeros(n + m, dtype=bool), np.zeros(n + m, dtype=bool),
                              max_iter)
        total += it
        state.refactor()
        infeas = float(state.x[artificial[state.basis]].sum())
        if infeas > 1e-7 * (1.0 + np.abs(b).max()):
            return LpResult("infeasible", np.zeros(n), np.zeros(m), state.basis.copy(), np.inf, total)
        # drive zero-level artificials out of the basis where possible
        for r in range(m):
            if not artificial[state.basis[r]]:
                continue
            alpha = state.Binv[r] @ Aw[:, :n]
            alpha[state.basis[state.basis < n]] = 0.0
            j = int(np.argmax(np.abs(alpha)))
            if abs(alpha[j]) > PIVOT_TOL:
                state.pivot(r, j, state.Binv @ Aw[:, j])
        cw = np.r_[c, np.zeros(m)]
        c = cw
    status, it = _iterate(state, cw, artificial, artificial, max_iter)
    total += it
    state.refactor()
    x = np.zeros(Aw.shape[1])
    x[state.basis] = np.maximum(state.x, 0.0)
    y = cw[state.basis] @ state.Binv
    if basis is None:
        y = y * sign
        x = x[:n]
    return LpResult(status, x, y, state.basis.copy(), float(c[:n] @ x[:n]), total)


@dataclass
class LpSolution:
    status: str
    times: np.ndarray
    duals: np.ndarray
    objective: float
    masks: list
    iterations: int = 0

    @property
    def support(self) -> list:
        """(mask, duration) pairs with positive duration, in column order."""
        return [(m, float(t)) for m, t in zip(self.masks, self.times) if t > 0]


class MasterProblem:
    """Restricted master LP over a growing list of group columns.

    Columns are appended with :meth:`add_column`; :meth:`solve` re-optimizes
    from the previous optimal basis and its factorization, which stay primal
    feasible when columns are only added.  When ``oracle`` is given and
    ``seed_singletons`` is set, the N single-link columns are added up front
    and form the starting basis; otherwise an artificial phase 1 is used.
    """

    def __init__(self, rhs, columns=(), oracle=None, seed_singletons: bool = True):
        self.rhs = np.asarray(rhs, dtype=float)
        if self.rhs.ndim != 1 or np.any(self.rhs <= 0):
            raise DomainError("master right-hand side must be a strictly positive vector")
        self.n = self.rhs.size
        self.masks: list[int] = []
        self._A = np.zeros((self.n, max(2 * self.n, 16)))
        self._index: dict[int, int] = {}
        self._state: Optional[_Basis] = None
        if oracle is not None and seed_singletons:
            for i in range(self.n):
                self.add_column(1 << i, oracle.group_rates(1 << i))
        for mask, col in columns:
            self.add_column(mask, col)

    def __len__(self):
        return len(self.masks)

    def __contains__(self, mask):
        return int(mask) in self._index

    def add_column(self, mask: int, column) -> bool:
        """Append a group column; returns False if the group is already present."""
        mask = int(mask)
        if mask in self._index:
            return False
        col = np.asarray(column, dtype=float)
        if col.shape != (self.n,):
            raise DomainError("rate column has the wrong length")
        for i in np.flatnonzero(col):
            if not (mask >> int(i)) & 1:
                raise DomainError(f"column of group {mask:#x} gives a rate to non-member {i}")
        if np.any(col < 0):
            raise DomainError("rates must be nonnegative")
        k = len(self.masks)
        if k == self._A.shape[1]:
            grown = np.zeros((self.n, 2 * k))
            grown[:, :k] = self._A
            self._A = grown
        self._A[:, k] = col
        self._index[mask] = k
        self.masks.append(mask)
        return True

    @property
    def matrix(self) -> np.ndarray:
        return self._A[:, :len(self.masks)]

    def _singleton_basis(self):
        basis = []
        for i in range(self.n):
            k = self._index.get(1 << i)
            if k is None or self._A[i, k] <= 0:
                return None
            basis.append(k)
        return np.array(basis)

    def solve(self) -> LpSolution:
        A = self.matrix
        ncol = A.shape[1]
        c = np.ones(ncol)
        if self._state is None:
            basis = self._singleton_basis()
            if basis is None:
                res = simplex(A, self.rhs, c)
                times = res.x.copy()
                times[times < 1e-12] = 0.0
                objective = float(times.sum()) if res.status == "optimal" else np.inf
                return LpSolution(res.status, times, res.y, objective, list(self.masks),
                                  res.iterations)
            self._state = _Basis(A, self.rhs, basis)
        state = self._state
        state.A = A
        none = np.zeros(ncol, dtype=bool)
        status, iterations = _iterate(state, c, none, none, 50 * (self.n + ncol) + 1000)
        times = np.zeros(ncol)
        times[state.basis] = np.maximum(state.x, 0.0)
        times[times < 1e-12] = 0.0
        duals = c[state.basis] @ state.Binv
        return LpSolution(status, times, duals, float(times.sum()), list(self.masks), iterations)


def solve_master(mp: MasterProblem) -> LpSolution:
    return mp.solve()


def reduced_cost(duals, group: int, oracle) -> float:
    """``1 - sum_i r_iC pi_i`` for the column of ``group``."""
    return 1.0 - float(np.dot(oracle.group_rates(group), duals))
