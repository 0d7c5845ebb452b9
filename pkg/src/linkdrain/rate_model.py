"""Channel model, SINR and the rate oracles ``F(i, C)``.

Every oracle exposes the same two entry points:

``rate(i, group)``
    scalar rate of link ``i`` when ``group`` (a bitmask) is active.
``rates(masks)``
    vectorized form; returns a ``(len(masks), n)`` array whose row ``k`` is
    the rate column of group ``masks[k]``.  Entries for non-members are 0.

Rates are evaluated on demand; nothing is tabulated here.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError
from .groups import check_group, members, membership, popcount

VARIANTS = ("binary", "shannon", "bpsk", "cardinality")


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Gains ``G[i, j]`` from the transmitter of link i to the receiver of link j.

    ``P`` holds transmit powers and ``sigma2`` the noise variance (Watts).
    """

    G: np.ndarray
    P: np.ndarray
    sigma2: float

    def __post_init__(self):
        G = np.array(self.G, dtype=float)
        P = np.array(self.P, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise DomainError(f"channel matrix must be square, got shape {G.shape}")
        if P.shape != (G.shape[0],):
            raise DomainError("power vector length does not match the channel matrix")
        if np.any(G < 0) or not np.all(np.isfinite(G)):
            raise DomainError("channel gains must be finite and nonnegative")
        if np.any(np.diag(G) <= 0):
            raise DomainError("direct gains G[i, i] must be positive")
        if np.any(P <= 0):
            raise DomainError("transmit powers must be positive")
        if not self.sigma2 > 0:
            raise DomainError("noise variance must be positive")
        G.flags.writeable = False
        P.flags.writeable = False
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def n(self) -> int:
        return self.G.shape[0]

    def permuted(self, order) -> "ChannelMatrix":
        order = np.asarray(order)
        return ChannelMatrix(self.G[np.ix_(order, order)], self.P[order], self.sigma2)

    def __eq__(self, other):
        if not isinstance(other, ChannelMatrix):
            return NotImplemented
        return (np.array_equal(self.G, other.G) and np.array_equal(self.P, other.P)
                and self.sigma2 == other.sigma2)

    def to_dict(self) -> dict:
        return {"G": self.G.tolist(), "P": self.P.tolist(), "sigma2": self.sigma2}

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelMatrix":
        return cls(np.asarray(data["G"], dtype=float), np.asarray(data["P"], dtype=float),
                   float(data["sigma2"]))


def sinr(i: int, group: int, ch: ChannelMatrix) -> float:
    """SINR of link ``i`` while ``group`` is active."""
    group = check_group(group, ch.n)
    if not (group >> i) & 1:
        raise DomainError(f"link {i} is not a member of group {group:#x}")
    interference = 0.0
    for k in members(group):
        if k != i:
            interference += ch.P[k] * ch.G[k, i]
    return ch.P[i] * ch.G[i, i] / (interference + ch.sigma2)


def sinr_matrix(masks: np.ndarray, ch: ChannelMatrix) -> np.ndarray:
    """SINR of every link for every group in ``masks`` (non-members included)."""
    B = membership(masks, ch.n).astype(float)
    cross = ch.P[:, None] * ch.G
    np.fill_diagonal(cross, 0.0)
    signal = ch.P * np.diag(ch.G)
    return signal / (B @ cross + ch.sigma2)


def q_function(x: float) -> float:
    """Gaussian tail probability ``P(X > x)`` for a standard normal ``X``."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


@functools.lru_cache(maxsize=64)
def q_inverse(z: float, rtol: float = 1e-12) -> float:
    """Invert the Gaussian tail by bisection; ``z`` must lie in (0, 1)."""
    if not 0.0 < z < 1.0:
        raise DomainError(f"tail probability must lie in (0, 1), got {z}")
    lo, hi = -40.0, 40.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if q_function(mid) > z:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


class RateOracle:
    """Common interface of the rate functions."""

    variant: str = ""
    n: int

    def rates(self, masks) -> np.ndarray:
        raise NotImplementedError

    def group_rates(self, group: int) -> np.ndarray:
        """Rate column (length n) of a single group."""
        group = check_group(group, self.n)
        return self.rates(np.array([group], dtype=np.int64))[0]

    def rate(self, i: int, group: int) -> float:
        group = check_group(group, self.n)
        if not (group >> i) & 1:
            return 0.0
        return float(self.group_rates(group)[i])

    def permuted(self, order) -> "RateOracle":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return self.to_dict() == other.to_dict()


class _ChannelOracle(RateOracle):
    def __init__(self, channel: ChannelMatrix):
        self.channel = channel
        self.n = channel.n

    def _check_masks(self, masks) -> np.ndarray:
        if self.n > 63:
            raise DomainError("vectorized channel rates support at most 63 links")
        return np.asarray(masks, dtype=np.int64)


class ShannonOracle(_ChannelOracle):
    """``log2(1 + SINR)`` per unit bandwidth."""

    variant = "shannon"

    def rates(self, masks) -> np.ndarray:
        masks = self._check_masks(masks)
        B = membership(masks, self.n)
        return np.where(B, np.log2(1.0 + sinr_matrix(masks, self.channel)), 0.0)

    def permuted(self, order):
        return ShannonOracle(self.channel.permuted(order))

    def to_dict(self):
        return {"variant": self.variant, "channel": self.channel.to_dict()}


class BinaryOracle(_ChannelOracle):
    """Unit rate for every member of a group whose members all meet the SINR threshold."""

    variant = "binary"

    def __init__(self, channel: ChannelMatrix, threshold: float):
        super().__init__(channel)
        if not threshold > 0:
            raise DomainError("SINR threshold must be positive")
        self.threshold = float(threshold)

    def rates(self, masks) -> np.ndarray:
        masks = self._check_masks(masks)
        B = membership(masks, self.n)
        ok = np.where(B, sinr_matrix(masks, self.channel) >= self.threshold, True).all(axis=1)
        return (B & ok[:, None]).astype(float)

    def permuted(self, order):
        return BinaryOracle(self.channel.permuted(order), self.threshold)

    def to_dict(self):
        return {"variant": self.variant, "threshold": self.threshold,
                "channel": self.channel.to_dict()}


class BpskOracle(_ChannelOracle):
    """Uncoded BPSK with symbol-rate control at a fixed bit error rate, capped at ``bandwidth``.

    The rate is ``min(2 / Qinv(z)^2 * SINR, B)``.
    """

    variant = "bpsk"

    def __init__(self, channel: ChannelMatrix, error_rate: float = 1e-6, bandwidth: float = 1.0):
        super().__init__(channel)
        if not bandwidth > 0:
            raise DomainError("bandwidth must be positive")
        self.error_rate = float(error_rate)
        self.bandwidth = float(bandwidth)
        self.slope = 2.0 / q_inverse(self.error_rate) ** 2

    def rates(self, masks) -> np.ndarray:
        masks = self._check_masks(masks)
        B = membership(masks, self.n)
        r = np.minimum(self.slope * sinr_matrix(masks, self.channel), self.bandwidth)
        return np.where(B, r, 0.0)

    def permuted(self, order):
        return BpskOracle(self.channel.permuted(order), self.error_rate, self.bandwidth)

    def to_dict(self):
        return {"variant": self.variant, "z": self.error_rate, "B": self.bandwidth,
                "channel": self.channel.to_dict()}


class CardinalityOracle(RateOracle):
    """Every member of a size-m group is served at ``r[m-1]``."""

    variant = "cardinality"

    def __init__(self, r, check: bool = True):
        r = np.array(r, dtype=float)
        if r.ndim != 1 or r.size == 0:
            raise DomainError("cardinality rate vector must be a nonempty 1-d vector")
        if np.any(r <= 0) or not np.all(np.isfinite(r)):
            raise DomainError("cardinality rates must be finite and positive")
        if check and np.any(np.diff(r) > 0):
            raise DomainError("cardinality rates must be nonincreasing in group size")
        r.flags.writeable = False
        self.r = r
        self.n = r.size
        self.channel = None

    def group_rates(self, group: int) -> np.ndarray:
        group = check_group(group, self.n)
        out = np.zeros(self.n)
        out[members(group)] = self.r[popcount(group) - 1]
        return out

    def rate(self, i: int, group: int) -> float:
        group = check_group(group, self.n)
        if not (group >> i) & 1:
            return 0.0
        return float(self.r[popcount(group) - 1])

    def rates(self, masks) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64)
        B = membership(masks, self.n)
        size = B.sum(axis=1)
        return np.where(B, self.r[np.maximum(size, 1) - 1][:, None], 0.0)

    def permuted(self, order):
        return CardinalityOracle(self.r, check=False)

    def to_dict(self):
        return {"variant": self.variant, "r": self.r.tolist()}


def oracle_from_dict(data: dict) -> RateOracle:
    variant = data.get("variant")
    if variant == "cardinality":
        return CardinalityOracle(data["r"])
    if variant not in VARIANTS:
        raise DomainError(f"unknown rate variant {variant!r}")
    ch = ChannelMatrix.from_dict(data["channel"])
    if variant == "shannon":
        return ShannonOracle(ch)
    if variant == "binary":
        return BinaryOracle(ch, data["threshold"])
    return BpskOracle(ch, data.get("z", 1e-6), data.get("B", 1.0))


@dataclass
class MonotonicityReport:
    passed: bool
    checked: int
    # (link, smaller group, larger group) of the first violation
    witness: Optional[tuple] = None
    exhaustive: bool = True
    notes: list = field(default_factory=list)


def verify_monotonicity(oracle: RateOracle, n: Optional[int] = None, samples: int = 20000,
                        seed: int = 0, rtol: float = 1e-12) -> MonotonicityReport:
    """Check ``F(i, C1) >= F(i, C2)`` over nested pairs ``C1 ⊂ C2``.

    It suffices to compare each group with its one-smaller subgroups; for
    ``n <= 12`` every such pair is checked, otherwise ``samples`` random pairs.
    """
    n = oracle.n if n is None else n
    if n > oracle.n:
        raise DomainError("n exceeds the oracle's link count")
    exhaustive = n <= 12
    if exhaustive:
        big = np.arange(1, 1 << n, dtype=np.int64)
    else:
        rng = np.random.default_rng(seed)
        big = rng.integers(1, 1 << min(n, 62), size=samples, dtype=np.int64)
    R_big = oracle.rates(big)
    B = membership(big, oracle.n)
    checked = 0
    for j in range(n):
        sel = B[:, j] & (big != (1 << j))
        if not sel.any():
            continue
        C2 = big[sel]
        C1 = C2 ^ (1 << j)
        R1 = oracle.rates(C1)
        R2 = R_big[sel]
        inside = membership(C1, oracle.n)
        bad = inside & (R1 < R2 - rtol * np.maximum(np.abs(R2), 1.0))
        checked += int(inside.sum())
        if bad.any():
            rows = np.flatnonzero(bad.any(axis=1))
            k = rows[np.argmin(C2[rows])]
            i = int(np.flatnonzero(bad[k])[0])
            return MonotonicityReport(False, checked, (i, int(C1[k]), int(C2[k])), exhaustive)
    return MonotonicityReport(True, checked, None, exhaustive)
