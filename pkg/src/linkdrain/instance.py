"""Problem instances, the random geometric generator, and JSON I/O.

Links are stored internally in ascending order of demand.  ``Instance.order``
maps each internal position back to the caller's original link id, so
schedules can be reported in the caller's numbering.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import DomainError, GenerationError, SchemaError
from .groups import all_submasks, check_group, full_mask, members
from .rate_model import (BinaryOracle, BpskOracle, CardinalityOracle, ChannelMatrix, RateOracle,
                         ShannonOracle, oracle_from_dict)

# Exhaustive rate tables are cached only up to this many links (2^16 x 16 doubles = 8 MB).
TABLE_CAP = 16

DEFAULT_AREA = 1000.0
DEFAULT_MIN_DISTANCE = 3.0
DEFAULT_MAX_DISTANCE = 250.0
DEFAULT_EXPONENT = 4.0
DEFAULT_POWER = 1.0
# Noise placing a link at the midpoint distance at 20 dB SNR with unit power.
DEFAULT_SIGMA2 = DEFAULT_POWER * (0.5 * (DEFAULT_MIN_DISTANCE + DEFAULT_MAX_DISTANCE)) ** -DEFAULT_EXPONENT / 100.0
# Every single link clears this SINR threshold at the maximum distance (SNR there is about 6.5).
DEFAULT_THRESHOLD = 3.0
MAX_PLACEMENT_TRIES = 1000


@dataclass(frozen=True, eq=False)
class Instance:
    demands: np.ndarray
    oracle: RateOracle
    order: np.ndarray = None

    def __post_init__(self):
        d = np.array(self.demands, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise DomainError("demands must be a nonempty vector")
        if np.any(d <= 0) or not np.all(np.isfinite(d)):
            raise DomainError("demands must be finite and strictly positive")
        if np.any(np.diff(d) < 0):
            raise DomainError("demands must be stored in ascending order")
        if self.oracle.n != d.size:
            raise DomainError(f"oracle has {self.oracle.n} links but {d.size} demands were given")
        order = np.arange(d.size) if self.order is None else np.array(self.order, dtype=int)
        if sorted(order.tolist()) != list(range(d.size)):
            raise DomainError("order must be a permutation of the link ids")
        d.flags.writeable = False
        order.flags.writeable = False
        object.__setattr__(self, "demands", d)
        object.__setattr__(self, "order", order)

    @classmethod
    def create(cls, demands, oracle: RateOracle) -> "Instance":
        """Build an instance from demands in arbitrary order, sorting links by demand."""
        d = np.asarray(demands, dtype=float)
        order = np.argsort(d, kind="stable")
        return cls(d[order], oracle.permuted(order), order)

    @property
    def n(self) -> int:
        return self.demands.size

    @property
    def grand(self) -> int:
        return full_mask(self.n)

    def rate(self, i: int, group: int) -> float:
        check_group(group, self.n)
        return float(self.group_rates(group)[i])

    def group_rates(self, group: int) -> np.ndarray:
        if self.n <= TABLE_CAP:
            return self.rate_table[int(group) - 1]
        return self.oracle.group_rates(group)

    def rates(self, masks) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64)
        if self.n <= TABLE_CAP:
            return self.rate_table[masks - 1]
        return self.oracle.rates(masks)

    def singleton_rates(self) -> np.ndarray:
        return np.array([self.group_rates(1 << i)[i] for i in range(self.n)])

    @cached_property
    def rate_table(self) -> np.ndarray:
        """Rates of every group; row ``mask - 1`` holds the column of ``mask``."""
        if self.n > TABLE_CAP:
            raise DomainError(f"rate tables are limited to {TABLE_CAP} links")
        table = self.oracle.rates(all_submasks(self.grand))
        table.flags.writeable = False
        return table

    def to_original(self, mask: int) -> int:
        """Translate a group over internal positions into original link ids."""
        out = 0
        for k in members(mask):
            out |= 1 << int(self.order[k])
        return out

    def from_original(self, mask: int) -> int:
        inverse = np.empty_like(self.order)
        inverse[self.order] = np.arange(self.n)
        out = 0
        for k in members(mask):
            out |= 1 << int(inverse[k])
        return out

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (np.array_equal(self.demands, other.demands)
                and np.array_equal(self.order, other.order) and self.oracle == other.oracle)

    def to_dict(self) -> dict:
        return {"n": self.n, "demands": self.demands.tolist(), "order": self.order.tolist(),
                "oracle": self.oracle.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        try:
            n = int(data["n"])
            demands = [float(x) for x in data["demands"]]
            oracle = oracle_from_dict(data["oracle"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed instance: {exc}") from exc
        if len(demands) != n or oracle.n != n:
            raise SchemaError(f"dimension mismatch: n={n}, {len(demands)} demands, "
                              f"oracle over {oracle.n} links")
        if any(not x > 0 for x in demands):
            raise SchemaError("demands must be strictly positive")
        try:
            if "order" in data:
                if any(b < a for a, b in zip(demands, demands[1:])):
                    raise SchemaError("demands are not ascending under the stored order")
                return cls(np.array(demands), oracle, data["order"])
            return cls.create(demands, oracle)
        except DomainError as exc:
            raise SchemaError(str(exc)) from exc


def save(inst: Instance, sink: Union[str, Path, None] = None) -> str:
    text = json.dumps(inst.to_dict())
    if sink is not None:
        Path(sink).write_text(text)
    return text


def load(source: Union[str, Path]) -> Instance:
    """Read an instance from a path or from a JSON string."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        try:
            source = Path(source).read_text()
        except OSError as exc:
            raise SchemaError(f"cannot read instance: {exc}") from exc
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("instance JSON must be an object")
    return Instance.from_dict(data)


def parse_demand(spec: str) -> tuple:
    """Parse ``uniform:VALUE`` or ``random:LO:HI``."""
    parts = spec.split(":")
    try:
        if parts[0] == "uniform" and len(parts) == 2:
            return ("uniform", float(parts[1]))
        if parts[0] == "random" and len(parts) == 3:
            return ("random", float(parts[1]), float(parts[2]))
    except ValueError:
        pass
    raise DomainError(f"bad demand mode {spec!r}; expected uniform:V or random:LO:HI")


@dataclass
class GeneratorParams:
    n: int = 15
    area: float = DEFAULT_AREA
    min_distance: float = DEFAULT_MIN_DISTANCE
    max_distance: float = DEFAULT_MAX_DISTANCE
    exponent: float = DEFAULT_EXPONENT
    demand: tuple = ("uniform", 1000.0)
    rate: str = "shannon"
    threshold: float = DEFAULT_THRESHOLD
    z: float = 1e-6
    bandwidth: float = 1.0
    power: float = DEFAULT_POWER
    sigma2: Optional[float] = None
    seed: int = 0

    def validate(self):
        if self.n < 1:
            raise DomainError("need at least one link")
        if not 0 < self.min_distance < self.max_distance < self.area:
            raise DomainError("require 0 < min distance < max distance < area side")
        if not self.exponent > 0:
            raise DomainError("path-loss exponent must be positive")
        if self.rate not in ("shannon", "bpsk", "binary"):
            raise DomainError(f"the generator supports shannon, bpsk and binary rates, not {self.rate!r}")
        kind = self.demand[0]
        if kind == "random" and not 0 < self.demand[1] <= self.demand[2]:
            raise DomainError("random demand range must satisfy 0 < lo <= hi")
        if kind == "uniform" and not self.demand[1] > 0:
            raise DomainError("uniform demand must be positive")
        if kind not in ("uniform", "random"):
            raise DomainError(f"unknown demand mode {kind!r}")

    @property
    def noise(self) -> float:
        return DEFAULT_SIGMA2 if self.sigma2 is None else float(self.sigma2)


def generate(params: GeneratorParams) -> Instance:
    """Random links in a square: uniform transmitters, receivers at a bounded random distance."""
    params.validate()
    rng = np.random.default_rng(params.seed)
    n = params.n
    tx = rng.uniform(0.0, params.area, size=(n, 2))
    rx = np.empty_like(tx)
    for i in range(n):
        for _ in range(MAX_PLACEMENT_TRIES):
            angle = rng.uniform(0.0, 2.0 * math.pi)
            radius = rng.uniform(params.min_distance, params.max_distance)
            p = tx[i] + radius * np.array([math.cos(angle), math.sin(angle)])
            if 0.0 <= p[0] <= params.area and 0.0 <= p[1] <= params.area:
                rx[i] = p
                break
        else:
            raise GenerationError(f"could not place the receiver of link {i} "
                                  f"after {MAX_PLACEMENT_TRIES} tries")
    dist = np.linalg.norm(tx[:, None, :] - rx[None, :, :], axis=2)
    G = dist ** -params.exponent
    channel = ChannelMatrix(G, np.full(n, params.power), params.noise)
    if params.demand[0] == "uniform":
        demands = np.full(n, params.demand[1])
    else:
        demands = rng.uniform(params.demand[1], params.demand[2], size=n)
    if params.rate == "shannon":
        oracle = ShannonOracle(channel)
    elif params.rate == "bpsk":
        oracle = BpskOracle(channel, params.z, params.bandwidth)
    else:
        oracle = BinaryOracle(channel, params.threshold)
    return Instance.create(demands, oracle)


def cardinality_instance(demands, r) -> Instance:
    return Instance.create(demands, CardinalityOracle(r))
