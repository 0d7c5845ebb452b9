"""Bitmask encoding of link groups.

A group is a nonempty set of links, stored as a Python ``int`` whose bit
``i`` is set when link ``i`` belongs to the group.  Python integers are
unbounded, so the cardinality solvers can handle more than 64 links; the
vectorized enumeration helpers work on ``int64`` arrays and are limited to
``MAX_ENUM_LINKS`` links.
"""
from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from .errors import BudgetExceeded, DomainError

MAX_LINKS = 64
MAX_ENUM_LINKS = 24
_BLOCK_BITS = 16


def mask_of(links: Iterable[int]) -> int:
    mask = 0
    for i in links:
        if i < 0:
            raise DomainError(f"negative link index {i}")
        mask |= 1 << i
    return mask


def members(mask: int) -> list[int]:
    """Link indices of ``mask`` in ascending order."""
    mask = int(mask)
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return bin(int(mask)).count("1")


def full_mask(n: int) -> int:
    return (1 << n) - 1


def check_group(mask: int, n: int) -> int:
    mask = int(mask)
    if mask <= 0:
        raise DomainError("a group must be nonempty")
    if mask >> n:
        raise DomainError(f"group {mask:#x} references links beyond n={n}")
    return mask


def membership(masks: np.ndarray, n: int) -> np.ndarray:
    """Boolean matrix ``(len(masks), n)`` with entry ``[k, i]`` set iff link i is in masks[k]."""
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


def submask_blocks(universe: int, block_bits: int = _BLOCK_BITS,
                   cap: int = MAX_ENUM_LINKS) -> Iterator[np.ndarray]:
    """Yield every nonempty submask of ``universe`` in ascending order, in blocks.

    Submask ``j`` (for ``j = 1 .. 2^k - 1``) is formed by depositing the bits of
    ``j`` onto the set positions of ``universe``; the deposit is order
    preserving, so the concatenated blocks are sorted.
    """
    positions = members(universe)
    k = len(positions)
    if k == 0:
        return
    if k > cap:
        raise BudgetExceeded(f"enumerating 2^{k} groups exceeds the cap of {cap} links")
    weights = np.array([1 << p for p in positions], dtype=np.int64)
    total = 1 << k
    step = 1 << block_bits
    for start in range(1, total, step):
        j = np.arange(start, min(start + step, total), dtype=np.int64)
        bits = (j[:, None] >> np.arange(k, dtype=np.int64)) & 1
        yield bits @ weights


def all_submasks(universe: int, cap: int = MAX_ENUM_LINKS) -> np.ndarray:
    blocks = list(submask_blocks(universe, cap=cap))
    if not blocks:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(blocks)
