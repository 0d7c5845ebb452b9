"""Schedules: ordered (group, duration) activations and their verification."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, SchemaError
from .groups import members

SERVE_RTOL = 1e-6


@dataclass
class Schedule:
    entries: list = field(default_factory=list)  # [(mask, duration), ...]
    degenerate: bool = False

    @property
    def total(self) -> float:
        return float(sum(t for _, t in self.entries))

    @property
    def groups(self) -> list:
        return [m for m, _ in self.entries]

    def __len__(self):
        return len(self.entries)

    def append(self, mask: int, duration: float, merge: bool = True):
        """Add an activation; a repeat of the last group extends it instead."""
        if duration < 0:
            raise DomainError("activation durations must be nonnegative")
        if merge and self.entries and self.entries[-1][0] == mask:
            self.entries[-1] = (mask, self.entries[-1][1] + duration)
        else:
            self.entries.append((int(mask), float(duration)))

    def as_dict(self) -> dict:
        """Durations keyed by group; repeated groups are summed."""
        out: dict = {}
        for m, t in self.entries:
            out[m] = out.get(m, 0.0) + t
        return out

    def served(self, inst) -> np.ndarray:
        out = np.zeros(inst.n)
        for m, t in self.entries:
            out += inst.group_rates(m) * t
        return out

    def residual(self, inst) -> float:
        """Largest relative demand mismatch over links."""
        return float(np.max(np.abs(self.served(inst) - inst.demands) / inst.demands))

    def is_feasible(self, inst, rtol: float = SERVE_RTOL) -> bool:
        return all(t >= 0 for _, t in self.entries) and self.residual(inst) <= rtol

    def verify(self, inst, rtol: float = SERVE_RTOL):
        if any(t < 0 for _, t in self.entries):
            raise DomainError("schedule has a negative duration")
        res = self.residual(inst)
        if res > rtol:
            raise DomainError(f"schedule misses the demands by {res:.3g} (relative)")

    def to_json_dict(self, inst=None) -> dict:
        """Serializable form; with ``inst``, groups are reported in original link ids."""
        rows = []
        for m, t in self.entries:
            mm = inst.to_original(m) if inst is not None else m
            rows.append({"mask": mm, "links": members(mm), "duration": t})
        return {"length": self.total, "degenerate": self.degenerate, "entries": rows}

    @classmethod
    def from_json_dict(cls, data: dict, inst=None) -> "Schedule":
        try:
            entries = [(int(e["mask"]), float(e["duration"])) for e in data["entries"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed schedule: {exc}") from exc
        if inst is not None:
            entries = [(inst.from_original(m), t) for m, t in entries]
        return cls(entries, bool(data.get("degenerate", False)))


def save_schedule(schedule: Schedule, path, inst=None, **extra):
    data = schedule.to_json_dict(inst)
    data.update(extra)
    Path(path).write_text(json.dumps(data, indent=1))


def load_schedule(path, inst=None) -> Schedule:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read schedule: {exc}") from exc
    return Schedule.from_json_dict(data, inst)
