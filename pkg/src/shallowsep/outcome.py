"""Run outcomes and their JSON form."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Union

SCHEMA = 1


@dataclass
class TreeRecord:
    """A rooted tree given by parent pointers (the root maps to -1)."""

    slot: int
    root: int
    parent: dict[int, int]
    radius_bound: float

    @property
    def vertices(self) -> set[int]:
        return set(self.parent)

    def __len__(self) -> int:
        return len(self.parent)

    def tree_edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v, p in self.parent.items() if p >= 0]

    def depths(self) -> dict[int, int]:
        children: dict[int, list[int]] = {}
        for v, p in self.parent.items():
            if p >= 0:
                children.setdefault(p, []).append(v)
        depth = {self.root: 0}
        queue = deque([self.root])
        while queue:
            x = queue.popleft()
            for c in children.get(x, ()):
                depth[c] = depth[x] + 1
                queue.append(c)
        return depth

    def radius(self) -> int:
        return max(self.depths().values(), default=0)

    def to_json(self) -> dict:
        return {"slot": self.slot, "root": self.root,
                "parent": sorted([v, p] for v, p in self.parent.items()),
                "radius_bound": self.radius_bound}

    @classmethod
    def from_json(cls, d: dict) -> TreeRecord:
        return cls(d["slot"], d["root"], {v: p for v, p in d["parent"]}, d["radius_bound"])


@dataclass
class RunStats:
    algo: int = 1
    iterations: int = 0
    trees_adopted: int = 0
    trees_pruned: int = 0
    cuts: int = 0
    cut_layer_total: int = 0
    max_tree_size: int = 0
    max_cut_layers: int = 0
    oracle_deletions: int = 0
    wall_ms: float = 0.0
    extra: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "extra"}
        d["wall_ms"] = round(self.wall_ms, 3)
        d.update(sorted(self.extra.items()))
        return d


@dataclass
class Separator:
    vertices: set[int]
    stats: RunStats = field(default_factory=RunStats)

    kind = "separator"


@dataclass
class MinorCertificate:
    trees: list[TreeRecord]
    cross_edges: dict[tuple[int, int], tuple[int, int]]
    radius_bound: float
    stats: RunStats = field(default_factory=RunStats)

    kind = "certificate"

    @property
    def h(self) -> int:
        return len(self.trees)


@dataclass
class Rejected:
    reason: str
    stats: RunStats = field(default_factory=RunStats)

    kind = "rejected"


Outcome = Union[Separator, MinorCertificate, Rejected]


def outcome_to_json(out: Outcome, include_stats: bool = True) -> dict:
    d: dict[str, Any] = {"schema": SCHEMA, "type": out.kind}
    if isinstance(out, Separator):
        d["vertices"] = sorted(out.vertices)
    elif isinstance(out, MinorCertificate):
        d["trees"] = [t.to_json() for t in out.trees]
        d["cross_edges"] = sorted([i, j, a, b] for (i, j), (a, b) in out.cross_edges.items())
        d["radius_bound"] = out.radius_bound
    else:
        d["reason"] = out.reason
    if include_stats:
        d["stats"] = out.stats.to_json()
    return d


def outcome_from_json(d: dict) -> Outcome:
    if d.get("schema") != SCHEMA:
        raise ValueError(f"unsupported outcome schema {d.get('schema')!r}")
    kind = d["type"]
    if kind == "separator":
        return Separator(set(d["vertices"]))
    if kind == "certificate":
        trees = [TreeRecord.from_json(t) for t in d["trees"]]
        cross = {(i, j): (a, b) for i, j, a, b in d["cross_edges"]}
        return MinorCertificate(trees, cross, d["radius_bound"])
    if kind == "rejected":
        return Rejected(d["reason"])
    raise ValueError(f"unknown outcome type {kind!r}")


def dumps(out: Outcome, include_stats: bool = True) -> str:
    return json.dumps(outcome_to_json(out, include_stats), sort_keys=True, indent=1)
