"""Undirected simple graphs, edge-list ingestion, and seed derivation."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGraphError, MalformedLineError, ResourceLimitError

DENSE_VERTEX_CAP = 20000

_HEADER_RE = re.compile(r"^n\s*=\s*(\d+)\s*$")


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with 0-based vertex ids.

    Edges are stored once as a (m, 2) int array with edge[0] < edge[1],
    sorted lexicographically. The array is frozen so instances can be
    shared freely.
    """

    n: int
    edge_array: np.ndarray = field(repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edge_array, dtype=np.int64).reshape(-1, 2)
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        if edges.size:
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            if np.any(lo == hi):
                raise ValueError("self-loops are not allowed")
            if lo.min() < 0 or hi.max() >= self.n:
                raise ValueError("vertex id out of range")
            canon = np.column_stack([lo, hi])
            canon = np.unique(canon, axis=0)
            if canon.shape[0] != edges.shape[0]:
                raise ValueError("duplicate edges are not allowed")
            edges = canon
        edges.setflags(write=False)
        object.__setattr__(self, "edge_array", edges)

    @property
    def edge_count(self) -> int:
        return self.edge_array.shape[0]

    def edge_set(self) -> frozenset:
        return frozenset(map(tuple, self.edge_array.tolist()))

    def edge_hash(self) -> str:
        """Stable digest of (n, edges); used for determinism checks."""
        h = hashlib.sha256()
        h.update(str(self.n).encode())
        h.update(np.ascontiguousarray(self.edge_array).tobytes())
        return h.hexdigest()


def graph_from_edges(n: int, edges) -> Graph:
    arr = np.array(sorted((min(i, j), max(i, j)) for i, j in edges), dtype=np.int64)
    return Graph(n=n, edge_array=arr.reshape(-1, 2))


@dataclass
class ParseReport:
    """Edge-list ingestion tallies surfaced alongside the parsed graph."""

    graph: Graph
    duplicate_edges: int = 0
    self_loops: int = 0


def parse_edge_list(text: str, one_based: bool = False) -> ParseReport:
    """Parse edge-list text into a graph, tallying dropped lines.

    Lines hold two whitespace-separated vertex ids; '#'/'%' lines are
    comments. An optional header "n=<int>" declares the vertex count
    (otherwise max id + 1). Duplicates collapse, self-loops drop.
    """
    declared_n = None
    pairs = []
    n_self = 0
    offset = 1 if one_based else 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", "%")):
            continue
        m = _HEADER_RE.match(line)
        if m:
            declared_n = int(m.group(1))
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise MalformedLineError(lineno, raw)
        try:
            i, j = int(tokens[0]) - offset, int(tokens[1]) - offset
        except ValueError:
            raise MalformedLineError(lineno, raw) from None
        if i < 0 or j < 0:
            raise MalformedLineError(lineno, raw)
        if i == j:
            n_self += 1
            continue
        pairs.append((min(i, j), max(i, j)))

    if not pairs and declared_n is None:
        raise EmptyGraphError("edge list declares no vertices and no edges")

    unique = sorted(set(pairs))
    n_dup = len(pairs) - len(unique)
    max_id = unique[-1][1] if unique else -1
    n = declared_n if declared_n is not None else max_id + 1
    if max_id >= n:
        raise MalformedLineError(0, f"vertex id {max_id} exceeds declared n={n}")
    arr = np.array(unique, dtype=np.int64).reshape(-1, 2)
    return ParseReport(Graph(n=n, edge_array=arr), duplicate_edges=n_dup, self_loops=n_self)


def load_edge_list(text: str, one_based: bool = False) -> Graph:
    return parse_edge_list(text, one_based=one_based).graph


def dump_edge_list(g: Graph) -> str:
    lines = [f"n={g.n}"]
    lines.extend(f"{i} {j}" for i, j in g.edge_array.tolist())
    return "\n".join(lines) + "\n"


def degrees(g: Graph) -> np.ndarray:
    """Degree of each vertex; sums to 2|E|."""
    deg = np.zeros(g.n, dtype=np.int64)
    if g.edge_count:
        np.add.at(deg, g.edge_array[:, 0], 1)
        np.add.at(deg, g.edge_array[:, 1], 1)
    return deg


def adjacency_dense(g: Graph, cap: int = DENSE_VERTEX_CAP) -> np.ndarray:
    """Dense symmetric 0/1 adjacency matrix."""
    if g.n > cap:
        raise ResourceLimitError(f"n={g.n} exceeds dense cap {cap}")
    a = np.zeros((g.n, g.n), dtype=np.float64)
    if g.edge_count:
        a[g.edge_array[:, 0], g.edge_array[:, 1]] = 1.0
        a[g.edge_array[:, 1], g.edge_array[:, 0]] = 1.0
    return a


# SplitMix64: documented stream for deriving independent child seeds
# from a master seed. Children at distinct indices never collide with
# the parent stream (numpy PCG64 seeded by the derived value).

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(x: int) -> int:
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return (x ^ (x >> 31)) & _MASK


def derive_seed(master: int, *indices: int) -> int:
    """SplitMix64-style child seed for a tuple of stream indices."""
    s = master & _MASK
    for idx in indices:
        s = _mix((s + _GAMMA * ((idx + 1) & _MASK)) & _MASK)
    return s


def seed_for_float(master: int, value: float) -> int:
    """Child seed keyed by a float parameter (bit pattern, not rounding)."""
    bits = int(np.float64(value).view(np.uint64))
    return derive_seed(master, bits)


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed & _MASK)
