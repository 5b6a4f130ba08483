"""Samplers for the six random-graph model families.

All samplers are pure functions of (parameters, seed): the same seed
always yields the same graph. Uniform draws for the independent-edge
models (ER, BM) consume one row of pair uniforms per vertex, so a
one-block BM is bit-identical to ER at the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import GenerationFailureError, InfeasibleDegreeError
from .graphs import Graph, rng_from_seed


@dataclass(frozen=True)
class ERParams:
    """Independent edges with common probability p."""

    p: float

    family = "er"

    def validate(self, n: int):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")


@dataclass(frozen=True)
class DRParams:
    """Random d-regular graph."""

    d: int

    family = "dr"

    def validate(self, n: int):
        if self.d < 1 or self.d >= n:
            raise InfeasibleDegreeError(f"need 0 < d < n, got d={self.d}, n={n}")
        if (n * self.d) % 2 != 0:
            raise InfeasibleDegreeError("n*d must be even")


@dataclass(frozen=True)
class GRGParams:
    """Geometric graph on the unit square (Euclidean, non-toroidal)."""

    r: float

    family = "grg"

    def validate(self, n: int):
        if not 0.0 <= self.r <= np.sqrt(2) + 1e-12:
            raise ValueError("radius must lie in [0, sqrt(2)]")


@dataclass(frozen=True)
class WSParams:
    """Watts-Strogatz ring rewiring; K is the (even) lattice degree."""

    p_r: float
    K: int = 4

    family = "ws"

    def validate(self, n: int):
        if not 0.0 <= self.p_r <= 1.0:
            raise ValueError("p_r must lie in [0, 1]")
        if self.K % 2 != 0 or not 0 < self.K < n:
            raise ValueError("K must be even with 0 < K < n")


@dataclass(frozen=True)
class BAParams:
    """Preferential attachment with degree exponent p_s, m edges per node."""

    p_s: float
    m: int = 1

    family = "ba"

    def validate(self, n: int):
        if self.p_s < 0:
            raise ValueError("p_s must be non-negative")
        if not 1 <= self.m < n:
            raise ValueError("need n > m >= 1")


@dataclass(frozen=True)
class BMParams:
    """Deterministic block model: contiguous blocks, within/off probabilities.

    p0 is a scalar off-block probability, or an MxM symmetric matrix for
    pairwise off-block probabilities (diagonal ignored).
    """

    block_sizes: tuple
    p0: Union[float, tuple]
    p_within: tuple

    family = "bm"

    def __init__(self, block_sizes: Sequence[int], p0, p_within: Sequence[float]):
        object.__setattr__(self, "block_sizes", tuple(int(s) for s in block_sizes))
        if np.ndim(p0) == 0:
            object.__setattr__(self, "p0", float(p0))
        else:
            object.__setattr__(self, "p0", tuple(tuple(float(x) for x in row) for row in p0))
        object.__setattr__(self, "p_within", tuple(float(p) for p in p_within))

    @property
    def M(self) -> int:
        return len(self.block_sizes)

    @property
    def n(self) -> int:
        return int(sum(self.block_sizes))

    def off_block_matrix(self) -> np.ndarray:
        if np.ndim(self.p0) == 0:
            return np.full((self.M, self.M), float(self.p0))
        mat = np.asarray(self.p0, dtype=float)
        return mat

    def membership(self) -> np.ndarray:
        return np.repeat(np.arange(self.M), self.block_sizes)

    def validate(self, n: Optional[int] = None):
        if n is not None and n != self.n:
            raise ValueError(f"block sizes sum to {self.n}, expected n={n}")
        if len(self.p_within) != self.M:
            raise ValueError("p_within must have one entry per block")
        if any(s < 1 for s in self.block_sizes):
            raise ValueError("block sizes must be positive")
        probs = list(self.p_within) + list(np.ravel(self.off_block_matrix()))
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        off = self.off_block_matrix()
        if off.shape != (self.M, self.M) or not np.allclose(off, off.T):
            raise ValueError("p0 matrix must be MxM symmetric")


ModelParams = Union[ERParams, DRParams, GRGParams, WSParams, BAParams, BMParams]


def _pairs_from_prob_rows(n: int, prob_row, rng: np.random.Generator) -> np.ndarray:
    """Independent-edge sampler; prob_row(i) gives P(edge i~j) for j>i."""
    rows = []
    for i in range(n - 1):
        u = rng.random(n - 1 - i)
        hits = np.nonzero(u < prob_row(i))[0]
        if hits.size:
            rows.append(np.column_stack([np.full(hits.size, i), i + 1 + hits]))
    if not rows:
        return np.empty((0, 2), dtype=np.int64)
    return np.vstack(rows).astype(np.int64)


def generate_er(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p)."""
    ERParams(p).validate(n)
    rng = rng_from_seed(seed)
    edges = _pairs_from_prob_rows(n, lambda i: p, rng)
    return Graph(n=n, edge_array=edges)


def generate_bm(params: BMParams, seed: int) -> Graph:
    """Deterministic block model with contiguous blocks."""
    params.validate()
    n = params.n
    member = params.membership()
    off = params.off_block_matrix()
    probs = off[np.ix_(member, member)]
    probs[np.arange(n), np.arange(n)] = 0.0
    for m, p_in in enumerate(params.p_within):
        idx = np.nonzero(member == m)[0]
        probs[np.ix_(idx, idx)] = p_in
    rng = rng_from_seed(seed)
    edges = _pairs_from_prob_rows(n, lambda i: probs[i, i + 1:], rng)
    return Graph(n=n, edge_array=edges)


def _pairing_attempt(n: int, d: int, rng: np.random.Generator):
    stubs = np.repeat(np.arange(n), d)
    rng.shuffle(stubs)
    pairs = stubs.reshape(-1, 2)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    return np.column_stack([lo, hi])


def _repair_pairing(n: int, pairs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Edge-switch repair: swap conflicting pairs against good edges."""
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    loops = lo == hi
    keys, counts = np.unique(lo[~loops] * n + hi[~loops], return_counts=True)
    good = set(zip((keys // n).tolist(), (keys % n).tolist()))
    bad = list(zip(lo[loops].tolist(), hi[loops].tolist()))
    for key, c in zip(keys[counts > 1].tolist(), counts[counts > 1].tolist()):
        bad.extend([(key // n, key % n)] * (c - 1))
    budget = 200 * (len(bad) + 1) * max(1, int(np.log2(n + 1)))
    tries = 0
    # positional list mirrors the set so sampling avoids O(|E|) copies
    good_list = list(good)
    good_pos = {e: k for k, e in enumerate(good_list)}
    while bad and tries < budget:
        tries += 1
        u, v = bad[-1]
        k = int(rng.integers(len(good_list)))
        x, y = good_list[k]
        if rng.random() < 0.5:
            x, y = y, x
        e1 = (min(u, x), max(u, x))
        e2 = (min(v, y), max(v, y))
        if u == x or v == y or e1 in good or e2 in good or e1 == e2:
            continue
        old = (min(x, y), max(x, y))
        good.remove(old)
        good.add(e1)
        good.add(e2)
        pos = good_pos.pop(old)
        good_list[pos] = e1
        good_pos[e1] = pos
        good_list.append(e2)
        good_pos[e2] = len(good_list) - 1
        bad.pop()
    if bad:
        raise GenerationFailureError("edge-switch repair exhausted its budget")
    return np.array(sorted(good), dtype=np.int64)


def _complement(g: Graph) -> Graph:
    mask = np.ones((g.n, g.n), dtype=bool)
    np.fill_diagonal(mask, False)
    if g.edge_array.size:
        mask[g.edge_array[:, 0], g.edge_array[:, 1]] = False
        mask[g.edge_array[:, 1], g.edge_array[:, 0]] = False
    i, j = np.nonzero(np.triu(mask, k=1))
    return Graph(n=g.n, edge_array=np.column_stack([i, j]).astype(np.int64))


def generate_dr(n: int, d: int, seed: int, max_attempts: Optional[int] = None) -> Graph:
    """Random d-regular simple graph via pairing with edge-switch repair.

    Dense degrees (d above (n-1)/2) are sampled as the complement of an
    (n-1-d)-regular graph, which the pairing model handles much faster.
    """
    DRParams(d).validate(n)
    if d > (n - 1) / 2:
        if d == n - 1:
            i, j = np.triu_indices(n, k=1)
            return Graph(n=n, edge_array=np.column_stack([i, j]).astype(np.int64))
        return _complement(generate_dr(n, n - 1 - d, seed, max_attempts))
    rng = rng_from_seed(seed)
    if max_attempts is None:
        # clean-pairing odds decay like exp(-d^2/4); skip to repair when dense
        max_attempts = 100 if d <= 4 else (10 if d <= 6 else 1)
    for _ in range(max_attempts):
        pairs = _pairing_attempt(n, d, rng)
        lo, hi = pairs[:, 0], pairs[:, 1]
        if np.any(lo == hi):
            continue
        uniq = np.unique(pairs, axis=0)
        if uniq.shape[0] == pairs.shape[0]:
            return Graph(n=n, edge_array=pairs)
    pairs = _pairing_attempt(n, d, rng)
    edges = _repair_pairing(n, pairs, rng)
    return Graph(n=n, edge_array=edges)


def generate_grg(n: int, r: float, seed: int) -> Graph:
    """Geometric graph: uniform positions in [0,1]^2, connect within r."""
    GRGParams(r).validate(n)
    rng = rng_from_seed(seed)
    pos = rng.random((n, 2))
    if r <= 0:
        return Graph(n=n, edge_array=np.empty((0, 2), dtype=np.int64))
    tree = cKDTree(pos)
    pairs = tree.query_pairs(r, output_type="ndarray")
    return Graph(n=n, edge_array=pairs.astype(np.int64))


def generate_ws(n: int, K: int, p_r: float, seed: int) -> Graph:
    """Watts-Strogatz: ring lattice with per-edge rewiring, |E| preserved."""
    WSParams(p_r, K).validate(n)
    rng = rng_from_seed(seed)
    edge_set = set()
    for k in range(1, K // 2 + 1):
        for i in range(n):
            j = (i + k) % n
            edge_set.add((min(i, j), max(i, j)))
    # rewire lattice edges in ring order, clockwise endpoint replaced
    for k in range(1, K // 2 + 1):
        for i in range(n):
            if rng.random() >= p_r:
                continue
            j = (i + k) % n
            old = (min(i, j), max(i, j))
            if old not in edge_set:
                continue  # already rewired away by an earlier step
            # degree n-1 vertices have no free slot; keep the edge then
            for _ in range(4 * n):
                u = int(rng.integers(n))
                new = (min(i, u), max(i, u))
                if u != i and new not in edge_set:
                    edge_set.remove(old)
                    edge_set.add(new)
                    break
    return Graph(n=n, edge_array=np.array(sorted(edge_set), dtype=np.int64))


def generate_ba(n: int, m: int, p_s: float, seed: int) -> Graph:
    """Preferential attachment with attachment weight degree**p_s.

    Starts from a clique on m+1 vertices; each new vertex attaches m
    edges, sampled without replacement; degree-0 vertices get weight 1.
    """
    BAParams(p_s, m).validate(n)
    rng = rng_from_seed(seed)
    deg = np.zeros(n, dtype=np.int64)
    edges = []
    for i in range(m + 1):
        for j in range(i + 1, m + 1):
            edges.append((i, j))
            deg[i] += 1
            deg[j] += 1
    for v in range(m + 1, n):
        weights = deg[:v].astype(float) ** p_s
        weights[deg[:v] == 0] = 1.0
        targets = []
        for _ in range(m):
            cum = np.cumsum(weights)
            t = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            targets.append(t)
            weights[t] = 0.0
        for t in targets:
            edges.append((t, v))
            deg[t] += 1
            deg[v] += 1
    return Graph(n=n, edge_array=np.array(sorted(edges), dtype=np.int64))


def generate(params: ModelParams, n: int, seed: int) -> Graph:
    """Dispatch on the parameter family."""
    if isinstance(params, ERParams):
        return generate_er(n, params.p, seed)
    if isinstance(params, DRParams):
        return generate_dr(n, params.d, seed)
    if isinstance(params, GRGParams):
        return generate_grg(n, params.r, seed)
    if isinstance(params, WSParams):
        return generate_ws(n, params.K, params.p_r, seed)
    if isinstance(params, BAParams):
        return generate_ba(n, params.m, params.p_s, seed)
    if isinstance(params, BMParams):
        params.validate(n)
        return generate_bm(params, seed)
    raise TypeError(f"unknown model parameters: {params!r}")
