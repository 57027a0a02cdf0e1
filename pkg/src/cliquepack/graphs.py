"""G(n, 1/2), its k-cliques, the clique conflict graph and clique packings.

Two k-cliques conflict when they share an edge of the graph, i.e. at least
two vertices; independent sets of the conflict graph are exactly the
edge-disjoint clique packings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import CapacityError, DomainError, SetFamily, VertexSet, is_packing, log2_f
from .rng import substream

CLIQUE_BUDGET = 10**7
ORDERS = ("given", "random", "min-degree")


@dataclass(frozen=True)
class RandomGraph:
    n: int
    rows: tuple[int, ...]  # adjacency bitmasks
    seed: int | None = None

    def __post_init__(self):
        for v, r in enumerate(self.rows):
            if r >> v & 1:
                raise DomainError(f"loop at vertex {v}")
            for u in range(self.n):
                if (r >> u & 1) != (self.rows[u] >> v & 1):
                    raise DomainError(f"adjacency not symmetric at ({v}, {u})")

    @classmethod
    def from_edges(cls, n: int, edges, seed=None) -> RandomGraph:
        rows = [0] * n
        for a, b in edges:
            rows[a] |= 1 << b
            rows[b] |= 1 << a
        return cls(n, tuple(rows), seed)

    @classmethod
    def complete(cls, n: int) -> RandomGraph:
        full = (1 << n) - 1
        return cls(n, tuple(full ^ (1 << v) for v in range(n)))

    @property
    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.rows[a] >> b & 1)


def gnp_half(n: int, seed: int) -> RandomGraph:
    """Each of the C(n,2) pairs is an edge with probability 1/2."""
    if n < 1:
        raise DomainError("n must be positive")
    coins = substream(seed, 7).integers(0, 2, size=(n, n), dtype=np.int8)
    adj = np.triu(coins, 1)
    adj = adj | adj.T
    weights = [1 << u for u in range(n)]
    rows = tuple(sum(w for w, a in zip(weights, row) if a) for row in adj.tolist())
    return RandomGraph(n, rows, seed)


def enumerate_cliques(G: RandomGraph, k: int, budget: int = CLIQUE_BUDGET) -> SetFamily:
    """All k-cliques, in lexicographic order of their sorted vertex lists."""
    if k < 1:
        raise DomainError("k must be positive")
    out: list[int] = []
    nodes = 0

    def extend(clique: int, cand: int, need: int):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise CapacityError(f"clique enumeration exceeded {budget} search nodes")
        if need == 0:
            out.append(clique)
            return
        while cand.bit_count() >= need:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            extend(clique | low, cand & G.rows[v], need - 1)

    extend(0, (1 << G.n) - 1, k)
    return SetFamily(G.n, tuple(VertexSet(G.n, b) for b in out), k)


@dataclass(frozen=True)
class ConflictGraph:
    cliques: SetFamily
    adjacency: np.ndarray = field(repr=False)  # bool (M, M)

    @property
    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    @property
    def edge_count(self) -> int:
        return int(np.triu(self.adjacency, 1).sum())

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def triangle_count(self, members: np.ndarray | None = None) -> int:
        A = self.adjacency if members is None else self.adjacency[np.ix_(members, members)]
        A = A.astype(np.int64)
        return int(np.einsum("ij,ji->", A @ A, A)) // 6

    def rows(self) -> list[int]:
        """Adjacency as int bitmasks."""
        return [sum(1 << j for j in np.flatnonzero(r).tolist()) for r in self.adjacency]


def conflict_graph(cliques: SetFamily) -> ConflictGraph:
    if len(cliques) == 0:
        return ConflictGraph(cliques, np.zeros((0, 0), dtype=bool))
    adj = cliques.overlaps() >= 2
    np.fill_diagonal(adj, False)
    adj.setflags(write=False)
    return ConflictGraph(cliques, adj)


@dataclass(frozen=True)
class GammaStats:
    n: int
    k: int
    M_emp: int
    E_emp: int
    T_emp: int
    M_formula: float
    E_bound: float
    T_bound: float

    def as_row(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def gamma_bounds(n: int, k: int, M: float) -> tuple[float, float]:
    return k**4 * M**2 / n**2, 2 * k**6 * M**3 / n**4


def gamma_stats(G: RandomGraph, k: int, budget: int = CLIQUE_BUDGET) -> GammaStats:
    cliques = enumerate_cliques(G, k, budget)
    cg = conflict_graph(cliques)
    M = 2.0 ** log2_f(G.n, k)
    E_b, T_b = gamma_bounds(G.n, k, M)
    return GammaStats(G.n, k, len(cliques), cg.edge_count, cg.triangle_count(), M, E_b, T_b)


def _select(cliques: SetFamily, order) -> list[int]:
    taken, used = [], []
    for i in order:
        b = cliques[i].bits
        if all((b & u).bit_count() <= 1 for u in used):
            taken.append(i)
            used.append(b)
    return taken


def _scan_order(cliques: SetFamily, order: str, seed: int | None):
    M = len(cliques)
    if order == "given":
        return range(M)
    if order == "random":
        if seed is None:
            raise DomainError("random order needs a seed")
        return substream(seed, 8).permutation(M).tolist()
    if order == "min-degree":
        deg = conflict_graph(cliques).degrees() if M else np.zeros(0)
        return np.argsort(deg, kind="stable").tolist()
    raise DomainError(f"unknown order {order!r}; expected one of {ORDERS}")


def greedy_packing(cliques: SetFamily, order: str = "given", seed: int | None = None) -> SetFamily:
    """Maximal packing by a single scan in the given, a random or ascending-conflict-degree order."""
    taken = _select(cliques, _scan_order(cliques, order, seed))
    return SetFamily(cliques.ground, tuple(cliques[i] for i in taken), cliques.uniform)


class NuResult(NamedTuple):
    value: int
    packing: SetFamily
    optimal: bool
    nodes: int


def trivial_nu_bound(n: int, k: int) -> int:
    return (n * (n - 1) // 2) // (k * (k - 1) // 2)


def exact_nu_k(cliques: SetFamily, budget: int = 10**6) -> NuResult:
    """Maximum packing size by branch and bound on the conflict graph.

    Bounds: a greedy clique cover of the remaining candidates (cliques
    sharing one graph edge are pairwise in conflict) and the number of
    still-uncovered graph edges over C(k,2).  On budget exhaustion the best
    packing found so far is returned with ``optimal=False``.
    """
    M = len(cliques)
    if M == 0:
        return NuResult(0, cliques, True, 0)
    k = cliques.uniform or max(b.card for b in cliques)
    per = k * (k - 1) // 2
    adj = conflict_graph(cliques).rows()
    start = _select(cliques, _scan_order(cliques, "min-degree", None))
    best = [len(start), start]
    total_pairs = cliques.ground * (cliques.ground - 1) // 2
    nodes = 0
    exhausted = False

    def cover_bound(cand: int) -> int:
        parts = 0
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            group = low
            rest = cand & adj[v]
            while rest:
                lw = rest & -rest
                u = lw.bit_length() - 1
                group |= lw
                rest &= adj[u]
            cand &= ~group
            parts += 1
        return parts

    def rec(chosen: list[int], cand: int):
        nonlocal nodes, exhausted
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        if len(chosen) > best[0]:
            best[0], best[1] = len(chosen), list(chosen)
        if not cand:
            return
        room = min(cover_bound(cand), (total_pairs - len(chosen) * per) // per)
        if len(chosen) + room <= best[0]:
            return
        # branch on a max-degree candidate: take it, or drop it
        deg_v = max(((cand & adj[v]).bit_count(), v) for v in _bits(cand))[1]
        rec(chosen + [deg_v], cand & ~adj[deg_v] & ~(1 << deg_v))
        if exhausted:
            return
        rec(chosen, cand & ~(1 << deg_v))

    rec([], (1 << M) - 1)
    packing = SetFamily(cliques.ground, tuple(cliques[i] for i in sorted(best[1])), cliques.uniform)
    return NuResult(best[0], packing, not exhausted, nodes)


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


@dataclass(frozen=True)
class AKSReport:
    cliques: int
    sample_size: int
    delta_frac: float
    sample_edges: int
    triangles_removed: int
    triangle_free_size: int
    independent_size: int


def _greedy_independent(adj: np.ndarray, members: list[int]) -> list[int]:
    """Repeatedly take a minimum-degree vertex and delete its neighbourhood."""
    alive = set(members)
    chosen = []
    while alive:
        v = min(alive, key=lambda x: (int(adj[x, list(alive)].sum()), x))
        chosen.append(v)
        alive -= {v} | set(np.flatnonzero(adj[v]).tolist())
    return sorted(chosen)


def aks_pipeline(G: RandomGraph, k: int, delta_frac: float | None = None, seed: int = 0,
                 budget: int = CLIQUE_BUDGET) -> tuple[SetFamily, AKSReport]:
    """Subsample the conflict graph, make it triangle-free, take a greedy independent set.

    ``delta_frac`` defaults to n^2 / (2 k^3 M) clipped to (0, 1], M the
    number of k-cliques found.
    """
    cliques = enumerate_cliques(G, k, budget)
    M = len(cliques)
    if M == 0:
        return SetFamily(G.n, (), k), AKSReport(0, 0, 0.0, 0, 0, 0, 0)
    if delta_frac is None:
        delta_frac = G.n**2 / (2 * k**3 * M)
    delta_frac = min(1.0, delta_frac)
    if delta_frac <= 0:
        raise DomainError("delta_frac must be positive")
    cg = conflict_graph(cliques)
    A = cg.adjacency
    size = min(M, math.ceil(delta_frac * M))
    W = sorted(substream(seed, 9).choice(M, size=size, replace=False).tolist())
    sample_edges = int(np.triu(A[np.ix_(W, W)], 1).sum())
    alive = list(W)
    removed = 0
    while True:
        tri = _find_triangle(A, alive)
        if tri is None:
            break
        sub = A[np.ix_(alive, alive)].sum(axis=1)
        pos = {v: i for i, v in enumerate(alive)}
        victim = max(tri, key=lambda v: (int(sub[pos[v]]), v))
        alive.remove(victim)
        removed += 1
    ind = _greedy_independent(A, alive)
    packing = SetFamily(G.n, tuple(cliques[i] for i in ind), k)
    assert is_packing(packing)
    return packing, AKSReport(M, size, delta_frac, sample_edges, removed, len(alive), len(ind))


def _find_triangle(A: np.ndarray, members: list[int]):
    if len(members) < 3:
        return None
    idx = np.asarray(members)
    S = A[np.ix_(idx, idx)].astype(np.int64)
    common = (S @ S) * S
    hits = np.argwhere(common > 0)
    if len(hits) == 0:
        return None
    a, b = hits[0]
    c = int(np.flatnonzero(S[a] & S[b])[0])
    return int(idx[a]), int(idx[b]), int(idx[c])


def has_conflict_triangle(cg: ConflictGraph, members) -> bool:
    return _find_triangle(cg.adjacency, list(members)) is not None
