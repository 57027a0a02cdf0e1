"""Affine planes, the disjoint-copies example, perfect matchings and random
nearly-disjoint hypergraphs."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import DomainError, Hypergraph, SetFamily, VertexSet
from .rng import substream


class UnsupportedOrderError(DomainError):
    pass


def _field_tables(q: int, p: int, modulus: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Addition/multiplication tables of GF(q), q = p**e.

    Element ``a`` encodes the polynomial with base-p digits of ``a``
    (least significant digit = constant term).  ``modulus`` lists the
    coefficients of the monic irreducible, constant term first.
    """
    e = len(modulus) - 1

    def digits(a):
        return [(a // p**i) % p for i in range(e)]

    def encode(ds):
        return sum(d * p**i for i, d in enumerate(ds))

    add = np.zeros((q, q), dtype=np.int64)
    mul = np.zeros((q, q), dtype=np.int64)
    for a in range(q):
        for b in range(q):
            da, db = digits(a), digits(b)
            add[a, b] = encode([(x + y) % p for x, y in zip(da, db)])
            prod = [0] * (2 * e - 1)
            for i, x in enumerate(da):
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
            for deg in range(2 * e - 2, e - 1, -1):
                c = prod[deg]
                if c:
                    for i, m in enumerate(modulus[:-1]):
                        prod[deg - e + i] = (prod[deg - e + i] - c * m) % p
                    prod[deg] = 0
            mul[a, b] = encode(prod[:e])
    return add, mul


# order -> (characteristic, irreducible modulus, constant term first)
_FIELDS = {
    2: (2, (0, 1)),
    3: (3, (0, 1)),
    4: (2, (1, 1, 1)),      # x^2 + x + 1
    5: (5, (0, 1)),
    7: (7, (0, 1)),
    8: (2, (1, 1, 0, 1)),   # x^3 + x + 1
    9: (3, (1, 0, 1)),      # x^2 + 1
}
FIELD_TABLES = {q: _field_tables(q, p, mod) for q, (p, mod) in _FIELDS.items()}
SUPPORTED_ORDERS = tuple(sorted(FIELD_TABLES))


@dataclass(frozen=True)
class AffinePlane:
    """AG(2, l).  Point (x, y) has label ``x*l + y``."""

    order: int
    lines: tuple[VertexSet, ...]
    classes: tuple[tuple[int, ...], ...]  # indices into ``lines``

    @property
    def points(self) -> int:
        return self.order**2

    def class_lines(self, c: int) -> list[VertexSet]:
        return [self.lines[i] for i in self.classes[c]]


def affine_plane(l: int) -> AffinePlane:
    """Lines y = a*x + b grouped by slope a, then the vertical class x = b."""
    if l not in FIELD_TABLES:
        raise UnsupportedOrderError(f"order {l} not supported; choose one of {SUPPORTED_ORDERS}")
    add, mul = FIELD_TABLES[l]
    n = l * l
    lines, classes = [], []
    for a in range(l):
        cls = []
        for b in range(l):
            pts = [x * l + int(add[mul[a, x], b]) for x in range(l)]
            cls.append(len(lines))
            lines.append(VertexSet.from_indices(n, pts))
        classes.append(tuple(cls))
    cls = []
    for b in range(l):
        cls.append(len(lines))
        lines.append(VertexSet.from_indices(n, [b * l + y for y in range(l)]))
    classes.append(tuple(cls))
    return AffinePlane(l, tuple(lines), tuple(classes))


@dataclass(frozen=True)
class ExampleHypergraph:
    """Disjoint union of ``copies`` planes restricted to ``s`` parallel classes."""

    l: int
    s: int
    copies: int
    H: Hypergraph

    @property
    def n(self) -> int:
        return self.copies * self.l**2

    @property
    def t(self) -> int:
        return len(self.H)


def example_hypergraph(l: int, s: int, copies: int) -> ExampleHypergraph:
    if not 1 <= s <= l + 1:
        raise DomainError(f"need 1 <= s <= l+1, got s={s}, l={l}")
    if copies < 1:
        raise DomainError("need at least one copy")
    plane = affine_plane(l)
    n = copies * l * l
    blocks = []
    for c in range(copies):
        off = c * l * l
        for cls in plane.classes[:s]:
            for i in cls:
                blocks.append([off + v for v in plane.lines[i]])
    return ExampleHypergraph(l, s, copies, Hypergraph.from_lists(n, blocks, l))


def perfect_matching_hypergraph(n: int, l: int) -> Hypergraph:
    if l < 1 or n % l:
        raise DomainError(f"{l} does not divide {n}")
    return Hypergraph.from_lists(n, [range(i, i + l) for i in range(0, n, l)], l)


def random_nearly_disjoint(n: int, l: int, t_target: int, seed: int, batch: int = 256) -> Hypergraph:
    """Greedy random packing of l-sets.

    Uniform l-sets are proposed and kept when they share no pair with an
    accepted block.  Stops at ``t_target`` blocks or after
    ``1000 * t_target`` rejections, so the result may be short.
    """
    if l < 2 or t_target < 1 or l > n:
        raise DomainError(f"need 2 <= l <= n and t_target >= 1, got n={n}, l={l}, t={t_target}")
    rng = substream(seed, 0x6E64)
    covered = bytearray(n * n)
    blocks: list[list[int]] = []
    rejections, budget = 0, 1000 * t_target
    pair_idx = list(combinations(range(l), 2))
    while len(blocks) < t_target and rejections < budget:
        cand = np.sort(rng.random((batch, n)).argpartition(l - 1, axis=1)[:, :l], axis=1).tolist()
        for row in cand:
            if any(covered[row[i] * n + row[j]] for i, j in pair_idx):
                rejections += 1
                if rejections >= budget:
                    break
                continue
            for i, j in pair_idx:
                covered[row[i] * n + row[j]] = 1
            blocks.append(row)
            if len(blocks) == t_target:
                break
    return Hypergraph(SetFamily.from_lists(n, blocks, l))
