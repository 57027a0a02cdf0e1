"""Ground-set types, bitset set algebra and the log-domain formulas.

A :class:`VertexSet` is a subset of ``range(n)`` stored as a Python int
bitmask.  Families of such sets (:class:`SetFamily`) carry a shared ground
size and, optionally, a common block size.  Anything that can overflow a
double (clique counts, ``C(n, k)**t``) is handled on the log scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

LN2 = math.log(2.0)


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(RuntimeError):
    """An exact computation would exceed its enumeration guard or budget."""


class RegimeError(ValueError):
    """Parameters fall outside the regime in which a bound is stated."""


@dataclass(frozen=True)
class Params:
    n: int
    k: int
    t: int

    def __post_init__(self):
        for name in ("n", "k", "t"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise DomainError(f"{name} must be an integer, got {v!r}")
        if not 2 <= self.k <= self.n:
            raise DomainError(f"need 2 <= k <= n, got k={self.k}, n={self.n}")
        if self.t < 1:
            raise DomainError(f"need t >= 1, got t={self.t}")

    @property
    def k_regime_ok(self) -> bool:
        # advisory 1 << k << sqrt(n)
        return self.k >= 3 and 10 * self.k * self.k <= self.n


@dataclass(frozen=True, slots=True)
class VertexSet:
    """Subset of ``range(n)`` as an int bitmask; ``card`` is cached."""

    n: int
    bits: int
    card: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise DomainError(f"bits {self.bits:#x} not within ground set of size {self.n}")
        object.__setattr__(self, "card", self.bits.bit_count())

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int]) -> VertexSet:
        bits = 0
        for i in indices:
            i = int(i)
            if not 0 <= i < n:
                raise DomainError(f"vertex {i} outside [0, {n})")
            bits |= 1 << i
        return cls(n, bits)

    def _check(self, other: VertexSet):
        if self.n != other.n:
            raise DomainError(f"ground sets differ: {self.n} vs {other.n}")

    def __and__(self, other: VertexSet) -> VertexSet:
        self._check(other)
        return VertexSet(self.n, self.bits & other.bits)

    def __or__(self, other: VertexSet) -> VertexSet:
        self._check(other)
        return VertexSet(self.n, self.bits | other.bits)

    def meet(self, other: VertexSet) -> int:
        """Size of the intersection."""
        self._check(other)
        return (self.bits & other.bits).bit_count()

    def isdisjoint(self, other: VertexSet) -> bool:
        self._check(other)
        return not self.bits & other.bits

    def __len__(self) -> int:
        return self.card

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and bool(self.bits >> v & 1)

    def __iter__(self) -> Iterator[int]:
        b = self.bits
        while b:
            low = b & -b
            yield low.bit_length() - 1
            b ^= low

    def indices(self) -> list[int]:
        return list(self)

    def __str__(self):
        return "{" + ",".join(map(str, self)) + "}"


@dataclass(frozen=True)
class SetFamily:
    """Ordered sequence of vertex sets over a common ground set."""

    ground: int
    blocks: tuple[VertexSet, ...]
    uniform: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        for b in self.blocks:
            if b.n != self.ground:
                raise DomainError(f"block {b} has ground {b.n}, family has {self.ground}")
            if self.uniform is not None and b.card != self.uniform:
                raise DomainError(f"block {b} has size {b.card}, expected {self.uniform}")

    @classmethod
    def from_lists(cls, n: int, blocks: Iterable[Iterable[int]], uniform: int | None = None) -> SetFamily:
        return cls(n, tuple(VertexSet.from_indices(n, b) for b in blocks), uniform)

    @classmethod
    def from_index_array(cls, n: int, arr: np.ndarray, uniform: int | None = None) -> SetFamily:
        """Rows of an integer array become blocks."""
        return cls.from_lists(n, (row.tolist() for row in np.asarray(arr)), uniform)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self) -> Iterator[VertexSet]:
        return iter(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]

    def as_lists(self) -> list[list[int]]:
        return [b.indices() for b in self.blocks]

    def incidence(self) -> np.ndarray:
        """0/1 float matrix of shape (len, ground); row i is block i."""
        return _incidence(self)

    def overlaps(self) -> np.ndarray:
        """Pairwise intersection sizes as an int matrix (diagonal = block sizes)."""
        inc = self.incidence()
        return np.rint(inc @ inc.T).astype(np.int64)

    def to_text(self) -> str:
        return format_family(self)


def _incidence(fam: SetFamily) -> np.ndarray:
    cached = fam.__dict__.get("_inc")
    if cached is None:
        cached = np.zeros((len(fam.blocks), fam.ground))
        for i, b in enumerate(fam.blocks):
            cached[i, list(b)] = 1.0
        cached.setflags(write=False)
        object.__setattr__(fam, "_inc", cached)
    return cached


@dataclass(frozen=True)
class Hypergraph:
    """Uniform set family with its per-vertex degree table."""

    family: SetFamily
    degrees: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.family.uniform is None:
            if len(self.family) == 0:
                raise DomainError("an empty hypergraph needs an explicit uniformity")
            sizes = {b.card for b in self.family}
            if len(sizes) != 1:
                raise DomainError(f"hypergraph blocks must share one size, got {sorted(sizes)}")
            object.__setattr__(self, "family", SetFamily(self.family.ground, self.family.blocks, sizes.pop()))
        deg = [0] * self.family.ground
        for b in self.family:
            for v in b:
                deg[v] += 1
        object.__setattr__(self, "degrees", tuple(deg))

    @classmethod
    def from_lists(cls, n: int, blocks: Iterable[Iterable[int]], l: int | None = None) -> Hypergraph:
        return cls(SetFamily.from_lists(n, blocks, l))

    @property
    def n(self) -> int:
        return self.family.ground

    @property
    def l(self) -> int:
        return self.family.uniform

    @property
    def t(self) -> int:
        return len(self.family)

    def __len__(self) -> int:
        return len(self.family)

    def __iter__(self) -> Iterator[VertexSet]:
        return iter(self.family)

    def __getitem__(self, i):
        return self.family[i]

    @cached_property
    def meets(self) -> np.ndarray:
        """Boolean matrix: edges i and j share a vertex (diagonal True)."""
        inc = self.family.incidence()
        return (inc @ inc.T) > 0.5


# -- log-domain formulas -------------------------------------------------

def log_binom(n: int, k: int) -> float:
    """Natural log of C(n, k)."""
    if k < 0 or k > n:
        raise DomainError(f"C({n}, {k}) needs 0 <= k <= n")
    if k == 0 or k == n:
        return 0.0
    approx = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    if approx < 52 * LN2:
        return math.log(math.comb(n, k))
    return approx


def log2_f(n: int, k: int) -> float:
    """log2 of the expected number of k-cliques in G(n, 1/2)."""
    if not 2 <= k <= n:
        raise DomainError(f"need 2 <= k <= n, got k={k}, n={n}")
    return log_binom(n, k) / LN2 - k * (k - 1) / 2


def k0(n: int) -> int:
    """Smallest k >= 2 with f(k) < 1."""
    if n < 2:
        raise DomainError("k0 needs n >= 2")
    k = 2
    while k <= n and log2_f(n, k) >= 0:
        k += 1
    # f(n) = 2^{-C(n,2)} < 1 for n >= 2, so the scan always stops by k = n
    return k


# -- predicates ----------------------------------------------------------

def _max_pairwise_meet(fam: SetFamily) -> int:
    if len(fam) < 2:
        return 0
    if len(fam) <= 24:
        bits = [b.bits for b in fam]
        return max((a & b).bit_count() for i, a in enumerate(bits) for b in bits[i + 1:])
    ov = fam.overlaps()
    np.fill_diagonal(ov, 0)
    return int(ov.max())


def is_packing(fam: SetFamily) -> bool:
    """Every two blocks share at most one point."""
    return _max_pairwise_meet(fam) <= 1


def is_matching(fam: SetFamily) -> bool:
    """Blocks are pairwise disjoint."""
    seen = 0
    for b in fam:
        if seen & b.bits:
            return False
        seen |= b.bits
    return True


def interaction_count(e: VertexSet, H: Hypergraph | SetFamily) -> int:
    """Number of blocks of ``H`` meeting ``e`` (a block equal to ``e`` counts)."""
    fam = H.family if isinstance(H, Hypergraph) else H
    if e.n != fam.ground:
        raise DomainError(f"set has ground {e.n}, hypergraph has {fam.ground}")
    return sum(1 for b in fam if b.bits & e.bits)


def survivor_count(H: Hypergraph, chosen: Iterable[VertexSet]) -> int:
    """Number of edges of ``H`` disjoint from every chosen edge."""
    used = 0
    for c in chosen:
        if c.n != H.n:
            raise DomainError("chosen edge has a different ground set")
        used |= c.bits
    return sum(1 for b in H if not b.bits & used)


# -- canonical text encoding --------------------------------------------

def format_family(fam: SetFamily | Hypergraph) -> str:
    """First line ``n t l`` (l = 0 for a non-uniform family), then one sorted block per line."""
    if isinstance(fam, Hypergraph):
        fam = fam.family
    lines = [f"{fam.ground} {len(fam)} {fam.uniform or 0}"]
    lines += [" ".join(map(str, b)) for b in fam]
    return "\n".join(lines) + "\n"


def parse_family(text: str) -> SetFamily:
    rows = [ln.split() for ln in text.strip().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 3:
        raise DomainError("set family text must start with a 'n t l' header")
    n, t, l = map(int, rows[0])
    blocks = [[int(x) for x in r] for r in rows[1:]]
    if len(blocks) != t:
        raise DomainError(f"header announces {t} blocks, found {len(blocks)}")
    for b in blocks:
        if len(set(b)) != len(b):
            raise DomainError(f"repeated vertex in block {b}")
    return SetFamily.from_lists(n, blocks, l or None)


def read_hypergraph(path) -> Hypergraph:
    with open(path) as fh:
        return Hypergraph(parse_family(fh.read()))


def write_family(fam: SetFamily | Hypergraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_family(fam))


def family_from_rows(n: int, rows: Sequence[Sequence[int]]) -> SetFamily:
    """Uniform family from index rows, inferring the block size."""
    sizes = {len(r) for r in rows}
    return SetFamily.from_lists(n, rows, sizes.pop() if len(sizes) == 1 else None)
