"""Exact and Monte Carlo estimates of packing and matching probabilities.

``zeta`` is the probability that t independent uniform k-subsets of [n]
pairwise share at most one point; ``xi`` is the probability that m edges of
a hypergraph (a uniform m-subset, or m independent draws) form a matching.
All estimates come back as an :class:`EstimateReport` on the log scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .bounds import proof_delta
from .core import CapacityError, DomainError, Hypergraph, Params, SetFamily, is_packing, log_binom
from .rng import draw_ksets, indicator, substream

EXACT_GUARD = 10**8
CHUNK = 4096

METHODS = ("exact", "direct", "sis")


@dataclass(frozen=True)
class EstimateReport:
    log_p: float
    se_log: float
    trials: int
    successes: int | None
    seed: int | None
    method: str
    degenerate: bool = False

    @property
    def p(self) -> float:
        return math.exp(self.log_p)

    def as_row(self) -> dict:
        return {
            "method": self.method,
            "log_p": self.log_p,
            "se_log": self.se_log,
            "trials": self.trials,
            "successes": self.successes,
            "seed": self.seed,
            "degenerate": self.degenerate,
        }


def _exact_report(count: int, log_total: float) -> EstimateReport:
    if count == 0:
        return EstimateReport(-math.inf, 0.0, 0, None, None, "exact", degenerate=True)
    return EstimateReport(min(0.0, math.log(count) - log_total), 0.0, 0, None, None, "exact")


def _fraction_report(successes: int, trials: int, seed: int, method: str) -> EstimateReport:
    if successes == 0:
        return EstimateReport(-math.inf, math.nan, trials, 0, seed, method, degenerate=True)
    p = successes / trials
    return EstimateReport(math.log(p), math.sqrt((1 - p) / (p * trials)), trials, successes, seed, method)


def _count_cliques(adj: list[int], size: int) -> int:
    """Number of ``size``-cliques in the graph with int-bitmask rows ``adj``."""

    def rec(cand: int, need: int) -> int:
        if need == 1:
            return cand.bit_count()
        total = 0
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            nxt = cand & adj[v]
            if nxt.bit_count() >= need - 1:
                total += rec(nxt, need - 1)
        return total

    return rec((1 << len(adj)) - 1, size)


def _all_ksets(n: int, k: int) -> list[int]:
    return [sum(1 << v for v in c) for c in combinations(range(n), k)]


# -- zeta ------------------------------------------------------------------

def sample_kset_family(p: Params, seed: int) -> SetFamily:
    """t independent uniform k-subsets of [n]."""
    idx = draw_ksets(substream(seed, 0), p.t, p.n, p.k)
    return SetFamily.from_index_array(p.n, idx, p.k)


def zeta_exact(p: Params) -> EstimateReport:
    """Packing probability by enumeration.

    Duplicated blocks always meet in k >= 2 points, so ordered packing
    t-tuples are t! times the t-cliques of the compatibility graph on
    k-sets.
    """
    log_total = p.t * log_binom(p.n, p.k)
    if log_total > math.log(EXACT_GUARD) + 1e-9:
        raise CapacityError(f"C({p.n},{p.k})^{p.t} exceeds the enumeration guard {EXACT_GUARD}")
    if p.t == 1:
        return _exact_report(1, 0.0)
    sets = _all_ksets(p.n, p.k)
    adj = [0] * len(sets)
    for i, a in enumerate(sets):
        for j in range(i + 1, len(sets)):
            if (a & sets[j]).bit_count() <= 1:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    count = _count_cliques(adj, p.t) * math.factorial(p.t)
    return _exact_report(count, log_total)


def _packing_mask(inc: np.ndarray) -> np.ndarray:
    """inc: (trials, t, n) 0/1.  True where the t rows pairwise meet in <= 1 point."""
    ov = inc @ np.swapaxes(inc, 1, 2)
    t = inc.shape[1]
    ov[:, np.arange(t), np.arange(t)] = 0
    return ov.reshape(len(inc), -1).max(axis=1) <= 1.5


def zeta_mc_direct(p: Params, trials: int, seed: int) -> EstimateReport:
    """Fraction of independently sampled families that are packings."""
    if trials < 1:
        raise DomainError("trials must be positive")
    successes = 0
    for c, start in enumerate(range(0, trials, CHUNK)):
        size = min(CHUNK, trials - start)
        if p.t == 1:
            successes += size
            continue
        rng = substream(seed, 1, c)
        idx = draw_ksets(rng, size * p.t, p.n, p.k).reshape(size, p.t, p.k)
        successes += int(_packing_mask(indicator(idx, p.n)).sum())
    return _fraction_report(successes, trials, seed, "direct")


def log_mean_jackknife(log_w: np.ndarray) -> tuple[float, float]:
    """log of the mean weight and its jackknife standard error."""
    log_w = np.asarray(log_w, dtype=float)
    P = len(log_w)
    alive = np.isfinite(log_w)
    if not alive.any():
        return -math.inf, math.nan
    top = float(log_w[alive].max())
    w = np.exp(log_w - top)
    total = float(w.sum())
    est = top + math.log(total / P)
    if P < 2 or alive.sum() < 2:
        return est, math.inf
    with np.errstate(divide="ignore"):
        loo = np.log(np.maximum(total - w, 0.0) / (P - 1)) + top
    if not np.isfinite(loo).all():
        return est, math.inf
    se = math.sqrt((P - 1) / P * float(((loo - loo.mean()) ** 2).sum()))
    return est, se


def zeta_sis(p: Params, particles: int, probes: int, seed: int) -> EstimateReport:
    """Sequential importance sampling for the packing probability.

    Each particle grows a packing one block at a time: it draws ``probes``
    fresh uniform k-sets, multiplies its weight by the compatible fraction
    and moves on with a uniformly chosen compatible probe.  A particle with
    no compatible probe has weight zero.  The mean weight is unbiased for
    any ``probes``.
    """
    if particles < 1 or probes < 1:
        raise DomainError("particles and probes must be positive")
    n, k, t = p.n, p.k, p.t
    log_w = np.zeros(particles)
    for j in range(particles):
        rng = substream(seed, 2, j)
        packed = np.zeros((t, n))
        packed[0, draw_ksets(rng, 1, n, k)[0]] = 1.0
        lw = 0.0
        for i in range(1, t):
            cand = draw_ksets(rng, probes, n, k)
            ok = (indicator(cand, n) @ packed[:i].T <= 1.5).all(axis=1)
            good = np.flatnonzero(ok)
            if len(good) == 0:
                lw = -math.inf
                break
            lw += math.log(len(good) / probes)
            packed[i, cand[good[rng.integers(len(good))]]] = 1.0
        log_w[j] = lw
    est, se = log_mean_jackknife(log_w)
    if not math.isfinite(est):
        return EstimateReport(-math.inf, math.nan, particles, None, seed, "sis", degenerate=True)
    return EstimateReport(min(est, 0.0), se, particles, None, seed, "sis")


def zeta(p: Params, method: str = "exact", *, trials: int = 100_000, particles: int = 200,
         probes: int = 200, seed: int = 0) -> EstimateReport:
    if method == "exact":
        return zeta_exact(p)
    if method == "direct":
        return zeta_mc_direct(p, trials, seed)
    if method == "sis":
        return zeta_sis(p, particles, probes, seed)
    raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")


def ideal3_ratio(report: EstimateReport, p: Params) -> float:
    """log(1/zeta_hat) divided by t^2 k^4 / (4 n^2)."""
    return -report.log_p / (p.t**2 * p.k**4 / (4 * p.n**2))


# -- xi --------------------------------------------------------------------

def xi_exact(H: Hypergraph, m: int) -> EstimateReport:
    """Fraction of m-subsets of ``H`` that are matchings."""
    t = len(H)
    if not 1 <= m <= t:
        raise DomainError(f"need 1 <= m <= |H| = {t}")
    log_total = log_binom(t, m)
    if log_total > math.log(EXACT_GUARD) + 1e-9:
        raise CapacityError(f"C({t},{m}) exceeds the enumeration guard {EXACT_GUARD}")
    bits = [b.bits for b in H]
    adj = [sum(1 << j for j, b in enumerate(bits) if j != i and not a & b) for i, a in enumerate(bits)]
    return _exact_report(_count_cliques(adj, m), log_total)


def _draw_edge_indices(rng, size: int, t: int, m: int, independent: bool) -> np.ndarray:
    if independent:
        return rng.integers(0, t, size=(size, m))
    return draw_ksets(rng, size, t, m)


def xi_mc(H: Hypergraph, m: int, trials: int, seed: int, independent: bool = False) -> EstimateReport:
    """Monte Carlo matching probability.

    ``independent=False`` draws a uniform m-subset of the edges;
    ``independent=True`` draws m edges independently with replacement, and
    a repeated edge counts as a failure.
    """
    t = len(H)
    if m < 1 or (not independent and m > t) or t == 0:
        raise DomainError(f"invalid m={m} for |H|={t}")
    if trials < 1:
        raise DomainError("trials must be positive")
    meets = H.meets
    successes = 0
    for c, start in enumerate(range(0, trials, CHUNK)):
        size = min(CHUNK, trials - start)
        rng = substream(seed, 3, c)
        idx = _draw_edge_indices(rng, size, t, m, independent)
        bad = np.zeros(size, dtype=bool)
        for a in range(m):
            for b in range(a + 1, m):
                bad |= meets[idx[:, a], idx[:, b]]
        successes += int(size - bad.sum())
    return _fraction_report(successes, trials, seed, "direct")


class TraceStep(NamedTuple):
    step: int
    survivors: int
    low_interaction: int


def survivor_trace(H: Hypergraph, m: int, seed: int) -> list[TraceStep]:
    """One independent-draw trajectory of the shrinking survivor sets.

    Step j records |H_j| (edges disjoint from e_1..e_j) and the number of
    survivors meeting fewer than ``delta*|H_j|*l^2/n`` other survivors.  The
    trajectory stops early at the first draw that breaks the matching.
    """
    if len(H) == 0:
        raise DomainError("survivor_trace needs a nonempty hypergraph")
    n, l, t = H.n, H.l, len(H)
    delta = proof_delta(m * l * l / n)
    meets = H.meets
    rng = substream(seed, 4)
    alive = np.ones(t, dtype=bool)

    def record(step):
        idx = np.flatnonzero(alive)
        inter = meets[np.ix_(idx, idx)].sum(axis=1)
        low = int((inter < delta * len(idx) * l * l / n).sum())
        return TraceStep(step, len(idx), low)

    out = [record(0)]
    for step in range(1, m + 1):
        e = int(rng.integers(t))
        if not alive[e]:
            break
        alive &= ~meets[e]
        out.append(record(step))
    return out


# -- two-stage sampling and degree diagnostics -------------------------------

@dataclass(frozen=True)
class TwoStageSample:
    B: SetFamily
    C: SetFamily
    A: SetFamily
    eventP: bool
    eventQ: bool


def two_stage_sample(p: Params, seed: int) -> TwoStageSample:
    """A_i = B_i | C_i with B_i a uniform (k/2)-set and C_i uniform in its complement."""
    if p.k % 2:
        raise DomainError(f"two-stage sampling needs even k, got {p.k}")
    l = p.k // 2
    rng = substream(seed, 5)
    first = draw_ksets(rng, p.t, p.n, l)
    second = np.empty_like(first)
    for i in range(p.t):
        rest = np.setdiff1d(np.arange(p.n), first[i])
        second[i] = rest[draw_ksets(rng, 1, len(rest), l)[0]]
    B = SetFamily.from_index_array(p.n, first, l)
    C = SetFamily.from_index_array(p.n, second, l)
    A = SetFamily.from_index_array(p.n, np.hstack([first, second]), p.k)
    return TwoStageSample(B, C, A, is_packing(A), is_packing(B))


class DegreeCovariance(NamedTuple):
    empirical: float
    analytic: float
    se: float


def degree_covariance(p: Params, trials: int, seed: int) -> DegreeCovariance:
    """Covariance of the degrees of vertices 0 and 1 in a random k-set family."""
    n, k, t = p.n, p.k, p.t
    analytic = t * (k * (k - 1) / (n * (n - 1)) - k * k / (n * n))
    d0, d1 = np.empty(trials), np.empty(trials)
    for c, start in enumerate(range(0, trials, CHUNK)):
        size = min(CHUNK, trials - start)
        idx = draw_ksets(substream(seed, 6, c), size * t, n, k).reshape(size, t, k)
        d0[start:start + size] = (idx == 0).sum(axis=(1, 2))
        d1[start:start + size] = (idx == 1).sum(axis=(1, 2))
    prod = (d0 - d0.mean()) * (d1 - d1.mean())
    emp = float(prod.sum() / (trials - 1)) if trials > 1 else 0.0
    se = float(prod.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return DegreeCovariance(emp, analytic, se)
