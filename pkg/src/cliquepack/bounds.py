"""Closed-form heuristics and bounds, all on the natural-log scale.

Free constants (the beta of the packing bound, the kappa standing in for an
implied Omega-constant) are always passed in by the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .core import LN2, DomainError, Hypergraph, Params, RegimeError, is_packing, log2_f

E = math.e


@dataclass(frozen=True)
class BoundProfile:
    name: str
    log_value: float
    regime_ok: bool
    constants: dict = field(default_factory=dict)
    flagged: bool = False


def ideal1_log(p: Params) -> float:
    """Independence guess for log zeta: -t^2 k^4 / (4 n^2)."""
    return -(p.t**2) * p.k**4 / (4 * p.n**2)


def ideal2_log(p: Params) -> float:
    """log P(m = t*C(k,2) independent uniform pairs are distinct)."""
    N = p.n * (p.n - 1) // 2
    m = p.t * p.k * (p.k - 1) // 2
    if m > N:
        return -math.inf
    if m <= 100_000:
        return math.fsum(math.log1p(-i / N) for i in range(1, m))
    # prod_{i<m} (N - i)/N = N! / ((N-m)! N^m)
    return math.lgamma(N + 1) - math.lgamma(N - m + 1) - m * math.log(N)


class MidealLog(NamedTuple):
    exact: float
    approx: float


def mideal_log(n: int, l: int, m: int) -> MidealLog:
    """(1 - l^2/n)^C(m,2) and its exp(-cm/2) approximation, c = m l^2 / n."""
    if l * l >= n:
        raise DomainError(f"need l^2 < n, got l={l}, n={n}")
    c = m * l * l / n
    return MidealLog(m * (m - 1) / 2 * math.log1p(-l * l / n), -c * m / 2)


def packing_D(p: Params) -> float:
    return p.t * p.k**3 / p.n**2


def tmp2a_bound_log(p: Params, beta: float) -> float:
    """Upper bound on log zeta at t = D n^2 / k^3; the two cases split at D = e."""
    if beta <= 0:
        raise DomainError("beta must be positive")
    D = packing_D(p)
    factor = D if D <= E else math.log(D)
    return -beta * factor * p.t * p.k


def matching_c(n: int, l: int, t: int, m: int) -> float:
    return min(m * l * l / n, t * l / n)


def tmp_bound_log(n: int, l: int, t: int, m: int, kappa: float) -> float:
    """Upper bound shape on log P(m-subset is a matching); kappa stands in for Omega."""
    if t * l <= n:
        raise RegimeError(f"bound is void for t <= n/l (t={t}, n/l={n / l:g})")
    if kappa <= 0:
        raise DomainError("kappa must be positive")
    c = matching_c(n, l, t, m)
    return -kappa * c * m if c <= E else -kappa * math.log(c) * m


def proof_delta(c: float) -> float:
    """1/e when c <= e, otherwise log(c)/c."""
    return 1 / E if c <= E else math.log(c) / c


def chernoff_upper_log(mu: float, dev: float) -> float:
    """log bound on P(X > mu + dev) for a binomial X with mean mu."""
    if mu < 0 or dev <= 0:
        raise DomainError("need mu >= 0 and dev > 0")
    return -dev * dev / (2 * (mu + dev / 3))


def chernoff_mult_upper_log(mu: float, K: float) -> float:
    """log bound on P(X > K mu); vacuous for K <= e."""
    if mu <= 0:
        raise DomainError("need mu > 0")
    return -K * mu * math.log(K / E)


def janson_bound_log(mu: float, delta_: float) -> float:
    if mu < 0 or delta_ < 0:
        raise DomainError("need mu, delta >= 0")
    return -mu + delta_


def expected_tpackings_log(p: Params, log_zeta_upper: float) -> float:
    """log of zeta * f(k)^t, the expected number of t-packings of k-cliques."""
    if log_zeta_upper == -math.inf:
        return -math.inf
    return log_zeta_upper + p.t * log2_f(p.n, p.k) * LN2


class CSPropResult(NamedTuple):
    count: int
    bound: float
    holds: bool


def csprop_check(H: Hypergraph, delta_: float) -> CSPropResult:
    """Count edges e with I(e,H) < delta*|H|*l^2/n and compare with delta*|H| + n/l."""
    if delta_ <= 0:
        raise DomainError("delta must be positive")
    if not is_packing(H.family):
        raise DomainError("hypergraph is not nearly-disjoint")
    n, l, t = H.n, H.l, len(H)
    bound = delta_ * t + n / l
    if t == 0:
        return CSPropResult(0, bound, True)
    inter = H.meets.sum(axis=1)
    count = int((inter < delta_ * t * l * l / n).sum())
    return CSPropResult(count, bound, count < bound)


PANEL_FORMULAS = ("ideal1", "ideal2", "tmp2a", "expected_tpackings", "clique_exponent")


def heuristic_panel(p: Params, beta: float = 1.0) -> list[BoundProfile]:
    """ideal1/ideal2, the packing bound, the t-packing count and the f(k) exponent at one point."""
    k_ok = p.k_regime_ok
    t_small = p.t * p.k**2 <= p.n**2 / 10
    D = packing_D(p)
    i2 = ideal2_log(p)
    a = tmp2a_bound_log(p, beta)
    log2n = math.log2(p.n)
    lf = log2_f(p.n, p.k)
    return [
        BoundProfile("ideal1", ideal1_log(p), k_ok and t_small),
        BoundProfile("ideal2", i2, k_ok and t_small, flagged=i2 == -math.inf),
        BoundProfile("tmp2a", a, k_ok and D >= 0.1, {"beta": beta, "D": D}),
        BoundProfile("expected_tpackings", expected_tpackings_log(p, a), k_ok and D >= 0.1, {"beta": beta}),
        BoundProfile("clique_exponent", lf * LN2, k_ok, {"C": lf / log2n if log2n > 0 else math.nan}),
    ]
