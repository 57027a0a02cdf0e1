"""Acceptance gate: one PASS/FAIL line per criterion, printed past pytest's capture."""
import math
import time
from itertools import combinations

import numpy as np
import pytest

from cliquepack.bounds import csprop_check, ideal2_log
from cliquepack.constructions import example_hypergraph
from cliquepack.core import Hypergraph, Params, SetFamily
from cliquepack import estimators
from cliquepack.estimators import xi_exact, zeta_exact
from cliquepack.experiments import PRESETS, preset, render, run
from cliquepack.graphs import RandomGraph, conflict_graph, enumerate_cliques, exact_nu_k, gnp_half

from oracles import nu_brute, xi_independent_brute, zeta_brute


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed=None, limit=None):
        in_time = limit is None or elapsed <= limit
        verdict = "PASS" if ok and in_time else "FAIL"
        timing = "" if elapsed is None else f" [{elapsed:.1f}s" + (f" / {limit:g}s]" if limit else "]")
        with capsys.disabled():
            print(f"\n{verdict} criterion {number}: {detail}{timing}")
        assert ok, detail
        assert in_time, f"criterion {number} took {elapsed:.1f}s > {limit}s"
    return emit


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_c01_zeta_exact_matches_enumeration(report, preset_runs):
    rows, dt = timed(lambda: preset_runs("zeta-exact-grid"))
    bad = []
    for r in rows:
        want = zeta_brute(r["n"], r["k"], r["t"])
        got = math.exp(r["log_p"])
        if not math.isclose(got, float(want), rel_tol=1e-12, abs_tol=0 if want else 1e-300):
            bad.append((r["n"], r["k"], r["t"]))
    pinned = (math.isclose(zeta_exact(Params(4, 2, 2)).p, 5 / 6, rel_tol=1e-12)
              and math.isclose(zeta_exact(Params(5, 3, 2)).p, 3 / 10, rel_tol=1e-12))
    report(1, not bad and pinned and len(rows) == 36,
           f"{len(rows)} grid points vs enumeration, mismatches={bad}, pinned 5/6 and 3/10 ok={pinned}", dt, 10)


def test_c02_k2_identity(report, monkeypatch):
    # (8,2,6) has 28^6 ordered tuples, past the default guard; counting 6-cliques is still cheap
    monkeypatch.setattr(estimators, "EXACT_GUARD", 1e9)

    def check():
        worst, points = 0.0, 0
        for n in range(2, 9):
            for t in range(1, 7):
                p = Params(n, 2, t)
                z = zeta_exact(p).p
                ideal = math.exp(ideal2_log(p))
                points += 1
                if z == 0:
                    worst = max(worst, 0.0 if ideal == 0 else math.inf)
                else:
                    worst = max(worst, abs(ideal - z) / z)
        return worst, points
    (worst, points), dt = timed(check)
    report(2, worst <= 1e-12 and points == 42,
           f"max relative gap exp(ideal2) vs zeta_exact over {points} points (n<=8, t<=6): {worst:.2e}", dt, 10)


def _within(log_est, se, exact, degenerate, sigmas=5):
    if exact == 0:
        return degenerate
    if se == 0:
        return math.isclose(log_est, math.log(exact), rel_tol=1e-12, abs_tol=1e-12)
    return abs(log_est - math.log(exact)) <= sigmas * se


def test_c03_estimator_consistency(report, preset_runs):
    def go():
        zrows = preset_runs("zeta-consistency")
        xrows = preset_runs("xi-consistency")
        return zrows, xrows
    (zrows, xrows), dt = timed(go)
    zbad = []
    for r in zrows:
        exact = zeta_exact(Params(r["n"], r["k"], r["t"])).p
        if not _within(r["log_p"], r["se_log"], exact, r["degenerate"]):
            zbad.append((r["method"], r["n"], r["k"], r["t"]))
    xbad = []
    for r in xrows:
        if r["independent"]:
            ex = example_hypergraph(r["l"], r["s"], r["copies"])
            exact = float(xi_independent_brute([list(b) for b in ex.H], r["m"]))
        else:
            exact = math.exp(r["exact_log_p"])
        if not _within(r["mc_log_p"], r["mc_se_log"], exact, r["degenerate"]):
            xbad.append((r["l"], r["s"], r["copies"], r["m"], r["independent"]))
    k4 = xi_exact(Hypergraph.from_lists(4, combinations(range(4), 2), 2), 2).p
    ok = not zbad and not xbad and math.isclose(k4, 0.2, rel_tol=1e-12)
    report(3, ok, f"{len(zrows)} zeta rows (direct+sis), {len(xrows)} xi rows within 5 SE; "
                  f"failures zeta={zbad} xi={xbad}", dt, 120)


def test_c04_csprop_exact(report, preset_runs):
    def go():
        rows = preset_runs("csprop-fuzz")
        affine_bad = []
        checked = 0
        for l in (2, 3, 4, 5, 7):
            for s in range(1, l + 2):
                for copies in (1, 2, 3):
                    H = example_hypergraph(l, s, copies).H
                    for delta in (0.05, 0.1, 0.3, 0.5, 0.7, 1.0):
                        checked += 1
                        if not csprop_check(H, delta).holds:
                            affine_bad.append((l, s, copies, delta))
        return rows, checked, affine_bad
    (rows, checked, affine_bad), dt = timed(go)
    violations = [(r["n"], r["l"], r["delta"], r["seed"]) for r in rows if not r["holds"]]
    ok = len(rows) >= 1000 and not violations and not affine_bad
    report(4, ok, f"{len(rows)} random instances, {checked} affine Example checks; "
                  f"violations={violations + affine_bad}", dt, 60)


def test_c05_affine_lower_bound(report, preset_runs):
    (row,), dt = timed(lambda: preset_runs("affine-lowerbound"))
    ok = row["holds"] and row["n"] / 3 >= 30 and row["trials"] == 100_000
    report(5, ok, f"n={row['n']} m={row['m']} log(xi)/m={row['per_edge_log']:.4f} >= {row['floor']:.4f}", dt, 60)


def test_c06_survivor_bound(report, preset_runs):
    rows, dt = timed(lambda: preset_runs("survivor-trace"))
    bad = [(r["l"], r["s"], r["copies"], r["seed"]) for r in rows if not r["survivor_bound_ok"]]
    report(6, not bad, f"{len(rows)} trajectories, min slack {min(r['min_survivor_slack'] for r in rows):g}, "
                       f"violations={bad}", dt, 10)


def test_c07_nu_oracle(report, preset_runs):
    def go():
        rows = preset_runs("nu-k-oracle")
        k5 = exact_nu_k(enumerate_cliques(RandomGraph.complete(5), 3)).value
        bad = []
        for r in rows:
            cl = enumerate_cliques(gnp_half(r["n"], r["seed"]), r["k"])
            cl = SetFamily(cl.ground, cl.blocks[:r["max_cliques"]], cl.uniform)
            brute = nu_brute([list(b) for b in cl])
            chain = max(r["greedy_given"], r["greedy_min_degree"], r["greedy_best_random"]) <= r["nu"] <= r["trivial_bound"]
            if not (r["optimal"] and r["nu"] == brute and chain and r["cliques"] <= 12):
                bad.append(r["seed"])
        return rows, k5, bad
    (rows, k5, bad), dt = timed(go)
    report(7, k5 == 2 and not bad and len(rows) == 50,
           f"nu_3(K5)={k5}; {len(rows)} random instances vs brute force, mismatches={bad}", dt, 60)


def test_c08_conflict_statistics(report, preset_runs):
    rows, dt = timed(lambda: preset_runs("gamma-sweep"))
    M = np.array([r["M_emp"] for r in rows], dtype=float)
    f = math.comb(14, 4) * 2.0**-6
    z = (M.mean() - f) / (M.std(ddof=1) / math.sqrt(len(M)))
    k5 = conflict_graph(enumerate_cliques(RandomGraph.complete(5), 3)).edge_count
    report(8, abs(z) <= 5 and k5 == 30 and len(rows) == 200,
           f"mean clique count {M.mean():.3f} vs f(14,4)={f:.3f} (z={z:+.2f}); K5 conflict edges={k5}", dt, 120)


def test_c09_regime_diagnostic(report, preset_runs):
    rows, dt = timed(lambda: preset_runs("regime-diagnostic"))
    inside = sum(bool(r["in_band"]) for r in rows)
    ratios = ", ".join(f"{r['ideal3_ratio']:.2f}" for r in rows)
    small_t = all(r["t"] * r["k"] ** 3 < 0.5 * r["n"] ** 2 for r in rows)
    report(9, inside >= 0.8 * len(rows) and small_t,
           f"{inside}/{len(rows)} ratios in [0.4, 2.5]: {ratios}", dt, 600)


def test_c10_determinism(report, preset_runs):
    def go():
        diffs = []
        for name in PRESETS:
            cfg = preset(name)
            one = render(preset_runs(name), cfg.experiment, drop_volatile=True)
            eight = render(run(cfg, threads=8), cfg.experiment, drop_volatile=True)
            again = render(run(cfg, threads=1), cfg.experiment, drop_volatile=True) if name != "zeta-consistency" else one
            if not (one == eight == again):
                diffs.append(name)
        return diffs
    diffs, dt = timed(go)
    report(10, not diffs, f"{len(PRESETS)} presets byte-identical at threads 1 and 8 (wall_time excluded); "
                          f"differing={diffs}", dt)
