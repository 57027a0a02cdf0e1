"""Command line entry point: ``cliquepack <subcommand> ...``.

Exit codes: 0 success, 2 bad arguments or config, 3 capacity error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import __version__
from .bounds import heuristic_panel
from .constructions import (
    affine_plane,
    example_hypergraph,
    perfect_matching_hypergraph,
    random_nearly_disjoint,
)
from .core import CapacityError, DomainError, Hypergraph, Params, SetFamily, format_family, read_hypergraph
from .estimators import xi_exact, xi_mc, zeta
from .experiments import FORMATS, PRESETS, ConfigError, load_config, preset, run
from .graphs import ORDERS, aks_pipeline, enumerate_cliques, exact_nu_k, gamma_stats, gnp_half, greedy_packing, trivial_nu_bound
from .rng import derive_seed

THREADS_ENV = "CLIQUEPACK_THREADS"


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(header, rows, out):
    with _sink(out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in r])


class _sink:
    def __init__(self, out):
        self.out = out

    def __enter__(self):
        self.fh = open(self.out, "w", newline="") if self.out else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.out:
            self.fh.close()


def cmd_construct(a):
    if a.kind == "affine":
        plane = affine_plane(a.l)
        fam = SetFamily(plane.points, plane.lines, a.l)
    elif a.kind == "example":
        fam = example_hypergraph(a.l, a.s, a.copies).H
    elif a.kind == "matching":
        fam = perfect_matching_hypergraph(a.n, a.l)
    else:
        fam = random_nearly_disjoint(a.n, a.l, a.t, a.seed)
    _emit(format_family(fam), a.out)


def cmd_zeta(a):
    p = Params(a.n, a.k, a.t)
    rep = zeta(p, a.method, trials=a.trials, particles=a.particles, probes=a.probes, seed=a.seed)
    _table(["method", "n", "k", "t", "log_p", "se_log", "trials", "seed", "degenerate"],
           [[rep.method, p.n, p.k, p.t, rep.log_p, rep.se_log, rep.trials, a.seed, str(rep.degenerate).lower()]],
           a.out)


def cmd_xi(a):
    H = read_hypergraph(a.hypergraph)
    if a.method == "exact":
        rep = xi_exact(H, a.m)
    else:
        rep = xi_mc(H, a.m, a.trials, a.seed, independent=a.independent)
    _table(["method", "n", "l", "t", "m", "independent", "log_p", "se_log", "trials", "seed", "degenerate"],
           [[rep.method, H.n, H.l, len(H), a.m, str(a.independent).lower(), rep.log_p, rep.se_log, rep.trials,
             a.seed, str(rep.degenerate).lower()]], a.out)


def cmd_bounds(a):
    p = Params(a.n, a.k, a.t)
    rows = []
    for prof in heuristic_panel(p, a.beta):
        consts = ";".join(f"{k}={v!r}" for k, v in prof.constants.items())
        rows.append([prof.name, p.n, p.k, p.t, prof.log_value, str(prof.regime_ok).lower(), consts])
    _table(["formula", "n", "k", "t", "log_value", "regime_ok", "constants"], rows, a.out)


def _samples(a):
    return [a.seed] if a.samples == 1 else [derive_seed(a.seed, i) for i in range(a.samples)]


def cmd_cliques(a):
    _emit(format_family(enumerate_cliques(gnp_half(a.n, a.seed), a.k, a.budget)), a.out)


def cmd_gamma(a):
    rows = []
    for s in _samples(a):
        st = gamma_stats(gnp_half(a.n, s), a.k, a.budget)
        rows.append([s] + list(st.as_row().values()))
    _table(["seed", "n", "k", "M_emp", "E_emp", "T_emp", "M_formula", "E_bound", "T_bound"], rows, a.out)


def cmd_nu_k(a):
    rows = []
    for s in _samples(a):
        cl = enumerate_cliques(gnp_half(a.n, s), a.k)
        greedy = greedy_packing(cl, a.order, seed=s)
        res = exact_nu_k(cl, a.budget)
        rows.append([s, a.n, a.k, len(cl), a.order, len(greedy), res.value, str(res.optimal).lower(),
                     trivial_nu_bound(a.n, a.k)])
    _table(["seed", "n", "k", "cliques", "order", "greedy", "nu", "optimal", "trivial_bound"], rows, a.out)


def cmd_aks(a):
    rows = []
    for s in _samples(a):
        packing, rep = aks_pipeline(gnp_half(a.n, s), a.k, a.delta_frac, seed=s)
        rows.append([s, a.n, a.k] + list(vars(rep).values()))
    _table(["seed", "n", "k", "cliques", "sample_size", "delta_frac", "sample_edges", "triangles_removed",
            "triangle_free_size", "independent_size"], rows, a.out)


def cmd_run(a):
    if bool(a.config) == bool(a.preset):
        raise ConfigError("give exactly one of --config or --preset")
    cfg = load_config(a.config) if a.config else preset(a.preset)
    out = a.out or cfg.output
    fmt = a.format or cfg.format
    if out:
        run(cfg, threads=a.threads, out=out, fmt=fmt)
    else:
        run(cfg, threads=a.threads, out=sys.stdout, fmt=fmt)


def cmd_preset(a):
    if a.list or not a.name:
        print("\n".join(PRESETS))
        return
    _emit(preset(a.name).to_toml(), a.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cliquepack", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--out", help="output file (default stdout)")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("construct", help="write a hypergraph in the canonical text format")
    p.add_argument("--kind", choices=("affine", "example", "matching", "random"), required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("zeta", help="packing probability of t random k-sets")
    p.add_argument("--method", choices=("exact", "direct", "sis"), default="exact")
    for name in ("n", "k", "t"):
        p.add_argument(f"--{name}", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--particles", type=int, default=200)
    p.add_argument("--probes", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("xi", help="matching probability of m edges of a hypergraph file")
    p.add_argument("--method", choices=("exact", "direct"), default="exact")
    p.add_argument("--hypergraph", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--independent", action="store_true", help="draw edges independently with replacement")
    common(p)
    p.set_defaults(func=cmd_xi)

    p = sub.add_parser("bounds", help="heuristic and bound panel")
    for name in ("n", "k", "t"):
        p.add_argument(f"--{name}", type=int, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    common(p, seed=False)
    p.set_defaults(func=cmd_bounds)

    for name, func, help_ in (("cliques", cmd_cliques, "k-cliques of G(n,1/2)"),
                              ("gamma", cmd_gamma, "conflict-graph statistics"),
                              ("nu-k", cmd_nu_k, "greedy and exact clique packing number"),
                              ("aks", cmd_aks, "subsample / triangle-free / independent-set packing")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--samples", type=int, default=1)
        p.add_argument("--budget", type=int, default=10**7 if name != "nu-k" else 10**6)
        if name == "nu-k":
            p.add_argument("--order", choices=ORDERS, default="min-degree")
        if name == "aks":
            p.add_argument("--delta-frac", type=float, default=None)
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("run", help="run an experiment sweep")
    p.add_argument("--config")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help=f"worker threads (speed only; default ${THREADS_ENV} or 1)")
    common(p, seed=False)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="print a shipped experiment config")
    p.add_argument("name", nargs="?", choices=PRESETS)
    p.add_argument("--list", action="store_true")
    common(p, seed=False)
    p.set_defaults(func=cmd_preset)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
