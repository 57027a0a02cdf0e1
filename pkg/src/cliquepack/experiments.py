"""Seeded parameter sweeps.

A sweep is described by a small TOML file::

    experiment = "zeta-sweep"
    master_seed = 7
    replicates = 1
    grid_mode = "zip"          # or "product"
    [grid]
    n = [4, 5]
    k = [2, 3]
    t = [2, 2]
    [settings]
    method = "exact"

Every (grid point, replicate) pair becomes one record whose seed is a
stable hash of ``(master_seed, point, replicate)``; adding a grid point
never moves another point's seed.  Records stream to the output file in
index order whatever the thread count.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

from . import __version__
from .bounds import (
    csprop_check,
    expected_tpackings_log,
    ideal1_log,
    ideal2_log,
    mideal_log,
    proof_delta,
    tmp2a_bound_log,
    tmp_bound_log,
)
from .constructions import example_hypergraph, random_nearly_disjoint
from .core import CapacityError, DomainError, Params, RegimeError, SetFamily, log2_f
from .estimators import ideal3_ratio, survivor_trace, xi_exact, xi_mc, zeta
from .graphs import aks_pipeline, enumerate_cliques, exact_nu_k, gamma_stats, gnp_half, greedy_packing, trivial_nu_bound
from .rng import derive_seed, substream

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

FORMATS = ("csv", "jsonl")
META_COLUMNS = ("experiment", "point", "replicate", "seed")
TAIL_COLUMNS = ("error", "wall_time", "version")
VOLATILE_COLUMNS = ("wall_time",)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    grid: dict[str, list]
    master_seed: int
    replicates: int = 1
    grid_mode: str = "product"
    settings: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "csv"

    def points(self) -> list[dict]:
        keys = list(self.grid)
        if self.grid_mode == "zip":
            return [dict(zip(keys, vals)) for vals in zip(*(self.grid[k] for k in keys))]
        return [dict(zip(keys, vals)) for vals in itertools.product(*(self.grid[k] for k in keys))]

    def to_dict(self) -> dict:
        d = {
            "experiment": self.experiment,
            "master_seed": self.master_seed,
            "replicates": self.replicates,
            "grid_mode": self.grid_mode,
            "format": self.format,
        }
        if self.output:
            d["output"] = self.output
        d["grid"] = self.grid
        if self.settings:
            d["settings"] = self.settings
        return d

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())


def config_from_dict(d: dict) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig(
            experiment=d["experiment"],
            grid={k: list(v) if isinstance(v, list) else [v] for k, v in d.get("grid", {}).items()},
            master_seed=d["master_seed"],
            replicates=d.get("replicates", 1),
            grid_mode=d.get("grid_mode", "product"),
            settings=dict(d.get("settings", {})),
            output=d.get("output"),
            format=d.get("format", "csv"),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc.args[0]!r}") from None
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return config_from_dict(data)


# -- experiment kinds --------------------------------------------------------

@dataclass(frozen=True)
class Kind:
    params: tuple[str, ...]       # recorded parameter columns
    required: tuple[str, ...]
    outputs: tuple[str, ...]
    run: Callable[[dict, int], dict]
    check: Callable[[dict], None]
    defaults: dict = field(default_factory=dict)


def _params(q) -> Params:
    return Params(int(q["n"]), int(q["k"]), int(q["t"]))


def _run_zeta(q, seed):
    p = _params(q)
    rep = zeta(p, q["method"], trials=int(q["trials"]), particles=int(q["particles"]),
               probes=int(q["probes"]), seed=seed)
    out = rep.as_row()
    del out["method"], out["seed"]
    out["ideal1_log"] = ideal1_log(p)
    out["ideal2_log"] = ideal2_log(p)
    out["ideal3_ratio"] = ideal3_ratio(rep, p) if not rep.degenerate else math.nan
    return out


def _check_zeta(q):
    _params(q)
    if q["method"] not in ("exact", "direct", "sis"):
        raise DomainError(f"unknown method {q['method']!r}")


def _run_xi(q, seed):
    ex = example_hypergraph(int(q["l"]), int(q["s"]), int(q["copies"]))
    H, m = ex.H, int(q["m"])
    indep = bool(q["independent"])
    out = {"n": ex.n, "t": ex.t}
    try:
        out["exact_log_p"] = xi_exact(H, m).log_p if m <= len(H) else -math.inf
    except CapacityError:
        out["exact_log_p"] = None
    rep = xi_mc(H, m, int(q["trials"]), seed, independent=indep)
    out.update(mc_log_p=rep.log_p, mc_se_log=rep.se_log, successes=rep.successes, trials=rep.trials,
               degenerate=rep.degenerate)
    l = ex.l
    out["mideal_log"] = mideal_log(ex.n, l, m).exact if l * l < ex.n else None
    try:
        out["tmp_bound_log"] = tmp_bound_log(ex.n, l, ex.t, m, float(q["kappa"]))
    except RegimeError:
        out["tmp_bound_log"] = None
    return out


def _check_xi(q):
    ex = example_hypergraph(int(q["l"]), int(q["s"]), int(q["copies"]))
    m = int(q["m"])
    if m < 1 or (not q["independent"] and m > ex.t):
        raise DomainError(f"m={m} invalid for {ex.t} edges")


def _run_compare(q, seed):
    p = _params(q)
    beta = float(q["beta"])
    a = tmp2a_bound_log(p, beta)
    rep = zeta(p, "sis", particles=int(q["particles"]), probes=int(q["probes"]), seed=seed)
    ratio = ideal3_ratio(rep, p) if not rep.degenerate else math.nan
    lo, hi = q["band"]
    return {
        "ideal1_log": ideal1_log(p),
        "ideal2_log": ideal2_log(p),
        "tmp2a_log": a,
        "expected_tpackings_log": expected_tpackings_log(p, a),
        "clique_exponent": log2_f(p.n, p.k) / math.log2(p.n),
        "sis_log_p": rep.log_p,
        "sis_se_log": rep.se_log,
        "degenerate": rep.degenerate,
        "ideal3_ratio": ratio,
        "in_band": bool(lo <= ratio <= hi),
    }


def _run_csprop(q, seed):
    n, l, delta = int(q["n"]), int(q["l"]), float(q["delta"])
    lo, hi = q["t_frac"]
    frac = lo + (hi - lo) * float(substream(seed, 10).random())
    t_target = max(1, round(frac * (n * (n - 1) // 2) / (l * (l - 1) // 2)))
    H = random_nearly_disjoint(n, l, t_target, seed)
    res = csprop_check(H, delta)
    return {"t_target": t_target, "t": len(H), "count": res.count, "bound": res.bound, "holds": res.holds}


def _check_csprop(q):
    if int(q["l"]) < 2 or int(q["n"]) < int(q["l"]) or float(q["delta"]) <= 0:
        raise DomainError(f"bad csprop point {q}")


def _run_affine(q, seed):
    ex = example_hypergraph(int(q["l"]), int(q["s"]), int(q["copies"]))
    m = math.floor(float(q["m_frac"]) * ex.n / ex.l)
    rep = xi_mc(ex.H, m, int(q["trials"]), seed, independent=True)
    floor = -math.log(ex.s) - float(q["slack"])
    per = rep.log_p / m
    return {"n": ex.n, "t": ex.t, "m": m, "log_xi": rep.log_p, "se_log": rep.se_log,
            "successes": rep.successes, "trials": rep.trials, "per_edge_log": per, "floor": floor,
            "holds": bool(per >= floor)}


def _check_affine(q):
    ex = example_hypergraph(int(q["l"]), int(q["s"]), int(q["copies"]))
    if math.floor(float(q["m_frac"]) * ex.n / ex.l) < 1:
        raise DomainError("m_frac leaves m = 0")


def _run_gamma(q, seed):
    st = gamma_stats(gnp_half(int(q["n"]), seed), int(q["k"]), int(q["budget"]))
    row = st.as_row()
    del row["n"], row["k"]
    row["M_ratio"] = st.M_emp / st.M_formula
    return row


def _check_nk(q):
    if int(q["n"]) < 1 or not 2 <= int(q["k"]) <= int(q["n"]):
        raise DomainError(f"bad (n, k) in {q}")


def _run_nu(q, seed):
    n, k = int(q["n"]), int(q["k"])
    G = gnp_half(n, seed)
    cl = enumerate_cliques(G, k)
    cap = int(q["max_cliques"])
    if cap and len(cl) > cap:
        cl = SetFamily(cl.ground, cl.blocks[:cap], cl.uniform)
    res = exact_nu_k(cl, int(q["budget"]))
    rand = max((len(greedy_packing(cl, "random", derive_seed(seed, r))) for r in range(int(q["greedy_orders"]))),
               default=0)
    packing, rep = aks_pipeline(G, k, seed=seed)
    return {
        "cliques": len(cl),
        "greedy_given": len(greedy_packing(cl, "given")),
        "greedy_min_degree": len(greedy_packing(cl, "min-degree")),
        "greedy_best_random": rand,
        "nu": res.value,
        "optimal": res.optimal,
        "trivial_bound": trivial_nu_bound(n, k),
        "aks_size": len(packing),
    }


def _run_trace(q, seed):
    ex = example_hypergraph(int(q["l"]), int(q["s"]), int(q["copies"]))
    m = int(q["m"])
    steps = survivor_trace(ex.H, m, seed)
    n, l = ex.n, ex.l
    delta = proof_delta(m * l * l / n)
    slack = min(st.survivors - (n / l - st.step) for st in steps)
    cs_ok = all(st.low_interaction < delta * st.survivors + n / l for st in steps)
    return {"n": n, "t": ex.t, "steps": steps[-1].step, "delta": delta, "min_survivor_slack": slack,
            "survivor_bound_ok": bool(slack >= 0), "csprop_ok": cs_ok, "final_survivors": steps[-1].survivors}


def _check_trace(q):
    example_hypergraph(int(q["l"]), int(q["s"]), int(q["copies"]))
    if int(q["m"]) < 1:
        raise DomainError("m must be positive")


KINDS: dict[str, Kind] = {
    "zeta-sweep": Kind(
        ("n", "k", "t", "method"), ("n", "k", "t"),
        ("log_p", "se_log", "trials", "successes", "degenerate", "ideal1_log", "ideal2_log", "ideal3_ratio"),
        _run_zeta, _check_zeta, {"method": "exact", "trials": 100_000, "particles": 200, "probes": 200}),
    "xi-sweep": Kind(
        ("l", "s", "copies", "m", "independent"), ("l", "s", "copies", "m"),
        ("n", "t", "exact_log_p", "mc_log_p", "mc_se_log", "successes", "trials", "degenerate",
         "mideal_log", "tmp_bound_log"),
        _run_xi, _check_xi, {"independent": False, "trials": 100_000, "kappa": 1.0}),
    "heuristic-compare": Kind(
        ("n", "k", "t", "beta"), ("n", "k", "t"),
        ("ideal1_log", "ideal2_log", "tmp2a_log", "expected_tpackings_log", "clique_exponent",
         "sis_log_p", "sis_se_log", "degenerate", "ideal3_ratio", "in_band"),
        _run_compare, lambda q: _params(q), {"beta": 1.0, "particles": 200, "probes": 200, "band": [0.4, 2.5]}),
    "csprop-fuzz": Kind(
        ("n", "l", "delta"), ("n", "l", "delta"),
        ("t_target", "t", "count", "bound", "holds"),
        _run_csprop, _check_csprop, {"t_frac": [0.02, 0.3]}),
    "affine-lowerbound": Kind(
        ("l", "s", "copies", "m_frac", "slack"), ("l", "s", "copies"),
        ("n", "t", "m", "log_xi", "se_log", "successes", "trials", "per_edge_log", "floor", "holds"),
        _run_affine, _check_affine, {"m_frac": 0.2, "slack": 0.35, "trials": 100_000}),
    "gamma-sweep": Kind(
        ("n", "k"), ("n", "k"),
        ("M_emp", "E_emp", "T_emp", "M_formula", "E_bound", "T_bound", "M_ratio"),
        _run_gamma, _check_nk, {"budget": 10**7}),
    "nu-k-sweep": Kind(
        ("n", "k", "max_cliques"), ("n", "k"),
        ("cliques", "greedy_given", "greedy_min_degree", "greedy_best_random", "nu", "optimal",
         "trivial_bound", "aks_size"),
        _run_nu, _check_nk, {"max_cliques": 0, "budget": 10**6, "greedy_orders": 100}),
    "survivor-trace": Kind(
        ("l", "s", "copies", "m"), ("l", "s", "copies", "m"),
        ("n", "t", "steps", "delta", "min_survivor_slack", "survivor_bound_ok", "csprop_ok", "final_survivors"),
        _run_trace, _check_trace),
}
EXPERIMENTS = tuple(KINDS)


def schema(experiment: str) -> tuple[str, ...]:
    kind = KINDS[experiment]
    return META_COLUMNS + kind.params + kind.outputs + TAIL_COLUMNS


def validate(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in KINDS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; expected one of {EXPERIMENTS}")
    kind = KINDS[cfg.experiment]
    if not isinstance(cfg.master_seed, int) or isinstance(cfg.master_seed, bool):
        raise ConfigError("master_seed must be an integer")
    if not isinstance(cfg.replicates, int) or cfg.replicates < 1:
        raise ConfigError("replicates must be a positive integer")
    if cfg.grid_mode not in ("product", "zip"):
        raise ConfigError(f"grid_mode must be 'product' or 'zip', got {cfg.grid_mode!r}")
    if cfg.format not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    if not cfg.grid or any(len(v) == 0 for v in cfg.grid.values()):
        raise ConfigError("grid is empty")
    if cfg.grid_mode == "zip" and len({len(v) for v in cfg.grid.values()}) != 1:
        raise ConfigError("zip grid lists must have equal lengths")
    unknown = set(cfg.grid) | set(cfg.settings)
    unknown -= set(kind.params) | set(kind.required) | set(kind.defaults)
    if unknown:
        raise ConfigError(f"unknown parameters for {cfg.experiment}: {sorted(unknown)}")
    for i, point in enumerate(cfg.points()):
        q = _merged(kind, cfg, point)
        missing = [k for k in kind.required if k not in q]
        if missing:
            raise ConfigError(f"grid point {i} lacks {missing}")
        try:
            kind.check(q)
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError(f"grid point {i} ({point}) is invalid: {exc}") from None


def _merged(kind: Kind, cfg: ExperimentConfig, point: dict) -> dict:
    return {**kind.defaults, **cfg.settings, **point}


def run_one(cfg: ExperimentConfig, index: int, replicate: int, point: dict) -> dict:
    kind = KINDS[cfg.experiment]
    q = _merged(kind, cfg, point)
    seed = derive_seed(cfg.master_seed, index, replicate)
    row = dict.fromkeys(schema(cfg.experiment))
    row.update(experiment=cfg.experiment, point=index, replicate=replicate, seed=seed, version=__version__)
    for p in kind.params:
        row[p] = q.get(p)
    t0 = time.perf_counter()
    try:
        out = kind.run(q, seed)
        extra = set(out) - set(kind.outputs)
        assert not extra, f"unexpected outputs {extra}"
        row.update(out)
    except CapacityError as exc:
        row["error"] = f"capacity: {exc}"
    row["wall_time"] = round(time.perf_counter() - t0, 6)
    return row


def tasks(cfg: ExperimentConfig) -> list[tuple[int, int, dict]]:
    return [(i, r, pt) for i, pt in enumerate(cfg.points()) for r in range(cfg.replicates)]


def iter_records(cfg: ExperimentConfig, threads: int = 1) -> Iterable[dict]:
    """Records in (point, replicate) order.  ``threads`` only affects speed."""
    validate(cfg)
    jobs = tasks(cfg)
    if threads <= 1:
        for i, r, pt in jobs:
            yield run_one(cfg, i, r, pt)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield from pool.map(lambda job: run_one(cfg, *job), jobs)


def run(cfg: ExperimentConfig, threads: int = 1, out=None, fmt: str | None = None) -> list[dict]:
    """Run the sweep, streaming rows to ``out`` (path or text stream) when given."""
    fmt = fmt or cfg.format
    records = []
    fh, close = _open(out)
    try:
        writer = RecordWriter(fh, cfg.experiment, fmt) if fh else None
        for rec in iter_records(cfg, threads):
            records.append(rec)
            if writer:
                writer.write(rec)
                fh.flush()
    finally:
        if close:
            fh.close()
    return records


def _open(out):
    if out is None:
        return None, False
    if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
        return open(out, "w", newline=""), True
    return out, False


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return json.dumps(v)
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


class RecordWriter:
    def __init__(self, fh, experiment: str, fmt: str = "csv"):
        if fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        self.fh, self.fmt, self.columns = fh, fmt, schema(experiment)
        if fmt == "csv":
            self._csv = csv.writer(fh, lineterminator="\n")
            self._csv.writerow(self.columns)

    def write(self, rec: dict):
        if self.fmt == "csv":
            self._csv.writerow([_cell(rec.get(c)) for c in self.columns])
        else:
            self.fh.write(json.dumps({c: _json_value(rec.get(c)) for c in self.columns}) + "\n")


def render(records: list[dict], experiment: str, fmt: str = "csv", drop_volatile: bool = False) -> str:
    buf = io.StringIO()
    w = RecordWriter(buf, experiment, fmt)
    for rec in records:
        w.write(rec)
    text = buf.getvalue()
    if drop_volatile and fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        keep = [i for i, c in enumerate(rows[0]) if c not in VOLATILE_COLUMNS]
        out = io.StringIO()
        cw = csv.writer(out, lineterminator="\n")
        for r in rows:
            cw.writerow([r[i] for i in keep])
        text = out.getvalue()
    return text


def read_csv(path_or_text) -> list[dict]:
    text = path_or_text
    if "\n" not in str(path_or_text):
        with open(path_or_text, newline="") as fh:
            text = fh.read()
    return list(csv.DictReader(io.StringIO(text)))


# -- presets ------------------------------------------------------------------

def _zeta_grid() -> dict[str, list]:
    pts = [(n, k, t) for n in range(2, 7) for k in (2, 3) if k <= n for t in range(1, 5)]
    return {"n": [p[0] for p in pts], "k": [p[1] for p in pts], "t": [p[2] for p in pts]}


def _zeta_consistency_grid() -> dict[str, list]:
    g = _zeta_grid()
    size = len(g["n"])
    return {**{k: v * 2 for k, v in g.items()}, "method": ["direct"] * size + ["sis"] * size}


def _regime_grid() -> dict[str, list]:
    pts = [(n, k, max(2, round(frac * n * n / k**3))) for n in (60, 90) for k in (3, 4) for frac in (0.15, 0.3)]
    return {"n": [p[0] for p in pts], "k": [p[1] for p in pts], "t": [p[2] for p in pts]}


SURVIVOR_INSTANCES = [(2, 3, 2, 4), (2, 3, 8, 8), (3, 2, 10, 6), (3, 4, 5, 6), (4, 3, 4, 6), (4, 5, 2, 4),
                      (5, 6, 2, 4), (7, 4, 1, 3), (8, 9, 1, 4), (9, 10, 1, 4)]


def _presets() -> dict[str, dict]:
    return {
        "zeta-exact-grid": {
            "experiment": "zeta-sweep", "master_seed": 1, "grid_mode": "zip", "grid": _zeta_grid(),
            "settings": {"method": "exact"},
        },
        "zeta-consistency": {
            "experiment": "zeta-sweep", "master_seed": 2, "grid_mode": "zip", "grid": _zeta_consistency_grid(),
            "settings": {"trials": 100_000, "particles": 200, "probes": 200},
        },
        "xi-consistency": {
            "experiment": "xi-sweep", "master_seed": 3, "grid_mode": "zip",
            "grid": {"l": [2, 2, 2, 2, 2], "s": [3, 3, 3, 3, 3], "copies": [1, 1, 2, 2, 2],
                     "m": [2, 2, 2, 3, 4], "independent": [False, True, False, False, False]},
            "settings": {"trials": 100_000},
        },
        "csprop-fuzz": {
            "experiment": "csprop-fuzz", "master_seed": 4, "grid_mode": "zip", "replicates": 112,
            "grid": {"n": [50] * 3 + [100] * 3 + [200] * 3, "l": [3] * 3 + [4] * 3 + [5] * 3,
                     "delta": [0.1, 0.3, 0.7] * 3},
        },
        "affine-lowerbound": {
            "experiment": "affine-lowerbound", "master_seed": 5,
            "grid": {"l": [3], "s": [2], "copies": [10]},
            "settings": {"m_frac": 0.2, "slack": 0.35, "trials": 100_000},
        },
        "survivor-trace": {
            "experiment": "survivor-trace", "master_seed": 6, "grid_mode": "zip", "replicates": 50,
            "grid": {key: [inst[i] for inst in SURVIVOR_INSTANCES] for i, key in enumerate(("l", "s", "copies", "m"))},
        },
        "nu-k-oracle": {
            "experiment": "nu-k-sweep", "master_seed": 7, "replicates": 50,
            "grid": {"n": [9], "k": [3], "max_cliques": [12]},
            "settings": {"budget": 10**6, "greedy_orders": 100},
        },
        "gamma-sweep": {
            "experiment": "gamma-sweep", "master_seed": 8, "replicates": 200, "grid": {"n": [14], "k": [4]},
        },
        "regime-diagnostic": {
            "experiment": "heuristic-compare", "master_seed": 9, "grid_mode": "zip", "grid": _regime_grid(),
            "settings": {"particles": 200, "probes": 200, "beta": 1.0, "band": [0.4, 2.5]},
        },
    }


PRESETS = tuple(_presets())


def preset(name: str) -> ExperimentConfig:
    table = _presets()
    if name not in table:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return config_from_dict(table[name])
