import json
import math

import pytest

from cliquepack.experiments import (
    EXPERIMENTS,
    PRESETS,
    ConfigError,
    config_from_dict,
    load_config,
    preset,
    read_csv,
    render,
    run,
    schema,
)
from cliquepack.rng import derive_seed

ZETA_TWO = {"experiment": "zeta-sweep", "master_seed": 11, "grid_mode": "zip",
            "grid": {"n": [4, 5], "k": [2, 3], "t": [2, 2]}}


def test_zeta_sweep_exact_rows():
    recs = run(config_from_dict(ZETA_TWO))
    assert [r["log_p"] for r in recs] == [pytest.approx(math.log(5 / 6)), pytest.approx(math.log(0.3))]
    assert all(r["error"] is None for r in recs)


def test_product_grid_size():
    cfg = config_from_dict({"experiment": "zeta-sweep", "master_seed": 0,
                            "grid": {"n": [5, 6], "k": [2, 3], "t": [1, 2, 3]}})
    assert len(cfg.points()) == 12


@pytest.mark.parametrize("grid", [{}, {"n": [], "k": [2], "t": [1]}])
def test_empty_grid(grid):
    with pytest.raises(ConfigError):
        config_from_dict({"experiment": "zeta-sweep", "master_seed": 0, "grid": grid})


@pytest.mark.parametrize("patch", [
    {"experiment": "nope"},
    {"master_seed": "x"},
    {"replicates": 0},
    {"grid_mode": "diag"},
    {"format": "xml"},
    {"grid": {"n": [4], "k": [5], "t": [1]}},
    {"grid": {"n": [4], "k": [2], "t": [1], "colour": [1]}},
    {"grid": {"n": [4, 5], "k": [2], "t": [1]}, "grid_mode": "zip"},
    {"grid": {"n": [4], "k": [2]}},
])
def test_invalid_configs(patch):
    with pytest.raises(ConfigError):
        config_from_dict({**ZETA_TWO, **patch})


def test_missing_seed():
    d = dict(ZETA_TWO)
    del d["master_seed"]
    with pytest.raises(ConfigError):
        config_from_dict(d)


def test_toml_round_trip(tmp_path):
    for name in PRESETS:
        cfg = preset(name)
        path = tmp_path / f"{name}.toml"
        path.write_text(cfg.to_toml())
        assert load_config(path) == cfg


def test_bad_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("experiment = [")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml")


def test_deterministic_rerun():
    cfg = config_from_dict({**ZETA_TWO, "settings": {"method": "direct", "trials": 3000}, "replicates": 2})
    a, b = run(cfg), run(cfg)
    assert render(a, cfg.experiment, drop_volatile=True) == render(b, cfg.experiment, drop_volatile=True)


def test_seed_stable_when_point_added():
    small = config_from_dict({**ZETA_TWO, "settings": {"method": "direct", "trials": 2000}})
    big = config_from_dict({**ZETA_TWO, "settings": {"method": "direct", "trials": 2000},
                            "grid": {"n": [4, 5, 6], "k": [2, 3, 3], "t": [2, 2, 2]}})
    ra, rb = run(small), run(big)
    assert [r["seed"] for r in ra] == [r["seed"] for r in rb[:2]]
    assert [r["log_p"] for r in ra] == [r["log_p"] for r in rb[:2]]
    assert ra[1]["seed"] == derive_seed(11, 1, 0)


def test_csv_header_and_parse(tmp_path):
    out = tmp_path / "z.csv"
    cfg = config_from_dict(ZETA_TWO)
    run(cfg, out=out)
    rows = read_csv(out)
    assert out.read_text().splitlines()[0].split(",") == list(schema("zeta-sweep"))
    assert float(rows[0]["log_p"]) == pytest.approx(math.log(5 / 6))
    assert rows[0]["degenerate"] == "false"


def test_jsonl(tmp_path):
    out = tmp_path / "z.jsonl"
    run(config_from_dict(ZETA_TWO), out=out, fmt="jsonl")
    lines = [json.loads(s) for s in out.read_text().splitlines()]
    assert len(lines) == 2 and list(lines[0]) == list(schema("zeta-sweep"))


def test_capacity_error_recorded():
    cfg = config_from_dict({"experiment": "zeta-sweep", "master_seed": 0, "grid": {"n": [40], "k": [5], "t": [4]}})
    (rec,) = run(cfg)
    assert rec["error"].startswith("capacity") and rec["log_p"] is None


def test_unknown_preset():
    with pytest.raises(ConfigError, match="zeta-exact-grid"):
        preset("nope")


def test_preset_list_stable():
    assert PRESETS == tuple(PRESETS) and len(set(PRESETS)) == len(PRESETS)
    cfg = preset("affine-lowerbound")
    assert cfg.experiment == "affine-lowerbound" and cfg.points() == [{"l": 3, "s": 2, "copies": 10}]


def test_every_experiment_has_schema():
    for name in EXPERIMENTS:
        cols = schema(name)
        assert len(cols) == len(set(cols))


def test_threads_do_not_change_output():
    cfg = config_from_dict({**ZETA_TWO, "settings": {"method": "sis", "particles": 50, "probes": 50},
                            "replicates": 3})
    a = render(run(cfg, threads=1), cfg.experiment, drop_volatile=True)
    b = render(run(cfg, threads=4), cfg.experiment, drop_volatile=True)
    assert a == b


@pytest.mark.parametrize("experiment,grid", [
    ("xi-sweep", {"l": [2], "s": [3], "copies": [2], "m": [3]}),
    ("heuristic-compare", {"n": [30], "k": [3], "t": [5]}),
    ("csprop-fuzz", {"n": [40], "l": [3], "delta": [0.3]}),
    ("gamma-sweep", {"n": [10], "k": [3]}),
    ("nu-k-sweep", {"n": [8], "k": [3], "max_cliques": [10]}),
    ("survivor-trace", {"l": [2], "s": [3], "copies": [2], "m": [3]}),
])
def test_each_kind_runs(experiment, grid):
    settings = {"trials": 2000} if experiment == "xi-sweep" else {}
    (rec,) = run(config_from_dict({"experiment": experiment, "master_seed": 3, "grid": grid, "settings": settings}))
    assert rec["error"] is None and set(rec) == set(schema(experiment))
