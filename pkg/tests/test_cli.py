import csv
import subprocess
import sys

import numpy as np
import pytest

from lowmach.cli import (
    ConfigError, RunConfig, cmd_ap_sweep, cmd_convergence, main, parse_config, read_fields,
)
from lowmach.core import GridSpec, ModelParams
from lowmach.problems import init_stationary_vortex


def _csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_empty_file_gives_defaults(tmp_path):
    f = tmp_path / "empty.cfg"
    f.write_text("# nothing here\n\n")
    cfg = parse_config(f)
    assert cfg == RunConfig()
    assert (cfg.cfl, cfg.tableau, cfg.gamma) == (0.45, "DP2-A(2,4,2)", 2.0)


def test_precedence(tmp_path):
    f = tmp_path / "a.cfg"
    f.write_text("epsilon = 1e-2\ncfl = 0.3  # comment\nt-end = 0.5\n")
    cfg = parse_config(f, {"epsilon": 1e-3}, {"cfl": 0.2, "n": 32})
    assert cfg.epsilon == 1e-3 and cfg.cfl == 0.3 and cfg.n == 32 and cfg.t_end == 0.5


@pytest.mark.parametrize("text, needle", [
    ("cfl = 1.5\n", "cfl"),
    ("bogus = 1\n", "bogus"),
    ("n = many\n", "expected int"),
    ("just words\n", "key = value"),
    ("tableau = RK4\n", "available"),
    ("limiter = superbee\n", "limiter"),
])
def test_bad_config_entries(tmp_path, text, needle):
    f = tmp_path / "bad.cfg"
    f.write_text("problem = stationary_vortex\n" + text)
    with pytest.raises(ConfigError) as exc:
        parse_config(f)
    assert needle in str(exc.value)
    assert "bad.cfg:2" in str(exc.value)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "nope.cfg")


def test_exit_codes(tmp_path):
    assert main(["run", "--cfl", "1.5", "--out", str(tmp_path)]) == 1
    assert main(["run", "--tableau", "nope", "--out", str(tmp_path)]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["run", "--limiter", "superbee"])
    assert exc.value.code == 1
    assert main(["tableau-check", "DP1-A(2,4,2)"]) == 0
    assert main(["tableau-check", "nope"]) == 1


def test_run_writes_dumps_and_diagnostics(tmp_path):
    out = tmp_path / "r"
    code = main(["run", "--problem", "stationary_vortex", "--n", "16", "--t-end", "0.3",
                 "--epsilon", "1e-2", "--out", str(out)])
    assert code == 0
    rows = _csv(out / "diagnostics.csv")
    assert rows[0] == ["t", "dt", "ke", "rel_ke_change", "max_div_u", "rho_osc"]
    t = [float(r[0]) for r in rows[1:]]
    assert all(b > a for a, b in zip(t, t[1:])) and t[-1] == 0.3
    assert sum(float(r[1]) for r in rows[1:]) == pytest.approx(0.3, abs=1e-15)
    f0 = read_fields(out / "fields_0.000000.dat")
    ref = init_stationary_vortex(GridSpec.square(16), ModelParams(1e-2))
    assert np.array_equal(f0["rho"], ref.rho) and np.array_equal(f0["q1"], ref.q[..., 0])
    assert f0["n"] == (16, 16) and f0["epsilon"] == 1e-2 and f0["gamma"] == 2.0
    assert (out / "fields_0.300000.dat").exists()


def test_dump_layout_is_x_fastest(tmp_path):
    main(["run", "--problem", "traveling_vortex", "--n", "8", "--t-end", "0", "--out", str(tmp_path)])
    lines = (tmp_path / "fields_0.000000.dat").read_text().splitlines()
    assert lines[0] == "8 8" and len(lines) == 3 + 64
    assert len(lines[3].split()) == 5
    assert all(len(tok.split("e")[0].replace("-", "").replace(".", "")) == 17 for tok in lines[3].split())
    f = read_fields(tmp_path / "fields_0.000000.dat")
    # Line 3 + k holds cell (ix, iy) = (k % 8, k // 8).
    assert float(lines[3 + 9].split()[0]) == f["rho"][1, 1]
    assert float(lines[3 + 2].split()[1]) == f["q1"][2, 0]


def test_t_end_zero_initial_dump_only(tmp_path):
    assert main(["run", "--t-end", "0", "--n", "8", "--out", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["diagnostics.csv", "fields_0.000000.dat"]
    assert len(_csv(tmp_path / "diagnostics.csv")) == 1


def test_dump_cadence(tmp_path):
    main(["run", "--problem", "well_prepared", "--n", "8", "--t-end", "0.2", "--dump-every", "2",
          "--out", str(tmp_path)])
    dumps = sorted(p.name for p in tmp_path.glob("fields_*.dat"))
    assert len(dumps) >= 3 and dumps[0] == "fields_0.000000.dat" and dumps[-1] == "fields_0.200000.dat"


def test_solver_failure_exit_two(tmp_path, monkeypatch):
    import lowmach.cli as cli
    from lowmach.stepper import PositivityError

    real = cli.run

    def failing(state, config, params, grid, t_end, callback=None, **kw):
        return real(state, config, params, grid, t_end, max_steps=2, callback=_raise_after(callback))

    def _raise_after(cb):
        def inner(k, s, dt):
            cb(k, s, dt)
            if k == 2:
                raise PositivityError(1, s.time)
        return inner

    monkeypatch.setattr(cli, "run", failing)
    assert main(["run", "--n", "8", "--t-end", "1", "--out", str(tmp_path)]) == 2
    assert len(_csv(tmp_path / "diagnostics.csv")) == 3  # partial rows flushed


def test_convergence_table(tmp_path):
    cfg = parse_config(None, {"out": str(tmp_path)}, {"limiter": "none"})
    tables = cmd_convergence(cfg, [20, 40], [1e-2])
    rows = _csv(tmp_path / "convergence_eps1e-02.csv")
    assert rows[0] == ["N", "err_u1", "eoc_u1", "err_u2", "eoc_u2", "status"]
    assert rows[1][2] == "" and rows[1][4] == ""
    assert float(rows[2][2]) == pytest.approx(tables[1e-2][1].eoc_u1, abs=1e-4)
    cmd_convergence(cfg, [20], [1e-2])
    assert len(_csv(tmp_path / "convergence_eps1e-02.csv")) == 2


def test_ap_sweep(tmp_path):
    cfg = parse_config(None, {"out": str(tmp_path), "n": 16}, {"problem": "well_prepared"})
    rows, slope = cmd_ap_sweep(cfg, [1e-2, 1e-3, 1e-4], steps=2)
    assert len(_csv(tmp_path / "ap_sweep.csv")) == 4
    assert rows[0][1] > rows[1][1] > rows[2][1]
    assert slope == pytest.approx(2.0, abs=0.1)
    rows, slope = cmd_ap_sweep(cfg, [1.0], steps=2)
    assert len(rows) == 1 and slope is None


def test_outputs_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert main(["run", "--problem", "traveling_vortex", "--n", "12", "--t-end", "0.05",
                     "--out", str(tmp_path / d)]) == 0
        assert main(["ap-sweep", "--n", "12", "--steps", "2", "--out", str(tmp_path / d)]) == 0
    for name in ("diagnostics.csv", "ap_sweep.csv", "fields_0.050000.dat"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parallel_sweep_matches_serial(tmp_path):
    base = ["convergence", "--grids", "8,16", "--epsilons", "1e-2", "--t-end", "0.02"]
    assert main(base + ["--out", str(tmp_path / "s")]) == 0
    assert main(base + ["--out", str(tmp_path / "p"), "--jobs", "2"]) == 0
    name = "convergence_eps1e-02.csv"
    assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "p" / name).read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "lowmach", "tableau-check", "DP2-A(2,4,2)"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "TypeA" in res.stdout
