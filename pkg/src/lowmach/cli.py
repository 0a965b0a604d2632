"""Command-line driver: single runs, convergence sweeps and AP sweeps.

Configuration precedence is defaults < config file < command-line flags.
Config files are flat ``key = value`` lines; ``#`` starts a comment.

Exit codes: 0 success, 1 configuration error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics
from .core import DomainError, GridSpec, ModelParams, pressure
from .elliptic import EllipticConvergenceError, Stencil
from .problems import PROBLEMS, TravelingVortexParams, exact_traveling_vortex, make_initial_state
from .spatial import LIMITERS
from .stepper import PositivityError, StepConfig, run
from .tableaux import format_report, get_tableau, report_ok, validate_tableau

log = logging.getLogger("lowmach")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2
SOLVER_ERRORS = (PositivityError, EllipticConvergenceError, DomainError, FloatingPointError)


class ConfigError(ValueError):
    """Invalid configuration; the message names the key and where it came from."""


@dataclass
class RunConfig:
    problem: str = "traveling_vortex"
    n: int = 64
    epsilon: float = 1e-2
    gamma: float = 2.0
    tableau: str = "DP2-A(2,4,2)"
    cfl: float = 0.45
    t_end: float = 0.1
    limiter: str = "minmod"
    stencil: str = "composed"
    elliptic_tol: float = 1e-12
    solver: str = "fft"
    eta_relation: str = "balanced"
    out: str = "."
    dump_every: int = 0

    def validate(self, where=None):
        """Range checks; ``where`` maps keys to a source description."""
        where = where or {}

        def bad(key, msg):
            loc = where.get(key, "default")
            return ConfigError(f"{key}: {msg} (got {getattr(self, key)!r}, from {loc})")

        if self.problem not in PROBLEMS:
            raise bad("problem", f"must be one of {', '.join(PROBLEMS)}")
        if self.n < 4:
            raise bad("n", "need at least 4 cells per axis")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise bad("epsilon", "must be positive and finite")
        if not self.gamma >= 1:
            raise bad("gamma", "must be >= 1")
        if not 0 < self.cfl < 1:
            raise bad("cfl", "must lie in (0, 1)")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise bad("t_end", "must be nonnegative and finite")
        if self.limiter not in LIMITERS:
            raise bad("limiter", f"must be one of {', '.join(LIMITERS)}")
        if self.stencil not in [s.value for s in Stencil]:
            raise bad("stencil", "must be 'composed' or 'compact'")
        if not self.elliptic_tol > 0:
            raise bad("elliptic_tol", "must be positive")
        if self.solver not in ("fft", "cg"):
            raise bad("solver", "must be 'fft' or 'cg'")
        if self.eta_relation not in ("balanced", "paper"):
            raise bad("eta_relation", "must be 'balanced' or 'paper'")
        if self.dump_every < 0:
            raise bad("dump_every", "must be >= 0")
        try:
            get_tableau(self.tableau)
        except KeyError as exc:
            raise bad("tableau", exc.args[0]) from None
        return self

    def model(self) -> ModelParams:
        return ModelParams(self.epsilon, self.gamma)

    def grid(self) -> GridSpec:
        return GridSpec.square(self.n)

    def step_config(self) -> StepConfig:
        return StepConfig(cfl=self.cfl, tableau=self.tableau, limiter=self.limiter,
                          stencil=self.stencil, elliptic_tol=self.elliptic_tol, solver=self.solver)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_TYPES = {"int": int, "float": float, "str": str}


def _coerce(key, raw, loc):
    kind = _TYPES[_FIELDS[key].type]
    try:
        if kind is int:
            return int(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {raw!r} ({loc})") from None


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file into ``{key: (value, location)}``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        loc = f"{path}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"expected 'key = value' at {loc}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r} at {loc}")
        out[key] = (_coerce(key, value, loc), loc)
    return out


def parse_config(path=None, flags=None, defaults=None) -> RunConfig:
    """Merge defaults, an optional config file and flag overrides.

    ``defaults`` holds command-specific defaults layered over the
    :class:`RunConfig` field defaults.
    """
    values, where = {}, {}
    for key, value in (defaults or {}).items():
        values[key], where[key] = value, "command default"
    if path is not None:
        for key, (value, loc) in read_config_file(path).items():
            values[key], where[key] = value, loc
    for key, value in (flags or {}).items():
        if value is None:
            continue
        if key not in _FIELDS:
            raise ConfigError(f"unknown option {key!r}")
        values[key], where[key] = value, f"flag --{key.replace('_', '-')}"
    cfg = RunConfig(**values)
    return cfg.validate(where)


def _fmt(x) -> str:
    return "%.16e" % x


def write_fields(path, state, grid: GridSpec, model: ModelParams):
    """Plain-text dump: header lines then ``rho q1 q2 p mach`` per cell, x fastest."""
    if grid.dim != 2:
        raise ValueError("field dumps are defined for 2-d grids")
    p = pressure(state.rho, model.gamma)
    mach = diagnostics.mach_field(state, model, grid)
    cols = [state.rho, state.q[..., 0], state.q[..., 1], p, mach]
    # Arrays are indexed [ix, iy]; transposing makes x the fastest index.
    table = np.stack([c.T.ravel() for c in cols], axis=1)
    with open(path, "w") as fh:
        fh.write(f"{grid.n[0]} {grid.n[1]}\n")
        fh.write(" ".join(_fmt(v) for v in (*grid.origin, *grid.dx)) + "\n")
        fh.write(" ".join(_fmt(v) for v in (state.time, model.epsilon, model.gamma)) + "\n")
        for row in table:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def read_fields(path):
    """Inverse of :func:`write_fields`; returns a dict of header values and arrays."""
    with open(path) as fh:
        nx, ny = map(int, fh.readline().split())
        x0, y0, dx, dy = map(float, fh.readline().split())
        time, eps, gamma = map(float, fh.readline().split())
        data = np.loadtxt(fh, ndmin=2)
    fields = {name: data[:, j].reshape(ny, nx).T for j, name in enumerate(("rho", "q1", "q2", "p", "mach"))}
    return dict(n=(nx, ny), origin=(x0, y0), dx=(dx, dy), time=time, epsilon=eps, gamma=gamma, **fields)


DIAG_HEADER = ["t", "dt", "ke", "rel_ke_change", "max_div_u", "rho_osc"]


def cmd_run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    grid, model = cfg.grid(), cfg.model()
    state = make_initial_state(cfg.problem, grid, model, cfg.eta_relation)

    def dump(s):
        write_fields(out / f"fields_{s.time:.6f}.dat", s, grid, model)

    dump(state)
    status = EXIT_OK
    with open(out / "diagnostics.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DIAG_HEADER)
        ke0 = diagnostics.kinetic_energy(state, grid)

        def callback(step, s, dt):
            ke = diagnostics.kinetic_energy(s, grid)
            writer.writerow([_fmt(v) for v in (
                s.time, dt, ke, (ke - ke0) / ke0 if ke0 > 0 else 0.0,
                diagnostics.div_u_max(s, grid), diagnostics.density_oscillation(s))])
            fh.flush()
            if cfg.dump_every and step % cfg.dump_every == 0 and s.time < cfg.t_end:
                dump(s)

        try:
            state, _ = run(state, cfg.step_config(), model, grid, cfg.t_end, callback=callback)
        except SOLVER_ERRORS as exc:
            log.error("solver failure: %s", exc)
            status = EXIT_SOLVER
    if status == EXIT_OK and cfg.t_end > 0:
        dump(state)
    return status


def convergence_case(cfg: RunConfig, n: int, epsilon: float):
    """Velocity L2 errors of one traveling-vortex run; ``nan`` on failure."""
    grid, model = GridSpec.square(n), ModelParams(epsilon, cfg.gamma)
    params = TravelingVortexParams.for_epsilon(epsilon, cfg.eta_relation, cfg.gamma)
    state = make_initial_state("traveling_vortex", grid, model, cfg.eta_relation)
    try:
        state, _ = run(state, cfg.step_config(), model, grid, cfg.t_end)
    except SOLVER_ERRORS as exc:
        log.error("case n=%d eps=%g failed: %s", n, epsilon, exc)
        return math.nan, math.nan
    exact = exact_traveling_vortex(cfg.t_end, grid, params, model)
    u = state.q / state.rho[..., None]
    ue = exact.q / exact.rho[..., None]
    return (diagnostics.l2_error(u[..., 0], ue[..., 0], grid),
            diagnostics.l2_error(u[..., 1], ue[..., 1], grid))


def _map(fn, args, jobs):
    if jobs <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(jobs) as pool:
        return list(pool.map(fn, *zip(*args)))


def _opt(x):
    return "" if x is None else "%.4f" % x


def write_convergence_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["N", "err_u1", "eoc_u1", "err_u2", "eoc_u2", "status"])
        for r in rows:
            writer.writerow([r.n, "%.6e" % r.err_u1, _opt(r.eoc_u1), "%.6e" % r.err_u2,
                             _opt(r.eoc_u2), "failed" if r.failed else "ok"])


def cmd_convergence(cfg: RunConfig, grids, epsilons, jobs=1) -> dict:
    """One EOC table per epsilon; returns ``{epsilon: rows}``."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    cases = [(cfg, n, e) for e in epsilons for n in grids]
    errors = iter(_map(convergence_case, cases, jobs))
    tables = {}
    for e in epsilons:
        errs = [next(errors) for _ in grids]
        rows = diagnostics.convergence_table(grids, [a for a, _ in errs], [b for _, b in errs])
        write_convergence_csv(out / f"convergence_eps{e:.0e}.csv", rows)
        tables[e] = rows
        for r in rows:
            log.info("eps=%.0e N=%4d  u1 %.3e %s  u2 %.3e %s", e, r.n, r.err_u1, _opt(r.eoc_u1),
                     r.err_u2, _opt(r.eoc_u2))
    return tables


def ap_case(cfg: RunConfig, epsilon: float, steps: int):
    grid, model = cfg.grid(), ModelParams(epsilon, cfg.gamma)
    state = make_initial_state(cfg.problem, grid, model, cfg.eta_relation)
    try:
        state, _ = run(state, cfg.step_config(), model, grid, math.inf, max_steps=steps)
    except SOLVER_ERRORS as exc:
        log.error("case eps=%g failed: %s", epsilon, exc)
        return math.nan, math.nan
    return diagnostics.density_oscillation(state), diagnostics.div_u_max(state, grid)


def cmd_ap_sweep(cfg: RunConfig, epsilons, steps=10, jobs=1):
    """Density oscillation and ``max|div u|`` after ``steps`` steps per epsilon.

    Returns ``(rows, slope)`` where ``slope`` is the log-log fit of the density
    oscillation against epsilon (``None`` for fewer than two usable rows).
    """
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    results = _map(ap_case, [(cfg, e, steps) for e in epsilons], jobs)
    rows = [(e, osc, div) for e, (osc, div) in zip(epsilons, results)]
    with open(out / "ap_sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epsilon", "rho_osc", "max_div_u"])
        for e, osc, div in rows:
            writer.writerow([_fmt(e), _fmt(osc), _fmt(div)])
    usable = [(e, osc) for e, osc, _ in rows if osc > 0 and math.isfinite(osc)]
    slope = diagnostics.loglog_slope(*zip(*usable)) if len(usable) >= 2 else None
    if slope is not None:
        log.info("density oscillation ~ eps^%.3f", slope)
    return rows, slope


def cmd_tableau_check(name) -> int:
    try:
        t = get_tableau(name)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return EXIT_CONFIG
    checks = validate_tableau(t)
    print(format_report(t, checks))
    return EXIT_OK if report_ok(checks) else EXIT_CONFIG


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _float_list(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _int_list(text):
    return [int(v) for v in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lowmach", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", type=Path)
        p.add_argument("--problem", choices=PROBLEMS)
        p.add_argument("--n", type=int)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--tableau")
        p.add_argument("--cfl", type=float)
        p.add_argument("--t-end", type=float)
        p.add_argument("--limiter", choices=LIMITERS)
        p.add_argument("--stencil", choices=[s.value for s in Stencil])
        p.add_argument("--elliptic-tol", type=float)
        p.add_argument("--solver", choices=("fft", "cg"))
        p.add_argument("--eta-relation", choices=("balanced", "paper"))
        p.add_argument("--out")
        p.add_argument("--jobs", type=int, default=1, help="parallel sweep cases")

    p = sub.add_parser("run", help="single run with field dumps and diagnostics.csv")
    common(p)
    p.add_argument("--dump-every", type=int)
    p = sub.add_parser("convergence", help="traveling-vortex EOC tables, one CSV per epsilon")
    common(p)
    p.add_argument("--grids", type=_int_list, default=[20, 40, 80, 160])
    p.add_argument("--epsilons", type=_float_list, default=[1e-2, 1e-3, 1e-4, 1e-5])
    p = sub.add_parser("ap-sweep", help="density oscillation and divergence versus epsilon")
    common(p)
    p.add_argument("--epsilons", type=_float_list, default=[1e-2, 1e-3, 1e-4])
    p.add_argument("--steps", type=int, default=10)
    p = sub.add_parser("tableau-check", help="validate a tableau by name")
    p.add_argument("name")
    return parser


# Command-specific defaults layered under the config file.
COMMAND_DEFAULTS = {
    "run": {},
    # EOC studies on smooth data use unlimited slopes.
    "convergence": {"problem": "traveling_vortex", "limiter": "none", "t_end": 0.1},
    "ap-sweep": {"problem": "well_prepared"},
}
_NOT_CONFIG = {"command", "verbose", "config", "jobs", "grids", "epsilons", "steps", "name"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s")
    if args.command == "tableau-check":
        return cmd_tableau_check(args.name)
    flags = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    try:
        cfg = parse_config(args.config, flags, COMMAND_DEFAULTS[args.command])
        if args.command == "convergence" and cfg.problem != "traveling_vortex":
            raise ConfigError("convergence needs problem = traveling_vortex (exact solution)")
        if args.command == "ap-sweep" and not all(e > 0 for e in args.epsilons):
            raise ConfigError("--epsilons must all be positive")
        if args.command == "ap-sweep" and args.steps < 0:
            raise ConfigError("--steps must be >= 0")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    np.seterr(all="raise", under="ignore")
    if args.command == "run":
        return cmd_run(cfg)
    if args.command == "convergence":
        tables = cmd_convergence(cfg, args.grids, args.epsilons, args.jobs)
        return EXIT_SOLVER if any(r.failed for rows in tables.values() for r in rows) else EXIT_OK
    rows, _ = cmd_ap_sweep(cfg, args.epsilons, args.steps, args.jobs)
    return EXIT_SOLVER if any(not math.isfinite(osc) for _, osc, _ in rows) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
