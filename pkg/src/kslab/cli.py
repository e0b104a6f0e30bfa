"""Command-line experiment runner.

    kslab <command> [--config FILE] [flags]

Configuration files hold ``key = value`` lines (an optional ``[section]``
header is ignored); flags given on the command line win over the file.
Outputs go to ``<outdir>/<command>-<timestamp>/`` where ``outdir`` defaults
to ``$KSLAB_OUTDIR`` or ``./kslab-out``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 invariant breach or failed verification.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import bubbles, energy, evolve, geometry, io, levelset, steady
from .steady import BoundaryCondition, InvariantError, ProblemSpec, SolverError

log = logging.getLogger("kslab")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_INVARIANT = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# defaults per command; None means "required"
COMMON = {"n": 201, "R": 1.0, "cluster": 0.0, "beta": 1.0, "tol": 1e-10, "plot": True}
DEFAULTS = {
    "steady": {"bc": "neumann", "lam": None, "from_csv": None},
    "census": {"bc": "neumann", "lam": None, "starts": 20, "seed": None, "workers": 1,
               "cluster_radius": 1e-4},
    "continue": {"bc": "neumann", "lam_range": None, "ds": 1.0, "side": "both",
                 "max_sup_dev": 8.0, "max_points": 400},
    "evolve": {"lam": None, "T": 100.0, "tol": 1e-4, "amplitude": 0.1, "upwind": False,
               "dt_max": 0.1},
    "verify-levelset": {"lam_range": None, "points": 5, "from_csv": None, "levels": 256,
                        "ds": 1.0, "max_sup_dev": 8.0, "max_points": 400,
                        "m": 3},
    "bol-check": {"thetas": [0.5, math.sqrt(8.0), 10.0], "radii": [0.1, 0.5, 1.0, 2.0, 10.0],
                  "lam": None},
    "rearrange": {"lam": 4 * math.pi, "beta2": 5.0, "samples": 100},
    "energy-min": {"lam": None, "m": 3, "starts": 10, "seed": None, "tol": 1e-9},
    "thresholds": {"m": None},
}
FLOAT_KEYS = {"R", "cluster", "beta", "tol", "lam", "cluster_radius", "ds", "max_sup_dev",
              "T", "amplitude", "dt_max", "beta2"}
INT_KEYS = {"n", "starts", "seed", "workers", "points", "levels", "m", "samples", "max_points"}
BOOL_KEYS = {"plot", "upwind"}
LIST_KEYS = {"lam_range", "thetas", "radii"}
ALIASES = {"lambda": "lam", "lambda_range": "lam_range", "lambda-range": "lam_range"}


COMMAND_HELP = {
    "steady": "Newton solve for one steady state; writes solution.csv",
    "census": "multistart uniqueness census from seeded random starts",
    "continue": "pseudo-arclength continuation of the nonconstant Neumann branch",
    "evolve": "time integration from perturbed data towards equilibrium",
    "verify-levelset": "level-set identities, jumps and integral inequality on branch solutions",
    "bol-check": "Bol deficits of Liouville bubbles and of a computed solution",
    "rearrange": "equimeasurable rearrangement and gradient comparison on a Dirichlet pair",
    "energy-min": "minimise the energy functional from seeded random starts",
    "thresholds": "print the mass threshold and G-profile bound for rotation order m",
}
KEY_HELP = {
    "config": "INI file of key = value pairs; command-line flags take precedence",
    "outdir": f"output root (default ${io.OUTDIR_ENV} or ./kslab-out)",
    "n": "number of radial cells",
    "R": "disc radius",
    "cluster": "grid clustering towards the centre, 0 for uniform",
    "beta": "decay rate beta > 0",
    "tol": "solver tolerance",
    "bc": "boundary condition",
    "lam": "total mass lambda",
    "lam_range": "lambda interval LO HI",
    "upwind": "upwind the chemotactic flux instead of central differences",
    "side": "branch direction(s) away from the bifurcation point",
    "from_csv": "re-verify a previously written CSV instead of solving",
    "thetas": "bubble concentration parameters",
    "radii": "ball radii",
    "starts": "number of random starts",
    "seed": "PCG64 seed (required)",
    "workers": "parallel worker processes",
    "cluster_radius": "sup-norm radius for merging solutions",
    "ds": "initial arclength step",
    "max_sup_dev": "stop once sup|u - mean u| exceeds this",
    "max_points": "maximum branch points",
    "T": "final time",
    "amplitude": "relative amplitude of the initial perturbation",
    "dt_max": "largest time step",
    "points": "number of branch solutions to check",
    "levels": "number of tabulated levels",
    "m": "rotation order m >= 2",
    "beta2": "beta of the base field",
    "samples": "number of sampled levels",
}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kslab", description="Radial Keller-Segel laboratory.")
    p.add_argument("--version", action="version", version=f"kslab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in DEFAULTS:
        sp = sub.add_parser(name, help=COMMAND_HELP[name], description=COMMAND_HELP[name])
        h = KEY_HELP.get
        sp.add_argument("--config", help=h("config"))
        sp.add_argument("--outdir", help=h("outdir"))
        sp.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
        for key, typ in (("n", int), ("R", float), ("cluster", float), ("beta", float),
                         ("tol", float)):
            sp.add_argument(f"--{key}", type=typ, help=h(key))
        sp.add_argument("--plot", dest="plot", action="store_const", const=True,
                        help="write SVG figures (default)")
        sp.add_argument("--no-plot", dest="plot", action="store_const", const=False,
                        help="skip SVG figures")
        keys = DEFAULTS[name]
        if "bc" in keys:
            sp.add_argument("--bc", choices=["neumann", "dirichlet"], help=h("bc"))
        if "lam" in keys:
            sp.add_argument("--lambda", dest="lam", type=float, help=h("lam"))
        if "lam_range" in keys:
            sp.add_argument("--lambda-range", dest="lam_range", type=float, nargs=2,
                            metavar=("LO", "HI"), help=h("lam_range"))
        if "upwind" in keys:
            sp.add_argument("--upwind", action="store_const", const=True, help=h("upwind"))
        if "side" in keys:
            sp.add_argument("--side", choices=["1", "-1", "both"], help=h("side"))
        if "from_csv" in keys:
            sp.add_argument("--from-csv", dest="from_csv", help=h("from_csv"))
        for key in ("thetas", "radii"):
            if key in keys:
                sp.add_argument(f"--{key}", type=float, nargs="+", help=h(key))
        for key in sorted(set(keys) - {"bc", "lam", "lam_range", "upwind", "side", "from_csv",
                                       "thetas", "radii", "tol"}):
            typ = int if key in INT_KEYS else float
            sp.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ, help=h(key))
    return p


def _coerce(key: str, raw: str):
    try:
        if key in LIST_KEYS:
            return [float(x) for x in raw.replace(",", " ").split()]
        if key in BOOL_KEYS:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if key in INT_KEYS:
            return int(raw)
        if key in FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw.strip()


def read_config(path) -> dict:
    text = Path(path).read_text()
    if not text.lstrip().startswith("["):
        text = "[kslab]\n" + text
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    out = {}
    for section in cp.sections():
        for key, raw in cp[section].items():
            key = ALIASES.get(key, key).replace("-", "_")
            out[key] = _coerce(key, raw)
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cmd = args.command
    params = dict(COMMON)
    params.update(DEFAULTS[cmd])
    if args.config:
        cfg = read_config(args.config)
        unknown = set(cfg) - set(params)
        if unknown:
            raise ConfigError(f"unknown config keys for {cmd}: {sorted(unknown)}")
        params.update(cfg)
    for key in params:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    _validate(cmd, params)
    return params


def _validate(cmd: str, p: dict):
    missing = [k for k, v in p.items() if v is None and k != "from_csv"]
    if cmd == "steady" and p.get("from_csv"):
        missing = [k for k in missing if k != "lam"]
    if cmd == "verify-levelset" and p.get("from_csv"):
        missing = [k for k in missing if k != "lam_range"]
    if cmd == "bol-check":
        missing = [k for k in missing if k != "lam"]
    if missing:
        raise ConfigError(f"{cmd}: missing required parameter(s) {missing}")
    if p["n"] < geometry.MIN_NODES:
        raise ConfigError(f"n must be >= {geometry.MIN_NODES}")
    if not p["R"] > 0 or not 0 <= p["cluster"] < 1:
        raise ConfigError("need R > 0 and 0 <= cluster < 1")
    if not p["beta"] > 0:
        raise ConfigError("beta must be positive")
    if not p["tol"] > 0:
        raise ConfigError("tol must be positive")
    if p.get("lam") is not None and p["lam"] < 0:
        raise ConfigError("lambda must be nonnegative")
    if cmd == "evolve" and not p["lam"] > 0:
        raise ConfigError("evolve needs lambda > 0")
    if p.get("lam_range") is not None:
        lr = p["lam_range"]
        if len(lr) != 2 or not 0 <= lr[0] < lr[1]:
            raise ConfigError("lambda range must be two numbers 0 <= lo < hi")
    if "bc" in p and p["bc"] not in ("neumann", "dirichlet"):
        raise ConfigError("bc must be neumann or dirichlet")
    if "m" in p and p["m"] is not None and p["m"] < 2:
        raise ConfigError("rotation order m must be >= 2")
    for key in ("starts", "points", "samples", "workers"):
        if key in p and p[key] < 1:
            raise ConfigError(f"{key} must be >= 1")
    if cmd == "evolve" and not p["T"] > 0:
        raise ConfigError("T must be positive")


def _grid(p) -> geometry.RadialGrid:
    return geometry.build_radial_grid(p["n"], p["R"], p["cluster"])


def _spec(p, lam=None) -> ProblemSpec:
    return ProblemSpec(p["beta"], p["lam"] if lam is None else lam, BoundaryCondition(p["bc"]),
                       _grid(p))


def _csv_params(cmd, p) -> dict:
    return {"command": cmd, **{k: v for k, v in p.items() if k != "plot"}}


# ---------------------------------------------------------------------------
# commands


def _initial_guess(spec: ProblemSpec):
    if spec.neumann:
        return spec.constant_solution()
    return np.zeros(spec.grid.n)


def cmd_steady(p, out: Path) -> int:
    if p.get("from_csv"):
        return _replay_steady(p["from_csv"])
    spec = _spec(p)
    sol = steady.newton_solve(spec, _initial_guess(spec), tol=p["tol"])
    params = _csv_params("steady", p) | {"tol_effective": sol.tol}
    io.columns_csv(out / "solution.csv", params, r=spec.grid.nodes, u=sol.u)
    for k, v in sol.summary().items():
        print(f"{k} = {v}")
    return EXIT_OK


def _replay_steady(path) -> int:
    params, names, data = io.read_csv(path)
    if names != ["r", "u"]:
        raise ConfigError(f"{path} is not a steady solution file")
    grid = geometry.build_radial_grid(int(params["n"]), float(params["R"]), float(params["cluster"]))
    if not np.array_equal(grid.nodes, data[:, 0]):
        raise ConfigError("stored radii do not match the rebuilt grid")
    spec = ProblemSpec(float(params["beta"]), float(params["lam"]),
                       BoundaryCondition(params["bc"]), grid)
    res = float(np.sqrt(grid.integrate(steady.residual(spec, data[:, 1]) ** 2) / grid.area))
    stored = float(params.get("tol_effective", params["tol"]))
    ok = res <= stored
    print(f"{'PASS' if ok else 'FAIL'} replay residual={res:.3e} stored_tol={stored:.3e}")
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_census(p, out: Path) -> int:
    spec = _spec(p)
    rep = steady.multistart_census(spec, p["starts"], p["seed"], p["cluster_radius"],
                                   p["tol"], p["workers"])
    rows = [f"{i},{'' if a is None else a},{int(a is not None)}"
            for i, a in enumerate(rep.assignments)]
    io.write_csv(out / "census.csv", _csv_params("census", p), "start,cluster,converged", rows)
    for j, sol in enumerate(rep.representatives):
        io.columns_csv(out / f"representative_{j}.csv", _csv_params("census", p),
                       r=spec.grid.nodes, u=sol.u)
    print(f"distinct_count = {rep.distinct_count}")
    print(f"failures = {len(rep.failures)}")
    for idx, err in rep.failures:
        print(f"  start {idx}: {err}")
    return EXIT_OK


def _branches(p):
    spec = _spec(p, lam=p["lam_range"][0])
    sides = (1, -1) if p["side"] == "both" else (int(p["side"]),)
    if not spec.neumann:
        sides = (1,)
    return spec, [
        steady.continue_branch(spec, tuple(p["lam_range"]), p["ds"], side=s, tol=p["tol"],
                               max_sup_dev=p["max_sup_dev"], max_points=p["max_points"])
        for s in sides
    ], sides


def cmd_continue(p, out: Path) -> int:
    spec, branches, sides = _branches(p)
    for side, br in zip(sides, branches):
        name = f"branch_side{'+' if side > 0 else '-'}1"
        io.write_csv(out / f"{name}.csv", _csv_params("continue", p) | {"side": side},
                     br.CSV_HEADER, br.csv_rows())
        print(f"side {side:+d}: {len(br.points)} points, folds {br.folds}, "
              f"bifurcation {br.bifurcation_lambda}, stop: {br.reason}")
        if p["plot"] and br.points:
            from .plots import emit_plot

            emit_plot({"lambda": br.lambdas, "u0": [q.u0 for q in br.points],
                       "fold": [q.fold_flag for q in br.points]},
                      "branch-diagram", out / f"{name}.svg", title=f"branch, side {side:+d}",
                      annotation=f"beta={p['beta']} n={p['n']} bc={p['bc']}")
    return EXIT_OK


def cmd_evolve(p, out: Path) -> int:
    grid = _grid(p)
    spec = evolve.EvolutionSpec(p["beta"], p["lam"], grid, upwind=p["upwind"], dt_max=p["dt_max"])
    v0 = evolve.perturbed_density(grid, p["lam"], p["amplitude"])
    tr = evolve.run_to_equilibrium(v0, np.zeros(grid.n), spec, p["T"], p["tol"])
    io.write_csv(out / "trajectory.csv", _csv_params("evolve", p), tr.CSV_HEADER, tr.csv_rows())
    print(f"outcome = {tr.outcome} ({tr.reason})")
    print(f"t_final = {tr.times[-1]:.6g}  dev_u = {tr.dev_u[-1]:.3e}  "
          f"mass_drift = {tr.mass_drift:.3e}")
    if p["plot"]:
        from .plots import emit_plot

        emit_plot({"t": tr.times, "dev_u": tr.dev_u}, "decay-curve", out / "decay.svg",
                  title="decay to the constant state",
                  annotation=f"lambda={p['lam']:.6g} beta={p['beta']}")
    return EXIT_OK


def _levelset_checks(sol, p, tag, out: Path) -> list[str]:
    tab = levelset.table_for(sol, p["levels"])
    lines = []
    if tab.trivial:
        return [f"SKIP {tag}: constant solution"]
    io.write_csv(out / f"levelset_{tag}.csv", _csv_params("verify-levelset", p) | {"lam": sol.lam},
                 tab.CSV_HEADER, tab.csv_rows())
    cross = levelset.crossing_set(tab.pair)
    for variant in ("isoperimetric", "perimeter", "g_isoperimetric"):
        res = levelset.verify_integral_inequality(sol, variant, p["m"])
        ok = res.margin >= -1e-6
        lines.append(f"{'PASS' if ok else 'FAIL'} {tag} inequality[{variant}] margin={res.margin:.6g}")
    for j in levelset.verify_jump_positivity(tab, cross):
        if j.degenerate:
            lines.append(f"SKIP {tag} jump at a={j.a:.6g}: crossing at min/max of u")
            continue
        ok = j.value >= -1e-8 and abs(j.value - j.closed_form) <= 1e-10 * max(1.0, abs(j.value))
        lines.append(f"{'PASS' if ok else 'FAIL'} {tag} jump a={j.a:.6g} value={j.value:.6g}")
    mono = levelset.verify_monotone_psi(tab, cross)
    lines.append(f"{'PASS' if mono.passed else 'FAIL'} {tag} monotone-psi worst={mono.worst:.6g}")
    means = abs(tab.pair.A_f - tab.pair.A_g) / max(1.0, abs(tab.pair.A_g))
    lines.append(f"{'PASS' if means <= 1e-8 else 'FAIL'} {tag} A_f=A_g rel_err={means:.3e}")
    if p["plot"]:
        from .plots import emit_plot

        emit_plot({"t": tab.t, "Psi": tab.Psi, "Psit": tab.Psit, "crossings": cross},
                  "levelset-profile", out / f"levelset_{tag}.svg", title=f"Psi, lambda={sol.lam:.5g}")
    return lines


def _solution_from_csv(path) -> steady.SteadySolution:
    params, names, data = io.read_csv(path)
    grid = geometry.build_radial_grid(int(params["n"]), float(params["R"]), float(params["cluster"]))
    spec = ProblemSpec(float(params["beta"]), float(params["lam"]),
                       BoundaryCondition(params["bc"]), grid)
    return steady.newton_solve(spec, data[:, 1], tol=float(params["tol"]))


def cmd_verify_levelset(p, out: Path) -> int:
    if p.get("from_csv"):
        sols = [_solution_from_csv(p["from_csv"])]
    else:
        p = p | {"bc": "neumann", "side": "1"}
        _, (br,), _ = _branches(p)
        if len(br.solutions) < 2:
            raise SolverError("branch too short to sample")
        idx = np.unique(np.linspace(1, len(br.solutions) - 1, p["points"]).astype(int))
        sols = [br.solutions[i] for i in idx]
    lines = []
    for k, sol in enumerate(sols):
        lines += _levelset_checks(sol, p, f"p{k}", out)
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_INVARIANT if any(l.startswith("FAIL") for l in lines) else EXIT_OK


def cmd_bol_check(p, out: Path) -> int:
    lines = []
    for th in p["thetas"]:
        for r in p["radii"]:
            d = bubbles.bol_deficit(lambda x, th=th: float(bubbles.bubble_value(th, x)), r)
            ok = abs(d) <= 1e-8
            lines.append(f"{'PASS' if ok else 'FAIL'} bubble theta={th:.6g} r={r:.6g} deficit={d:.3e}")
    if p.get("lam") is not None:
        spec = ProblemSpec(p["beta"], p["lam"], BoundaryCondition.DIRICHLET, _grid(p))
        sol = steady.newton_solve(spec, np.zeros(spec.grid.n), tol=p["tol"])
        v = sol.u + math.log(spec.lam) - steady.log_integral_exp(spec.grid, sol.u)
        for r in np.linspace(0.2, 1.0, 5) * spec.grid.R:
            d = bubbles.bol_deficit(v, r, grid=spec.grid)
            lines.append(f"{'PASS' if d > 0 else 'FAIL'} dirichlet lambda={p['lam']:.6g} "
                         f"r={r:.6g} deficit={d:.6g}")
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_INVARIANT if any(l.startswith("FAIL") for l in lines) else EXIT_OK


def dirichlet_pair(grid, lam, beta_base, beta_compare, tol=1e-10):
    """Shifted fields ``v = u + log lam - log int e^u`` for two Dirichlet solutions."""
    out = []
    for beta in (beta_base, beta_compare):
        spec = ProblemSpec(beta, lam, BoundaryCondition.DIRICHLET, grid)
        sol = steady.newton_solve(spec, np.zeros(grid.n), tol=tol)
        out.append(sol.u + math.log(lam) - steady.log_integral_exp(grid, sol.u))
    return out


def cmd_rearrange(p, out: Path) -> int:
    grid = _grid(p)
    # base has the larger beta so that phi = v_compare - v_base peaks at the centre
    v_base, v_cmp = dirichlet_pair(grid, p["lam"], p["beta2"], p["beta"], p["tol"])
    phi = v_cmp - v_base
    theta = bubbles.theta_for_mass(grid.integrate(np.exp(v_base)), grid.R)
    rf = bubbles.rearrange_equimeasurable(grid, phi, v_base, theta)
    ts = np.linspace(phi.min(), phi.max(), p["samples"] + 2)[1:-1]
    resid = rf.equimeasurability_residuals(ts)
    params = _csv_params("rearrange", p)
    io.columns_csv(out / "equimeasurability.csv", params, t=ts,
                   mass_source=rf.mass_above_source(ts), mass_star=rf.mass_above_star(ts),
                   residual=resid)
    gc = bubbles.gradient_comparison(grid, phi, v_base, theta, p["samples"])
    io.columns_csv(out / "gradient_comparison.csv", params, t=gc.t, star=gc.star,
                   source=gc.source, margin=gc.margins)
    lines = [
        f"{'PASS' if resid.max() <= 1e-6 else 'FAIL'} equimeasurability max_residual={resid.max():.3e}",
        f"{'PASS' if gc.holds() else 'FAIL'} gradient-comparison worst_relative_margin="
        f"{gc.worst_relative:.6g} levels={gc.t.size}",
    ]
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_INVARIANT if any(l.startswith("FAIL") for l in lines) else EXIT_OK


def cmd_energy_min(p, out: Path) -> int:
    grid = _grid(p)
    lam, beta = p["lam"], p["beta"]
    c = lam / (beta * grid.area)
    worst = 0.0
    for k, u0 in enumerate(energy.random_initial_fields(grid, lam, beta, p["starts"], p["seed"])):
        res = energy.minimize_J(grid, lam, beta, p["m"], u0, p["tol"])
        io.write_csv(out / f"descent_{k}.csv", _csv_params("energy-min", p) | {"start": k},
                     res.CSV_HEADER, res.csv_rows())
        worst = max(worst, float(np.abs(res.u - c).max()))
    ok = worst <= 1e-6
    print(f"{'PASS' if ok else 'FAIL'} minimizers within {worst:.3e} of constant {c:.12g}")
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_thresholds(p, out: Path) -> int:
    m = p["m"]
    print(f"lambda_threshold(m={m}) = {geometry.lambda_threshold(m):.17g}")
    print(f"g_profile_ratio_bound(m={m}) = {geometry.g_profile_ratio_bound(m):.17g}")
    return EXIT_OK


COMMANDS = {
    "steady": cmd_steady, "census": cmd_census, "continue": cmd_continue,
    "evolve": cmd_evolve, "verify-levelset": cmd_verify_levelset, "bol-check": cmd_bol_check,
    "rearrange": cmd_rearrange, "energy-min": cmd_energy_min, "thresholds": cmd_thresholds,
}


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)  # argparse exits with status 2 on usage errors
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        params = resolve(args)
        out = io.make_run_dir(io.output_root(args.outdir), args.command)
        io.write_params(out, args.command, params)
        status = COMMANDS[args.command](params, out)
        print(f"outputs: {out}")
        return status
    except (ConfigError, FileNotFoundError) as exc:
        print(f"kslab {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"kslab {args.command}: invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (SolverError, ValueError, ArithmeticError) as exc:
        print(f"kslab {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
