"""Command-line interface.

Exit codes: 0 success, 1 a ``check`` reported a failed property, 2 invalid
parameters, 3 solver failure, 4 scan finished with timed-out cells (partial
results written), 5 a scan contradicted a proven existence result.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as pio

EXIT_OK, EXIT_CHECK, EXIT_PARAMS, EXIT_SOLVER, EXIT_TIMEOUT, EXIT_PROVEN = 0, 1, 2, 3, 4, 5


class ConfigError(ValueError):
    pass


# built-in defaults; a JSON config fills what flags leave unset
DEFAULTS = {
    "nu": 0.25, "gamma": 2.0, "beta": 2.0, "kappa": 1.0, "theta": 1.0,
    "delta": 1.0, "eta": 1.0, "delta_c": 1.0,
    "rtol": 1e-10, "atol": 1e-10, "r_max": 1e3, "r_classify": 1e12, "max_seconds": 0.0,
    "out": ".", "prefix": None, "lagrange": False, "json": False, "seed": 0,
    "alpha": -0.5, "delta0_c": 1.0, "t_end": 50.0, "threshold": False,
    "C": None, "xi_end": 15.0,
    "gamma_range": [0.05, 3.0], "beta_range": None, "nx": 100, "ny": 100, "timeout": 0.0,
    "workers": None, "ppm": False, "nu_range": [-0.9, 0.499], "n": 20,
    "nu_list": [0.0, 0.25, 0.45], "alpha_range": [-1.0, -0.01],
    "model": "svk", "predicate": "hyperbolicity", "window": [0.1, 3.0, 0.1, 3.0],
}


def _add_material(p, beta_default=True):
    p.add_argument("--nu", type=float, help="Poisson ratio in (-1, 1/2]")
    p.add_argument("--gamma", type=float, help="polytropic exponent (> 0)")
    p.add_argument("--beta", type=float, help="shear exponent (nonzero, <= 3 gamma (1-nu)/(1+nu))")
    p.add_argument("--kappa", type=float, help="bulk modulus (default 1)")
    p.add_argument("--theta", type=float, help="gravitational coupling (default 1)")


def _add_common(p):
    p.add_argument("--config", type=Path, help="JSON file with default values; flags win")
    p.add_argument("--out", type=str, help="output directory (default .)")
    p.add_argument("--prefix", type=str, help="output file stem")


def _add_tolerances(p):
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--r-max", dest="r_max", type=float, help="existence horizon (rescaled)")
    p.add_argument("--r-classify", dest="r_classify", type=float,
                   help="type A/B classification horizon (rescaled)")
    p.add_argument("--max-seconds", dest="max_seconds", type=float,
                   help="wall-time budget per integration (0 = none)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polyball", description=(
        "Self-gravitating balls of polytropic elastic material: constitutive evaluation, "
        "static and homologous solutions, phase portraits and parameter scans."))
    ap.add_argument("--version", action="version", version=f"polyball {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate the constitutive functions at (delta, eta)")
    _add_material(p)
    p.add_argument("--delta", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--json", action="store_const", const=True, help="print JSON")
    _add_common(p)

    p = sub.add_parser("check", help="run the constitutive identity and inequality checks")
    _add_material(p)
    p.add_argument("--seed", type=int, help="seed of the random samples")
    _add_common(p)

    p = sub.add_parser("static", help="integrate a static ball")
    _add_material(p)
    p.add_argument("--delta-c", dest="delta_c", type=float, help="central density")
    p.add_argument("--lagrange", action="store_const", const=True,
                   help="also write the deformation map")
    _add_tolerances(p)
    _add_common(p)

    p = sub.add_parser("homologous", help="homologous motion (gamma = 4/3)")
    p.add_argument("--nu", type=float)
    p.add_argument("--beta", type=float, help="default: zero boundary shear 4(1-nu)/(1+nu)")
    p.add_argument("--theta", type=float)
    p.add_argument("--alpha", type=float, help="separation constant (nonzero)")
    p.add_argument("--delta0-c", dest="delta0_c", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--threshold", action="store_const", const=True,
                   help="compute the existence threshold delta_star(alpha, nu) instead")
    _add_tolerances(p)
    _add_common(p)

    p = sub.add_parser("phase", help="fixed points and the orbit leaving O")
    _add_material(p)
    p.add_argument("--delta-c", dest="delta_c", type=float)
    p.add_argument("--C", dest="C", type=float, help="orbit constant (default theta delta_c**(2-gamma))")
    p.add_argument("--xi-end", dest="xi_end", type=float)
    _add_common(p)

    p = sub.add_parser("scan", help="parameter-plane scans")
    ssub = p.add_subparsers(dest="scan", required=True)
    s = ssub.add_parser("static", help="existence and type over (gamma, beta) at fixed nu")
    s.add_argument("--nu", type=float)
    s.add_argument("--gamma-range", dest="gamma_range", type=float, nargs=2)
    s.add_argument("--beta-range", dest="beta_range", type=float, nargs=2)
    s.add_argument("--nx", type=int)
    s.add_argument("--ny", type=int)
    s.add_argument("--timeout", type=float, help="per-cell wall-time budget in seconds")
    _add_tolerances(s)
    _add_scan_common(s)
    s = ssub.add_parser("gammastar", help="zero-shear threshold gamma_star(nu)")
    s.add_argument("--nu-range", dest="nu_range", type=float, nargs=2)
    s.add_argument("--n", type=int)
    _add_scan_common(s)
    s = ssub.add_parser("homologous", help="homologous thresholds delta_star(alpha, nu)")
    s.add_argument("--nu-list", dest="nu_list", type=float, nargs="+")
    s.add_argument("--alpha-range", dest="alpha_range", type=float, nargs=2)
    s.add_argument("--n", type=int)
    _add_scan_common(s)
    s = ssub.add_parser("raster", help="constitutive inequality raster over (delta, eta)")
    s.add_argument("--model", choices=["svk", "polytropic"])
    s.add_argument("--predicate", choices=["hyperbolicity", "baker_ericksen"])
    s.add_argument("--window", type=float, nargs=4, metavar=("D0", "D1", "E0", "E1"))
    s.add_argument("--nx", type=int)
    s.add_argument("--ny", type=int)
    _add_material(s)
    _add_scan_common(s)
    return ap


def _add_scan_common(s):
    s.add_argument("--workers", type=int, help="worker processes (default $POLYBALL_WORKERS or 1)")
    s.add_argument("--ppm", action="store_const", const=True, help="also write a PPM raster")
    _add_common(s)


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the JSON config over the defaults."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    out = {}
    for k, v in vars(args).items():
        if k == "config":
            continue
        if v is not None:
            out[k] = v
        elif k in cfg:
            out[k] = cfg[k]
        else:
            out[k] = DEFAULTS.get(k)
    return out


def _material(cfg, gamma=None):
    from .constitutive import Material

    g = cfg["gamma"] if gamma is None else gamma
    nu, b = cfg["nu"], cfg["beta"]
    for name, v in (("nu", nu), ("gamma", g), ("beta", b)):
        if v is None or not math.isfinite(v):
            raise ConfigError(f"{name} must be a finite number")
    if not -1.0 < nu <= 0.5:
        raise ConfigError("nu must lie in (-1, 1/2]")
    if g <= 0.0:
        raise ConfigError("gamma must be positive")
    if b == 0.0:
        raise ConfigError("beta must be nonzero")
    bound = 3.0 * g * (1.0 - nu) / (1.0 + nu)
    mat = Material(nu, g, b, kappa=cfg.get("kappa") or 1.0, theta=cfg.get("theta") or 1.0,
                   strict=False)
    if not mat.admissible:
        raise ConfigError(f"inadmissible material: need beta <= 3 gamma (1-nu)/(1+nu) = {bound!r}, "
                          f"got beta = {b!r}")
    return mat


def _opts(cfg, **kw):
    from .static_ball import StaticOptions

    return StaticOptions(rtol=cfg["rtol"], atol=cfg["atol"], r_max=cfg["r_max"],
                         r_classify=cfg["r_classify"], max_seconds=cfg["max_seconds"], **kw)


def _outdir(cfg, stem):
    d = Path(cfg["out"])
    d.mkdir(parents=True, exist_ok=True)
    return d, cfg["prefix"] or stem


def _emit(obj):
    print(pio.dumps(obj))


# -- commands -------------------------------------------------------------------

def cmd_eval(cfg) -> int:
    from .constitutive import StrainState, evaluate

    mat = _material(cfg)
    d, e = cfg["delta"], cfg["eta"]
    if not (d > 0 and e > 0):
        raise ConfigError("delta and eta must be positive")
    ev = evaluate(mat, StrainState(d, e))
    rows = {"p_rad": ev.p_rad, "p_tan": ev.p_tan, "a": ev.a, "b_times": ev.b_times, "w": ev.w,
            "Q": ev.Q, "y_b": mat.y_b, "theta": mat.theta}
    if cfg["json"]:
        _emit(rows)
    else:
        for k, v in rows.items():
            print(f"{k:8s} {pio.fmt(float(v))}")
    return EXIT_OK


def cmd_check(cfg) -> int:
    from . import constitutive as C

    mat = _material(cfg)
    rng = np.random.default_rng(cfg["seed"])
    d, e = C.log_uniform(rng, 1000), C.log_uniform(rng, 1000)
    hyper = C.check_hyperelastic_exactness(mat)
    ra, rb = C.check_scale_invariance(mat, d, e, float(C.log_uniform(rng, 1)[0]))
    cbs = C.cbs_spread(mat, np.geomspace(1e-5, 1e5, 101))
    lin = C.linearization(mat)
    ex = C.linearization_exact(mat.nu)
    lin_err = max(abs(lin[k] - ex[k]) for k in ex)
    weak = C.baker_ericksen(mat, "weak")
    strong = C.baker_ericksen(mat, "strong")
    nn_weak = C.check_nonnegative_energy(mat, "weak")
    nn_strong = C.check_nonnegative_energy(mat, "strong")
    pred = C.condgamma(mat)
    res = {
        "material": mat.to_dict(),
        "hyperelastic_residual": hyper,
        "scale_invariance": [ra, rb],
        "cbs_spread": cbs,
        "linearization_max_error": lin_err,
        "baker_ericksen_weak": {"pass": weak.passed, "min_Q": weak.min_Q},
        "baker_ericksen_strong": {"pass": strong.passed, "min_Q": strong.min_Q,
                                  "witness": strong.witness, "predicate": pred},
        "nonnegative_energy_weak": {"pass": nn_weak[0], "min": nn_weak[1]},
        "nonnegative_energy_strong": {"pass": nn_strong[0], "min": nn_strong[1],
                                      "predicate": pred},
    }
    ok = (hyper <= 1e-6 and max(ra, rb) <= 1e-10 and cbs <= 1e-12 and lin_err <= 1e-8
          and weak.passed and strong.passed == pred and nn_weak[0] and nn_strong[0] == pred)
    res["all_pass"] = ok
    _emit(res)
    if cfg["prefix"]:
        d, stem = _outdir(cfg, "check")
        pio.write_json(d / f"{stem}.manifest.json", pio.manifest("check", cfg, [], {"result": res}))
    return EXIT_OK if ok else EXIT_CHECK


def cmd_static(cfg) -> int:
    from .lagrangian_bridge import euler_to_lagrange
    from .static_ball import CenterData, integrate_static

    mat = _material(cfg)
    center = CenterData(cfg["delta_c"], cfg["theta"])
    prof = integrate_static(center, mat, _opts(cfg))
    d, stem = _outdir(cfg, "static")
    rows = np.column_stack([prof.r, prof.delta, prof.eta, prof.y, prof.F_rad, prof.F_tan,
                            prof.mass])
    outs = [pio.write_csv(d / f"{stem}.csv", ["r", "delta", "eta", "y", "F_rad", "F_tan", "mass"],
                          rows)]
    outs.append(pio.write_json(d / f"{stem}.json", prof.sidecar()))
    if cfg["lagrange"] and prof.R is not None and np.all(prof.delta > 0):
        m = euler_to_lagrange(prof)
        outs.append(pio.write_csv(d / f"{stem}_lagrange.csv",
                                  ["z", "psi", "psiprime", "lambda1", "lambda2"], m.rows()))
    pio.write_json(d / f"{stem}.manifest.json", pio.manifest("static", cfg, outs))
    _emit({"R": prof.R, "type": prof.type_tag, "y_inf": prof.y_inf, "warnings": prof.warnings})
    return EXIT_OK


def cmd_homologous(cfg) -> int:
    from .homologous import (GAMMA_HOM, HomologousParams, find_threshold, integrate_profile,
                             solve_omega, zero_shear_beta)

    beta = cfg["beta"] if cfg.get("beta_given") else zero_shear_beta(cfg["nu"])
    mat = _material({**cfg, "beta": beta}, gamma=GAMMA_HOM)
    alpha = cfg["alpha"]
    if not alpha or not math.isfinite(alpha):
        raise ConfigError("alpha must be finite and nonzero")
    d, stem = _outdir(cfg, "homologous")
    if cfg["threshold"]:
        if alpha >= 0:
            raise ConfigError("thresholds need alpha < 0")
        ds = find_threshold(alpha, mat.nu, beta, theta=cfg["theta"])
        res = {"alpha": alpha, "nu": mat.nu, "beta": beta, "delta_star": ds}
        pio.write_json(d / f"{stem}.manifest.json", pio.manifest("homologous", cfg, [],
                                                                 {"result": res}))
        _emit(res)
        return EXIT_OK
    p = HomologousParams(alpha, mat, cfg["delta0_c"], cfg["theta"])
    traj = solve_omega(p, cfg["t_end"])
    prof = integrate_profile(p, _opts(cfg))
    outs = [pio.write_csv(d / f"{stem}_omega.csv", ["t", "omega", "omegadot"],
                          np.column_stack([traj.t, traj.omega, traj.omegadot])),
            pio.write_csv(d / f"{stem}_profile.csv", ["z", "delta0", "eta0", "y0", "F_rad", "F_tan"],
                          np.column_stack([prof.z, prof.delta0, prof.eta0, prof.y0, prof.F_rad,
                                           prof.F_tan]))]
    side = prof.sidecar(traj.collapse_time)
    side["energy_drift"] = traj.energy_drift()
    outs.append(pio.write_json(d / f"{stem}.json", side))
    pio.write_json(d / f"{stem}.manifest.json", pio.manifest("homologous", cfg, outs))
    _emit({"Z": prof.Z, "Z_max": prof.Z_max_hint, "T": traj.collapse_time})
    return EXIT_OK


def cmd_phase(cfg) -> int:
    from .phase_portrait import fixed_points, track_gamma

    mat = _material(cfg)
    C = cfg["C"] if cfg["C"] is not None else cfg["theta"] * cfg["delta_c"] ** (2.0 - mat.gamma)
    if not C > 0:
        raise ConfigError("C must be positive")
    orb = track_gamma(mat, C, cfg["xi_end"])
    fps = fixed_points(mat) if mat.gamma != 2.0 else []
    d, stem = _outdir(cfg, "phase")
    outs = [pio.write_csv(d / f"{stem}.csv", ["xi", "y", "v"],
                          np.column_stack([orb.xi, orb.y, orb.v])),
            pio.write_json(d / f"{stem}_fixed_points.json", [f.to_dict() for f in fps])]
    summary = orb.omega_limit()
    summary["exit_location"] = orb.exit_location
    summary["invariance_violations"] = orb.invariance_violations
    pio.write_json(d / f"{stem}.manifest.json", pio.manifest("phase", cfg, outs,
                                                            {"result": summary}))
    _emit(summary)
    return EXIT_OK


def _write_region(region, cfg, kind, d, stem):
    outs = [pio.write_csv(d / f"{stem}.csv", region.header(), region.rows())]
    if cfg.get("ppm"):
        outs.append(pio.write_pnm(d / f"{stem}.ppm", region.to_rgb()))
    extra = {"grid": region.grid.to_dict(), "counts": region.counts(),
             "extras": region.extras, "violations": region.violations,
             "wall_time": region.wall_time}
    pio.write_json(d / f"{stem}.manifest.json", pio.manifest(f"scan {kind}", cfg, outs, extra))


def cmd_scan(cfg) -> int:
    from . import atlas

    kind = cfg["scan"]
    workers = cfg["workers"] if cfg["workers"] is not None else atlas.default_workers()
    d, stem = _outdir(cfg, f"scan_{kind}")
    if kind == "static":
        nu = cfg["nu"]
        if not -1.0 < nu <= 0.5:
            raise ConfigError("nu must lie in (-1, 1/2]")
        grid = atlas.static_grid(nu, cfg["nx"], cfg["ny"], tuple(cfg["gamma_range"]),
                                 tuple(cfg["beta_range"]) if cfg["beta_range"] else None,
                                 cfg["timeout"])
        region = atlas.scan_static_region(nu, grid, _opts(cfg), workers)
        _write_region(region, cfg, kind, d, stem)
        _emit({"counts": region.counts(), "gammastar": region.extras.get("gammastar"),
               "gammastar_grid": region.extras.get("gammastar_grid"),
               "violations": len(region.violations)})
        if region.violations:
            return EXIT_PROVEN
        return EXIT_TIMEOUT if region.any_timeout() else EXIT_OK
    if kind == "gammastar":
        lo, hi = cfg["nu_range"]
        if not -1.0 < lo < hi < 0.5:
            raise ConfigError("nu range must lie in (-1, 1/2)")
        curve = atlas.scan_gammastar_curve(np.linspace(lo, hi, cfg["n"]), workers=workers)
        outs = [pio.write_csv(d / f"{stem}.csv", ["nu", "gammastar", "status", "wall_time"],
                              [[c["nu"], c["gammastar"], c["status"], c["wall_time"]]
                               for c in curve])]
        mono = atlas.is_nondecreasing(curve)
        pio.write_json(d / f"{stem}.manifest.json", pio.manifest(
            "scan gammastar", cfg, outs, {"nondecreasing": mono}))
        _emit({"nondecreasing": mono, "curve": [[c["nu"], c["gammastar"]] for c in curve]})
        return EXIT_OK
    if kind == "homologous":
        curves = atlas.scan_homologous_threshold(tuple(cfg["nu_list"]), tuple(cfg["alpha_range"]),
                                                 cfg["n"], workers=workers)
        rows = [[nu, p["alpha"], p["delta_star"], p["status"], p["wall_time"]]
                for nu, pts in curves.items() for p in pts]
        outs = [pio.write_csv(d / f"{stem}.csv", ["nu", "alpha", "delta_star", "status",
                                                  "wall_time"], rows)]
        bad = atlas.threshold_ordering(curves)
        pio.write_json(d / f"{stem}.manifest.json", pio.manifest(
            "scan homologous", cfg, outs, {"ordering_failures": bad}))
        _emit({"ordering_failures": bad})
        return EXIT_OK
    if kind == "raster":
        w = cfg["window"]
        nx = cfg["nx"] if cfg["nx"] is not None else 200
        ny = cfg["ny"] if cfg["ny"] is not None else 200
        if cfg["model"] == "polytropic":
            _material(cfg)
        region = atlas.raster_inequality_region(cfg["model"], cfg["predicate"],
                                                ((w[0], w[1]), (w[2], w[3])), (nx, ny),
                                                cfg["nu"], cfg["gamma"], cfg["beta"],
                                                cfg["kappa"])
        _write_region(region, cfg, kind, d, stem)
        _emit({"counts": region.counts()})
        return EXIT_OK
    raise ConfigError(f"unknown scan {kind!r}")


COMMANDS = {"eval": cmd_eval, "check": cmd_check, "static": cmd_static,
            "homologous": cmd_homologous, "phase": cmd_phase, "scan": cmd_scan}


def main(argv=None) -> int:
    from .static_ball import SolverError

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        if args.command == "homologous":
            cfg["beta_given"] = args.beta is not None or "beta" in _config_keys(args)
        return COMMANDS[args.command](cfg)
    except ValueError as exc:
        # parameter errors of every module derive from ValueError
        print(f"polyball: error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except SolverError as exc:
        print(f"polyball: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def _config_keys(args) -> set:
    if not getattr(args, "config", None):
        return set()
    try:
        return set(json.loads(Path(args.config).read_text()))
    except (OSError, ValueError):
        return set()


if __name__ == "__main__":
    sys.exit(main())
