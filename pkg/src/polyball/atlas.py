"""Parameter-plane scanners.

Cells are independent tasks.  With ``workers > 1`` they are mapped over a
process pool; results are sorted by cell index, so the output does not depend
on scheduling.  Nonexistence is censored by the solver horizon.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .constitutive import (Material, StrainState, baker_ericksen, coeff_a, condgamma,
                           polytropic_be_ratio, svk_be_ratio, svk_eval, TOL)
from .static_ball import CenterData, SolverError, StaticOptions, integrate_static

VERDICTS = ("exists-A", "exists-B", "none", "inadmissible", "timeout")
RASTER_VERDICTS = ("pass", "fail")


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("POLYBALL_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid over two named axes.

    ``x`` varies along columns and ``y`` along rows; both include their
    endpoints.
    """

    x_name: str
    x_range: tuple[float, float]
    nx: int
    y_name: str
    y_range: tuple[float, float]
    ny: int
    fixed: dict = field(default_factory=dict)
    timeout: float = 0.0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("resolutions must be at least 2")
        for r in (self.x_range, self.y_range):
            if len(r) != 2 or not all(math.isfinite(v) for v in r) or not r[0] < r[1]:
                raise ValueError(f"invalid range {r!r}")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(*self.x_range, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(*self.y_range, self.ny)

    def refined(self) -> "GridSpec":
        """Same window with the grid step halved."""
        return GridSpec(self.x_name, self.x_range, 2 * self.nx - 1, self.y_name, self.y_range,
                        2 * self.ny - 1, dict(self.fixed), self.timeout)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["x_range"] = list(self.x_range)
        d["y_range"] = list(self.y_range)
        return d


@dataclass
class RegionMap:
    """Verdicts on a grid, ``verdict[j, i]`` at ``(xs[i], ys[j])``."""

    grid: GridSpec
    verdict: np.ndarray
    meta: list
    extras: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def xs(self):
        return self.grid.xs

    @property
    def ys(self):
        return self.grid.ys

    def counts(self) -> dict:
        vals, n = np.unique(self.verdict, return_counts=True)
        return {str(v): int(k) for v, k in zip(vals, n)}

    def meta_keys(self) -> list[str]:
        keys = []
        for m in self.meta:
            for k in m:
                if k not in keys and k != "wall_time":
                    keys.append(k)
        return keys

    def rows(self, timing: bool = True):
        keys = self.meta_keys()
        nx = self.grid.nx
        for idx, m in enumerate(self.meta):
            j, i = divmod(idx, nx)
            row = [self.xs[i], self.ys[j], self.verdict[j, i]] + [m.get(k) for k in keys]
            if timing:
                row.append(m.get("wall_time"))
            yield row

    def header(self, timing: bool = True) -> list[str]:
        h = ["x", "y", "verdict"] + self.meta_keys()
        return h + ["wall_time"] if timing else h

    def fingerprint(self) -> tuple:
        """Deterministic content (everything except timings)."""
        return (self.grid.to_dict().__repr__(), self.verdict.tobytes(),
                tuple(tuple(sorted((k, repr(v)) for k, v in m.items() if k != "wall_time"))
                      for m in self.meta))

    def any_timeout(self) -> bool:
        return bool(np.any(self.verdict == "timeout"))

    def to_rgb(self) -> np.ndarray:
        """Colour raster with the largest ``y`` on the top row."""
        pal = {"exists-A": (200, 40, 40), "exists-B": (40, 90, 200), "none": (235, 235, 235),
               "inadmissible": (90, 90, 90), "timeout": (240, 200, 0), "pass": (40, 160, 60),
               "fail": (220, 220, 220)}
        img = np.zeros(self.verdict.shape + (3,), dtype=np.uint8)
        for k, col in pal.items():
            img[self.verdict == k] = col
        return img[::-1]


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks, chunksize=chunk))


# -- static (gamma, beta) region ------------------------------------------------

def in_VA(mat: Material) -> bool:
    """Proven type-A set: ``gamma > 2`` and ``1 < beta <= gamma``."""
    return mat.gamma > 2.0 and 1.0 < mat.beta <= mat.gamma


def in_VB(mat: Material) -> bool:
    """Proven type-B set: ``0 < gamma <= beta < 1`` or ``beta < gamma <= 1``, and ``y_P < y_b``."""
    g, b = mat.gamma, mat.beta
    if not ((0.0 < g <= b < 1.0) or (b < g <= 1.0)):
        return False
    if b == 0.0 or not mat.admissible:
        return False
    yp = (4.0 - 3.0 * g) / (3.0 * (2.0 - g))
    return yp < mat.y_b


def _static_cell(task):
    idx, nu, gamma, beta, opts = task
    t0 = time.perf_counter()
    meta = {"R": None, "y_b": None, "status": ""}
    mat = Material(nu, gamma, beta, strict=False) if beta != 0.0 else None
    if mat is None or not mat.admissible:
        meta["status"] = "inadmissible"
        meta["wall_time"] = time.perf_counter() - t0
        return idx, "inadmissible", meta
    meta["y_b"] = mat.y_b
    try:
        prof = integrate_static(CenterData(), mat, opts)
    except SolverError as exc:
        meta["status"] = f"solver-error: {exc}"
        meta["wall_time"] = time.perf_counter() - t0
        return idx, "timeout", meta
    meta["status"] = prof.status
    if "timeout" in prof.warnings:
        verdict = "timeout"
    elif prof.type_tag == "A":
        verdict = "exists-A"
    elif prof.type_tag == "B":
        verdict = "exists-B"
    elif prof.type_tag == "none":
        verdict = "none"
    else:
        verdict = "timeout"
    meta["R"] = prof.R if prof.R is not None else None
    meta["horizon"] = prof.R_max_hint if prof.R is None else None
    if prof.warnings:
        meta["status"] += ";" + "|".join(prof.warnings)
    meta["wall_time"] = time.perf_counter() - t0
    return idx, verdict, meta


def proven_set_violations(region: RegionMap, nu: float) -> list[dict]:
    """Cells of the proven sets whose verdict contradicts the proven type.

    Inadmissible and timed-out cells carry no verdict and are skipped.
    """
    out = []
    for j, b in enumerate(region.ys):
        for i, g in enumerate(region.xs):
            v = region.verdict[j, i]
            if v in ("inadmissible", "timeout"):
                continue
            mat = Material(nu, float(g), float(b), strict=False)
            if in_VA(mat) and v != "exists-A":
                out.append({"gamma": float(g), "beta": float(b), "expected": "exists-A", "got": v})
            elif in_VB(mat) and v != "exists-B":
                out.append({"gamma": float(g), "beta": float(b), "expected": "exists-B", "got": v})
    return out


def static_grid(nu: float, nx: int = 100, ny: int = 100, gamma_range=(0.05, 3.0),
                beta_range=None, timeout: float = 0.0) -> GridSpec:
    """Default ``(gamma, beta)`` window covering the admissible wedge."""
    if beta_range is None:
        c = (1.0 - nu) / (1.0 + nu)
        beta_range = (-1.0, 3.0 * gamma_range[1] * c)
    return GridSpec("gamma", tuple(gamma_range), nx, "beta", tuple(beta_range), ny,
                    {"nu": nu}, timeout)


def scan_static_region(nu: float, grid: GridSpec | None = None, opts: StaticOptions | None = None,
                       workers: int | None = None, gammastar: bool = True) -> RegionMap:
    """Existence and type of static balls over the ``(gamma, beta)`` plane.

    Besides the cell verdicts, ``extras`` holds the zero-shear threshold
    ``gammastar`` (bisection along ``beta = 3 gamma c``, with the grid step
    as its uncertainty) and per-column ``beta_star_estimate`` values (lowest
    existing ``beta``).  Violations of the proven sets are listed in
    ``violations``.
    """
    if not -1.0 < nu <= 0.5:
        raise ValueError("nu must lie in (-1, 1/2]")
    grid = static_grid(nu) if grid is None else grid
    workers = default_workers() if workers is None else workers
    opts = StaticOptions() if opts is None else opts
    if grid.timeout > 0.0:
        opts = StaticOptions(**{**opts.to_dict(), "max_seconds": grid.timeout})
    t0 = time.perf_counter()
    xs, ys = grid.xs, grid.ys
    tasks = [(j * grid.nx + i, nu, float(xs[i]), float(ys[j]), opts)
             for j in range(grid.ny) for i in range(grid.nx)]
    res = sorted(_map(_static_cell, tasks, workers), key=lambda r: r[0])
    verdict = np.array([r[1] for r in res], dtype=object).reshape(grid.ny, grid.nx)
    verdict = verdict.astype("<U12")
    region = RegionMap(grid, verdict, [r[2] for r in res])
    region.violations = proven_set_violations(region, nu)
    region.extras["beta_star_estimate"] = _beta_star(region)
    if gammastar:
        lo, hi = grid.x_range
        gs = gammastar_bisect(nu, (lo, hi), opts=opts)
        region.extras["gammastar"] = gs
        region.extras["gammastar_uncertainty"] = float(xs[1] - xs[0])
        region.extras["gammastar_grid"] = gammastar_from_grid(region, nu)
    region.wall_time = time.perf_counter() - t0
    return region


def _beta_star(region: RegionMap) -> list:
    out = []
    for i, g in enumerate(region.xs):
        col = region.verdict[:, i]
        ok = np.nonzero(np.char.startswith(col, "exists"))[0]
        out.append([float(g), float(region.ys[ok[0]]) if ok.size else None])
    return out


def gammastar_from_grid(region: RegionMap, nu: float) -> float | None:
    """Smallest ``gamma`` column whose topmost admissible cell holds a ball.

    The topmost admissible cell lies within one ``beta`` step below the
    zero-shear line.
    """
    for i, g in enumerate(region.xs):
        col = region.verdict[:, i]
        adm = np.nonzero(col != "inadmissible")[0]
        if adm.size and col[adm[-1]].startswith("exists"):
            return float(g)
    return None


def zero_shear_exists(nu: float, gamma: float, opts: StaticOptions | None = None) -> bool:
    """Existence of a zero-boundary-shear ball, ``beta = 3 gamma (1-nu)/(1+nu)``."""
    c = (1.0 - nu) / (1.0 + nu)
    mat = Material(nu, gamma, 3.0 * gamma * c)
    o = StaticOptions(classify=False) if opts is None else StaticOptions(
        **{**opts.to_dict(), "classify": False})
    try:
        return integrate_static(CenterData(), mat, o).R is not None
    except SolverError:
        return False


def gammastar_bisect(nu: float, gamma_range=(0.01, 3.0), n_coarse: int = 60, tol: float = 1e-4,
                     opts: StaticOptions | None = None) -> float | None:
    """Smallest ``gamma`` on the zero-shear line with a ball.

    A geometric coarse sweep locates the first ``gamma`` with a ball, then
    bisection refines the preceding interval to ``tol``.
    """
    gs = np.geomspace(gamma_range[0], gamma_range[1], n_coarse)
    prev = None
    for g in gs:
        if zero_shear_exists(nu, float(g), opts):
            if prev is None:
                return float(g)
            lo, hi = prev, float(g)
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if zero_shear_exists(nu, mid, opts):
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        prev = float(g)
    return None


def _gammastar_task(task):
    i, nu, gr, tol = task
    t0 = time.perf_counter()
    try:
        g = gammastar_bisect(nu, gr, tol=tol)
        status = "ok" if g is not None else "no-bracket"
    except (ValueError, SolverError) as exc:
        g, status = None, f"error: {exc}"
    return i, nu, g, status, time.perf_counter() - t0


def scan_gammastar_curve(nu_values, gamma_range=(1e-3, 3.0), tol: float = 1e-4,
                         workers: int | None = None) -> list[dict]:
    """``gamma_star(nu)`` at each ``nu`` (zero-shear existence threshold)."""
    workers = default_workers() if workers is None else workers
    tasks = [(i, float(nu), tuple(gamma_range), tol) for i, nu in enumerate(nu_values)]
    res = sorted(_map(_gammastar_task, tasks, workers))
    return [{"nu": r[1], "gammastar": r[2], "status": r[3], "wall_time": r[4]} for r in res]


def is_nondecreasing(curve: list[dict], slack: float = 0.0) -> bool:
    vals = [c["gammastar"] for c in curve if c["gammastar"] is not None]
    return all(b >= a - slack for a, b in zip(vals, vals[1:]))


# -- homologous thresholds ------------------------------------------------------

def _threshold_task(task):
    i, nu, alpha, rel = task
    from .homologous import NoSignChange, find_threshold

    t0 = time.perf_counter()
    lo, hi = abs(alpha), 1e3 * abs(alpha)
    try:
        from .homologous import exists_at

        k = 0
        while not exists_at(alpha, nu, hi) and k < 3:
            lo, hi, k = hi, 10.0 * hi, k + 1
        d = find_threshold(alpha, nu, bracket=(lo, hi), rel_width=rel)
        status = "ok"
    except (NoSignChange, ValueError, SolverError) as exc:
        d, status = None, f"error: {exc}"
    return i, nu, alpha, d, status, time.perf_counter() - t0


def scan_homologous_threshold(nu_list=(0.0, 0.25, 0.45), alpha_range=(-1.0, -0.01),
                              resolution: int = 5, rel_width: float = 1e-3,
                              workers: int | None = None) -> dict:
    """``delta_star(alpha, nu)`` on a geometric ``alpha`` grid for each ``nu``."""
    if not alpha_range[0] < alpha_range[1] < 0.0:
        raise ValueError("alpha_range must be negative and increasing")
    workers = default_workers() if workers is None else workers
    alphas = -np.geomspace(-alpha_range[0], -alpha_range[1], resolution)
    tasks = [(k, float(nu), float(a), rel_width)
             for k, (nu, a) in enumerate((nu, a) for nu in nu_list for a in alphas)]
    res = sorted(_map(_threshold_task, tasks, workers))
    curves = {}
    for _, nu, a, d, status, wt in res:
        curves.setdefault(nu, []).append({"alpha": a, "delta_star": d, "status": status,
                                          "wall_time": wt})
    return curves


def threshold_ordering(curves: dict) -> list[dict]:
    """Points where ``delta_star`` fails to increase with ``nu`` at fixed ``alpha``."""
    nus = sorted(curves)
    bad = []
    for k in range(len(curves[nus[0]])):
        vals = [curves[nu][k]["delta_star"] for nu in nus]
        a = curves[nus[0]][k]["alpha"]
        if any(v is None for v in vals) or any(b <= a_ for a_, b in zip(vals, vals[1:])):
            bad.append({"alpha": a, "values": vals})
    return bad


# -- constitutive rasters -------------------------------------------------------

def raster_inequality_region(model: str, predicate: str, window=((0.1, 3.0), (0.1, 3.0)),
                             resolution=(200, 200), nu: float = 0.25, gamma: float = 2.0,
                             beta: float = 2.0, kappa: float = 1.0) -> RegionMap:
    """Pass/fail raster of a constitutive inequality over ``(delta, eta)``.

    Parameters
    ----------
    model : {"polytropic", "svk"}
    predicate : {"hyperbolicity", "baker_ericksen"}
        ``a = d p_rad/d delta > 0`` or ``(p_tan - p_rad)/(eta - delta) >= 0``.
    """
    grid = GridSpec("delta", tuple(window[0]), resolution[0], "eta", tuple(window[1]),
                    resolution[1], {"model": model, "predicate": predicate, "nu": nu,
                                    "gamma": gamma, "beta": beta, "kappa": kappa})
    t0 = time.perf_counter()
    D, E = np.meshgrid(grid.xs, grid.ys)
    s = StrainState(D, E)
    if model == "polytropic":
        mat = Material(nu, gamma, beta, kappa=kappa)
        if predicate == "hyperbolicity":
            val = np.asarray(coeff_a(mat, s))
        elif predicate == "baker_ericksen":
            val = np.asarray(polytropic_be_ratio(mat, s))
        else:
            raise ValueError(f"unknown predicate {predicate!r}")
    elif model == "svk":
        if predicate == "hyperbolicity":
            val = np.asarray(svk_eval(nu, kappa, s).a)
        elif predicate == "baker_ericksen":
            val = np.asarray(svk_be_ratio(nu, kappa, s))
        else:
            raise ValueError(f"unknown predicate {predicate!r}")
    else:
        raise ValueError(f"unknown model {model!r}")
    ok = val > 0.0 if predicate == "hyperbolicity" else val >= -TOL * kappa
    verdict = np.where(ok, "pass", "fail").astype("<U12")
    meta = [{"value": float(v)} for v in val.ravel()]
    region = RegionMap(grid, verdict, meta)
    region.wall_time = time.perf_counter() - t0
    return region


def _be_cell(task):
    idx, nu, g, b = task
    mat = Material(nu, g, b, strict=False)
    if b == 0.0 or not mat.admissible:
        return idx, "inadmissible", {"predicate": None}
    r = baker_ericksen(mat, "strong")
    pred = condgamma(mat)
    return idx, ("pass" if r.passed else "fail"), {"predicate": pred, "min_Q": r.min_Q}


def scan_be_plane(nu: float, grid: GridSpec, workers: int | None = None) -> RegionMap:
    """Sampled strong Baker-Ericksen verdict over ``(gamma, beta)``.

    ``extras["mismatches"]`` lists cells where the sampled verdict and the
    closed-form predicate disagree.
    """
    workers = default_workers() if workers is None else workers
    xs, ys = grid.xs, grid.ys
    tasks = [(j * grid.nx + i, nu, float(xs[i]), float(ys[j]))
             for j in range(grid.ny) for i in range(grid.nx)]
    res = sorted(_map(_be_cell, tasks, workers), key=lambda r: r[0])
    verdict = np.array([r[1] for r in res]).reshape(grid.ny, grid.nx).astype("<U12")
    region = RegionMap(grid, verdict, [r[2] for r in res])
    mism = []
    for (idx, v, m) in res:
        if v == "inadmissible":
            continue
        if (v == "pass") != m["predicate"]:
            j, i = divmod(idx, grid.nx)
            mism.append({"gamma": float(xs[i]), "beta": float(ys[j]), "sampled": v})
    region.extras["mismatches"] = mism
    return region
