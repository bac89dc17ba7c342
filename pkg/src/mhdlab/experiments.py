"""Verification suites and batch experiments behind the ``mhdlab`` command."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import grid as gs
from . import hodge
from . import lambda3 as l3
from . import mild, presets
from . import propagators as prop
from .grid import FormField, Grid

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_TOLERANCE = 0, 2, 3, 4


# -- algebra -----------------------------------------------------------------------

def algebra_suite(cases: int, rng: np.random.Generator) -> dict[str, float]:
    """Max relative residuals of the pointwise identities over random cases.

    ``d`` and ``d*`` act on a plane wave with wave vector ``xi`` as ``i xi ^``
    and ``-i xi _|``, so ``d^2 = 0``, ``(d*)^2 = 0`` and
    ``*d*u = (-1)^l d(*u)`` reduce to identities of the symbols.
    """
    a = rng.standard_normal((cases, 3))
    u = rng.standard_normal((cases, 8))
    v = rng.standard_normal((cases, 8))
    nrm = np.linalg.norm

    def wedge1(x, w):
        return np.einsum("nm,mij,nj->ni", x, l3.LEFT_WEDGE, w)

    def inter1(x, w):
        return np.einsum("nm,mij,nj->ni", x, l3.LEFT_INTERIOR, w)

    scale = nrm(a, axis=1) * nrm(u, axis=1) * nrm(v, axis=1)
    adj = np.abs(np.sum(wedge1(a, u) * v, axis=1) - np.sum(u * inter1(a, v), axis=1)) / scale
    sq = nrm(a, axis=1) ** 2 * nrm(u, axis=1)
    dd = nrm(wedge1(a, wedge1(a, u)), axis=1) / sq
    deldel = nrm(inter1(a, inter1(a, u)), axis=1) / sq
    star = 0.0
    for ell in range(4):
        mask = l3.GRADE_OF == ell
        ul = np.where(mask, u, 0.0)
        lhs = -inter1(a, ul) @ l3.STAR.T
        rhs = (-1) ** ell * wedge1(a, ul @ l3.STAR.T)
        star = max(star, float(np.max(nrm(lhs - rhs, axis=1) / (nrm(a, axis=1) * nrm(ul, axis=1)))))
    return {"adjunction": float(adj.max()), "d_squared": float(dd.max()),
            "codifferential_squared": float(deldel.max()), "star_intertwining": star}


# -- Hodge ------------------------------------------------------------------------

def _white_noise(grid: Grid, grades, rng) -> FormField:
    data = np.zeros((8,) + grid.shape)
    idx = l3.grade_indices(grades)
    data[idx] = rng.standard_normal((len(idx),) + grid.shape)
    return FormField(grid, data, False, grades).to_spectral()


def hodge_suite(grid: Grid, rng: np.random.Generator, samples: int = 2) -> dict[str, float]:
    """Relative residuals of the decomposition and potential-operator identities
    on white-noise fields of every grade (Nyquist content included)."""
    rel = lambda x, y: gs.lq_norm(x, 2) / gs.lq_norm(y, 2)
    out = dict.fromkeys(("reconstruction", "orthogonality", "dR_plus_Rd", "dstarS_plus_Sdstar",
                         "dK", "dR_on_range_d", "dstarS_on_range_dstar"), 0.0)
    for _ in range(samples):
        f = _white_noise(grid, l3.ALL_GRADES, rng)
        split = hodge.hodge_decompose(f)
        nf2 = gs.lq_norm(f, 2) ** 2
        pieces = (split.exact, split.coexact, split.harmonic)
        orth = max(abs(gs.l2_inner(x, y)) / nf2 for i, x in enumerate(pieces) for y in pieces[i + 1:])
        Kf = hodge.compact_K(f)
        vals = {
            "reconstruction": rel(split.total() - f, f),
            "orthogonality": orth,
            "dR_plus_Rd": rel(gs.d(hodge.homotopy_R(f)) + hodge.homotopy_R(gs.d(f)) - (f - Kf), f),
            "dstarS_plus_Sdstar": rel(gs.delta(hodge.homotopy_S(f)) + hodge.homotopy_S(gs.delta(f))
                                      - (f - hodge.compact_Kstar(f)), f),
            "dK": gs.lq_norm(gs.d(Kf), 2) / np.sqrt(nf2),
        }
        ex = gs.d(_white_noise(grid, {0, 1, 2}, rng))
        co = gs.delta(_white_noise(grid, {1, 2, 3}, rng))
        vals["dR_on_range_d"] = rel(gs.d(hodge.homotopy_R(ex)) - ex, ex)
        vals["dstarS_on_range_dstar"] = rel(gs.delta(hodge.homotopy_S(co)) - co, co)
        for k, v in vals.items():
            out[k] = max(out[k], float(v))
    return out


# -- semigroups ---------------------------------------------------------------------

def semigroup_suite(grid: Grid, rng: np.random.Generator) -> dict[str, float]:
    """Semigroup law for both operators and exact decay of a single mode."""
    u = hodge.leray_P(gs.random_field(grid, {1}, rng))
    b = hodge.Q_proj(gs.random_field(grid, {2}, rng))
    law = 0.0
    for heat, f in ((prop.heat_stokes, u), (prop.heat_maxwell, b)):
        for t, s in ((0.1, 0.3), (0.5, 1.25)):
            lhs = heat(t, heat(s, f))
            rhs = heat(t + s, f)
            law = max(law, gs.lq_norm(lhs - rhs, 2) / gs.lq_norm(rhs, 2))
    x = grid.coords * (2 * np.pi / grid.L)
    kk = (2 * np.pi / grid.L) ** 2
    mode = np.stack([np.sin(x[1]), np.zeros(grid.shape), np.zeros(grid.shape)])
    u0 = FormField.from_vector(grid, mode, 1)
    decay = 0.0
    for t in (0.25, 1.0, 3.0):
        got = prop.heat_stokes(t, u0).vector(1)
        decay = max(decay, float(np.abs(got - np.exp(-kk * t) * mode).max()) / np.exp(-kk * t))
    return {"semigroup_law": law, "single_mode_decay": decay}


@dataclass
class SmoothingExperiment:
    report: prop.SmoothingReport
    slope: float
    predicted: float
    window: tuple[float, float]

    @property
    def rel_error(self) -> float:
        return abs(self.slope - self.predicted) / abs(self.predicted) if self.predicted else abs(self.slope)


def smoothing_experiment(grid: Grid, op: str = "S", p: float = 1.5, q: float = 3.0,
                         nwidths: int = 9, ntimes: int = 25) -> SmoothingExperiment:
    """Small-time ``L^p -> L^q`` gain on Gaussian bumps and its log-log slope.

    Widths run from 4 grid cells upward by factors ``2^(1/4)``. The slope is
    fitted on ``t`` between the square of the smallest width and half the
    square of the torus radius ``L / 2 pi``: below that the bumps are not
    narrow enough, above it the periodic images take over.
    """
    widths = 4 * grid.h * 2.0 ** (np.arange(nwidths) / 4)
    R2 = (grid.L / (2 * np.pi)) ** 2
    times = np.geomspace(widths[0] ** 2 / 4, R2, ntimes)
    ens = prop.gaussian_bump_ensemble(grid, op, widths)
    rep = prop.measure_smoothing(op, p, q, ens, times)
    window = (float(widths[0] ** 2), 0.5 * R2)
    try:
        slope = rep.slope(*window)
    except ValueError:
        # grid too coarse: the narrowest bump already spans the fitting window
        slope = float("nan")
    return SmoothingExperiment(rep, slope, -rep.alpha / 2, window)


# -- contraction constants ------------------------------------------------------------

def random_data_factory(amplitude: float = 1.0):
    def factory(grid, rng):
        return presets.make_preset("random-bandlimited", grid, amplitude, int(rng.integers(2 ** 31)))
    return factory


def contraction_sweep(grid: Grid, Ts, config: mild.SolverConfig, size: int, seed: int):
    """``C_hat(T)`` for each ``T``, every time from the same seeded ensemble."""
    out = []
    for T in Ts:
        ens = mild.heat_pair_ensemble(grid, T, config, size, np.random.default_rng(seed),
                                      random_data_factory())
        out.append(mild.contraction_estimate(ens, config))
    return out


def spread(values) -> float:
    values = np.asarray(values, dtype=float)
    return float((values.max() - values.min()) / values.max())


# -- scaling covariance ---------------------------------------------------------------

@dataclass
class ScalingReport:
    lam: float
    heat_rel_error: float
    heat_l3_rel_error: float
    nonlinear_rel_error: float | None
    nonlinear_l3_rel_error: float | None
    iterations: tuple[int, int] | None

    def passed(self, heat_tol: float = 1e-6, nonlinear_tol: float = 1e-4) -> bool:
        ok = self.heat_rel_error <= heat_tol and self.heat_l3_rel_error <= heat_tol
        if self.nonlinear_rel_error is not None:
            ok = ok and self.nonlinear_rel_error <= nonlinear_tol and self.nonlinear_l3_rel_error <= nonlinear_tol
        return ok


def _traj_compare(big: mild.Trajectory, small: mild.Trajectory, lam: float):
    """Compare ``small(t, x)`` with ``lam big(lam^2 t, lam x)`` node by node.

    Both trajectories have the same node indices (horizons ``T`` and
    ``T / lam^2``), and the two grids have the same number of points, so the
    rescaled field has the same spectral coefficients times ``lam``.
    """
    err = scale = l3err = 0.0
    for j in range(1, big.J + 1):
        target = lam * big.coeffs[j]
        err = max(err, float(np.abs(small.coeffs[j] - target).max()))
        scale = max(scale, float(np.abs(target).max()))
        nb = gs.lq_norm(big.field(j), 3)
        ns = gs.lq_norm(small.field(j), 3)
        if nb > 0:
            l3err = max(l3err, abs(ns - nb) / nb)
    return (err / scale if scale > 0 else err), l3err


def scaling_covariance(preset: str, lam: float, grid: Grid, T: float, config: mild.SolverConfig,
                       amplitude: float | None = None, seed: int = 0, nonlinear: bool = True) -> ScalingReport:
    """Solve on the torus of period ``L`` and on the one of period ``L / lam``."""
    small_grid = grid.scaled(lam)
    u0, b0 = presets.make_preset(preset, grid, amplitude, seed)
    v0, c0 = presets.make_preset(preset, small_grid, amplitude, seed)
    a1, a2 = mild.initial_terms(u0, b0, T, config)
    s1, s2 = mild.initial_terms(v0, c0, T / lam ** 2, config)
    eu, lu = _traj_compare(a1, s1, lam)
    eb, lb = _traj_compare(a2, s2, lam)
    rep = ScalingReport(lam, max(eu, eb), max(lu, lb), None, None, None)
    if nonlinear:
        big = mild.picard_solve(u0, b0, T, config, certify=False)
        small = mild.picard_solve(v0, c0, T / lam ** 2, config, certify=False)
        eu, lu = _traj_compare(big.u, small.u, lam)
        eb, lb = _traj_compare(big.b, small.b, lam)
        rep.nonlinear_rel_error = max(eu, eb)
        rep.nonlinear_l3_rel_error = max(lu, lb)
        rep.iterations = (big.iterations, small.iterations)
    return rep


# -- output helpers --------------------------------------------------------------------

def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def _clean(obj):
    """JSON-ready copy with plain floats and lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_manifest(out: Path, cfg, status: str, exit_code: int, results: dict, files) -> Path:
    """``manifest.json``: config, results and SHA-256 of every output file.

    Contains nothing run-dependent (no timings, no absolute paths), so equal
    config and seed give byte-identical manifests.
    """
    entries = {}
    for name in sorted(files):
        entries[name] = hashlib.sha256((out / name).read_bytes()).hexdigest()
    manifest = {"package": "mhdlab", "version": __version__, "experiment": cfg.kind,
                "config": cfg.as_dict(), "status": status, "exit_code": exit_code,
                "results": _clean(results), "files": entries}
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# -- runners ----------------------------------------------------------------------------

def run_simulate(cfg, out: Path):
    grid, sc = cfg.grid(), cfg.solver_config()
    u0, b0 = presets.make_preset(cfg.preset, grid, cfg.amplitude, cfg.seed)
    sol = mild.picard_solve(u0, b0, cfg.T, sc)
    files = ["residuals.csv", "norms.csv"]
    _write_csv(out / "residuals.csv", ["iteration", "residual"],
               [(i + 1, r) for i, r in enumerate(sol.residuals)])
    nu, nb = mild.critical_norm(sol.u, "U", sc), mild.critical_norm(sol.b, "B", sc)
    rows = []
    for j, t in enumerate(sol.u.times):
        l3u, l3b = gs.lq_norm(sol.u.field(j), 3), gs.lq_norm(sol.b.field(j), 3)
        tu = 0.0 if j == 0 else nu.value_terms[j - 1] + nu.derivative_terms[j - 1]
        tb = 0.0 if j == 0 else nb.value_terms[j - 1] + nb.derivative_terms[j - 1]
        rows.append((float(t), tu, tb, l3u, l3b))
    _write_csv(out / "norms.csv", ["t", "U_term", "B_term", "L3_u", "L3_b"], rows)
    stride = cfg.snapshot_stride or max(cfg.J // 8, 1)
    (out / "snapshots").mkdir(exist_ok=True)
    for j in sorted(set(range(0, cfg.J + 1, stride)) | {cfg.J}):
        for name, traj in (("u", sol.u), ("b", sol.b)):
            rel = f"snapshots/{name}_{j:04d}.field"
            gs.save_field(traj.field(j), out / rel)
            files.append(rel)
    results = {"status": sol.status, "iterations": sol.iterations, "residuals": sol.residuals,
               "max_ratio": sol.max_ratio, "norm_a": sol.norm_a, "U_norm": nu.value, "B_norm": nb.value,
               "fixed_point_residual": sol.fixed_point_residual, "subspace_defect": sol.subspace_defect}
    code = EXIT_OK if sol.converged else EXIT_DIVERGED
    if sol.converged and cfg.reference_dt:
        from .reference import compare_mild_vs_reference, reference_solve
        ref = reference_solve(u0, b0, cfg.T, cfg.reference_dt, save_times=[cfg.T / 2, cfg.T])
        rep = compare_mild_vs_reference(sol, ref, tolerance=cfg.compare_tol)
        results["reference"] = {"dt": ref.dt, "times": rep.times, "rel_l2": rep.rel_l2,
                                "rel_l3": rep.rel_l3, "max_div_defect": ref.max_div_defect}
        if not rep.passed:
            code = EXIT_TOLERANCE
    return sol.status if code != EXIT_TOLERANCE else "tolerance-failure", code, results, files


def run_measure_smoothing(cfg, out: Path):
    exp = smoothing_experiment(cfg.grid(), cfg.smoothing_op, cfg.smoothing_p, cfg.smoothing_q,
                               cfg.smoothing_widths, cfg.smoothing_times)
    exp.report.write_csv(out / "smoothing.csv")
    results = exp.report.summary()
    results.update(slope=exp.slope, predicted_slope=exp.predicted, slope_window=list(exp.window),
                   slope_rel_error=exp.rel_error)
    ok = exp.report.alpha == 0 or bool(exp.rel_error <= 0.1)
    return ("pass" if ok else "tolerance-failure"), (EXIT_OK if ok else EXIT_TOLERANCE), results, ["smoothing.csv"]


def run_contraction(cfg, out: Path):
    grid, sc = cfg.grid(), cfg.solver_config()
    ests = contraction_sweep(grid, cfg.contraction_T, sc, cfg.ensemble_size, cfg.seed)
    _write_csv(out / "contraction.csv", ["T", "C_hat", "eps_hat"], [(e.T, e.C_hat, e.eps_hat) for e in ests])
    sp = spread([e.C_hat for e in ests])
    C = max(e.C_hat for e in ests)
    eps = 1.0 / (4.0 * C)
    u0, b0 = presets.make_preset("random-bandlimited", grid, eps, cfg.seed + 1)
    runs = []
    for T in cfg.small_data_T:
        sol = mild.picard_solve(u0, b0, T, sc, C_hat=C, certify=False)
        runs.append({"T": T, "status": sol.status, "iterations": sol.iterations, "max_ratio": sol.max_ratio})
    _write_csv(out / "small_data.csv", ["T", "status", "iterations", "max_ratio"],
               [(r["T"], r["status"], r["iterations"], r["max_ratio"]) for r in runs])
    results = {"C_hat": C, "eps_hat": eps, "spread": sp, "sweep": [asdict(e) for e in ests],
               "small_data": runs}
    if any(r["status"] != "converged" for r in runs):
        return "diverged", EXIT_DIVERGED, results, ["contraction.csv", "small_data.csv"]
    ok = sp < 0.2 and all(r["max_ratio"] <= 0.9 and r["iterations"] <= 20 for r in runs)
    return ("pass" if ok else "tolerance-failure"), (EXIT_OK if ok else EXIT_TOLERANCE), results, \
        ["contraction.csv", "small_data.csv"]


def run_scaling(cfg, out: Path):
    rep = scaling_covariance(cfg.preset, cfg.scale, cfg.grid(), cfg.T, cfg.solver_config(),
                             cfg.amplitude, cfg.seed, nonlinear=cfg.preset != "zero")
    ok = rep.passed()
    return ("pass" if ok else "tolerance-failure"), (EXIT_OK if ok else EXIT_TOLERANCE), asdict(rep), []


def run_algebra_suite(cfg, out: Path):
    rng = np.random.default_rng(cfg.seed)
    results = {"algebra": algebra_suite(cfg.cases, rng),
               "hodge": hodge_suite(cfg.grid(), rng),
               "semigroup": semigroup_suite(cfg.grid(), rng)}
    worst = max(v for group in results.values() for v in group.values())
    results["worst"] = worst
    ok = worst <= 1e-12
    return ("pass" if ok else "tolerance-failure"), (EXIT_OK if ok else EXIT_TOLERANCE), results, []


RUNNERS = {"simulate": run_simulate, "measure-smoothing": run_measure_smoothing,
           "contraction": run_contraction, "scaling": run_scaling, "algebra-suite": run_algebra_suite}


def run_experiment(cfg, out) -> tuple[int, dict]:
    """Run ``cfg.kind`` into directory ``out``; returns (exit code, manifest dict)."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    status, code, results, files = RUNNERS[cfg.kind](cfg, out)
    path = write_manifest(out, cfg, status, code, results, files)
    return code, json.loads(path.read_text())
