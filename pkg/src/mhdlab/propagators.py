"""Heat semigroups of the Hodge-Stokes and Hodge-Maxwell operators.

On the torus ``S = d*d`` on co-closed 1-forms and ``M = dd*`` on exact
2-forms both act as the multiplier ``|k|^2``, so ``exp(-tS)`` and
``exp(-tM)`` are the multiplier ``exp(-t|k|^2)`` and the negative fractional
powers are ``|k|^-alpha`` off the kernel.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import grid as gs
from . import hodge
from .grid import FormField, Grid


def heat_multiplier(grid: Grid, t: float) -> np.ndarray:
    return np.exp(-t * grid.ksq)


def _heat(t: float, f: FormField) -> FormField:
    if t < 0:
        raise ValueError(f"semigroup time must be >= 0, got {t}")
    f = f.to_spectral()
    if t == 0:
        return f
    return FormField(f.grid, f.data * heat_multiplier(f.grid, t), True, f.grades)


def heat_stokes(t: float, u: FormField) -> FormField:
    """``exp(-tS) u`` for a co-closed 1-form ``u``."""
    if u.grades != {1}:
        raise ValueError("heat_stokes acts on 1-forms")
    return _heat(t, u)


def heat_maxwell(t: float, b: FormField) -> FormField:
    """``exp(-tM) b`` for an exact 2-form ``b``."""
    if b.grades != {2}:
        raise ValueError("heat_maxwell acts on 2-forms")
    return _heat(t, b)


def frac_power(op: str, alpha: float, f: FormField) -> FormField:
    """``S^(-alpha/2) f`` or ``M^(-alpha/2) f`` (multiplier ``|k|^-alpha``)."""
    if op not in ("S", "M"):
        raise ValueError(f"operator must be 'S' or 'M', got {op!r}")
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    f = f.to_spectral()
    if alpha == 0:
        return f
    kernel = f.grid.kernel_modes
    scale = np.max(np.abs(f.data)) or 1.0
    if np.max(np.abs(f.data[:, kernel]), initial=0.0) > 1e-12 * scale:
        raise ValueError("negative power needs data without mean (kernel) component")
    ksq = f.grid.ksq
    mult = np.zeros_like(ksq)
    np.power(ksq, -alpha / 2, out=mult, where=ksq > 0)
    return FormField(f.grid, f.data * mult, True, f.grades)


def smoothing_alpha(p: float, q: float, dim: int = 3) -> float:
    """``alpha`` from ``1/p - alpha/dim = 1/q``."""
    alpha = dim * (1.0 / p - 1.0 / q)
    if not -1e-12 <= alpha <= 1 + 1e-12:
        raise ValueError(f"(p, q) = ({p}, {q}) gives alpha = {alpha}, outside [0, 1]")
    return min(max(alpha, 0.0), 1.0)


@dataclass
class SmoothingReport:
    op: str
    p: float
    q: float
    alpha: float
    times: list[float]
    # per time: sup over the ensemble
    ratio_value: list[float]
    ratio_derivative: list[float]
    norm_gain: list[float]          # sup_f ||e^{-tA} f||_q / ||f||_p, unweighted
    c_hat: float
    c_hat_value: float
    c_hat_derivative: float
    gamma_hat: float
    ensemble_size: int
    notes: list[str] = field(default_factory=list)

    def slope(self, t_min: float, t_max: float) -> float:
        """Least-squares slope of ``log norm_gain`` against ``log t`` on a window."""
        t = np.asarray(self.times)
        g = np.asarray(self.norm_gain)
        sel = (t >= t_min) & (t <= t_max)
        if sel.sum() < 2:
            raise ValueError("slope window holds fewer than two sample times")
        return float(np.polyfit(np.log(t[sel]), np.log(g[sel]), 1)[0])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "ratio_value", "ratio_derivative"])
            for row in zip(self.times, self.ratio_value, self.ratio_derivative):
                w.writerow([repr(float(v)) for v in row])

    def summary(self) -> dict:
        keys = ("op", "p", "q", "alpha", "c_hat", "c_hat_value", "c_hat_derivative",
                "gamma_hat", "ensemble_size", "notes")
        d = asdict(self)
        return {k: d[k] for k in keys}

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)


def measure_smoothing(op: str, p: float, q: float, ensemble, times) -> SmoothingReport:
    """Empirical ``L^p -> L^q`` smoothing of ``exp(-tA)`` over an ensemble.

    The derivative branch uses ``d`` for S and ``d*`` for M. Sups are over
    the sampled ensemble and times only, so they bound the true constants
    from below.
    """
    ensemble = list(ensemble)
    if not ensemble:
        raise ValueError("empty ensemble")
    alpha = smoothing_alpha(p, q)
    heat, deriv = {"S": (heat_stokes, gs.d), "M": (heat_maxwell, gs.delta)}[op]
    times = [float(t) for t in times]
    val = np.zeros((len(ensemble), len(times)))
    der = np.zeros_like(val)
    gain = np.zeros_like(val)
    gamma = 0.0
    for i, f in enumerate(ensemble):
        f = f.to_spectral()
        fp = gs.lq_norm(f, p)
        if alpha > 0:
            gamma = max(gamma, gs.lq_norm(frac_power(op, alpha, f), q) / fp)
        for j, t in enumerate(times):
            g = heat(t, f)
            gq = gs.lq_norm(g, q)
            gain[i, j] = gq / fp
            val[i, j] = t ** (alpha / 2) * gq / fp
            der[i, j] = t ** ((1 + alpha) / 2) * gs.lq_norm(deriv(g), q) / fp
    rv, rd = val.max(axis=0), der.max(axis=0)
    notes = ["sup over sampled ensemble and times: a lower bound for the operator constant"]
    if alpha == 0:
        gamma = 1.0
    return SmoothingReport(
        op=op, p=p, q=q, alpha=alpha, times=times,
        ratio_value=rv.tolist(), ratio_derivative=rd.tolist(), norm_gain=gain.max(axis=0).tolist(),
        c_hat=float(rv.max() + rd.max()), c_hat_value=float(rv.max()),
        c_hat_derivative=float(rd.max()), gamma_hat=float(gamma),
        ensemble_size=len(ensemble), notes=notes,
    )


def gaussian_bump_ensemble(grid: Grid, op: str, widths, center=None) -> list[FormField]:
    """Near-delta test data: projected Gaussian bumps of the given widths.

    For S the data are ``P(g e1) - mean``, for M ``Q(*(g e1))``, with
    ``g = exp(-|x - c|^2 / (2 w^2))`` and periodic distance to ``c``.
    """
    c = np.full(3, grid.L / 2) if center is None else np.asarray(center, dtype=float)
    x = grid.coords
    r2 = np.zeros(grid.shape)
    for i in range(3):
        dx = (x[i] - c[i] + grid.L / 2) % grid.L - grid.L / 2
        r2 += dx * dx
    out = []
    for w in widths:
        g = np.exp(-r2 / (2 * w * w))
        vec = np.zeros((3,) + grid.shape)
        vec[0] = g
        if op == "S":
            f = hodge.leray_P(FormField.from_vector(grid, vec, 1))
            f = f - hodge.compact_K(f)
        else:
            f = hodge.Q_proj(FormField.from_vector(grid, vec, 2))
        out.append(f)
    return out
