"""Independent reference integrator in classical vector form.

Solves

    du/dt = lap u + P(u x curl u + curl B x B)
    dB/dt = lap B + curl(u x B)

pseudo-spectrally with the 2/3 rule and integrating-factor RK4 (the heat
factor ``exp(-dt |k|^2)`` is applied exactly). It shares only the grid and
wavenumber tables with the mild solver; none of the form-level operators
are used, so agreement between the two is a genuine cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import grid as gs
from .grid import FormField, Grid


class InstabilityError(RuntimeError):
    """Raised when the reference run blows up."""


@dataclass
class ReferenceRun:
    dt: float
    T: float
    times: list[float]
    snapshots: list[tuple[FormField, FormField]]
    max_div_defect: float = 0.0
    steps: int = 0
    notes: list[str] = field(default_factory=list)

    def at(self, t: float) -> tuple[FormField, FormField]:
        for s, snap in zip(self.times, self.snapshots):
            if abs(s - t) <= 1e-12 * max(1.0, self.T):
                return snap
        raise KeyError(f"no reference snapshot at t = {t}")


def _cross(a, b):
    return np.stack([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


class _VectorMHD:
    def __init__(self, grid: Grid):
        self.grid = grid
        self.k = np.stack(np.broadcast_arrays(*grid.dk)).astype(float)
        self.ksq = grid.ksq
        self.inv = np.zeros_like(self.ksq)
        np.divide(1.0, self.ksq, out=self.inv, where=self.ksq > 0)
        self.mask = grid.dealias_mask

    def curl(self, f):
        return 1j * _cross(self.k, f)

    def project(self, f):
        return f - self.k * (np.sum(self.k * f, axis=0) * self.inv)

    def phys(self, f):
        return sfft.irfftn(f * self.mask, s=self.grid.shape, axes=(1, 2, 3), norm="forward")

    def spec(self, f):
        return sfft.rfftn(f, axes=(1, 2, 3), norm="forward") * self.mask

    def rhs(self, u, B):
        up, Bp = self.phys(u), self.phys(B)
        wp, Jp = self.phys(self.curl(u)), self.phys(self.curl(B))
        nu = self.project(self.spec(_cross(up, wp) + _cross(Jp, Bp)))
        nb = self.curl(self.spec(_cross(up, Bp)))
        return nu, nb

    def div_defect(self, f):
        top = np.sqrt(np.sum(np.abs(np.sum(self.k * f, axis=0)) ** 2))
        bot = np.sqrt(np.sum(self.ksq * np.sum(np.abs(f) ** 2, axis=0)))
        return float(top / bot) if bot > 0 else 0.0


def _to_vectors(u0: FormField, b0: FormField):
    if u0.grades != {1} or b0.grades != {2}:
        raise ValueError("reference solver takes a 1-form u0 and a 2-form b0")
    grid = u0.grid
    u = sfft.rfftn(u0.vector(1), axes=(1, 2, 3), norm="forward")
    B = sfft.rfftn(b0.vector(2), axes=(1, 2, 3), norm="forward")
    return grid, u, B


def _to_forms(grid: Grid, u, B):
    uf = FormField.from_vector(grid, sfft.irfftn(u, s=grid.shape, axes=(1, 2, 3), norm="forward"), 1)
    bf = FormField.from_vector(grid, sfft.irfftn(B, s=grid.shape, axes=(1, 2, 3), norm="forward"), 2)
    return uf.to_spectral(), bf.to_spectral()


def reference_solve(u0: FormField, b0: FormField, T: float, dt: float,
                    save_times=None, cfl: float = 0.5, growth_limit: float = 1e3) -> ReferenceRun:
    """Integrate to ``T`` with ``N = ceil(T/dt)`` equal steps.

    ``save_times`` must be multiples of the step actually used (``T/N``);
    by default eight evenly spaced snapshots and the initial state are kept.
    """
    if T <= 0 or dt <= 0:
        raise ValueError("T and dt must be positive")
    grid, u, B = _to_vectors(u0, b0)
    sys = _VectorMHD(grid)
    nsteps = int(np.ceil(T / dt - 1e-9))
    h = T / nsteps
    if save_times is None:
        stride = max(nsteps // 8, 1)
        save_steps = sorted(set(range(0, nsteps + 1, stride)) | {nsteps})
    else:
        save_steps = []
        for t in save_times:
            s = t / h
            if abs(s - round(s)) > 1e-8 or not 0 <= round(s) <= nsteps:
                raise ValueError(f"save time {t} is not on the step grid (step {h})")
            save_steps.append(int(round(s)))
        save_steps = sorted(set(save_steps))

    speed = max(np.abs(sys.phys(u)).max(), np.abs(sys.phys(B)).max())
    if h * speed / grid.h > cfl:
        raise ValueError(f"step {h:g} violates the advective CFL bound {cfl} (speed {speed:.3g})")

    E = np.exp(-h * grid.ksq)
    E2 = np.exp(-0.5 * h * grid.ksq)
    size0 = max(np.sqrt(np.sum(np.abs(u) ** 2) + np.sum(np.abs(B) ** 2)), 1e-300)
    run = ReferenceRun(dt=h, T=T, times=[], snapshots=[], steps=nsteps)
    defect = max(sys.div_defect(u), sys.div_defect(B))
    if 0 in save_steps:
        run.times.append(0.0)
        run.snapshots.append(_to_forms(grid, u, B))
    for step in range(1, nsteps + 1):
        k1u, k1b = sys.rhs(u, B)
        k2u, k2b = sys.rhs(E2 * (u + 0.5 * h * k1u), E2 * (B + 0.5 * h * k1b))
        k3u, k3b = sys.rhs(E2 * u + 0.5 * h * k2u, E2 * B + 0.5 * h * k2b)
        k4u, k4b = sys.rhs(E * u + h * E2 * k3u, E * B + h * E2 * k3b)
        u = E * u + h / 6 * (E * k1u + 2 * E2 * (k2u + k3u) + k4u)
        B = E * B + h / 6 * (E * k1b + 2 * E2 * (k2b + k3b) + k4b)
        size = np.sqrt(np.sum(np.abs(u) ** 2) + np.sum(np.abs(B) ** 2))
        if not np.isfinite(size) or size > growth_limit * size0:
            raise InstabilityError(
                f"reference run unstable at step {step} (t = {step * h:g}): "
                f"spectral norm grew by {size / size0:.3g}")
        defect = max(defect, sys.div_defect(u), sys.div_defect(B))
        if step in save_steps:
            run.times.append(step * h)
            run.snapshots.append(_to_forms(grid, u, B))
    run.max_div_defect = defect
    if defect >= 1e-10:
        run.notes.append(f"divergence defect {defect:.2e} exceeds 1e-10")
    return run


@dataclass
class ComparisonReport:
    times: list[float]
    rel_l2: list[float]
    rel_l3: list[float]
    tolerance: float

    @property
    def max_rel_l2(self) -> float:
        return max(self.rel_l2)

    @property
    def passed(self) -> bool:
        return self.max_rel_l2 <= self.tolerance


def _rel(pairs, q):
    num = sum(gs.lq_norm(a - b, q) for a, b in pairs)
    den = sum(gs.lq_norm(b, q) for _, b in pairs)
    return num / den if den > 0 else num


def compare_mild_vs_reference(sol, ref: ReferenceRun, times=None, tolerance: float = 1e-3) -> ComparisonReport:
    """Relative L^2 and L^3 distance of ``(u, b)`` at shared times.

    The mild side is evaluated from the fixed-point formula at each time,
    not interpolated.
    """
    if sol.u.grid != ref.snapshots[0][0].grid or abs(sol.T - ref.T) > 1e-12 * sol.T:
        raise ValueError("mild solution and reference run use different grids or horizons")
    times = [t for t in ref.times if t > 0] if times is None else list(times)
    l2, l3 = [], []
    for t in times:
        um, bm = sol.value_at(t)
        ur, br = ref.at(t)
        pairs = [(um, ur), (bm, br)]
        l2.append(_rel(pairs, 2))
        l3.append(_rel(pairs, 3))
    return ComparisonReport(times, l2, l3, tolerance)
