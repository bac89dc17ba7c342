"""Named initial data.

Each preset is written on the reference torus of period ``2 pi`` and carried
to a torus of period ``L`` by ``u0_L(x) = s u0(s x)`` with ``s = 2 pi / L``.
Critical norms (``L^3``) are unchanged by this map, and the preset on
``Grid(n, L / lam)`` is exactly the rescaled preset ``lam u0(lam x)`` of
``Grid(n, L)``.

Magnetic data are given by their vector proxy ``B`` (the 2-form is ``*B``);
every proxy below is divergence free, so the 2-form is exact.
"""
from __future__ import annotations

import numpy as np

from . import grid as gs
from . import hodge
from .grid import FormField, Grid

PRESETS = ("zero", "shear", "two-mode", "orszag-tang-like", "random-bandlimited")
DEFAULT_AMPLITUDE = {"zero": 0.0, "shear": 0.5, "two-mode": 1.0, "orszag-tang-like": 1.0,
                     "random-bandlimited": 0.1}


def _fields(grid: Grid, s: float, u_vec, b_vec):
    return FormField.from_vector(grid, s * u_vec, 1), FormField.from_vector(grid, s * b_vec, 2)


def _random(grid: Grid, amplitude: float, seed: int, kmax: int = 2):
    rng = np.random.default_rng(seed)
    ref = Grid(grid.n)
    u = hodge.leray_P(gs.random_field(ref, {1}, rng, kmax))
    u = u - hodge.compact_K(u)
    b = hodge.Q_proj(gs.random_field(ref, {2}, rng, kmax))
    out = []
    for f in (u, b):
        nrm = gs.lq_norm(f, 3)
        out.append(f * (amplitude / (2 * nrm)) if nrm > 0 else f)
    return out


def make_preset(name: str, grid: Grid, amplitude: float | None = None,
                seed: int = 0) -> tuple[FormField, FormField]:
    """Initial pair ``(u0, b0)``: a co-closed 1-form and an exact 2-form.

    * ``zero``: both vanish.
    * ``shear``: ``u0 = a sin(x2) e1``, ``b0 = 0``; the quadratic terms are
      gradients, so the solution is ``exp(-t) u0``.
    * ``two-mode``: ``u0 = a (sin x2, sin x3, 0)``, ``B0 = a (0, sin x1, sin x2)``.
    * ``orszag-tang-like``: ``u0 = a (-sin x2, sin x1, 0)``, ``B0 = a (-sin x2, sin 2x1, 0)``.
    * ``random-bandlimited``: seeded Gaussian data with ``|m_j| <= 2``,
      projected and scaled to ``||u0||_3 = ||b0||_3 = a / 2``.
    """
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    a = DEFAULT_AMPLITUDE[name] if amplitude is None else float(amplitude)
    s = 2 * np.pi / grid.L
    x1, x2, x3 = grid.coords * s
    zero = np.zeros_like(x1)
    if name == "zero":
        return _fields(grid, s, np.stack([zero] * 3), np.stack([zero] * 3))
    if name == "shear":
        return _fields(grid, s, a * np.stack([np.sin(x2), zero, zero]), np.stack([zero] * 3))
    if name == "two-mode":
        return _fields(grid, s, a * np.stack([np.sin(x2), np.sin(x3), zero]),
                       a * np.stack([zero, np.sin(x1), np.sin(x2)]))
    if name == "orszag-tang-like":
        return _fields(grid, s, a * np.stack([-np.sin(x2), np.sin(x1), zero]),
                       a * np.stack([-np.sin(x2), np.sin(2 * x1), zero]))
    u, b = _random(grid, a, seed)
    return (FormField(grid, u.data * s, True, u.grades), FormField(grid, b.data * s, True, b.grades))
