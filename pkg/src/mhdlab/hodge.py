"""Hodge decomposition and potential operators on the periodic torus.

Per nonzero wavenumber the symbols satisfy ``dd* + d*d = |k|^2``, so

    exact   = d delta (-Laplacian)^-1 f   (range of d)
    coexact = delta d (-Laplacian)^-1 f   (range of d*)
    harmonic = modes where the derivative symbol vanishes

The harmonic forms of the torus are the constant forms. With the Nyquist
convention of :mod:`mhdlab.grid` the symbol also vanishes on the
pure-Nyquist checkerboard modes; they are grouped with the harmonic part so
that the identities below hold for every discrete field.

Potential operators: ``R = delta (-Laplacian)^-1``, ``S = d (-Laplacian)^-1``
and ``K = K* =`` projection onto the harmonic modes. They satisfy
``dR + Rd = I - K`` and ``d*S + Sd* = I - K*``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import grid as gs
from .grid import FormField, Grid


def _inv_ksq(grid: Grid) -> np.ndarray:
    ksq = grid.ksq
    out = np.zeros_like(ksq)
    np.divide(1.0, ksq, out=out, where=ksq > 0)
    return out


def _with_data(f: FormField, data, grades=None) -> FormField:
    return FormField(f.grid, data, True, f.grades if grades is None else grades)


def compact_K(f: FormField) -> FormField:
    """Projection onto the harmonic (symbol-kernel) modes."""
    f = f.to_spectral()
    return _with_data(f, f.data * f.grid.kernel_modes)


compact_Kstar = compact_K


def homotopy_R(f: FormField) -> FormField:
    """``R = delta (-Laplacian)^-1``: a right inverse of d on its range."""
    f = f.to_spectral()
    return gs.delta(_with_data(f, f.data * _inv_ksq(f.grid)))


def homotopy_S(f: FormField) -> FormField:
    """``S = d (-Laplacian)^-1``: a right inverse of d* on its range."""
    f = f.to_spectral()
    return gs.d(_with_data(f, f.data * _inv_ksq(f.grid)))


@dataclass(frozen=True)
class HodgeSplit:
    exact: FormField
    coexact: FormField
    harmonic: FormField

    def total(self) -> FormField:
        return self.exact + self.coexact + self.harmonic


def exact_part(f: FormField) -> FormField:
    f = f.to_spectral()
    return gs.d(homotopy_R(f)).with_grades(f.grades)


def coexact_part(f: FormField) -> FormField:
    f = f.to_spectral()
    return gs.delta(homotopy_S(f)).with_grades(f.grades)


def hodge_decompose(f: FormField) -> HodgeSplit:
    f = f.to_spectral()
    return HodgeSplit(exact_part(f), coexact_part(f), compact_K(f))


def _require_grade(f: FormField, grade: int, name: str):
    if f.grades != {grade}:
        raise ValueError(f"{name} acts on {grade}-forms, got grades {sorted(f.grades)}")


def leray_P(f: FormField) -> FormField:
    """Helmholtz-Leray projection of a 1-form onto the kernel of d*."""
    _require_grade(f, 1, "leray_P")
    f = f.to_spectral()
    return f - exact_part(f)


def Q_proj(f: FormField) -> FormField:
    """Orthogonal projection of a 2-form onto the range of d."""
    _require_grade(f, 2, "Q_proj")
    return exact_part(f)


def coclosed_defect(u: FormField) -> float:
    """``||delta u||_2`` relative to ``||grad u||_2`` (0 for constant fields)."""
    u = u.to_spectral()
    num = gs.lq_norm(gs.delta(u), 2)
    scale = np.sqrt(gs.lq_norm(gs.delta(u), 2) ** 2 + gs.lq_norm(gs.d(u), 2) ** 2)
    return num / scale if scale > 0 else 0.0


def exactness_defect(b: FormField) -> float:
    """``||b - Q b||_2 / ||b||_2`` for a 2-form (0 for the zero field)."""
    b = b.to_spectral()
    nb = gs.lq_norm(b, 2)
    return gs.lq_norm(b - exact_part(b), 2) / nb if nb > 0 else 0.0


def reconstruct_PQ(u: FormField, b: FormField, tol: float = 1e-10) -> tuple[FormField, FormField]:
    """``(P(R du + K u), Q(S d*b + K* b))``; both reproduce their inputs.

    Inputs outside ``N(d*)`` / ``R(d)`` are processed anyway and a warning
    names the defect.
    """
    if coclosed_defect(u) > tol:
        warnings.warn(f"u is not co-closed (defect {coclosed_defect(u):.2e})", stacklevel=2)
    if exactness_defect(b) > tol:
        warnings.warn(f"b is not exact (defect {exactness_defect(b):.2e})", stacklevel=2)
    u_rec = leray_P((homotopy_R(gs.d(u)) + compact_K(u)).with_grades({1}))
    b_rec = Q_proj((homotopy_S(gs.delta(b)) + compact_Kstar(b)).with_grades({2}))
    return u_rec, b_rec


def empirical_projection_norm(which: str, grid: Grid, q: float, samples: int,
                              rng: np.random.Generator) -> float:
    """Largest observed ``||P f||_q / ||f||_q`` (``which='P'``) or the same for Q
    over white-noise fields."""
    proj, grade = {"P": (leray_P, 1), "Q": (Q_proj, 2)}[which]
    worst = 0.0
    for _ in range(samples):
        data = np.zeros((8,) + grid.shape)
        idx = gs.l3.grade_indices({grade})
        data[idx] = rng.standard_normal((3,) + grid.shape)
        f = FormField(grid, data, False, {grade})
        worst = max(worst, gs.lq_norm(proj(f), q) / gs.lq_norm(f, q))
    return worst
