"""Differential forms on a periodic n^3 grid.

A :class:`FormField` holds one multivector per grid point (physical
representation) or per retained wavenumber (spectral representation). Only
the components of the grades listed in ``grades`` may be nonzero; transforms
skip the others.

Fourier convention: ``f_hat(k) = n^-3 sum_x f(x) exp(-i k.x)`` so that the
spectral coefficients are Fourier-series coefficients (``sin x1`` has
``-i/2`` at ``k = (1, 0, 0)`` and ``+i/2`` at ``k = (-1, 0, 0)``), and
Parseval reads ``||f||_2^2 = V sum_k |f_hat(k)|^2``. Real transforms are used,
so only ``k3 >= 0`` is stored and Hermitian symmetry is implicit.

Derivative symbols ``i k`` have the Nyquist entry ``k_j = -n/2`` set to zero.
Every multiplier built from them (``d``, ``delta``, the Laplacian, the Hodge
projections, the heat semigroups) therefore agrees exactly with the others.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from . import lambda3 as l3

FIELD_MAGIC = b"MHDFIELD"
FIELD_VERSION = 1
# magic, version, endianness tag, representation, grade mask, pad, n, L
_HEADER = struct.Struct("<8sHcBB3xId")


@dataclass(frozen=True)
class Grid:
    n: int
    L: float = 2 * np.pi

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")
        if not self.L > 0:
            raise ValueError("period must be positive")

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def volume(self) -> float:
        return self.L ** 3

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n // 2 + 1)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @cached_property
    def coords(self) -> np.ndarray:
        """Array (3, n, n, n) of grid point coordinates ``x_j = j h``."""
        x = np.arange(self.n) * self.h
        return np.stack(np.meshgrid(x, x, x, indexing="ij"))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable wavenumber arrays (k1, k2, k3), Nyquist kept."""
        scale = 2 * np.pi / self.L
        full = sfft.fftfreq(self.n, 1.0 / self.n) * scale
        half = sfft.rfftfreq(self.n, 1.0 / self.n) * scale
        return full[:, None, None], full[None, :, None], half[None, None, :]

    @cached_property
    def integer_modes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        full = np.rint(sfft.fftfreq(self.n, 1.0 / self.n)).astype(int)
        half = np.arange(self.n // 2 + 1)
        return full[:, None, None], full[None, :, None], half[None, None, :]

    @cached_property
    def dk(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Derivative wavenumbers: as :attr:`wavenumbers` with Nyquist zeroed."""
        out = []
        for k, m in zip(self.wavenumbers, self.integer_modes):
            out.append(np.where(np.abs(m) == self.n // 2, 0.0, k))
        return tuple(out)

    @cached_property
    def ik(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(1j * k for k in self.dk)

    @cached_property
    def ksq(self) -> np.ndarray:
        k1, k2, k3 = self.dk
        return k1 ** 2 + k2 ** 2 + k3 ** 2

    @cached_property
    def kernel_modes(self) -> np.ndarray:
        """Boolean mask of modes where every derivative symbol vanishes.

        These are k = 0 and the pure-Nyquist checkerboard modes; on fields
        without Nyquist content only k = 0 remains.
        """
        return self.ksq == 0

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3 rule: keep modes with every |m_j| <= n/3."""
        cut = self.n / 3
        m1, m2, m3 = self.integer_modes
        return (np.abs(m1) <= cut) & (np.abs(m2) <= cut) & (np.abs(m3) <= cut)

    @cached_property
    def nyquist_free_mask(self) -> np.ndarray:
        m1, m2, m3 = self.integer_modes
        half = self.n // 2
        return (np.abs(m1) != half) & (np.abs(m2) != half) & (m3 != half)

    @cached_property
    def rfft_weights(self) -> np.ndarray:
        """Multiplicity of each stored k3 >= 0 plane in the full spectrum."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w[None, None, :]

    def scaled(self, factor: float) -> "Grid":
        """Same number of points on a torus of period ``L / factor``."""
        return Grid(self.n, self.L / factor)


class FormField:
    """Lambda(R^3)-valued field on a periodic grid.

    ``data`` has shape (8, n, n, n) real in the physical representation and
    (8, n, n, n//2+1) complex in the spectral one. Treat instances as
    immutable; every operation returns a new field.
    """

    __slots__ = ("grid", "data", "spectral", "grades")

    def __init__(self, grid: Grid, data, spectral: bool, grades=l3.ALL_GRADES):
        data = np.asarray(data)
        shape = grid.spectral_shape if spectral else grid.shape
        if data.shape != (8,) + shape:
            raise ValueError(f"data shape {data.shape} does not match grid {(8,) + shape}")
        self.grid = grid
        self.data = data
        self.spectral = bool(spectral)
        self.grades = frozenset(grades)

    # -- construction ------------------------------------------------------
    @classmethod
    def zeros(cls, grid: Grid, grades, spectral: bool = True) -> "FormField":
        shape = grid.spectral_shape if spectral else grid.shape
        dtype = complex if spectral else float
        return cls(grid, np.zeros((8,) + shape, dtype=dtype), spectral, grades)

    @classmethod
    def from_vector(cls, grid: Grid, vec, grade: int) -> "FormField":
        """Physical field from a vector proxy (3, n, n, n) or a scalar array."""
        vec = np.asarray(vec, dtype=float)
        if grade in (0, 3):
            data = np.zeros((8,) + grid.shape)
            data[0 if grade == 0 else 7] = np.broadcast_to(vec, grid.shape)
        else:
            vec = np.broadcast_to(vec, (3,) + grid.shape)
            data = l3.vector_to_components(vec, grade)
        return cls(grid, data, spectral=False, grades={grade})

    @classmethod
    def from_multivector(cls, grid: Grid, mv: l3.Multivector) -> "FormField":
        """Spatially constant field."""
        data = np.broadcast_to(mv.coeffs[:, None, None, None], (8,) + grid.shape).copy()
        return cls(grid, data, spectral=False, grades=mv.grades() or {0})

    # -- representations ---------------------------------------------------
    @property
    def comps(self) -> list[int]:
        return l3.grade_indices(self.grades)

    def to_spectral(self) -> "FormField":
        return self if self.spectral else fft_forward(self)

    def to_physical(self) -> "FormField":
        return fft_inverse(self) if self.spectral else self

    def vector(self, grade: int | None = None) -> np.ndarray:
        """Physical vector proxy (grades 1, 2) or scalar array (grades 0, 3)."""
        grade = self._single_grade() if grade is None else grade
        data = self.to_physical().data
        if grade in (0, 3):
            return data[0 if grade == 0 else 7].copy()
        return l3.components_to_vector(data, grade)

    def _single_grade(self) -> int:
        if len(self.grades) != 1:
            raise ValueError(f"field has grades {sorted(self.grades)}, expected exactly one")
        return next(iter(self.grades))

    def with_grades(self, grades) -> "FormField":
        """Restrict to the listed grades, zeroing the rest."""
        grades = frozenset(grades)
        data = np.zeros_like(self.data)
        keep = l3.grade_indices(grades & self.grades)
        data[keep] = self.data[keep]
        return FormField(self.grid, data, self.spectral, grades)

    # -- arithmetic --------------------------------------------------------
    def _match(self, other: "FormField"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")
        if other.spectral != self.spectral:
            other = other.to_spectral() if self.spectral else other.to_physical()
        return other

    def __add__(self, other: "FormField") -> "FormField":
        other = self._match(other)
        return FormField(self.grid, self.data + other.data, self.spectral, self.grades | other.grades)

    def __sub__(self, other: "FormField") -> "FormField":
        other = self._match(other)
        return FormField(self.grid, self.data - other.data, self.spectral, self.grades | other.grades)

    def __neg__(self) -> "FormField":
        return FormField(self.grid, -self.data, self.spectral, self.grades)

    def __mul__(self, scalar) -> "FormField":
        return FormField(self.grid, self.data * scalar, self.spectral, self.grades)

    __rmul__ = __mul__

    def __repr__(self):
        rep = "spectral" if self.spectral else "physical"
        return f"FormField(n={self.grid.n}, L={self.grid.L:g}, grades={sorted(self.grades)}, {rep})"


# -- transforms ----------------------------------------------------------------

def fft_forward(f: FormField) -> FormField:
    if f.spectral:
        raise ValueError("field is already spectral")
    out = np.zeros((8,) + f.grid.spectral_shape, dtype=complex)
    idx = f.comps
    if idx:
        out[idx] = sfft.rfftn(f.data[idx], axes=(1, 2, 3), norm="forward")
    return FormField(f.grid, out, True, f.grades)


def fft_inverse(f: FormField) -> FormField:
    if not f.spectral:
        raise ValueError("field is already physical")
    out = np.zeros((8,) + f.grid.shape)
    idx = f.comps
    if idx:
        out[idx] = sfft.irfftn(f.data[idx], s=f.grid.shape, axes=(1, 2, 3), norm="forward")
    return FormField(f.grid, out, False, f.grades)


# -- differential operators as Fourier multipliers ------------------------------

def _shift(grades, step: int) -> frozenset:
    return frozenset(g + step for g in grades if 0 <= g + step <= 3)


def apply_wedge_symbol(data: np.ndarray, comps, vec) -> np.ndarray:
    """``sum_m vec[m] * (e_m ^ data)`` on spectral component arrays."""
    comps = set(comps)
    out = np.zeros_like(data)
    for m, r, c, sign in l3.WEDGE_ENTRIES:
        if c in comps:
            out[r] += (sign * vec[m]) * data[c]
    return out


def apply_interior_symbol(data: np.ndarray, comps, vec) -> np.ndarray:
    """``sum_m vec[m] * (e_m _| data)`` on spectral component arrays."""
    comps = set(comps)
    out = np.zeros_like(data)
    for m, r, c, sign in l3.INTERIOR_ENTRIES:
        if c in comps:
            out[r] += (sign * vec[m]) * data[c]
    return out


def d(f: FormField) -> FormField:
    """Exterior derivative, ``(d f)^(k) = (i k) ^ f^(k)``."""
    f = f.to_spectral()
    out = apply_wedge_symbol(f.data, f.comps, f.grid.ik)
    return FormField(f.grid, out, True, _shift(f.grades, 1))


def delta(f: FormField) -> FormField:
    """Co-derivative ``-nabla _|``; the L^2 adjoint of :func:`d` on the torus."""
    f = f.to_spectral()
    neg_ik = tuple(-v for v in f.grid.ik)
    out = apply_interior_symbol(f.data, f.comps, neg_ik)
    return FormField(f.grid, out, True, _shift(f.grades, -1))


def laplacian(f: FormField) -> FormField:
    """Componentwise ``-|k|^2`` multiplier, equal to ``-(d delta + delta d)``."""
    f = f.to_spectral()
    return FormField(f.grid, -f.grid.ksq * f.data, True, f.grades)


def hodge_star(f: FormField) -> FormField:
    out = np.zeros_like(f.data)
    for r, c, sign in l3.STAR_ENTRIES:
        out[r] = sign * f.data[c]
    return FormField(f.grid, out, f.spectral, frozenset(3 - g for g in f.grades))


def dealias(f: FormField) -> FormField:
    f = f.to_spectral()
    return FormField(f.grid, f.data * f.grid.dealias_mask, True, f.grades)


# -- nonlinear products ----------------------------------------------------------

def interior_arrays(a_vec: np.ndarray, g: np.ndarray, g_comps) -> np.ndarray:
    """Fiberwise ``a _| g`` for a physical 1-form proxy ``a_vec`` (3, ...) and
    physical component stack ``g`` (8, ...)."""
    g_comps = set(g_comps)
    out = np.zeros_like(g)
    for m, r, c, sign in l3.INTERIOR_ENTRIES:
        if c in g_comps:
            out[r] += sign * (a_vec[m] * g[c])
    return out


PRODUCT_KINDS = {
    # kind: (grade of f, grade of g)
    "interior_u_du": (1, 2),
    "interior_dstarb_b": (1, 2),
    "interior_u_b": (1, 2),
}


def interior_product(f: FormField, g: FormField) -> FormField:
    """Dealiased fiberwise interior product ``f _| g`` of a 1-form ``f``.

    Both inputs and the output are truncated by the 2/3 rule, so band-limited
    inputs inside the retained box give the exact product.
    """
    if f.grades - {1}:
        raise ValueError("left factor of an interior product must be a 1-form")
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    a = fft_inverse(dealias(f)).data[1:4]
    gp = fft_inverse(dealias(g))
    prod = FormField(f.grid, interior_arrays(a, gp.data, gp.comps), False, _shift(g.grades, -1))
    return dealias(fft_forward(prod))


def pointwise_product(kind: str, f: FormField, g: FormField) -> FormField:
    """Quadratic terms of the MHD system: ``u _| du``, ``(delta b) _| b``, ``u _| b``.

    Callers pass the already-differentiated factor, e.g. ``(u, d(u))`` for
    ``interior_u_du`` and ``(delta(b), b)`` for ``interior_dstarb_b``.
    """
    try:
        gf, gg = PRODUCT_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown product kind {kind!r}") from None
    if f.grades - {gf} or g.grades - {gg}:
        raise ValueError(
            f"{kind} expects grades ({gf}, {gg}), got ({sorted(f.grades)}, {sorted(g.grades)})")
    return interior_product(f, g)


# -- norms -----------------------------------------------------------------------

def pointwise_abs(f: FormField) -> np.ndarray:
    data = f.to_physical().data
    return np.sqrt(np.einsum("c...,c...->...", data[f.comps], data[f.comps]))


def lq_norm(f: FormField, q: float) -> float:
    """Discrete ``L^q`` norm, ``(h^3 sum_x |f(x)|^q)^(1/q)``; ``q = inf`` gives the max."""
    if not q >= 1:
        raise ValueError(f"L^q norm needs q >= 1, got {q}")
    mag = pointwise_abs(f)
    if np.isinf(q):
        return float(mag.max())
    h3 = f.grid.h ** 3
    if q == 2:
        return float(np.sqrt(h3 * np.sum(mag * mag)))
    return float((h3 * np.sum(mag ** q)) ** (1.0 / q))


def l2_inner(f: FormField, g: FormField) -> float:
    a = f.to_physical().data
    b = g.to_physical().data
    return float(f.grid.h ** 3 * np.sum(a * b))


def mean_mode(f: FormField) -> np.ndarray:
    """The k = 0 coefficients (spatial average) as 8 numbers."""
    f = f.to_spectral()
    return f.data[:, 0, 0, 0].real.copy()


# -- random data -----------------------------------------------------------------

def random_field(grid: Grid, grades, rng: np.random.Generator, kmax: int | None = None) -> FormField:
    """Gaussian random field with the requested grades.

    Modes with any ``|m_j| > kmax`` are removed (default: the 2/3-rule box)
    and the Nyquist planes are always removed.
    """
    data = np.zeros((8,) + grid.shape)
    idx = l3.grade_indices(grades)
    data[idx] = rng.standard_normal((len(idx),) + grid.shape)
    f = fft_forward(FormField(grid, data, False, grades))
    if kmax is None:
        mask = grid.dealias_mask
    else:
        m1, m2, m3 = grid.integer_modes
        mask = (np.abs(m1) <= kmax) & (np.abs(m2) <= kmax) & (m3 <= kmax)
    return FormField(grid, f.data * (mask & grid.nyquist_free_mask), True, f.grades)


# -- snapshots -------------------------------------------------------------------

def _grade_bits(grades) -> int:
    return sum(1 << g for g in grades)


def save_field(f: FormField, path) -> None:
    """Write a field snapshot.

    Layout (little-endian): 28-byte header ``struct '<8sHcBB3xId'`` =
    magic ``MHDFIELD``, format version (uint16), endianness tag ``b'<'``,
    representation (0 physical / 1 spectral), grade bit mask (bit g set if
    grade g is present), 3 pad bytes, n (uint32), L (float64). Then the raw
    C-ordered array of the present components in basis order: float64
    (ncomp, n, n, n) if physical, complex128 (ncomp, n, n, n//2+1) if spectral.
    """
    header = _HEADER.pack(FIELD_MAGIC, FIELD_VERSION, b"<", int(f.spectral),
                          _grade_bits(f.grades), f.grid.n, float(f.grid.L))
    dtype = "<c16" if f.spectral else "<f8"
    payload = np.ascontiguousarray(f.data[f.comps], dtype=dtype)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def load_field(path) -> FormField:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ValueError("truncated field snapshot")
    magic, version, endian, rep, bits, n, L = _HEADER.unpack_from(raw)
    if magic != FIELD_MAGIC or version != FIELD_VERSION or endian != b"<":
        raise ValueError("not a field snapshot of a supported version")
    grid = Grid(n, L)
    grades = frozenset(g for g in range(4) if bits >> g & 1)
    comps = l3.grade_indices(grades)
    spectral = bool(rep)
    shape = grid.spectral_shape if spectral else grid.shape
    dtype = "<c16" if spectral else "<f8"
    expected = len(comps) * int(np.prod(shape)) * np.dtype(dtype).itemsize
    if len(raw) - _HEADER.size != expected:
        raise ValueError(f"snapshot payload has {len(raw) - _HEADER.size} bytes, expected {expected}")
    payload = np.frombuffer(raw, dtype=dtype, offset=_HEADER.size).reshape((len(comps),) + shape)
    data = np.zeros((8,) + shape, dtype=complex if spectral else float)
    data[comps] = payload
    return FormField(grid, data, spectral, grades)
