"""Exterior algebra of R^3.

Multivectors are stored as 8 real coefficients along the basis ``e_S`` for
``S`` a subset of {1, 2, 3}, in the order

    (), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)

The basis is orthonormal for the inner product. The wedge product is built
from subset sign rules, the interior product by a 1-vector is its transpose
(``<a^u, v> = <u, a _| v>``), and the Hodge star is fixed by
``u ^ *v = <u, v> e_123``.

Vector identifications (the same conventions are used for fields):

* 1-form ``u1 e1 + u2 e2 + u3 e3``  <->  vector ``(u1, u2, u3)``
* 2-form ``B1 e23 - B2 e13 + B3 e12`` <-> vector ``(B1, B2, B3)``, i.e. a
  2-form is the Hodge star of its proxy 1-form. With this choice ``d`` of a
  1-form is the curl of its proxy.
* 0-form and 3-form ``c e123`` <-> scalar ``c``.
"""
from __future__ import annotations

import numpy as np

BASIS: tuple[tuple[int, ...], ...] = ((), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3))
INDEX = {s: i for i, s in enumerate(BASIS)}
GRADE_OF = np.array([len(s) for s in BASIS])
GRADE_SLICES = {0: slice(0, 1), 1: slice(1, 4), 2: slice(4, 7), 3: slice(7, 8)}
ALL_GRADES = frozenset(range(4))


def grade_indices(grades) -> list[int]:
    """Basis indices belonging to the given grades, in basis order."""
    return [i for i, s in enumerate(BASIS) if len(s) in grades]


def _merge_sign(s: tuple[int, ...], t: tuple[int, ...]) -> int:
    # parity of the permutation sorting the concatenation s + t
    inv = sum(1 for a in s for b in t if a > b)
    return -1 if inv % 2 else 1


def _build_tables():
    wedge = np.zeros((8, 8, 8))
    for i, s in enumerate(BASIS):
        for j, t in enumerate(BASIS):
            if set(s) & set(t):
                continue
            k = INDEX[tuple(sorted(s + t))]
            wedge[i, j, k] = _merge_sign(s, t)
    star = np.zeros((8, 8))
    full = (1, 2, 3)
    for i, s in enumerate(BASIS):
        comp = tuple(x for x in full if x not in s)
        star[INDEX[comp], i] = _merge_sign(s, comp)
    return wedge, star


#: WEDGE[i, j, k] is the e_k coefficient of e_i ^ e_j
WEDGE, STAR = _build_tables()
#: LEFT_WEDGE[m] is the 8x8 matrix of v -> e_m ^ v for m = 1, 2, 3
LEFT_WEDGE = np.stack([WEDGE[INDEX[(m,)]].T for m in (1, 2, 3)])
#: LEFT_INTERIOR[m] is the matrix of v -> e_m _| v, the transpose of LEFT_WEDGE[m]
LEFT_INTERIOR = np.transpose(LEFT_WEDGE, (0, 2, 1)).copy()


def _sparse_entries(mats):
    """(m, row, col, sign) for every nonzero entry of a stack of signed 0/1 matrices."""
    out = []
    for m, mat in enumerate(mats):
        for r, c in zip(*np.nonzero(mat)):
            out.append((m, int(r), int(c), float(mat[r, c])))
    return tuple(out)


WEDGE_ENTRIES = _sparse_entries(LEFT_WEDGE)
INTERIOR_ENTRIES = _sparse_entries(LEFT_INTERIOR)
STAR_ENTRIES = tuple((int(r), int(c), float(STAR[r, c])) for r, c in zip(*np.nonzero(STAR)))


class Multivector:
    """A single element of the exterior algebra of R^3."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        if coeffs is None:
            coeffs = np.zeros(8)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (8,):
            raise ValueError(f"expected 8 coefficients, got shape {coeffs.shape}")
        self.coeffs = coeffs

    @classmethod
    def basis(cls, *subset: int) -> "Multivector":
        c = np.zeros(8)
        c[INDEX[tuple(subset)]] = 1.0
        return cls(c)

    @classmethod
    def scalar(cls, value: float) -> "Multivector":
        return cls.basis() * value

    def grades(self, tol: float = 0.0) -> set[int]:
        return {int(GRADE_OF[i]) for i in np.flatnonzero(np.abs(self.coeffs) > tol)}

    def part(self, grade: int) -> "Multivector":
        c = np.zeros(8)
        c[GRADE_SLICES[grade]] = self.coeffs[GRADE_SLICES[grade]]
        return Multivector(c)

    def __add__(self, other):
        return Multivector(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return Multivector(self.coeffs - other.coeffs)

    def __neg__(self):
        return Multivector(-self.coeffs)

    def __mul__(self, scalar):
        return Multivector(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        return isinstance(other, Multivector) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        terms = [f"{c:+g}e{''.join(map(str, s)) or '0'}" for c, s in zip(self.coeffs, BASIS) if c]
        return "Multivector(" + (" ".join(terms) or "0") + ")"


def wedge(a: Multivector, b: Multivector) -> Multivector:
    return Multivector(np.einsum("i,j,ijk->k", a.coeffs, b.coeffs, WEDGE))


def interior(a: Multivector, u: Multivector) -> Multivector:
    """Interior product ``a _| u`` of a 1-vector ``a`` with any multivector."""
    if a.grades() - {1}:
        raise ValueError("interior product needs a pure grade-1 left factor")
    vec = a.coeffs[1:4]
    return Multivector(np.einsum("m,mij,j->i", vec, LEFT_INTERIOR, u.coeffs))


def hodge_star(u: Multivector) -> Multivector:
    return Multivector(STAR @ u.coeffs)


def inner(u: Multivector, v: Multivector) -> float:
    return float(u.coeffs @ v.coeffs)


def translate_vec_to_form(v, grade: int) -> Multivector:
    """Embed a scalar (grades 0, 3) or a 3-vector (grades 1, 2) as a multivector."""
    c = np.zeros(8)
    if grade in (0, 3):
        if np.ndim(v) != 0:
            raise ValueError(f"grade {grade} expects a scalar")
        c[0 if grade == 0 else 7] = float(v)
        return Multivector(c)
    v = np.asarray(v, dtype=float)
    if grade not in (1, 2) or v.shape != (3,):
        raise ValueError(f"grade {grade} cannot hold input of shape {v.shape}")
    c[1:4] = v
    return hodge_star(Multivector(c)) if grade == 2 else Multivector(c)


def translate_form_to_vec(u: Multivector, grade: int):
    """Inverse of :func:`translate_vec_to_form` on the ``grade`` component of ``u``."""
    if grade == 0:
        return float(u.coeffs[0])
    if grade == 3:
        return float(u.coeffs[7])
    if grade == 1:
        return u.coeffs[1:4].copy()
    if grade == 2:
        return hodge_star(u.part(2)).coeffs[1:4].copy()
    raise ValueError(f"no grade {grade} in R^3")


# -- component-array helpers used by the field layer -------------------------

#: proxy[i] = sign * coeffs[TWO_FORM_PROXY[i]]
TWO_FORM_PROXY = ((INDEX[(2, 3)], 1.0), (INDEX[(1, 3)], -1.0), (INDEX[(1, 2)], 1.0))


def vector_to_components(vec, grade: int) -> np.ndarray:
    """Stack of 8 component arrays from a vector proxy of shape (3, ...)."""
    vec = np.asarray(vec)
    out = np.zeros((8,) + vec.shape[1:], dtype=vec.dtype)
    if grade == 1:
        out[1:4] = vec
    elif grade == 2:
        for i, (idx, sign) in enumerate(TWO_FORM_PROXY):
            out[idx] = sign * vec[i]
    else:
        raise ValueError("vector proxies exist for grades 1 and 2 only")
    return out


def components_to_vector(comps, grade: int) -> np.ndarray:
    comps = np.asarray(comps)
    if grade == 1:
        return comps[1:4].copy()
    if grade == 2:
        return np.stack([sign * comps[idx] for idx, sign in TWO_FORM_PROXY])
    raise ValueError("vector proxies exist for grades 1 and 2 only")


def random_multivector(rng: np.random.Generator, grades=ALL_GRADES) -> Multivector:
    c = rng.standard_normal(8)
    mask = np.isin(GRADE_OF, list(grades))
    return Multivector(np.where(mask, c, 0.0))

