import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mhdlab import lambda3 as l3
from mhdlab.lambda3 import Multivector, hodge_star, inner, interior, wedge

finite = st.floats(-10, 10, allow_nan=False)
mv = arrays(np.float64, 8, elements=finite).map(Multivector)
vec1 = arrays(np.float64, 3, elements=finite).map(lambda v: l3.translate_vec_to_form(v, 1))


def close(a, b, tol=1e-9):
    return np.allclose(a.coeffs, b.coeffs, atol=tol * (1 + np.abs(a.coeffs).max() + np.abs(b.coeffs).max()))


def test_basis_wedge():
    e1, e2 = Multivector.basis(1), Multivector.basis(2)
    assert wedge(e1, e2) == Multivector.basis(1, 2)
    assert wedge(e2, e1) == -Multivector.basis(1, 2)
    assert wedge(e1, e1) == Multivector()


def test_star_of_one_vectors():
    assert hodge_star(Multivector.basis(1)) == Multivector.basis(2, 3)
    assert hodge_star(Multivector.basis(2)) == -Multivector.basis(1, 3)
    assert hodge_star(Multivector.basis(3)) == Multivector.basis(1, 2)
    assert hodge_star(Multivector.scalar(1.0)) == Multivector.basis(1, 2, 3)


def test_wedge_of_vectors_is_cross_product_proxy():
    a = l3.translate_vec_to_form([1, 2, 3], 1)
    b = l3.translate_vec_to_form([4, 5, 6], 1)
    np.testing.assert_array_equal(l3.translate_form_to_vec(wedge(a, b), 2), np.cross([1, 2, 3], [4, 5, 6]))


def test_interior_of_two_form():
    # e1 _| *(0, 1, 0) = e1 _| (-e13) = -e3
    out = interior(Multivector.basis(1), l3.translate_vec_to_form([0, 1, 0], 2))
    np.testing.assert_array_equal(l3.translate_form_to_vec(out, 1), [0, 0, -1])


def test_interior_of_volume_form():
    out = interior(l3.translate_vec_to_form([2, 0, 0], 1), Multivector.basis(1, 2, 3) * 3)
    np.testing.assert_array_equal(l3.translate_form_to_vec(out, 2), [6, 0, 0])


def test_one_form_wedge_two_form_is_dot_product():
    u = l3.translate_vec_to_form([1, 2, 3], 1)
    b = l3.translate_vec_to_form([4, 5, 6], 2)
    assert l3.translate_form_to_vec(wedge(u, b), 3) == 32


def test_interior_rejects_non_vector():
    with pytest.raises(ValueError):
        interior(Multivector.basis(1, 2), Multivector.basis(1))


def test_bad_coefficient_shape():
    with pytest.raises(ValueError):
        Multivector(np.zeros(7))


@given(mv, mv, mv)
def test_wedge_associative(a, b, c):
    assert close(wedge(wedge(a, b), c), wedge(a, wedge(b, c)))


@given(vec1, mv, mv)
def test_adjunction(a, u, v):
    lhs, rhs = inner(wedge(a, u), v), inner(u, interior(a, v))
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(lhs)))


@given(vec1, vec1)
def test_one_vectors_anticommute(a, b):
    assert close(wedge(a, b), -wedge(b, a))


@given(mv)
def test_star_is_involution_in_three_dimensions(u):
    assert close(hodge_star(hodge_star(u)), u)


@given(mv, mv, st.integers(0, 3))
def test_star_defining_relation(u, v, k):
    # u ^ *v = <u, v> e123 for u, v of the same grade
    u, v = u.part(k), v.part(k)
    assert close(wedge(u, hodge_star(v)), Multivector.basis(1, 2, 3) * inner(u, v))


@given(vec1, st.integers(0, 3), st.integers(0, 3), st.data())
@settings(max_examples=50)
def test_interior_is_graded_derivation(a, k, m, data):
    u = data.draw(mv).part(k)
    v = data.draw(mv).part(m)
    lhs = interior(a, wedge(u, v))
    rhs = wedge(interior(a, u), v) + wedge(u, interior(a, v)) * (-1) ** k
    assert close(lhs, rhs)


@pytest.mark.parametrize("grade", [1, 2])
def test_translate_roundtrip(grade):
    v = np.array([0.5, -1.5, 2.0])
    np.testing.assert_allclose(l3.translate_form_to_vec(l3.translate_vec_to_form(v, grade), grade), v)


def test_component_helpers_match_translation():
    v = np.arange(6.0).reshape(3, 2)
    comps = l3.vector_to_components(v, 2)
    for i in range(2):
        expected = l3.translate_vec_to_form(v[:, i], 2).coeffs
        np.testing.assert_array_equal(comps[:, i], expected)
    np.testing.assert_array_equal(l3.components_to_vector(comps, 2), v)


def test_random_multivector_grades():
    u = l3.random_multivector(np.random.default_rng(1), {2})
    assert u.grades() == {2}
