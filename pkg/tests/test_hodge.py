import numpy as np
import pytest

from mhdlab import grid as gs
from mhdlab import hodge
from mhdlab.experiments import hodge_suite
from mhdlab.grid import FormField, Grid


@pytest.fixture(scope="module")
def g():
    return Grid(16)


def test_suite_at_roundoff(g):
    res = hodge_suite(g, np.random.default_rng(0), samples=1)
    assert max(res.values()) < 1e-13, res


def test_leray_kills_gradients(g):
    phi = gs.random_field(g, {0}, np.random.default_rng(1))
    grad = gs.d(phi)
    assert gs.lq_norm(hodge.leray_P(grad), 2) < 1e-14 * gs.lq_norm(grad, 2) * 10


def test_leray_keeps_divergence_free(g):
    x = g.coords
    u = FormField.from_vector(g, np.stack([np.sin(x[1]), np.sin(x[2]), np.cos(x[0])]), 1)
    np.testing.assert_allclose(hodge.leray_P(u).vector(1), u.vector(1), atol=1e-14)
    assert hodge.coclosed_defect(u) < 1e-14


def test_projection_is_idempotent(g):
    b = gs.random_field(g, {2}, np.random.default_rng(2))
    qb = hodge.Q_proj(b)
    np.testing.assert_allclose(hodge.Q_proj(qb).data, qb.data, atol=1e-14)
    assert hodge.exactness_defect(qb) < 1e-14
    assert hodge.exactness_defect(b) > 0.1


def test_grade_checks(g):
    with pytest.raises(ValueError):
        hodge.leray_P(FormField.zeros(g, {2}))
    with pytest.raises(ValueError):
        hodge.Q_proj(FormField.zeros(g, {1}))


def test_constant_is_harmonic(g):
    c = FormField.from_vector(g, np.stack([np.ones(g.shape), 0 * np.ones(g.shape), 2 * np.ones(g.shape)]), 1)
    split = hodge.hodge_decompose(c)
    np.testing.assert_allclose(split.harmonic.data, c.to_spectral().data)
    assert not np.any(split.exact.data) and not np.any(split.coexact.data)


def test_reconstruct_pq(g):
    rng = np.random.default_rng(3)
    u = hodge.leray_P(gs.random_field(g, {1}, rng))
    b = hodge.Q_proj(gs.random_field(g, {2}, rng))
    ur, br = hodge.reconstruct_PQ(u, b)
    np.testing.assert_allclose(ur.data, u.data, atol=1e-13)
    np.testing.assert_allclose(br.data, b.data, atol=1e-13)


def test_reconstruct_pq_warns_outside_subspaces(g):
    rng = np.random.default_rng(4)
    with pytest.warns(UserWarning):
        hodge.reconstruct_PQ(gs.random_field(g, {1}, rng), hodge.Q_proj(gs.random_field(g, {2}, rng)))


def test_empirical_projection_norms(g):
    # orthogonal projections have L^2 norm at most 1
    assert hodge.empirical_projection_norm("P", g, 2, 2, np.random.default_rng(5)) <= 1 + 1e-12
    assert hodge.empirical_projection_norm("Q", g, 3, 2, np.random.default_rng(5)) > 0
