import numpy as np
import pytest

from mhdlab import grid as gs
from mhdlab import mild, presets
from mhdlab import reference as rf
from mhdlab.grid import Grid

G16 = Grid(16)


def test_shear_decays_exactly():
    u0, b0 = presets.make_preset("shear", G16)
    run = rf.reference_solve(u0, b0, 1.0, 1e-3, save_times=[1.0])
    u, b = run.at(1.0)
    assert np.abs(u.vector(1) - np.exp(-1.0) * u0.vector(1)).max() <= 1e-10
    assert gs.lq_norm(b, 2) == 0
    assert run.max_div_defect < 1e-10 and not run.notes


def test_zero_stays_zero():
    u0, b0 = presets.make_preset("zero", G16)
    run = rf.reference_solve(u0, b0, 0.1, 0.01)
    for u, b in run.snapshots:
        assert not np.any(u.data) and not np.any(b.data)
    assert run.times[0] == 0 and run.times[-1] == pytest.approx(0.1)


def test_fourth_order():
    u0, b0 = presets.make_preset("two-mode", G16)
    T = 0.4
    fine = rf.reference_solve(u0, b0, T, T / 128, save_times=[T]).at(T)
    errs = []
    for dt in (T / 4, T / 8, T / 16):
        u, b = rf.reference_solve(u0, b0, T, dt, save_times=[T]).at(T)
        errs.append(gs.lq_norm(u - fine[0], 2) + gs.lq_norm(b - fine[1], 2))
    for e0, e1 in zip(errs, errs[1:]):
        assert 13 < e0 / e1 < 19


def test_step_and_save_checks():
    u0, b0 = presets.make_preset("two-mode", G16)
    with pytest.raises(ValueError):
        rf.reference_solve(u0, b0, 0.1, 0.03, save_times=[0.04])
    with pytest.raises(ValueError, match="CFL"):
        rf.reference_solve(u0, b0, 1.0, 0.5)
    with pytest.raises(ValueError):
        rf.reference_solve(b0, u0, 1.0, 0.1)


def test_instability_is_reported():
    u0, b0 = presets.make_preset("orszag-tang-like", G16, 50.0)
    with pytest.raises(rf.InstabilityError, match="unstable"):
        rf.reference_solve(u0, b0, 1.0, 0.02, cfl=np.inf)


def test_mild_and_reference_agree_on_coarse_grid():
    u0, b0 = presets.make_preset("two-mode", G16)
    cfg = mild.SolverConfig(J=16)
    sol = mild.picard_solve(u0, b0, 0.2, cfg)
    ref = rf.reference_solve(u0, b0, 0.2, 4e-3, save_times=[0.1, 0.2])
    rep = rf.compare_mild_vs_reference(sol, ref)
    assert rep.passed and rep.max_rel_l2 < 1e-6
    with pytest.raises(ValueError):
        rf.compare_mild_vs_reference(sol, rf.reference_solve(u0, b0, 0.1, 4e-3))
