import numpy as np
import pytest

from holder_condg.gap import solve_gap
from holder_condg.nonsmooth import IndicatorModel, sample_support_model
from holder_condg.problems import HolderParams, construct_problem
from holder_condg.solvers import (RunStatus, SolverConfig, evaluate_F, fgm_line_search,
                                  pgm_step_size, run_fgm, run_pgm)


def case_i(name):
    p = construct_problem(name)
    return p, IndicatorModel(p.box)


def test_step_size_examples():
    assert pgm_step_size(-300.0, 450**0.5, HolderParams(1.0, 2.0)) == pytest.approx(1 / 3)
    assert pgm_step_size(-10.0, 1.0, HolderParams(1.0, 2.0)) == 1.0
    M, norm = 2.274, 0.37
    theta = -M * norm**1.3
    assert pgm_step_size(theta, norm, HolderParams(0.3, M)) == pytest.approx(1.0, rel=1e-12)


def test_step_size_rejects_invalid_input():
    h = HolderParams(1.0, 1.0)
    with pytest.raises(ValueError):
        pgm_step_size(0.0, 1.0, h)
    with pytest.raises(ValueError):
        pgm_step_size(-1.0, 0.0, h)


def test_config_validation():
    for bad in (dict(epsilon=0), dict(max_outer=0), dict(l_init=-1), dict(max_inner=0)):
        with pytest.raises(ValueError):
            SolverConfig(**bad)


def test_shared_min_pgm_converges():
    p, m = case_i("SHARED-MIN")
    run = run_pgm(p, m, [1.0, 1.0])
    assert run.status is RunStatus.CONVERGED
    assert run.iterations <= 50
    assert np.linalg.norm(run.final_x) <= 1e-2
    assert abs(run.final_theta) <= 1e-4


def test_stationary_start_stops_immediately():
    p, m = case_i("BK1")
    for solver in (run_pgm, run_fgm):
        run = solver(p, m, [0.0, 0.0])
        assert run.status is RunStatus.CONVERGED
        assert run.counters["iter"] == 0 and run.counters["feval"] == 0
        assert len(run.records) == 1 and run.records[0].step is None


def test_first_line_search_trial_and_trial_count():
    p, m = case_i("SHARED-MIN")
    x = np.array([1.0, 1.0])
    gap = solve_gap(p, m, x)
    ls = fgm_line_search(p, m, x, evaluate_F(p, m, x), gap, 1.0, SolverConfig())
    assert ls.trials <= 4
    assert ls.l_k == 0.5 * 2 ** (ls.trials - 1)
    assert ls.fevals == ls.trials


def test_line_search_first_trial_uses_half_previous():
    p, m = case_i("BK1")
    x = np.array([10.0, 10.0])
    gap = solve_gap(p, m, x)
    ls = fgm_line_search(p, m, x, evaluate_F(p, m, x), gap, 1.0, SolverConfig())
    # along d = (-15, -15) the f2 test reduces to 50/L^2 <= 75/L, i.e. L >= 2/3
    assert ls.trials == 2 and ls.l_k == 1.0
    assert ls.t_k == pytest.approx(300.0 / (2 * 1.0 * 450.0))


def test_line_search_cap_raises():
    from holder_condg.solvers import LineSearchError
    p, m = case_i("BK1")
    x = np.array([10.0, 10.0])
    gap = solve_gap(p, m, x)
    with pytest.raises(LineSearchError):
        fgm_line_search(p, m, x, evaluate_F(p, m, x), gap, 1e-6, SolverConfig(max_inner=3))
    run = run_fgm(p, m, x, SolverConfig(max_inner=1, l_init=1e-6))
    assert run.status is RunStatus.ERROR


def test_max_iterations_reports_failed():
    p, m = case_i("JOS1")
    x0 = p.box.sample(np.random.default_rng(0))
    run = run_pgm(p, m, x0, SolverConfig(max_outer=3))
    assert run.status is RunStatus.MAX_ITER_REACHED
    assert run.status.value == "Failed"
    assert run.iterations == 3


def test_start_outside_box_is_projected(caplog):
    p, m = case_i("SHARED-MIN")
    run = run_pgm(p, m, [3.0, 0.0])
    np.testing.assert_array_equal(run.records[0].x, [1.0, 0.0])
    assert "outside" in caplog.text


@pytest.mark.parametrize("name", ["BK1", "IM1", "Lov1", "MHHM2", "SP1", "Toi8", "VU2", "MAN2", "MAN3"])
@pytest.mark.parametrize("solver", [run_pgm, run_fgm])
def test_runs_descend_and_stay_in_box(name, solver):
    p, m = case_i(name)
    for x0 in p.box.sample(np.random.default_rng(17), 5):
        run = solver(p, m, x0)
        assert run.status is RunStatus.CONVERGED
        F = np.array([r.F_x for r in run.records])
        assert np.all(np.diff(F, axis=0) <= 1e-10)
        for r in run.records:
            assert p.box.contains(r.x, 1e-12)
            assert r.theta <= 0
            if r.step is not None:
                assert 0 < r.step <= 1
        theta_min = np.minimum.accumulate(np.abs(run.trace("theta")))
        assert np.all(np.diff(theta_min) <= 0) and theta_min[-1] <= 1e-4
        if solver is run_pgm:
            assert run.counters["feval"] == 0
        else:
            trials = sum(r.inner_trials for r in run.records if r.inner_trials)
            assert run.counters["feval"] == trials


def test_case_ii_runs():
    p = construct_problem("BK1")
    rng = np.random.default_rng(5)
    model = sample_support_model(2, 2, p.box, rng)
    x0 = p.box.sample(rng)
    for solver in (run_pgm, run_fgm):
        run = solver(p, model, x0)
        assert run.status is RunStatus.CONVERGED
        F = np.array([r.F_x for r in run.records])
        assert np.all(np.diff(F, axis=0) <= 1e-10)
        assert run.counters["geval"] == 2 * len(run.records)
        np.testing.assert_allclose(F[-1], evaluate_F(p, model, run.final_x), atol=1e-9)


def test_runs_are_deterministic():
    p, m = case_i("Lov1")
    a, b = run_fgm(p, m, [7.0, -3.0]), run_fgm(p, m, [7.0, -3.0])
    assert np.array_equal(a.final_x, b.final_x) and a.counters == b.counters
