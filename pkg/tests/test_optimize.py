import numpy as np
import pytest
from hypothesis import given, strategies as st

from qaoa_ising import optimize
from qaoa_ising.fermion import evaluate, schedule_duration
from qaoa_ising.model import ChainSpec, QaoaAngles
from qaoa_ising.optimize import (NumericalFailure, OptimOptions, canonicalize, cost_accounting, doubling_levels,
                                 enumerate_minima, field_continuation, interpolate_angles, linear_start, minimize,
                                 random_angles, regular_ladder, regular_schedule)


@pytest.mark.parametrize("p", [1, 2, 3, 5])
def test_minimize_reaches_bound_from_random_start(p, rng):
    chain = ChainSpec(50)
    res = minimize(random_angles(p, rng), chain)
    assert res.converged
    assert res.eps_res == pytest.approx(1.0 / (2 * p + 2), abs=1e-10)
    assert res.grad_norm <= 1e-9
    assert res.n_evaluations >= res.n_iterations


def test_minimize_respects_max_iters(rng):
    res = minimize(random_angles(6, rng), ChainSpec(50), OptimOptions(max_iters=3))
    assert res.n_iterations == 3 and not res.converged
    assert "max_iters reached" in res.warnings


def test_options_validation():
    for kw in (dict(grad_tol=0), dict(max_iters=0), dict(c1=0.5, c2=0.4)):
        with pytest.raises(ValueError):
            OptimOptions(**kw)


def test_non_finite_objective_raises_with_last_iterate(monkeypatch):
    monkeypatch.setattr(optimize, "_excess_and_grad", lambda a, m: (np.nan, np.zeros(2 * a.p)))
    start = QaoaAngles([0.1], [0.2])
    with pytest.raises(NumericalFailure) as info:
        minimize(start, ChainSpec(8))
    np.testing.assert_array_equal(info.value.last_angles.to_vector(), start.to_vector())


@given(st.lists(st.floats(-20, 20, allow_nan=False), min_size=2, max_size=12).filter(lambda x: len(x) % 2 == 0))
def test_canonicalize_is_idempotent_and_preserves_energy(x):
    a = QaoaAngles.from_vector(x)
    c = canonicalize(a)
    v = c.to_vector()
    assert np.all((v >= 0) & (v < np.pi / 2))
    np.testing.assert_array_equal(canonicalize(c).to_vector(), v)
    assert evaluate(c, ChainSpec(20)) == pytest.approx(evaluate(a, ChainSpec(20)), abs=1e-11)


def test_p1_has_the_analytic_pair_of_minima():
    search = enumerate_minima(1, ChainSpec(50), n_starts=40, seed=0)
    assert search.n_distinct == 2 and search.n_dropped == 0 and search.n_non_global == 0
    got = sorted(tuple(m.angles.to_vector()) for m in search.minima)
    np.testing.assert_allclose(got, [[np.pi / 8] * 2, [3 * np.pi / 8] * 2], atol=1e-6)


def test_enumeration_is_seed_deterministic():
    a = enumerate_minima(2, ChainSpec(20), n_starts=15, seed=3)
    b = enumerate_minima(2, ChainSpec(20), n_starts=15, seed=3)
    assert [m.to_dict() for m in a.minima] == [m.to_dict() for m in b.minima]


def test_enumeration_preconditions():
    with pytest.raises(ValueError):
        enumerate_minima(4, ChainSpec(8), 5, 0)
    with pytest.raises(ValueError):
        enumerate_minima(1, ChainSpec(8, field=0.5), 5, 0)


@given(st.integers(2, 20), st.integers(0, 40), st.sampled_from(["edge", "linear"]))
def test_interpolation_shapes_and_constants(p, extra, method):
    src = QaoaAngles(np.full(p, 0.3), np.full(p, 0.7))
    out = interpolate_angles(src, p + extra, method)
    assert out.p == p + extra
    np.testing.assert_allclose(out.gammas, 0.3, atol=1e-12)
    np.testing.assert_allclose(out.betas, 0.7, atol=1e-12)


def test_edge_interpolation_keeps_end_steps_and_symmetry():
    src = QaoaAngles(np.linspace(0.2, 0.9, 8), np.linspace(0.9, 0.2, 8))
    out = interpolate_angles(src, 16)
    # first step keeps its value, mirror symmetry survives
    assert out.gammas[0] == pytest.approx(src.gammas[0], abs=1e-12)
    assert out.gammas[-1] == pytest.approx(src.gammas[-1], abs=1e-12)
    np.testing.assert_allclose(out.gammas, out.betas[::-1], atol=1e-12)
    assert np.all(np.diff(out.gammas) > 0)


def test_linear_interpolation_extrapolates_end_segments():
    src = QaoaAngles([1.0, 2.0], [1.0, 2.0])
    out = interpolate_angles(src, 5, "linear")
    # old steps at 1/3, 2/3; new at k/6 on the line 3x
    np.testing.assert_allclose(out.gammas, 3 * np.arange(1, 6) / 6)


def test_interpolation_errors():
    src = QaoaAngles([0.1, 0.2], [0.3, 0.4])
    with pytest.raises(ValueError):
        interpolate_angles(src, 1)
    with pytest.raises(ValueError):
        interpolate_angles(src, 4, "spline")
    assert interpolate_angles(src, 2) is src


def test_linear_start():
    a = linear_start(3)
    np.testing.assert_allclose(a.schedule_values(), [0.25, 0.5, 0.75])
    assert schedule_duration(a) == pytest.approx(3.0)


def test_doubling_levels():
    assert doubling_levels(32) == [2, 4, 8, 16, 32]
    assert doubling_levels(12, 3) == [3, 6, 12]
    with pytest.raises(ValueError):
        doubling_levels(24)


def test_regular_ladder_is_monotone_and_saturates():
    ladder = regular_schedule(16, ChainSpec(64))
    assert [r.p for r in ladder] == [2, 4, 8, 16]
    for r in ladder:
        assert r.converged and not r.warnings
        assert r.eps_res == pytest.approx(1.0 / (2 * r.p + 2), abs=1e-10)
        assert np.all(np.diff(r.angles.schedule_values()) > 0)
    # mirror symmetry of the regular solution: s_m + s_{P+1-m} = 1
    s = ladder[-1].angles.schedule_values()
    np.testing.assert_allclose(s + s[::-1], 1.0, atol=1e-6)
    # frozen from the converged ladder
    assert schedule_duration(ladder[2].angles) == pytest.approx(9.7642, abs=1e-3)


def test_ladder_levels_must_increase():
    with pytest.raises(ValueError):
        regular_ladder([4, 2], ChainSpec(20))


def test_field_ladder_tracks_the_smooth_branch():
    h = 0.5
    ladder = regular_schedule(16, ChainSpec(64, field=h), n_eval_per_p=4)
    for r in ladder:
        assert np.all(np.diff(r.angles.schedule_values(h)) > 0)
        assert r.grad_norm < 1e-8


def test_field_continuation_steps():
    with pytest.raises(ValueError):
        field_continuation(QaoaAngles([0.1], [0.1]), ChainSpec(8, field=0.2), n_steps=0)


def test_cost_accounting():
    ladder = regular_schedule(8, ChainSpec(50))
    rows = cost_accounting(ladder)
    assert [r["p"] for r in rows] == [2, 4, 8]
    assert rows[-1]["cum_iter"] == sum(r.n_iterations for r in ladder)
    assert rows[-1]["cum_t_cc"] == sum(r.n_iterations * r.p for r in ladder)
