import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial.transform import Rotation

from qaoa_ising import ed, fermion
from qaoa_ising.fermion import (b_vectors, digitize, energy_expectation, epsilon_k, evaluate, k_grid,
                                propagate_mode, residual_energy, rotate, schedule_duration)
from qaoa_ising.model import Boundary, ChainSpec, QaoaAngles

finite = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)
vec3 = st.tuples(finite, finite, finite)


def angles_strategy(max_p=6, lo=0.0, hi=np.pi / 2):
    return st.integers(1, max_p).flatmap(
        lambda p: st.lists(st.floats(lo, hi, allow_nan=False), min_size=2 * p, max_size=2 * p)
    ).map(QaoaAngles.from_vector)


@given(vec3, finite, vec3)
def test_rotate_matches_scipy(axis, theta, v):
    axis = np.array(axis)
    if np.linalg.norm(axis) < 1e-3:
        axis = np.array([0.0, 0.0, 1.0])
    axis = axis / np.linalg.norm(axis)
    expected = Rotation.from_rotvec(theta * axis).apply(v)
    np.testing.assert_allclose(rotate(axis, theta, v), expected, atol=1e-12 * (1 + np.linalg.norm(v)))


@given(vec3, finite, finite)
def test_rotate_composes_and_preserves_norm(v, t1, t2):
    axis = np.array([0.6, 0.0, 0.8])
    v = np.array(v)
    both = rotate(axis, t2, rotate(axis, t1, v))
    np.testing.assert_allclose(both, rotate(axis, t1 + t2, v), atol=1e-11 * (1 + np.linalg.norm(v)))
    assert np.linalg.norm(both) == pytest.approx(np.linalg.norm(v), abs=1e-11)


def test_rotate_is_right_handed():
    np.testing.assert_allclose(rotate([0, 0, 1], np.pi / 2, [1, 0, 0]), [0, 1, 0], atol=1e-15)


def test_rotate_rejects_non_unit_axis():
    with pytest.raises(ValueError):
        rotate([0, 0, 2.0], 0.1, [1, 0, 0])


def test_k_grids():
    np.testing.assert_allclose(k_grid("PBC", 8), np.pi * np.array([1, 3, 5, 7]) / 8)
    np.testing.assert_allclose(k_grid(Boundary.ABC, 8), np.pi * np.array([2, 4, 6]) / 8)
    for bad in (3, 2, 7, 6.5):
        with pytest.raises(ValueError):
            k_grid("PBC", bad)


def test_b_vectors_are_unit():
    b = b_vectors(np.linspace(0, np.pi, 17))
    np.testing.assert_allclose(np.linalg.norm(b, axis=1), 1.0)
    np.testing.assert_allclose(b_vectors([np.pi / 2])[0], [-1, 0, 0], atol=1e-16)


def test_p1_eighth_angles():
    a = QaoaAngles([np.pi / 8], [np.pi / 8])
    np.testing.assert_allclose(propagate_mode(a, np.pi / 2), [-1.0, 0.0, 0.0], atol=1e-15)
    assert epsilon_k(a, np.pi / 2) == pytest.approx(0.0, abs=1e-30)
    assert residual_energy(a, ChainSpec(50)).eps_res == pytest.approx(0.25, abs=1e-15)


def test_initial_state_residual_is_half():
    for n in (8, 50):
        assert evaluate(QaoaAngles.zeros(3), ChainSpec(n)) == pytest.approx(0.5, abs=1e-15)


@given(angles_strategy(max_p=8))
def test_reduced_chain_bound(a):
    n = 50
    eps = residual_energy(a, ChainSpec(n)).eps_res
    assert eps >= 1.0 / (2 * a.p + 2) - 1e-14
    assert eps <= 1.0 + 1e-14


@given(angles_strategy(max_p=8))
def test_reduced_chain_equals_full_ring(a):
    # the ABC ring of 2P+2 sites reproduces the full periodic sum whenever 2P < N
    for n in (2 * a.p + 2, 2 * a.p + 8, 60):
        full = energy_expectation(a, ChainSpec(n), n_eval=n)
        assert residual_energy(a, ChainSpec(n)).eps_res == pytest.approx(full.eps_res, abs=1e-13)


@given(angles_strategy(max_p=5), st.lists(st.integers(-3, 3), min_size=10, max_size=10))
def test_quarter_period_and_reflection(a, shifts):
    chain = ChainSpec(30)
    x = a.to_vector()
    shifted = x + np.pi / 2 * np.array(shifts[: x.size])
    base = evaluate(a, chain)
    assert evaluate(QaoaAngles.from_vector(shifted), chain) == pytest.approx(base, abs=1e-12)
    assert evaluate(QaoaAngles.from_vector(-x), chain) == pytest.approx(base, abs=1e-12)


@pytest.mark.parametrize("n", [4, 6, 8])
@pytest.mark.parametrize("h", [0.0, 0.3])
def test_matches_dense_simulation(n, h, rng):
    for p in (1, 2, 3, 4):
        a = QaoaAngles.from_vector(rng.uniform(0, np.pi / 2, 2 * p))
        dense = ed.eps_res_ed(a, n, h)
        free = energy_expectation(a, ChainSpec(n, field=h))
        assert free.energy == pytest.approx(dense.energy, abs=1e-11)
        assert free.e_min == pytest.approx(dense.e_min, abs=1e-11)
        assert free.eps_res == pytest.approx(dense.eps_res, abs=1e-12)


def test_residual_energy_rejects_field():
    with pytest.raises(ValueError):
        residual_energy(QaoaAngles([0.1], [0.1]), ChainSpec(8, field=0.5))


def test_full_evaluation_needs_pbc():
    with pytest.raises(ValueError):
        energy_expectation(QaoaAngles([0.1], [0.1]), ChainSpec(8, field=0.5, boundary="ABC"))


def test_n_eval_switches_to_full_ring_at_zero_field():
    # P = 4 on an 8-site evaluation ring is past the bound regime: zero is reachable
    a = QaoaAngles.from_vector(np.full(8, 0.3))
    reduced = evaluate(a, ChainSpec(50))
    full = evaluate(a, ChainSpec(50, n_eval=8))
    assert full == pytest.approx(energy_expectation(a, ChainSpec(8)).eps_res, abs=1e-14)
    assert reduced != pytest.approx(full, abs=1e-6)


@given(st.lists(st.tuples(st.floats(0.01, 1.0), st.floats(0.01, 3.0)), min_size=1, max_size=12),
       st.floats(0.0, 0.9))
def test_digitize_duration_round_trip(pairs, h):
    s, dt = map(np.array, zip(*pairs))
    a = digitize(s, dt, h)
    assert schedule_duration(a, h) == pytest.approx(dt.sum(), rel=1e-12)
    np.testing.assert_allclose(a.schedule_values(h), s, rtol=1e-10)


@pytest.mark.parametrize("s,dt", [([0.5], [1.0, 1.0]), ([0.0], [1.0]), ([1.2], [1.0]), ([0.5], [0.0])])
def test_digitize_rejects(s, dt):
    with pytest.raises(ValueError):
        digitize(s, dt)
