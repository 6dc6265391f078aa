from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flocklab.state import (
    FlockState,
    distance_sq_matrix,
    min_pair_distance_sq,
    pairwise_distance_sq,
    spread,
    spread_dim,
    spread_report,
)

V0_FIVE = [1.2, 1.4, 1.1, 1.5, 1.3]


@st.composite
def agent_matrix(draw, min_n=1, max_n=6, max_r=4, scale=1e3):
    n = draw(st.integers(min_n, max_n))
    r = draw(st.integers(1, max_r))
    vals = draw(
        st.lists(
            st.floats(-scale, scale, allow_nan=False, allow_infinity=False),
            min_size=n * r,
            max_size=n * r,
        )
    )
    return np.array(vals).reshape(n, r)


def test_spread_reference_velocities():
    assert spread(V0_FIVE) == pytest.approx(0.4, abs=1e-15)


def test_spread_dim_selects_column():
    y = np.array([[0.0, 0.0], [3.0, -1.0]])
    assert spread_dim(y, 0) == 3.0
    assert spread_dim(y, 1) == 1.0


def test_spread_dim_out_of_range():
    with pytest.raises(ValueError):
        spread_dim(np.zeros((2, 2)), 2)


def test_spread_identical_rows_is_zero():
    y = np.tile([2.0, -1.0, 0.5], (4, 1))
    assert spread(y) == 0.0


def test_spread_report_witnesses():
    rep = spread_report(V0_FIVE)
    assert rep.value == pytest.approx(0.4, abs=1e-15)
    assert rep.dim == 0
    assert rep.i == 3  # holds 1.5
    assert rep.j == 2  # holds 1.1
    assert rep.per_dim.shape == (1,)


def test_spread_report_tie_breaks_lexicographically():
    # both columns have spread 1; dim resolves to 0, and within the column
    # the first maximal/minimal agents win
    y = np.array([[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    rep = spread_report(y)
    assert (rep.dim, rep.i, rep.j) == (0, 1, 0)


@given(agent_matrix(), st.floats(-1e3, 1e3, allow_nan=False))
def test_spread_scales_homogeneously(y, alpha):
    assert spread(alpha * y) == pytest.approx(abs(alpha) * spread(y), rel=1e-12, abs=1e-12)


@given(agent_matrix(), st.floats(-1e3, 1e3, allow_nan=False))
def test_spread_translation_invariant(y, c):
    shifted = y + c * np.ones(y.shape[1])
    assert spread(shifted) == pytest.approx(spread(y), rel=1e-9, abs=1e-9)


@given(agent_matrix())
def test_spread_matches_exhaustive_pair_scan(y):
    n, r = y.shape
    brute = max(
        abs(y[i, l] - y[j, l]) for l in range(r) for i in range(n) for j in range(n)
    )
    assert spread(y) == brute
    assert spread(y) >= 0.0


@given(agent_matrix())
def test_spread_zero_iff_rows_equal(y):
    assert (spread(y) == 0.0) == bool((y == y[0]).all())


def test_pairwise_distance_345():
    x = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert pairwise_distance_sq(x, 0, 1) == 25.0


def test_pairwise_distance_same_agent_error():
    with pytest.raises(ValueError):
        pairwise_distance_sq(np.zeros((3, 2)), 1, 1)


@given(agent_matrix(min_n=2))
def test_min_pair_distance_matches_brute_force(x):
    n = x.shape[0]
    val, i, j = min_pair_distance_sq(x)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    brute = min(pairwise_distance_sq(x, a, b) for a, b in pairs)
    # summation order differs between the matrix and per-pair paths
    assert val == pytest.approx(brute, rel=1e-12, abs=0)
    assert i < j
    assert pairwise_distance_sq(x, i, j) == pytest.approx(val, rel=1e-12, abs=0)


def test_min_pair_distance_needs_two_agents():
    with pytest.raises(ValueError):
        min_pair_distance_sq(np.zeros((1, 3)))


def test_distance_sq_matrix_symmetric_zero_diagonal():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(5, 3))
    d2 = distance_sq_matrix(x)
    assert np.allclose(d2, d2.T)
    assert np.all(np.diag(d2) == 0.0)


def test_flock_state_copies_and_freezes():
    x = np.zeros((2, 1))
    v = np.ones((2, 1))
    state = FlockState(t=0.0, x=x, v=v)
    x[0, 0] = 99.0  # caller mutation must not leak in
    assert state.x[0, 0] == 0.0
    with pytest.raises(ValueError):
        state.x[0, 0] = 1.0
    assert (state.n, state.r) == (2, 1)
    assert state.spread_v() == 0.0


def test_flock_state_shape_mismatch():
    with pytest.raises(ValueError):
        FlockState(t=0.0, x=np.zeros((2, 1)), v=np.zeros((3, 1)))


def test_flock_state_rejects_non_finite():
    with pytest.raises(ValueError):
        FlockState(t=0.0, x=np.array([[np.inf]]), v=np.array([[0.0]]))


def test_flock_state_accepts_single_agent():
    state = FlockState(t=1.0, x=[[0.0]], v=[[2.0]])
    assert state.n == 1 and state.spread_x() == 0.0
