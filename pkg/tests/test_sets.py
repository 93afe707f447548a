import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from csoa.sets import BoxSet, L1BallSet, L2BallSet, LMOError, NuclearBallSet

coords = st.floats(-50, 50, allow_nan=False)


def test_box_projection_example():
    box = BoxSet([-1, -1], [1, 1])
    assert np.array_equal(box.project(np.array([2.0, 0.5])), [1.0, 0.5])


def test_l2_projection_example():
    ball = L2BallSet([0.0, 0.0], 1.0)
    assert np.allclose(ball.project(np.array([3.0, 4.0])), [0.6, 0.8], atol=1e-15)


def test_interior_points_are_fixed():
    ball = L2BallSet([1.0, -1.0], 2.0)
    x = np.array([1.5, -0.5])
    assert np.array_equal(ball.project(x), x)
    box = BoxSet([0, 0], [1, 1])
    assert np.array_equal(box.project(np.array([0.3, 0.7])), [0.3, 0.7])


def test_projection_dimension_and_finiteness_errors():
    ball = L2BallSet([0.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        ball.project(np.zeros(3))
    with pytest.raises(FloatingPointError):
        ball.project(np.array([np.nan, 0.0]))
    with pytest.raises(FloatingPointError):
        BoxSet([0], [1]).project(np.array([np.inf]))


def test_l1_lmo_example_against_vertices():
    ball = L1BallSet(3, 1.0)
    d = np.array([0.2, -3.0, 1.0])
    s = ball.lmo(d)
    assert np.array_equal(s, [0.0, 1.0, 0.0])
    assert s @ d == min(v @ d for v in ball.vertices())


def test_l1_lmo_ties_take_smallest_index():
    s = L1BallSet(3, 2.0).lmo(np.array([1.0, -1.0, 1.0]))
    assert np.array_equal(s, [-2.0, 0.0, 0.0])


def test_box_lmo_example_and_ties():
    box = BoxSet([0, 0], [1, 1])
    assert np.array_equal(box.lmo(np.array([1.0, -1.0])), [0.0, 1.0])
    assert np.array_equal(box.lmo(np.array([0.0, 1.0])), [1.0, 0.0])


def test_zero_direction_warns():
    for xset, d in ((L1BallSet(2, 1.0), np.zeros(2)), (BoxSet([0, 0], [1, 1]), np.zeros(2)),
                    (NuclearBallSet(2, 2, 1.0), np.zeros((2, 2))),
                    (L2BallSet([0, 0], 1.0), np.zeros(2))):
        with pytest.warns(RuntimeWarning):
            s = xset.lmo(d)
        assert xset.contains(s)


@pytest.mark.parametrize("m", range(1, 9))
def test_lmo_matches_vertex_enumeration(m):
    rng = np.random.default_rng(m)
    l1 = L1BallSet(m, 1.7)
    lo = -rng.random(m)
    box = BoxSet(lo, lo + 0.1 + rng.random(m))
    corners = np.array(list(itertools.product(*zip(box.lower, box.upper))))
    verts = l1.vertices()
    for _ in range(100):
        d = rng.standard_normal(m)
        # same 1-d dot product on both sides so the comparison is exact
        assert l1.lmo(d) @ d == min(v @ d for v in verts)
        assert box.lmo(d) @ d == min(v @ d for v in corners)


@pytest.mark.parametrize("block", [1, 3])
def test_nuclear_lmo_matches_dense_svd(block):
    rng = np.random.default_rng(11 + block)
    for i in range(50):
        m, n = rng.integers(1, 21, size=2)
        d = rng.standard_normal((m, n))
        ball = NuclearBallSet(m, n, 2.5, seed=i, block=block)
        s = ball.lmo(d, call_index=i)
        expect = -2.5 * np.linalg.svd(d, compute_uv=False)[0]
        assert abs(np.vdot(s, d) - expect) <= 1e-6 * abs(expect)
        assert ball.residual(s) <= 1e-9


def test_nuclear_lmo_diag_like_example():
    d = np.array([[3.0, 0.1, 0.0], [0.1, -2.0, 0.0], [0.0, 0.0, 1.0]])
    s = NuclearBallSet(3, 3, 2.0).lmo(d, call_index=0)
    expect = -2.0 * np.linalg.svd(d, compute_uv=False)[0]
    assert abs(np.vdot(s, d) - expect) <= 1e-8 * abs(expect)


def test_nuclear_top_pair_sign_and_determinism():
    rng = np.random.default_rng(0)
    d = rng.standard_normal((6, 4))
    ball = NuclearBallSet(6, 4, 1.0, seed=3)
    u, sigma, v = ball.top_singular_pair(d, call_index=7)
    assert u @ d @ v == pytest.approx(sigma) and sigma > 0
    assert np.array_equal(ball.lmo(d, call_index=7), ball.lmo(d, call_index=7))


def test_nuclear_block_handles_near_degenerate_top_pair():
    rng = np.random.default_rng(1)
    U, _ = np.linalg.qr(rng.standard_normal((30, 30)))
    V, _ = np.linalg.qr(rng.standard_normal((20, 20)))
    sv = np.linspace(1.0, 0.1, 20)
    sv[:2] = [1.0, 1.0 - 1e-4]
    d = U[:, :20] @ np.diag(sv) @ V.T
    ball = NuclearBallSet(30, 20, 1.0, block=4, max_iters=2000)
    s = ball.lmo(d, call_index=0)
    assert abs(np.vdot(s, d) + 1.0) <= 1e-6


def test_nuclear_power_iteration_error_carries_residual():
    d = np.diag([1.0, 1.0 - 1e-9, 0.5])
    ball = NuclearBallSet(3, 3, 1.0, max_iters=2, tol=1e-16)
    with pytest.raises(LMOError) as info:
        ball.lmo(d, call_index=0)
    assert info.value.residual >= 0


@given(arrays(float, 3, elements=coords), arrays(float, 3, elements=coords))
def test_projections_are_nonexpansive(x, y):
    for xset in (BoxSet([-1, 0, -2], [1, 3, 2]), L2BallSet([0.5, 0.0, -1.0], 1.5)):
        px, py = xset.project(x), xset.project(y)
        assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12
        assert xset.contains(px)
        assert np.allclose(xset.project(px), px, atol=1e-12)


def test_nonexpansive_random_pairs():
    rng = np.random.default_rng(5)
    sets = [BoxSet(-np.ones(4), np.ones(4)), L2BallSet(np.zeros(4), 1.0)]
    for xset in sets:
        for _ in range(100):
            x, y = rng.standard_normal((2, 4)) * 3
            assert np.linalg.norm(xset.project(x) - xset.project(y)) <= \
                np.linalg.norm(x - y) + 1e-12


@given(arrays(float, 4, elements=coords.filter(lambda v: abs(v) > 1e-6)))
def test_lmo_outputs_are_members(d):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for xset in (L1BallSet(4, 2.0), BoxSet(-np.ones(4), np.ones(4)), L2BallSet(np.zeros(4), 2.0)):
            s = xset.lmo(d)
            assert xset.residual(s) <= 1e-9
            for v in xset.sample_points(np.random.default_rng(0), 20):
                assert s @ d <= v @ d + 1e-9


def test_sample_points_are_members():
    rng = np.random.default_rng(2)
    for xset in (BoxSet([0, 0], [1, 2]), L2BallSet([1, 1], 0.5), L1BallSet(3, 2.0),
                 NuclearBallSet(4, 3, 1.5)):
        for p in xset.sample_points(rng, 30):
            assert xset.residual(p) <= 1e-9
