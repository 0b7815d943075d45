import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from bsdsqueeze.errors import PreconditionError, UnsupportedOperation
from bsdsqueeze.kobayashi import (
    RemovedSet,
    ball_distance,
    dist_from_origin,
    dist_to_set,
    product_distance,
)
from bsdsqueeze.phjts import CartanFactor, haar_unitary
from bsdsqueeze.symdomain import DomainSpec

B2 = DomainSpec.ball(2)
B3 = DomainSpec.ball(3)


def rand_ball(rng, n, size, radius=0.95):
    g = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * radius * rng.random((size, 1)) ** (1 / (2 * n))


def pseudo_hyperbolic(z, w):
    # independent oracle: Mobius automorphism of the ball moving z to 0
    z, w = np.asarray(z, complex), np.asarray(w, complex)
    nz2 = np.vdot(z, z).real
    if nz2 == 0:
        return np.linalg.norm(w)
    pz = np.vdot(z, w) / nz2 * z
    qz = w - pz
    s = np.sqrt(1 - nz2)
    phi = (z - pz - s * qz) / (1 - np.vdot(z, w))
    return np.linalg.norm(phi)


def test_dist_from_origin_examples():
    assert dist_from_origin(B2, [0, 0]) == 0
    assert np.isclose(dist_from_origin(B2, [0.3, 0.4j]), 0.5493061443340549)  # atanh(1/2)
    assert np.isclose(dist_from_origin(DomainSpec.polydisk(2), [0.3, 0.6]), np.arctanh(0.6))
    with pytest.raises(PreconditionError):
        dist_from_origin(B2, [1.0, 0])


def test_ball_distance_examples(rng):
    z = rand_ball(rng, 3, 1)[0]
    assert ball_distance(z, z) == 0
    w = rand_ball(rng, 3, 1)[0]
    assert abs(ball_distance(np.zeros(3), w) - dist_from_origin(B3, w)) < 1e-14
    assert np.isclose(ball_distance(z, w), np.arctanh(pseudo_hyperbolic(z, w)), atol=1e-12)


def test_ball_metric_axioms(rng):
    pts = rand_ball(rng, 3, 300)
    z, w, u = pts[:100], pts[100:200], pts[200:]
    dzw = np.array([ball_distance(a, b) for a, b in zip(z, w)])
    dwz = np.array([ball_distance(b, a) for a, b in zip(z, w)])
    dzu = np.array([ball_distance(a, c) for a, c in zip(z, u)])
    duw = np.array([ball_distance(c, b) for c, b in zip(u, w)])
    assert np.allclose(dzw, dwz, atol=1e-12)
    assert np.all(dzw <= dzu + duw + 1e-12)
    assert np.all(dzw > 0)


def test_ball_unitary_invariance(rng):
    U = haar_unitary(3, rng)
    for z, w in zip(rand_ball(rng, 3, 20), rand_ball(rng, 3, 20)):
        assert abs(ball_distance(z, w) - ball_distance(U @ z, U @ w)) < 1e-12


def test_ball_distance_batched(rng):
    z = rand_ball(rng, 2, 1)[0]
    ws = rand_ball(rng, 2, 10)
    assert np.allclose(ball_distance(z, ws), [ball_distance(z, w) for w in ws])


def test_product_distance(rng):
    dom = DomainSpec.polydisk(2)
    assert np.isclose(product_distance(dom, [0, 0], [0.5, 0.5]), np.arctanh(0.5))
    mixed = DomainSpec.of(CartanFactor.type_i(1, 2), CartanFactor.type_i(1, 1))
    for _ in range(20):
        z = np.concatenate([rand_ball(rng, 2, 1)[0], rand_ball(rng, 1, 1)[0]])
        w = np.concatenate([rand_ball(rng, 2, 1)[0], rand_ball(rng, 1, 1)[0]])
        assert np.isclose(product_distance(mixed, z, w), product_distance(mixed, w, z), atol=1e-12)
        want = max(ball_distance(z[:2], w[:2]), ball_distance(z[2:], w[2:]))
        assert np.isclose(product_distance(mixed, z, w), want)
    z, w = rand_ball(rng, 2, 2)
    assert product_distance(B2, z, w) == ball_distance(z, w)


def test_product_distance_higher_rank():
    dom = DomainSpec.of(CartanFactor.type_i(2, 2))
    z = np.array([0.5, 0, 0, 0.2])
    assert np.isclose(product_distance(dom, z, np.zeros(4)), np.arctanh(0.5))
    with pytest.raises(UnsupportedOperation):
        product_distance(dom, z, np.array([0.1, 0.1, 0, 0]))


def test_singleton_set(rng):
    for z in rand_ball(rng, 2, 10):
        env = dist_to_set(B2, z, RemovedSet.from_points(B2, [[0, 0]]), levels=2)
        assert np.isclose(env.values[0], np.arctanh(np.linalg.norm(z)), atol=1e-14)


def test_degenerate_set():
    env = dist_to_set(B2, [0.1, 0.2], RemovedSet.from_points(B2, [[0.1, 0.2]]))
    assert env.degenerate and env.value == 0


def test_slice_envelope_against_grid_oracle():
    z = np.array([0.3 + 0.1j, 0.4 - 0.2j])
    # oracle: brute-force minimization of the ball distance over a polar grid of the slice
    r = np.linspace(0, 0.999, 1500)
    t = np.linspace(0, 2 * np.pi, 721)
    grid = (r[:, None] * np.exp(1j * t[None, :])).ravel()
    pts = np.stack([grid, np.zeros_like(grid)], axis=1)
    oracle = float(np.min(ball_distance(z, pts)))
    closed = np.arctanh(abs(z[1]) / np.sqrt(1 - abs(z[0]) ** 2))
    assert abs(oracle - closed) < 1e-5
    env = dist_to_set(B2, z, RemovedSet.slice(B2, 1, samples=256), levels=4)
    assert all(a >= b for a, b in zip(env.values, env.values[1:]))
    assert env.value >= closed - 1e-12
    assert env.value - closed < 1e-3


def test_closed_disc_in_disc():
    disc = DomainSpec.polydisk(1)
    for x in (0.4, 0.6, 0.9):
        # oracle: 1-d minimization of the Poincare distance over the circle |w| = 1/4
        def f(theta):
            return np.arctanh(abs((x - 0.25 * np.exp(1j * theta)) / (1 - x * 0.25 * np.exp(-1j * theta))))
        oracle = minimize_scalar(f, bounds=(-1, 1), method="bounded", options={"xatol": 1e-12}).fun
        s = RemovedSet.closed_ball(disc, [0], 0.25, samples=256)
        env = dist_to_set(disc, [x], s, levels=3)
        assert env.value >= oracle - 1e-12
        assert env.value - oracle < 1e-4


def test_levels_are_nested():
    s = RemovedSet.slice(B2, 0, samples=64)
    a, b = s.level_points(0), s.level_points(1)
    # every kept point of level 0 appears among the level-1 points
    assert all(np.any(np.all(np.isclose(b, p), axis=1)) for p in a)


def test_removed_set_json():
    s = RemovedSet.from_dict(B2, {"kind": "slice", "equation": "z_n=0", "samples": 64})
    assert s.description["equation"] == "z_2=0"
    s = RemovedSet.from_dict(B2, {"kind": "points", "data": [[0.1, 0, 0, 0.2]]})
    assert np.allclose(s.points, [[0.1, 0.2j]])
    with pytest.raises(PreconditionError):
        RemovedSet.from_dict(B2, {"kind": "slice", "equation": "z_1+z_2=0"})
    with pytest.raises(PreconditionError):
        RemovedSet.from_points(B2, [[1.0, 0]])
    with pytest.raises(PreconditionError):
        RemovedSet.slice(B2, 0, samples=100).level_points(0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0, 2 * np.pi), st.integers(0, 1000))
def test_envelope_monotone(radius, angle, seed):
    z = np.array([radius * np.exp(1j * angle), 0.2])
    env = dist_to_set(B2, z, RemovedSet.slice(B2, 0, samples=16, seed=seed), levels=3)
    assert all(a >= b for a, b in zip(env.values, env.values[1:]))
