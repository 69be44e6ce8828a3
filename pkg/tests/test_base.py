import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superfedosov.base import (
    BaseError,
    VForm,
    base_curvature,
    base_from_config,
    base_preset,
    check_fedosov_base,
    fgh,
    parallel_H_check,
    random_fedosov_base,
    random_general_base,
)
from superfedosov.sfields import random_form
from superfedosov.symalg import Form, Poly

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture(scope="module")
def torus():
    return base_preset("torus")


def test_torus_curvature_components(torus):
    f, g, h = fgh(torus)
    R = base_curvature(torus)
    assert tuple(R[0][1][0]) == (g, -2 * f)
    assert tuple(R[0][1][1]) == (2 * h, -g)
    assert torus.curvature == R


def test_torus_covariant_derivative_of_coframe(torus):
    a, b, c, d = torus.params.vars()
    dx1, dx2 = Form.dx(2, 0), Form.dx(2, 1)
    assert torus.nabla_form(0, dx1) == dx1.scale(b) + dx2.scale(c)
    assert torus.nabla_form(0, dx2) == dx1.scale(-a) + dx2.scale(-b)


def test_torus_is_fedosov_base(torus):
    assert check_fedosov_base(torus).fedosov
    assert parallel_H_check(torus)
    assert torus.is_torsion_free()


def _curv_oracle(B, i, j, k):
    """nabla_i nabla_j d_k - nabla_j nabla_i d_k on constant vectors."""
    m = B.m
    ek = [1 if t == k else 0 for t in range(m)]
    a = B.nabla_vec(i, B.nabla_vec(j, ek))
    b = B.nabla_vec(j, B.nabla_vec(i, ek))
    return tuple(x - y for x, y in zip(a, b))


@settings(max_examples=10, deadline=None)
@given(seeds, st.booleans())
def test_curvature_matches_commutator(seed, sym):
    B = random_general_base(3, random.Random(seed), symmetric_gamma=sym)
    R = base_curvature(B)
    for i in range(3):
        for j in range(3):
            for k in range(3):
                assert tuple(R[i][j][k]) == _curv_oracle(B, i, j, k)
                assert tuple(R[i][j][k]) == tuple(-x for x in R[j][i][k])


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_algebraic_bianchi_torsion_free(seed):
    B = random_general_base(3, random.Random(seed), symmetric_gamma=True)
    R = base_curvature(B)
    for i in range(3):
        for j in range(3):
            for k in range(3):
                s = [R[i][j][k][q] + R[j][k][i][q] + R[k][i][j][q] for q in range(3)]
                assert all(p.is_zero() for p in s)


@settings(max_examples=10, deadline=None)
@given(seeds, st.sampled_from([2, 4]))
def test_random_fedosov_base(seed, m):
    B = random_fedosov_base(m, random.Random(seed))
    assert check_fedosov_base(B).fedosov
    assert parallel_H_check(B)
    assert B.is_torsion_free()


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_nabla_is_even_derivation(seed):
    rng = random.Random(seed)
    B = random_general_base(3, rng, symmetric_gamma=False)
    u, v = random_form(3, rng), random_form(3, rng)
    i = rng.randrange(3)
    assert B.nabla_form(i, u.wedge(v)) == B.nabla_form(i, u).wedge(v) + u.wedge(B.nabla_form(i, v))


def test_nonsymmetric_gamma_detected():
    rng = random.Random(5)
    B = random_general_base(3, rng, symmetric_gamma=False)
    assert not B.is_torsion_free()


def test_numeric_torus_preset():
    B = base_preset("torus(1, 2, 3, 4)")
    assert B.gamma[1][0][0] == Poly.const(1)
    assert B.params.names == ()


def test_flat_preset_has_zero_curvature():
    B = base_preset("flat(4)")
    assert all(p.is_zero() for a in B.curvature for b in a for c in b for p in c)


def test_h_pair_wedges_in_argument_order(torus):
    X = VForm([Form.dx(2, 0), Form.zero(2)])
    Y = VForm([Form.zero(2), Form.dx(2, 1)])
    assert torus.H_pair(X, Y) == Form.dx(2, 0, 1)
    assert torus.H_pair(Y, X) == Form.dx(2, 0, 1)


@pytest.mark.parametrize(
    "cfg",
    [
        {"dim": 2, "gamma": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]], "H": [[0, 1], [-1, 0]], "extra": 1},
        {"dim": 2, "H": [[0, 1], [-1, 0]]},
        {"dim": 2, "gamma": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]], "H": [[1, 1], [1, 1]]},
        {"dim": 2, "gamma": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]], "H": [[0, 1], [1, 0]], "kind": "symplectic"},
        {"dim": 3, "gamma": [[[0] * 3] * 3] * 3, "H": [[0, 1, 0], [-1, 0, 0], [0, 0, 1]], "kind": "symplectic"},
        {"dim": 2, "gamma": [[["e", 0], [0, 0]], [[0, 0], [0, 0]]], "H": [[0, 1], [-1, 0]]},
        {"dim": 2, "gamma": [[[0, 0]], [[0, 0], [0, 0]]], "H": [[0, 1], [-1, 0]]},
    ],
)
def test_bad_base_configs(cfg):
    with pytest.raises(BaseError):
        base_from_config(cfg)


def test_unknown_preset():
    with pytest.raises(BaseError):
        base_preset("sphere")
