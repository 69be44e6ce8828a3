import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superfedosov.base import base_preset, random_fedosov_base
from superfedosov.curv import (
    adapted_frame,
    bianchi_check,
    curv_basic,
    curv_direct,
    dual_basis,
    pipeline_mismatches,
    r_tau,
    ricci,
    ricci_dual,
    ricci_matricial,
    render_flat,
    scalar,
)
from superfedosov.sconn import make_L_connection, make_symmetric_fedosov, sample_lcond_L, zero_connection
from superfedosov.sfields import INS, NABLA, SVec, omega_H, pair, random_form, random_svec
from superfedosov.symalg import Form

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _conn(seed, family):
    rng = random.Random(seed)
    B = base_preset("torus({}, {}, {}, {})".format(*(rng.randint(-2, 2) for _ in range(4))))
    if family == "symmetric":
        return make_symmetric_fedosov(B, seed)
    return make_L_connection(B, sample_lcond_L(B, seed))


families = st.sampled_from(["symmetric", "L"])


def test_flat_zero_connection_is_flat():
    C = zero_connection(base_preset("flat"))
    assert not pipeline_mismatches(C)
    assert all(curv_basic(C, k1, i, k2, j, k3, k).is_zero()
               for k1 in (0, 1) for k2 in (0, 1) for k3 in (0, 1)
               for i in range(2) for j in range(2) for k in range(2))
    assert scalar(C).value.is_zero()


@settings(max_examples=10, deadline=None)
@given(seeds, families)
def test_curvature_graded_skew(seed, family):
    C = _conn(seed, family)
    rng = random.Random(seed)
    p, q = rng.randint(0, 1), rng.randint(0, 1)
    X, Y, Z = random_svec(2, rng, p), random_svec(2, rng, q), random_svec(2, rng, rng.randint(0, 1))
    sign = 1 if p & q else -1
    assert curv_direct(C, X, Y, Z) == curv_direct(C, Y, X, Z).scale(sign)


@settings(max_examples=10, deadline=None)
@given(seeds, families)
def test_curvature_is_tensorial(seed, family):
    C = _conn(seed, family)
    rng = random.Random(seed)
    X = random_svec(2, rng, rng.randint(0, 1))
    pY = rng.randint(0, 1)
    Y = random_svec(2, rng, pY)
    Z = random_svec(2, rng, rng.randint(0, 1))
    a = random_form(2, rng, rng.randint(0, 2))
    assert curv_direct(C, X.lmul(a), Y, Z) == curv_direct(C, X, Y, Z).lmul(a)
    s = -1 if (a.parity() & (X.parity() + pY)) & 1 else 1
    assert curv_direct(C, X, Y, Z.lmul(a)) == curv_direct(C, X, Y, Z).lmul(a.scale(s))


@settings(max_examples=8, deadline=None)
@given(seeds, families)
def test_closed_forms_match_direct(seed, family):
    assert not pipeline_mismatches(_conn(seed, family))


def test_closed_forms_match_direct_symbolic_torus():
    B = base_preset("torus")
    assert not pipeline_mismatches(make_symmetric_fedosov(B, 2))
    assert not pipeline_mismatches(make_L_connection(B, sample_lcond_L(B, 2)))


def test_bianchi_symmetric_family():
    B = random_fedosov_base(4, random.Random(9))
    assert bianchi_check(make_symmetric_fedosov(B, 1)).ok


def test_dual_basis_duality():
    B = random_fedosov_base(4, random.Random(3))
    W = omega_H(B)
    frame = adapted_frame(B)
    duals = dual_basis(W, frame)
    basis = duals.even + duals.odd
    forms = duals.even_duals + duals.odd_duals
    for a, D in enumerate(basis):
        for b, f in enumerate(forms):
            assert f.pair(D) == Form.scalar(4, int(a == b))


def test_adapted_frame_is_symplectic():
    B = random_fedosov_base(4, random.Random(3))
    e = adapted_frame(B)
    # frame order e1, e2, f1, f2 with H(e_i, f_j) = delta_ij
    for i in range(4):
        for j in range(4):
            w = sum(e[i][p] * B.H[p][q] * e[j][q] for p in range(4) for q in range(4))
            assert w == (1 if j == i + 2 else -1 if i == j + 2 else 0)


@pytest.mark.parametrize("family", ["symmetric", "L"])
def test_ricci_methods_agree_m4(family):
    B = random_fedosov_base(4, random.Random(21))
    C = make_symmetric_fedosov(B, 4) if family == "symmetric" else make_L_connection(B, sample_lcond_L(B, 4))
    assert ricci_dual(C) == ricci_matricial(C)


def test_symmetric_scalar_vanishes_m4():
    B = random_fedosov_base(4, random.Random(8))
    C = make_symmetric_fedosov(B, 6)
    res = scalar(C)
    assert res.value.is_zero() and res.agree


@settings(max_examples=8, deadline=None)
@given(seeds, families)
def test_r_tau_skew(seed, family):
    C = _conn(seed, family)
    W = omega_H(C.base)
    rng = random.Random(seed)
    p, q = rng.randint(0, 1), rng.randint(0, 1)
    D1, D2 = random_svec(2, rng, p), random_svec(2, rng, q)
    D3, D4 = SVec.basic(2, NABLA, 0), SVec.basic(2, INS, 1)
    sign = 1 if p & q else -1
    assert r_tau(C, W, D1, D2, D3, D4) == r_tau(C, W, D2, D1, D3, D4).scale(sign)


def test_parallel_curvature_table():
    B = random_fedosov_base(2, random.Random(12))
    C = make_symmetric_fedosov(B, 2)
    W = omega_H(B)
    for x in range(2):
        for y in range(2):
            for z in range(2):
                v6 = curv_basic(C, INS, x, INS, y, INS, z)
                v1 = curv_basic(C, NABLA, x, NABLA, y, NABLA, z)
                for t in range(2):
                    assert pair(v6, SVec.ins(2, t), W).is_zero()
                    assert pair(v1, SVec.ins(2, t), W) == -B.H_pair(v1.a, SVec.ins(2, t).b)


def test_render_flat_basis():
    B = base_preset("torus")
    a = B.params.var("a")
    # H(d1, .) = dx2 and H(d2, .) = -dx1 on the torus.
    u = Form.dx(2, 1).scale(a) + Form.dx(2, 0).scale(3)
    assert render_flat(B, u) == "(a) d1^flat + (-3) d2^flat"
    assert render_flat(B, Form.zero(2)) == "0"
