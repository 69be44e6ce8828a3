import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superfedosov.base import VForm, base_preset, fgh, random_fedosov_base
from superfedosov.sconn import (
    PACK_NAMES,
    GConn,
    L_as_identity_times,
    L_defining_relation_holds,
    SConnError,
    TensorPack,
    canonical_L,
    check_L_condition,
    is_fedosov,
    is_symmetric,
    make_L_connection,
    make_symmetric_fedosov,
    pack_preset,
    perturb,
    sample_lcond_L,
)
from superfedosov.sfields import INS, NABLA, SVec, act, random_form, random_svec
from superfedosov.symalg import Form

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture(scope="module")
def torus():
    return base_preset("torus")


@pytest.fixture(scope="module")
def m4():
    return random_fedosov_base(4, random.Random(11))


def _numeric_base(seed):
    rng = random.Random(seed)
    if rng.random() < 0.5:
        return base_preset("torus({}, {}, {}, {})".format(*(rng.randint(-2, 2) for _ in range(4))))
    return random_fedosov_base(2, rng)


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from(["symmetric", "L"]))
def test_connection_axioms(seed, family):
    B = _numeric_base(seed)
    C = make_symmetric_fedosov(B, seed) if family == "symmetric" else make_L_connection(B, sample_lcond_L(B, seed))
    rng = random.Random(seed)
    p1, p2 = rng.randint(0, 1), rng.randint(0, 1)
    D1, D2, E = random_svec(2, rng, p1), random_svec(2, rng, p2), random_svec(2, rng, p2)
    a = random_form(2, rng, rng.randint(0, 2))
    assert C.apply(D1, D2 + E) == C.apply(D1, D2) + C.apply(D1, E)
    assert C.apply(D1.lmul(a), D2) == C.apply(D1, D2).lmul(a)
    s = -1 if (a.parity() & p1) else 1
    assert C.apply(D1, D2.lmul(a)) == D2.lmul(act(B, D1, a)) + C.apply(D1, D2).lmul(a.scale(s))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_even_connection_preserves_parity(seed):
    B = _numeric_base(seed)
    C = make_symmetric_fedosov(B, seed)
    rng = random.Random(seed)
    p, q = rng.randint(0, 1), rng.randint(0, 1)
    out = C.apply(random_svec(2, rng, p), random_svec(2, rng, q))
    assert out.is_zero() or out.parity() == (p + q) & 1


def test_symmetric_family_torus(torus):
    C = make_symmetric_fedosov(torus, 3)
    sym, fed = is_symmetric(C), is_fedosov(C)
    assert sym.ok and sym.details["agree"]
    assert fed.ok and fed.details["agree"]
    assert C.pack.is_zero("K1") and C.pack.is_zero("K2") and C.pack.is_zero("L3")


def test_symmetric_family_m4(m4):
    C = make_symmetric_fedosov(m4, 5)
    assert is_symmetric(C).ok and is_fedosov(C).ok
    assert all(C.torsion(SVec.basic(4, k1, i), SVec.basic(4, k2, j)).is_zero()
               for k1 in (NABLA, INS) for k2 in (NABLA, INS) for i in range(4) for j in range(4))


@pytest.mark.parametrize("seed", range(6))
def test_perturbation_detected_consistently(m4, seed):
    C = perturb(make_symmetric_fedosov(m4, 5), seed)
    sym, fed = is_symmetric(C), is_fedosov(C)
    assert sym.details["agree"] and fed.details["agree"]
    assert not (sym.ok and fed.ok)


def test_sampled_L_satisfies_condition(m4):
    for seed in range(4):
        L = sample_lcond_L(m4, seed)
        assert check_L_condition(m4, L)


def test_L_connection_torsion_witness(torus):
    L = sample_lcond_L(torus, 2)
    C = make_L_connection(torus, L)
    assert not is_symmetric(C).ok
    for i in range(2):
        for j in range(2):
            assert C.torsion(SVec.nabla(2, i), SVec.ins(2, j)) == SVec.nabla_of(L[i][j])


def test_canonical_L_on_torus_is_identity_times_Q(torus):
    L = canonical_L(torus)
    f, g, h = fgh(torus)
    assert L_defining_relation_holds(torus, L)
    assert L_as_identity_times(L) == [[2 * f, g], [g, 2 * h]]


def test_pack_parity_validated():
    m = 2
    bad = tuple(tuple(VForm([Form.dx(m, 0), Form.zero(m)]) for _ in range(m)) for _ in range(m))
    with pytest.raises(SConnError):
        TensorPack(m, {"K0": bad})
    with pytest.raises(SConnError):
        TensorPack(m, {"K9": bad})


def test_pack_json_round_trip(torus):
    C = make_symmetric_fedosov(torus, 1)
    obj = json.loads(json.dumps(C.pack.to_json()))
    assert set(obj) == set(PACK_NAMES)
    assert TensorPack.from_json(obj, 2, torus.params) == C.pack


@pytest.mark.parametrize("name", ["zero", "symmetric-random(4)", "L-connection", "L-connection(zero)",
                                  "L-connection(random:3)"])
def test_pack_presets(torus, name):
    assert isinstance(pack_preset(name, torus), GConn)


def test_unknown_pack_preset(torus):
    with pytest.raises(SConnError):
        pack_preset("bogus", torus)
