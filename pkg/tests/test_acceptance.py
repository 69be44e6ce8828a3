"""Acceptance criteria, one test per criterion.

Every comparison is an exact symbolic equality. Each test emits a single
``[PASS]``/``[FAIL]`` line (collected in the pytest terminal summary); running
this file directly prints the same lines without pytest.
"""

from __future__ import annotations

import random
import sys
import time

import pytest

from superfedosov import gla
from superfedosov.base import (
    base_curvature,
    base_preset,
    fgh,
    parallel_H_check,
    random_general_base,
)
from superfedosov.cli import instance_connection, main, resolve_connection
from superfedosov.curv import (
    CASES,
    bianchi_check,
    block_identity_check,
    curv_closed_form,
    curv_direct,
    flat_coordinates,
    l_structure_check,
    ric_antisym_check,
    ricci,
    scalar,
)
from superfedosov.sconn import (
    L_as_identity_times,
    L_defining_relation_holds,
    canonical_L,
    check_L_condition,
    is_fedosov,
    perturb,
    reference_Q_diagonal,
)
from superfedosov.sfields import SVec, graded_d_of_lambda, omega_H
from superfedosov.symalg import Form, ParamSpace

SEED = 7
N_SYMMETRIC = 100
N_PIPELINE = 50
N_L = 50
N_FEDOSOV = 50
N_OMEGA = 20
N_GLA = 100

TORUS = ParamSpace("abcd")

# Scal in the d-flat basis of the torus, reference values.
SCAL_FLAT_1 = TORUS.parse("4*a*b^2 - 4*b^3 + 4*(a*b - a^2)*c + 3*(c^2*d - b*d^2)")
SCAL_FLAT_2 = -TORUS.parse("4*a*b^2 + 4*(b^2 - a^2)*c - 4*a*c^2 + (b*c - 4*c^2)*d + (4*b - a)*d^2")

_POOLS: dict = {}
_RICCI: dict = {}


def _pool(family: str, n: int) -> list:
    key = (family, n)
    if key not in _POOLS:
        bases = _POOLS.setdefault("bases", {})
        _POOLS[key] = [instance_connection(family, SEED, i, bases) for i in range(n)]
    return _POOLS[key]


def symmetric_pool(n: int = N_SYMMETRIC) -> list:
    return _pool("symmetric", N_SYMMETRIC)[:n]


def l_pool(n: int = N_L) -> list:
    return _pool("L", max(n, N_L))[:n]


def _ricci(C):
    if id(C) not in _RICCI:
        _RICCI[id(C)] = ricci(C)
    return _RICCI[id(C)]


def _describe(pool) -> str:
    m2 = sum(1 for C in pool if C.m == 2)
    return f"{len(pool)} instances, {m2} torus, {len(pool) - m2} m=4"


# -- criteria -------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    B = base_preset("torus")
    res = scalar(resolve_connection(None, B, 0))
    elapsed = time.perf_counter() - t0
    got = flat_coordinates(B, res.value) if not (res.value.degrees() - {1}) else None
    ok = got == [SCAL_FLAT_1, SCAL_FLAT_2] and elapsed < 5
    return ok, f"Scal = {res.value.render()}; expected flat coefficients ({SCAL_FLAT_1.render()}, {SCAL_FLAT_2.render()}); {elapsed:.2f}s"


def criterion_2():
    t0 = time.perf_counter()
    B = base_preset("torus")
    f, g, h = fgh(B)
    R = base_curvature(B)
    elapsed = time.perf_counter() - t0
    ok = tuple(R[0][1][0]) == (g, -2 * f) and tuple(R[0][1][1]) == (2 * h, -g) and elapsed < 1
    return ok, f"Curv(d1,d2)d1 = {[p.render() for p in R[0][1][0]]}, Curv(d1,d2)d2 = {[p.render() for p in R[0][1][1]]}; {elapsed:.3f}s"


def criterion_3():
    B = base_preset("torus")
    L = canonical_L(B)
    relation = L_defining_relation_holds(B, L)
    Q = L_as_identity_times(L)
    q11, q22 = reference_Q_diagonal(B)
    diag = Q is not None and Q[0][0] == q11 and Q[1][1] == q22
    lcond = check_L_condition(B, L)
    ok = relation and diag and lcond
    qtxt = "not of the form Id x Q" if Q is None else str([[q.render() for q in r] for r in Q])
    return ok, (f"defining relation {'holds' if relation else 'fails'}; Q = {qtxt}; "
                f"reference diagonal ({q11.render()}, {q22.render()}) {'matches' if diag else 'does not match'}; "
                f"check_L_condition {'passes' if lcond else 'fails'}")


def criterion_4():
    t0 = time.perf_counter()
    pool = symmetric_pool()
    bad = [i for i, C in enumerate(pool) if not scalar(C, ric=_ricci(C)).value.is_zero()]
    elapsed = time.perf_counter() - t0
    ok = not bad and len(pool) >= 100 and elapsed < 120
    return ok, f"{_describe(pool)}; nonzero scalar on {len(bad)}; {elapsed:.1f}s"


def _pipeline_bad(C) -> int:
    m = C.m
    bad = 0
    for case, (k1, k2, k3) in CASES.items():
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    direct = curv_direct(C, SVec.basic(m, k1, i), SVec.basic(m, k2, j), SVec.basic(m, k3, k))
                    if direct != curv_closed_form(C, case, i, j, k):
                        bad += 1
    return bad


def criterion_5():
    t0 = time.perf_counter()
    pool = symmetric_pool(N_PIPELINE) + l_pool(N_PIPELINE)
    bad = [(i, n) for i, C in enumerate(pool) if (n := _pipeline_bad(C))]
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 300
    return ok, f"{N_PIPELINE} symmetric + {N_PIPELINE} L instances; mismatching instances {len(bad)}; {elapsed:.1f}s"


def criterion_6():
    sym = symmetric_pool(N_PIPELINE)
    lp = l_pool(N_PIPELINE)
    bs = [bianchi_check(C).details["failures"] for C in sym]
    bl = [bianchi_check(C).details["failures"] for C in lp]
    ok = not any(bs) and not any(bl)
    return ok, (f"symmetric family: {sum(1 for x in bs if x)}/{len(bs)} instances with failing triples; "
                f"L family: {sum(1 for x in bl if x)}/{len(bl)} instances with failing triples "
                f"({sum(bl)} triples)")


def criterion_7():
    pool = symmetric_pool()
    ident = {1: 0, 2: 0, 3: 0}
    anti = 0
    nonzero = 0
    for C in pool:
        rep = block_identity_check(C)
        for k in ident:
            ident[k] += not rep.details[f"identity{k}"]
        ric = _ricci(C)
        anti += not ric_antisym_check(C, ric).ok
        nonzero += not scalar(C, ric=ric).value.is_zero()
    ok = not any(ident.values()) and not anti and not nonzero
    return ok, (f"{_describe(pool)}; identity failures (1,2,3) = ({ident[1]},{ident[2]},{ident[3]}); "
                f"S = -T^t fails on {anti}; scalar nonzero on {nonzero}")


def criterion_8():
    pool = l_pool()
    lcond = sum(1 for C in pool if check_L_condition(C.base, C.pack["K1"]))
    t_bad = s_bad = 0
    for C in pool:
        rep = l_structure_check(C, _ricci(C))
        t_bad += not rep.details["T_zero"]
        s_bad += not rep.details["S_formula"]
    ok = len(pool) >= 50 and lcond == len(pool) and not t_bad and not s_bad
    return ok, f"{_describe(pool)}; L condition holds on {lcond}; T nonzero on {t_bad}; S formula fails on {s_bad}"


def criterion_9():
    valid = symmetric_pool(N_FEDOSOV)
    perturbed = [perturb(C, seed=1000 + i) for i, C in enumerate(valid)]
    disagree = 0
    valid_ok = 0
    perturbed_rejected = 0
    for C in valid:
        rep = is_fedosov(C)
        disagree += not rep.details["agree"]
        valid_ok += rep.ok
    for C in perturbed:
        rep = is_fedosov(C)
        disagree += not rep.details["agree"]
        perturbed_rejected += not rep.ok
    ok = disagree == 0 and valid_ok == len(valid)
    return ok, (f"{len(valid)} valid + {len(perturbed)} perturbed; disagreements {disagree}; "
                f"valid accepted {valid_ok}; perturbed rejected {perturbed_rejected}")


def criterion_10():
    rng = random.Random(f"omega:{SEED}")
    bases = [base_preset("torus")]
    for i in range(N_OMEGA):
        bases.append(random_general_base(2 if i % 2 else 4, rng, symmetric_gamma=i % 4 < 2))
    bad = [B.name for B in bases if graded_d_of_lambda(B) != omega_H(B)]
    nonparallel = sum(1 for B in bases if not parallel_H_check(B))
    ok = not bad and nonparallel > 0
    return ok, f"torus + {N_OMEGA} random bases ({nonparallel} with non-parallel H); mismatches {len(bad)}"


def _random_const_block(rng, n, m):
    while True:
        rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        if gla._const_inverse(rows) is not None:
            return gla.from_polys(rows, m)


def _random_homogeneous_block(rng, n, m, parity):
    degs = [d for d in range(m + 1) if d % 2 == parity]
    return [
        [sum((Form.dx(m, *sorted(rng.sample(range(m), d))).scale(rng.randint(-2, 2)) for d in degs),
             Form.zero(m)) for _ in range(n)]
        for _ in range(n)
    ]


def criterion_11():
    rng = random.Random(f"gla:{SEED}")
    inv_bad = {0: 0, 1: 0}
    tr_bad = 0
    rt_bad = 0
    for k in range(N_GLA):
        n, m = rng.choice((2, 3)), 3
        parity = k % 2
        # Invertible homogeneous blocks: constant entries carrying the parity tag.
        A = _random_const_block(rng, n, m)
        sign = -1 if parity else 1
        lhs = gla.invert(gla.transpose(A))
        rhs = [[x.scale(sign) for x in row] for row in gla.transpose(gla.invert(A))]
        inv_bad[parity] += not gla.blocks_equal(lhs, rhs)
        P = _random_homogeneous_block(rng, n, m, rng.randint(0, 1))
        Q = _random_homogeneous_block(rng, n, m, rng.randint(0, 1))
        tr_bad += gla.trace(gla.matmul(gla.transpose(P), Q)) != gla.trace(gla.matmul(P, gla.transpose(Q)))
        Ablk = _random_homogeneous_block(rng, n, m, parity)
        M = gla.SuperMatrix(Ablk, _random_const_block(rng, n, m), _random_const_block(rng, n, m),
                            gla.zeros(n, m), parity)
        Mi = gla.block_inverse(M)
        ident = gla.SuperMatrix.identity(n, m)
        rt_bad += not ((M @ Mi) == ident and (Mi @ M) == ident)
    ok = not inv_bad[0] and not inv_bad[1] and not tr_bad and not rt_bad
    return ok, (f"{N_GLA} blocks; (A^t)^-1 = (-1)^|A| (A^-1)^t fails on {inv_bad[0]} even / {inv_bad[1]} odd; "
                f"Tr identity fails on {tr_bad}; block_inverse round-trip fails on {rt_bad}")


CRITERIA = {
    1: ("torus scalar formula", criterion_1),
    2: ("torus base curvature", criterion_2),
    3: ("canonical L", criterion_3),
    4: ("vanishing theorem", criterion_4),
    5: ("pipeline equivalence", criterion_5),
    6: ("bianchi", criterion_6),
    7: ("curvature block identities and S = -T^t", criterion_7),
    8: ("L-family Ricci structure", criterion_8),
    9: ("fedosov equivalence", criterion_9),
    10: ("omega_H construction", criterion_10),
    11: ("graded linear algebra identities", criterion_11),
}


def run_criterion(n: int):
    name, fn = CRITERIA[n]
    ok, detail = fn()
    return ok, f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {name} ({detail})"


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_acceptance(n, record):
    ok, line = run_criterion(n)
    record(line)
    assert ok, line


def test_cli_scalar_torus_output_is_byte_stable(capsys):
    outs = []
    for _ in range(2):
        assert main(["scalar", "--preset", "torus", "--format", "json"]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


if __name__ == "__main__":
    results = [run_criterion(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
