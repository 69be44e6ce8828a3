"""Graded connections given by tensor packs, torsion, and Fedosov checks.

On frame derivations the connection reads

    nabla_{nabla_X} nabla_Y = nabla_{nabla_X Y + K0(X,Y)} + i_{L0(X,Y)}
    nabla_{nabla_X} i_Y     = nabla_{K1(X,Y)} + i_{nabla_X Y + L1(X,Y)}
    nabla_{i_X} nabla_Y     = nabla_{K2(X,Y)} + i_{L2(X,Y)}
    nabla_{i_X} i_Y         = nabla_{K3(X,Y)} + i_{L3(X,Y)}

and is extended to form coefficients by

    nabla_{a D1} D2 = a nabla_{D1} D2
    nabla_{D1}(b D2) = D1(b) D2 + (-1)^{|b||D1|} b nabla_{D1} D2.

Pack tensors accept vector-valued forms in the second slot by left wedge,
``T(X, w (x) V) = w ^ T(X, V)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import gla
from .base import Base, VForm
from .sfields import (
    INS,
    NABLA,
    STwoForm,
    SVec,
    act,
    act_basic,
    bracket,
    grade_involution,
    omega_H,
    pair,
)
from .symalg import Form, ParamSpace, Poly

PACK_NAMES = ("K0", "L0", "K1", "L1", "K2", "L2", "K3", "L3")
# Z2-degree each tensor must carry for the connection to be even.
PACK_PARITY = {"K0": 0, "L0": 1, "K1": 1, "L1": 0, "K2": 1, "L2": 0, "K3": 0, "L3": 1}


class SConnError(ValueError):
    pass


def _zero_table(m: int) -> tuple:
    return tuple(tuple(VForm.zero(m) for _ in range(m)) for _ in range(m))


def table_from(m: int, f) -> tuple:
    return tuple(tuple(f(i, j) for j in range(m)) for i in range(m))


@dataclass(frozen=True)
class TensorPack:
    m: int
    tensors: dict = field(hash=False)

    def __post_init__(self):
        for name in self.tensors:
            if name not in PACK_NAMES:
                raise SConnError(f"unknown pack tensor {name!r}")
        full = {name: self.tensors.get(name) or _zero_table(self.m) for name in PACK_NAMES}
        for name, tab in full.items():
            if len(tab) != self.m or any(len(r) != self.m for r in tab):
                raise SConnError(f"{name} must be an {self.m}x{self.m} table")
            for row in tab:
                for v in row:
                    if not isinstance(v, VForm) or v.m != self.m:
                        raise SConnError(f"{name} entries must be VForms of dimension {self.m}")
                    if any((d & 1) != PACK_PARITY[name] for d in v.degrees()):
                        raise SConnError(
                            f"{name} entries must have {'odd' if PACK_PARITY[name] else 'even'} form degree "
                            "for an even connection"
                        )
        object.__setattr__(self, "tensors", full)

    @classmethod
    def zero(cls, m: int) -> "TensorPack":
        return cls(m, {})

    def __getitem__(self, name: str) -> tuple:
        return self.tensors[name]

    def replace(self, **kw) -> "TensorPack":
        t = dict(self.tensors)
        t.update(kw)
        return TensorPack(self.m, t)

    def is_zero(self, name: str) -> bool:
        return all(v.is_zero() for row in self.tensors[name] for v in row)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorPack):
            return NotImplemented
        return self.m == other.m and all(self.tensors[n] == other.tensors[n] for n in PACK_NAMES)

    def to_json(self) -> dict:
        return {name: [[v.to_json()["vform"] for v in row] for row in self.tensors[name]] for name in PACK_NAMES}

    @classmethod
    def from_json(cls, obj: dict, m: int, space: ParamSpace) -> "TensorPack":
        if not isinstance(obj, dict):
            raise SConnError("pack must be an object")
        tensors = {}
        for name, rows in obj.items():
            if name not in PACK_NAMES:
                raise SConnError(f"unknown pack tensor {name!r}")
            if not isinstance(rows, list) or len(rows) != m or any(not isinstance(r, list) or len(r) != m for r in rows):
                raise SConnError(f"{name} must be an {m}x{m} table")
            tensors[name] = tuple(tuple(VForm.from_json(v, m, space) for v in r) for r in rows)
        return cls(m, tensors)


# -- tensor evaluation on vector-valued forms --------------------------------

def t_second(T: tuple, i: int, W: VForm, sigma: bool = False) -> VForm:
    """T(d_i, W) with W = sum_l W[l] (x) d_l, left wedge; sigma inserts (-1)^{|W[l]|}."""
    m = W.m
    acc = VForm.zero(m)
    for l in range(m):
        w = W[l]
        if w.is_zero() or T[i][l].is_zero():
            continue
        acc = acc + T[i][l].lwedge(grade_involution(w) if sigma else w)
    return acc


def t_first(T: tuple, W: VForm, j: int) -> VForm:
    """T(W, d_j) = sum_l W[l] ^ T(d_l, d_j)."""
    m = W.m
    acc = VForm.zero(m)
    for l in range(m):
        if W[l].is_zero() or T[l][j].is_zero():
            continue
        acc = acc + T[l][j].lwedge(W[l])
    return acc


def t_first_vf(T: tuple, W: VForm, Z: VForm, sigma: bool = False) -> VForm:
    """T(W, Z) with both slots vector-valued forms (first slot outermost)."""
    m = W.m
    acc = VForm.zero(m)
    for l in range(m):
        if W[l].is_zero():
            continue
        acc = acc + t_second(T, l, Z, sigma).lwedge(W[l])
    return acc


class GConn:
    """Graded connection determined by a base and a tensor pack."""

    def __init__(self, base: Base, pack: TensorPack, name: str = "custom"):
        if base.m != pack.m:
            raise SConnError("base and pack dimensions differ")
        self.base = base
        self.pack = pack
        self.name = name
        self._basic: dict = {}

    @property
    def m(self) -> int:
        return self.base.m

    def basic(self, k1: int, l1: int, k2: int, l2: int) -> SVec:
        key = (k1, l1, k2, l2)
        v = self._basic.get(key)
        if v is None:
            B, P = self.base, self.pack
            if k1 == NABLA and k2 == NABLA:
                v = SVec(B.gamma_vform(l1, l2) + P["K0"][l1][l2], P["L0"][l1][l2])
            elif k1 == NABLA:
                v = SVec(P["K1"][l1][l2], B.gamma_vform(l1, l2) + P["L1"][l1][l2])
            elif k2 == NABLA:
                v = SVec(P["K2"][l1][l2], P["L2"][l1][l2])
            else:
                v = SVec(P["K3"][l1][l2], P["L3"][l1][l2])
            self._basic[key] = v
        return v

    def apply(self, D1: SVec, D2: SVec) -> SVec:
        """nabla_{D1} D2."""
        if D1.m != self.m or D2.m != self.m:
            raise SConnError("dimension mismatch")
        B, m = self.base, self.m
        acc = SVec.zero(m)
        for al, ka, la in D1.terms():
            for be, kb, lb in D2.terms():
                t = act_basic(B, ka, la, be)
                if not t.is_zero():
                    acc = acc + SVec.basic(m, kb, lb).lmul(al.wedge(t))
                v = self.basic(ka, la, kb, lb)
                if not v.is_zero():
                    b_ = grade_involution(be) if ka == INS else be
                    acc = acc + v.lmul(al.wedge(b_))
        return acc

    def torsion(self, D1: SVec, D2: SVec) -> SVec:
        s = -1 if (D1.parity() & D2.parity()) else 1
        x, y = self.apply(D1, D2), self.apply(D2, D1)
        return (x - y if s == 1 else x + y) - bracket(self.base, D1, D2)

    def curvature(self, D1: SVec, D2: SVec, D3: SVec) -> SVec:
        s = -1 if (D1.parity() & D2.parity()) else 1
        x = self.apply(D1, self.apply(D2, D3))
        y = self.apply(D2, self.apply(D1, D3))
        return (x - y if s == 1 else x + y) - self.apply(bracket(self.base, D1, D2), D3)

    def is_even(self) -> bool:
        m = self.m
        for k1 in (0, 1):
            for k2 in (0, 1):
                for i in range(m):
                    for j in range(m):
                        v = self.basic(k1, i, k2, j)
                        if not v.is_zero() and v.parities() != {(k1 + k2) & 1}:
                            return False
        return True

    def to_json(self) -> dict:
        return {"name": self.name, "base": self.base.to_json(), "pack": self.pack.to_json()}


# -- symmetry ----------------------------------------------------------------

@dataclass
class Report:
    name: str
    ok: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"check": self.name, "ok": self.ok, **self.details}


def _label(kind: int, l: int) -> str:
    return f"{'nabla' if kind == NABLA else 'i'}_{l + 1}"


def torsion_violations(C: GConn) -> list:
    m = C.m
    out = []
    for k1 in (0, 1):
        for k2 in (0, 1):
            for i in range(m):
                for j in range(m):
                    t = C.torsion(SVec.basic(m, k1, i), SVec.basic(m, k2, j))
                    if not t.is_zero():
                        out.append(((_label(k1, i), _label(k2, j)), t))
    return out


def symmetry_conditions(C: GConn) -> dict:
    """Closed-form symmetry conditions, each a list of violating (X, Y) pairs.

    K0 symmetric; L0(X,Y) - L0(Y,X) = -Curv(X,Y); K1(X,Y) = K2(Y,X);
    L1(X,Y) = L2(Y,X); K3 and L3 antisymmetric.
    """
    B, P, m = C.base, C.pack, C.m
    res = {k: [] for k in ("K0 symmetric", "L0 antisymmetric part = -Curv", "K1(X,Y) = K2(Y,X)",
                           "L1(X,Y) = L2(Y,X)", "K3 antisymmetric", "L3 antisymmetric")}
    for i in range(m):
        for j in range(m):
            pairs = [
                ("K0 symmetric", P["K0"][i][j] - P["K0"][j][i] + B.gamma_vform(i, j) - B.gamma_vform(j, i)),
                ("L0 antisymmetric part = -Curv", P["L0"][i][j] - P["L0"][j][i] + B.curv_vform(i, j)),
                ("K1(X,Y) = K2(Y,X)", P["K1"][i][j] - P["K2"][j][i]),
                ("L1(X,Y) = L2(Y,X)", P["L1"][i][j] - P["L2"][j][i]),
                ("K3 antisymmetric", P["K3"][i][j] + P["K3"][j][i]),
                ("L3 antisymmetric", P["L3"][i][j] + P["L3"][j][i]),
            ]
            for name, v in pairs:
                if not v.is_zero():
                    res[name].append((i + 1, j + 1))
    return res


def is_symmetric(C: GConn) -> Report:
    direct = torsion_violations(C)
    closed = symmetry_conditions(C)
    closed_ok = not any(closed.values())
    return Report(
        "symmetric",
        not direct and closed_ok,
        {
            "base_torsion_free": C.base.is_torsion_free(),
            "direct": not direct,
            "closed_form": closed_ok,
            "agree": (not direct) == closed_ok,
            "violated": sorted(k for k, v in closed.items() if v),
            "counterexamples": [list(p) for p, _ in direct[:5]],
        },
    )


# -- covariant derivative of 2-forms and the Fedosov condition --------------

def nabla_two_form(C: GConn, D: SVec, T: STwoForm, D1: SVec, D2: SVec) -> Form:
    """<D1, D2; nabla_D T>."""
    B = C.base
    p, p1, p2 = D.parity(), D1.parity(), D2.parity()
    x = act(B, D, pair(D1, D2, T))
    y = pair(C.apply(D, D1), D2, T)
    z = pair(D1, C.apply(D, D2), T)
    inner = x - y - z if not (p & p1) else x - y + z
    return -inner if (p * (p1 + p2)) & 1 else inner


FEDOSOV_CASES = (
    # (case name, kind of D, kind of D1, kind of D2)
    ("<i_Y,i_Z; nabla_{i_X}>", INS, INS, INS),
    ("<nabla_Y,i_Z; nabla_{i_X}>", INS, NABLA, INS),
    ("<nabla_Y,nabla_Z; nabla_{i_X}>", INS, NABLA, NABLA),
    ("<i_Y,i_Z; nabla_{nabla_X}>", NABLA, INS, INS),
    ("<nabla_Y,i_Z; nabla_{nabla_X}>", NABLA, NABLA, INS),
    ("<nabla_Y,nabla_Z; nabla_{nabla_X}>", NABLA, NABLA, NABLA),
)


def fedosov_direct(C: GConn, W: STwoForm | None = None) -> dict:
    """Case name -> {(x, y, z): value} of <D1, D2; nabla_D W> on frame triples."""
    W = W or omega_H(C.base)
    m = C.m
    out = {}
    for name, k, k1, k2 in FEDOSOV_CASES:
        vals = {}
        for x in range(m):
            D = SVec.basic(m, k, x)
            for y in range(m):
                for z in range(m):
                    vals[(x, y, z)] = nabla_two_form(C, D, W, SVec.basic(m, k1, y), SVec.basic(m, k2, z))
        out[name] = vals
    return out


class _Omega:
    """Tensor-level helpers for omega_H: H, its flat duals and the P block."""

    def __init__(self, B: Base):
        self.B = B
        m = B.m
        w = omega_H(B)
        self.P = w.NN
        self.m = m

    def Hvf(self, U: VForm, z: int) -> Form:
        """H(U, d_z) = sum_l U[l] H_{lz}."""
        acc = Form.zero(self.m)
        for l in range(self.m):
            if not U[l].is_zero():
                acc = acc + U[l].scale(self.B.H[l][z])
        return acc

    def Hsig(self, U: VForm, y: int) -> Form:
        acc = Form.zero(self.m)
        for l in range(self.m):
            if not U[l].is_zero():
                acc = acc + grade_involution(U[l]).scale(self.B.H[l][y])
        return acc

    def Hfv(self, y: int, U: VForm) -> Form:
        """H(d_y, U) = sum_l U[l] H_{yl}."""
        acc = Form.zero(self.m)
        for l in range(self.m):
            if not U[l].is_zero():
                acc = acc + U[l].scale(self.B.H[y][l])
        return acc

    def Pvf(self, U: VForm, z: int) -> Form:
        acc = Form.zero(self.m)
        for l in range(self.m):
            if not U[l].is_zero():
                acc = acc + U[l].wedge(self.P[l][z])
        return acc

    def Pfv(self, y: int, U: VForm) -> Form:
        acc = Form.zero(self.m)
        for l in range(self.m):
            if not U[l].is_zero():
                acc = acc + U[l].wedge(self.P[y][l])
        return acc


def fedosov_closed(C: GConn) -> dict:
    """The six Fedosov conditions written through the pack tensors.

    Keys match ``FEDOSOV_CASES``; each value maps (x, y, z) to the residual
    form, which equals <D1, D2; nabla_D omega_H> exactly.
    """
    B, P, m = C.base, C.pack, C.m
    O = _Omega(B)
    K0, L0, K1, L1, K2, L2, K3, L3 = (P[n] for n in PACK_NAMES)
    gv = B.gamma_vform
    out = {name: {} for name, *_ in FEDOSOV_CASES}
    for x in range(m):
        for y in range(m):
            for z in range(m):
                t = (x, y, z)
                out[FEDOSOV_CASES[0][0]][t] = O.Hvf(K3[x][y], z) + O.Hsig(K3[x][z], y)
                out[FEDOSOV_CASES[1][0]][t] = -(O.Hvf(K2[x][y], z) - O.Pfv(y, K3[x][z]) + O.Hfv(y, L3[x][z]))
                out[FEDOSOV_CASES[2][0]][t] = (
                    O.P[y][z].interior(x) - O.Pvf(K2[x][y], z) - O.Hfv(z, L2[x][y])
                    - O.Pfv(y, K2[x][z]) + O.Hfv(y, L2[x][z])
                )
                out[FEDOSOV_CASES[3][0]][t] = O.Hvf(K1[x][y], z) - O.Hsig(K1[x][z], y)
                out[FEDOSOV_CASES[4][0]][t] = (
                    O.Hvf(gv(x, y) + K0[x][y], z) - O.Pfv(y, K1[x][z]) + O.Hfv(y, gv(x, z) + L1[x][z])
                )
                out[FEDOSOV_CASES[5][0]][t] = (
                    B.nabla_form(x, O.P[y][z]) - O.Pvf(gv(x, y) + K0[x][y], z) - O.Hfv(z, L0[x][y])
                    - O.Pfv(y, gv(x, z) + K0[x][z]) + O.Hfv(y, L0[x][z])
                )
    return out


def _verdicts(tables: dict) -> dict:
    return {name: [t for t, v in sorted(vals.items()) if not v.is_zero()] for name, vals in tables.items()}


def is_fedosov(C: GConn, W: STwoForm | None = None) -> Report:
    direct = _verdicts(fedosov_direct(C, W))
    closed = _verdicts(fedosov_closed(C))
    d_ok = not any(direct.values())
    c_ok = not any(closed.values())
    per_case = {name: (not direct[name]) == (not closed[name]) for name in direct}
    failing = sorted(name for name, v in direct.items() if v)
    cex = []
    for name in failing:
        x, y, z = direct[name][0]
        cex.append({"case": name, "X": x + 1, "Y": y + 1, "Z": z + 1})
    return Report(
        "fedosov",
        d_ok,
        {
            "direct": d_ok,
            "closed_form": c_ok,
            "agree": all(per_case.values()) and d_ok == c_ok,
            "failing_cases": failing,
            "counterexamples": cex,
        },
    )


# -- families ----------------------------------------------------------------

def _vf_from_components(m: int, comps: list, covector: int | None = None) -> VForm:
    """Degree-0 VForm (covector None) or dx^p (x) V with rational components."""
    if covector is None:
        return VForm.vector(m, comps)
    return VForm(Form.from_components(m, {(covector,): Poly._coerce(c)}) for c in comps)


def _H_rat(B: Base) -> list:
    try:
        return [[h.const_value() for h in row] for row in B.H]
    except Exception as exc:
        raise SConnError("constraint sampling needs a constant numeric H") from exc


def fedosov_linear_systems(B: Base):
    """Linear systems for the free parts of a symmetric Fedosov pack with parallel H.

    Returns (system for K0/L1/L2, system for K3, system for one covector slice of L0).
    """
    m = B.m
    H = _H_rat(B)
    R = range(m)
    labs = [(n, i, j, k) for n in ("K0", "L1", "L2") for i in R for j in R for k in R]
    S1 = gla.LinearSystem(labs)
    for i in R:
        for j in R:
            for k in R:
                S1.add_row({("K0", i, j, k): 1, ("K0", j, i, k): -1})
                S1.add_row({("L1", i, j, k): 1, ("L2", j, i, k): -1})
    for x in R:
        for y in R:
            for z in R:
                row: dict = {}
                for k in R:
                    row[("K0", x, y, k)] = row.get(("K0", x, y, k), 0) + H[k][z]
                    row[("L1", x, z, k)] = row.get(("L1", x, z, k), 0) + H[y][k]
                S1.add_row(row)
                row = {}
                for k in R:
                    row[("L2", x, z, k)] = row.get(("L2", x, z, k), 0) + H[y][k]
                    row[("L2", x, y, k)] = row.get(("L2", x, y, k), 0) - H[z][k]
                S1.add_row(row)
    labs3 = [("K3", i, j, k) for i in R for j in R for k in R]
    S3 = gla.LinearSystem(labs3)
    for i in R:
        for j in R:
            for k in R:
                S3.add_row({("K3", i, j, k): 1, ("K3", j, i, k): 1})
    for x in R:
        for y in R:
            for z in R:
                row = {}
                for k in R:
                    row[("K3", x, y, k)] = row.get(("K3", x, y, k), 0) + H[k][z]
                    row[("K3", x, z, k)] = row.get(("K3", x, z, k), 0) + H[k][y]
                S3.add_row(row)
    labs0 = [("L0", i, j, k) for i in R for j in R for k in R]
    S0 = gla.LinearSystem(labs0)
    for i in R:
        for j in R:
            for k in R:
                S0.add_row({("L0", i, j, k): 1, ("L0", j, i, k): -1})
    for x in R:
        for y in R:
            for z in R:
                row = {}
                for k in R:
                    row[("L0", x, z, k)] = row.get(("L0", x, z, k), 0) + H[y][k]
                    row[("L0", x, y, k)] = row.get(("L0", x, y, k), 0) - H[z][k]
                S0.add_row(row)
    return S1, S3, S0


def _kernel_cached(B: Base, key: str, S: gla.LinearSystem) -> list:
    ck = ("kernel", key)
    kb = B._cache.get(ck)
    if kb is None:
        kb = gla.kernel_basis(S)
        B._cache[ck] = kb
    return kb


def _sample(kb: list, n: int, rng: random.Random, lo: int = -3, hi: int = 3) -> list:
    v = [Fraction(0)] * n
    for b in kb:
        w = rng.randint(lo, hi)
        if w:
            v = [x + w * y for x, y in zip(v, b)]
    return v


def curvature_L0(B: Base) -> tuple:
    """Particular solution L0(X,Y) = sum_p dx^p (x) Curv(d_p, X)Y."""
    m = B.m
    Rc = B.curvature  # R[i][j][p][k]: component k of Curv(d_i,d_j)d_p
    return table_from(
        m,
        lambda i, j: VForm(
            Form.from_components(m, {(p,): Rc[p][i][j][k] for p in range(m)}) for k in range(m)
        ),
    )


def make_symmetric_fedosov(B: Base, seed: int = 0, lo: int = -3, hi: int = 3) -> GConn:
    """Random symmetric Fedosov pack over a base with parallel H (K1 = K2 = L3 = 0)."""
    from .base import parallel_H_check

    if not B.is_torsion_free():
        raise SConnError("base connection must be symmetric")
    if not parallel_H_check(B):
        raise SConnError("base must have parallel H")
    m = B.m
    rng = random.Random(seed)
    S1, S3, S0 = fedosov_linear_systems(B)
    k1 = _kernel_cached(B, "fedosov-1", S1)
    k3 = _kernel_cached(B, "fedosov-3", S3)
    k0 = _kernel_cached(B, "fedosov-0", S0)
    v1 = dict(zip(S1.labels, _sample(k1, S1.size, rng, lo, hi)))
    v3 = dict(zip(S3.labels, _sample(k3, S3.size, rng, lo, hi)))
    R = range(m)

    def vec(vals, name, i, j):
        return [vals[(name, i, j, k)] for k in R]

    K0 = table_from(m, lambda i, j: _vf_from_components(m, vec(v1, "K0", i, j)))
    L1 = table_from(m, lambda i, j: _vf_from_components(m, vec(v1, "L1", i, j)))
    L2 = table_from(m, lambda i, j: _vf_from_components(m, vec(v1, "L2", i, j)))
    K3 = table_from(m, lambda i, j: _vf_from_components(m, vec(v3, "K3", i, j)))
    L0p = curvature_L0(B)
    L0 = [[L0p[i][j] for j in R] for i in R]
    for p in R:
        v0 = dict(zip(S0.labels, _sample(k0, S0.size, rng, lo, hi)))
        for i in R:
            for j in R:
                L0[i][j] = L0[i][j] + _vf_from_components(m, vec(v0, "L0", i, j), covector=p)
    pack = TensorPack(m, {"K0": K0, "L1": L1, "L2": L2, "K3": K3, "L0": tuple(tuple(r) for r in L0)})
    return GConn(B, pack, name=f"symmetric-random({seed})")


def make_L_connection(B: Base, L: tuple, name: str = "L-connection") -> GConn:
    m = B.m
    for row in L:
        for v in row:
            if v.degrees() - {1}:
                raise SConnError("L must be a table of vector-valued 1-forms")
    return GConn(B, TensorPack(m, {"K1": L, "L0": L}), name=name)


def check_L_condition(B: Base, L: tuple) -> bool:
    """H(L(X,Y), Z) + H(Y, L(X,Z)) = 0 on all frame triples."""
    O = _Omega.__new__(_Omega)
    O.B, O.m = B, B.m
    m = B.m
    return all(
        (O.Hvf(L[x][y], z) + O.Hfv(y, L[x][z])).is_zero()
        for x in range(m) for y in range(m) for z in range(m)
    )


def lcond_system(B: Base) -> gla.LinearSystem:
    """Lcond for one covector slice of L."""
    m = B.m
    H = _H_rat(B)
    R = range(m)
    S = gla.LinearSystem([("L", i, j, k) for i in R for j in R for k in R])
    for x in R:
        for y in R:
            for z in R:
                row: dict = {}
                for k in R:
                    row[("L", x, y, k)] = row.get(("L", x, y, k), 0) + H[k][z]
                    row[("L", x, z, k)] = row.get(("L", x, z, k), 0) + H[y][k]
                S.add_row(row)
    return S


def sample_lcond_L(B: Base, seed: int = 0, lo: int = -3, hi: int = 3) -> tuple:
    """Random L in the kernel of the L-condition (one independent sample per covector)."""
    m = B.m
    rng = random.Random(seed)
    S = lcond_system(B)
    kb = _kernel_cached(B, "lcond", S)
    L = [[VForm.zero(m) for _ in range(m)] for _ in range(m)]
    for p in range(m):
        v = dict(zip(S.labels, _sample(kb, S.size, rng, lo, hi)))
        for i in range(m):
            for j in range(m):
                L[i][j] = L[i][j] + _vf_from_components(m, [v[("L", i, j, k)] for k in range(m)], covector=p)
    return tuple(tuple(r) for r in L)


def canonical_L(B: Base) -> tuple:
    """L with H(L(X,Y)Z, T) = H(Curv(Z,T)X, Y) on all frame quadruples."""
    m = B.m
    Hinv = B.H_inv
    Rc = B.curvature  # Rc[z][t][x][k] = component k of Curv(d_z, d_t) d_x

    def entry(x, y):
        comps = []
        for a in range(m):
            coeffs = {}
            for z in range(m):
                # V = L(X,Y)d_z, with H(V, d_t) = H(Curv(d_z,d_t)d_x, d_y)
                val = Poly()
                for t in range(m):
                    rhs = sum((Rc[z][t][x][k] * B.H[k][y] for k in range(m)), Poly())
                    val = val + rhs * Hinv[t][a]
                coeffs[(z,)] = val
            comps.append(Form.from_components(m, coeffs))
        return VForm(comps)

    return table_from(m, entry)


def L_defining_relation_holds(B: Base, L: tuple) -> bool:
    m = B.m
    Rc = B.curvature
    for x in range(m):
        for y in range(m):
            for z in range(m):
                V = [L[x][y][a].component((z,)) for a in range(m)]
                for t in range(m):
                    lhs = sum((V[a] * B.H[a][t] for a in range(m)), Poly())
                    rhs = sum((Rc[z][t][x][k] * B.H[k][y] for k in range(m)), Poly())
                    if lhs != rhs:
                        return False
    return True


def L_as_identity_times(L: tuple):
    """If L(X,Y) = Q(X,Y) * sum_p dx^p (x) d_p, return the matrix Q, else None."""
    m = len(L)
    Q = []
    for i in range(m):
        row = []
        for j in range(m):
            q = L[i][j][0].component((0,))
            for a in range(m):
                for p in range(m):
                    want = q if a == p else Poly()
                    if L[i][j][a].component((p,)) != want or L[i][j][a].degrees() - {1}:
                        return None
            row.append(q)
        Q.append(row)
    return Q


def reference_Q_diagonal(B: Base) -> tuple:
    """Reference diagonal of Q for the torus: (4fb + gc, -(ga + 4hc))."""
    from .base import fgh

    f, g, h = fgh(B)
    # torus Christoffels: Gamma^2_11 = a, Gamma^1_11 = -b, Gamma^1_12 = -c
    a, b, c = B.gamma[1][0][0], -B.gamma[0][0][0], -B.gamma[0][0][1]
    return (4 * f * b + g * c, -(g * a + 4 * h * c))


def perturb(C: GConn, seed: int = 0, name: str | None = None) -> GConn:
    """Add a unit to one random component of one pack tensor, keeping parity."""
    rng = random.Random(seed)
    m = C.m
    tname = rng.choice(PACK_NAMES)
    i, j, k = rng.randrange(m), rng.randrange(m), rng.randrange(m)
    deg = PACK_PARITY[tname]
    idx = () if deg == 0 else (rng.randrange(m),)
    bump = VForm(
        Form.from_components(m, {idx: Poly.const(rng.choice((-1, 1)))}) if a == k else Form.zero(m)
        for a in range(m)
    )
    tab = [list(r) for r in C.pack[tname]]
    tab[i][j] = tab[i][j] + bump
    pack = C.pack.replace(**{tname: tuple(tuple(r) for r in tab)})
    return GConn(C.base, pack, name=name or f"{C.name}+perturbed({seed})")


def perturb_L(B: Base, L: tuple, seed: int = 0) -> tuple:
    rng = random.Random(seed)
    m = B.m
    i, j, k, p = (rng.randrange(m) for _ in range(4))
    bump = VForm(Form.from_components(m, {(p,): Poly.const(1)}) if a == k else Form.zero(m) for a in range(m))
    tab = [list(r) for r in L]
    tab[i][j] = tab[i][j] + bump
    return tuple(tuple(r) for r in tab)


def zero_connection(B: Base) -> GConn:
    return GConn(B, TensorPack.zero(B.m), name="zero")


def pack_preset(name: str, B: Base, seed: int = 0) -> GConn:
    """Named packs: zero, symmetric-random(seed), L-connection(canonical|random|zero)."""
    s = name.replace(" ", "")
    if s == "zero":
        return zero_connection(B)
    if s.startswith("symmetric-random"):
        arg = s[len("symmetric-random"):].strip("()")
        return make_symmetric_fedosov(B, int(arg) if arg else seed)
    if s.startswith("L-connection"):
        arg = s[len("L-connection"):].strip("()") or "canonical"
        if arg == "canonical":
            return make_L_connection(B, canonical_L(B), name="L-connection(canonical)")
        if arg == "zero":
            return make_L_connection(B, table_from(B.m, lambda i, j: VForm.zero(B.m)), name="L-connection(zero)")
        if arg.startswith("random"):
            r = arg[len("random"):].strip(":") or str(seed)
            return make_L_connection(B, sample_lcond_L(B, int(r)), name=f"L-connection(random:{r})")
    raise SConnError(f"unknown pack preset {name!r}")
