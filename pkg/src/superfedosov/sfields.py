"""Supervector fields on (M, Omega(M)), graded brackets, and graded 1-/2-forms.

A supervector field is kept formally as ``sum a^l nabla_l + b^l i_l`` with
form coefficients on the left.  The nabla-part cannot be recovered from the
action on constant forms alone, so brackets are computed symbolically from the
frame relations

    [nabla_i, nabla_j] = -i_{Curv(d_i, d_j)}
    [nabla_i, i_j]     =  i_{nabla_i d_j}
    [i_i, i_j]         =  0

where ``i_{w (x) Z} = w ^ i_Z``.  The first relation is the actual graded
commutator of the two derivations on forms.

Pairing convention for a 2-form ``tau`` (fixed by d(lambda_H) = omega_H on
form-scaled arguments):

    <a D1, b D2; tau> = (-1)^{|b||D1|} a ^ b ^ <D1, D2; tau>

for frame derivations D1, D2.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .base import Base, VForm
from .symalg import Form, Poly

NABLA, INS = 0, 1


class SFieldError(ValueError):
    pass


def grade_involution(u: Form) -> Form:
    """Multiply the odd-degree part by -1."""
    if not any(len(k[0]) & 1 for k, _ in u.items()):
        return u
    return Form(u.m, {k: (-c if len(k[0]) & 1 else c) for k, c in u.items()}, _clean=True)


class SVec:
    """Supervector field ``sum a^l nabla_{d_l} + b^l i_{d_l}``."""

    __slots__ = ("a", "b")

    def __init__(self, a: VForm, b: VForm):
        if a.m != b.m:
            raise SFieldError("dimension mismatch")
        self.a = a
        self.b = b

    @property
    def m(self) -> int:
        return self.a.m

    @classmethod
    def zero(cls, m: int) -> "SVec":
        return cls(VForm.zero(m), VForm.zero(m))

    @classmethod
    def nabla(cls, m: int, l: int) -> "SVec":
        return cls(VForm.basis(m, l), VForm.zero(m))

    @classmethod
    def ins(cls, m: int, l: int) -> "SVec":
        return cls(VForm.zero(m), VForm.basis(m, l))

    @classmethod
    def nabla_of(cls, W: VForm) -> "SVec":
        """nabla_W for a vector-valued form W = sum w^l d_l."""
        return cls(W, VForm.zero(W.m))

    @classmethod
    def ins_of(cls, W: VForm) -> "SVec":
        return cls(VForm.zero(W.m), W)

    @classmethod
    def basic(cls, m: int, kind: int, l: int) -> "SVec":
        return cls.nabla(m, l) if kind == NABLA else cls.ins(m, l)

    @classmethod
    def frame(cls, m: int, kind: int, vec) -> "SVec":
        """nabla_V or i_V for a constant vector V."""
        W = VForm.vector(m, vec)
        return cls.nabla_of(W) if kind == NABLA else cls.ins_of(W)

    def __add__(self, other: "SVec") -> "SVec":
        return SVec(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "SVec") -> "SVec":
        return SVec(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "SVec":
        return SVec(-self.a, -self.b)

    def lmul(self, w: Form) -> "SVec":
        """w * D, the form multiplying from the left."""
        if w._const() == 1:
            return self
        return SVec(self.a.lwedge(w), self.b.lwedge(w))

    def scale(self, s) -> "SVec":
        return SVec(self.a.scale(s), self.b.scale(s))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SVec):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def parities(self) -> set:
        ps = {d & 1 for d in self.a.degrees()}
        ps |= {(d + 1) & 1 for d in self.b.degrees()}
        return ps

    def parity(self) -> int:
        ps = self.parities()
        if len(ps) > 1:
            raise SFieldError("inhomogeneous supervector field")
        return ps.pop() if ps else 0

    def z_degrees(self) -> set:
        return set(self.a.degrees()) | {d - 1 for d in self.b.degrees()}

    def terms(self):
        """Yield (coefficient, kind, l) over non-zero coefficients."""
        for l in range(self.m):
            if not self.a[l].is_zero():
                yield self.a[l], NABLA, l
        for l in range(self.m):
            if not self.b[l].is_zero():
                yield self.b[l], INS, l

    def render(self) -> str:
        parts = []
        for coef, kind, l in self.terms():
            name = f"nabla_{l + 1}" if kind == NABLA else f"i_{l + 1}"
            parts.append(f"({coef.render()}) {name}")
        return " + ".join(parts) if parts else "0"

    __str__ = render

    def __repr__(self) -> str:
        return f"SVec({self.render()!r})"

    def to_json(self) -> dict:
        return {"svec": {"nabla-part": self.a.to_json()["vform"], "insertion-part": self.b.to_json()["vform"]}}


def basis_svecs(m: int) -> list:
    """Pure basis nabla_1..nabla_m, i_1..i_m as (kind, l, SVec)."""
    return [(NABLA, l, SVec.nabla(m, l)) for l in range(m)] + [(INS, l, SVec.ins(m, l)) for l in range(m)]


def act_basic(B: Base, kind: int, l: int, u: Form) -> Form:
    return B.nabla_form(l, u) if kind == NABLA else u.interior(l)


def act(B: Base, D: SVec, u: Form) -> Form:
    """Action of a supervector field on a form."""
    if D.m != B.m or u.m != B.m:
        raise SFieldError("dimension mismatch")
    acc = Form.zero(B.m)
    for coef, kind, l in D.terms():
        v = act_basic(B, kind, l, u)
        if not v.is_zero():
            acc = acc + coef.wedge(v)
    return acc


def basic_bracket(B: Base, k1: int, l1: int, k2: int, l2: int) -> SVec:
    m = B.m
    if k1 == NABLA and k2 == NABLA:
        return SVec.ins_of(-B.curv_vform(l1, l2))
    if k1 == NABLA and k2 == INS:
        return SVec.ins_of(B.gamma_vform(l1, l2))
    if k1 == INS and k2 == NABLA:
        return SVec.ins_of(-B.gamma_vform(l2, l1))
    return SVec.zero(m)


def bracket(B: Base, D1: SVec, D2: SVec) -> SVec:
    """Graded commutator [D1, D2] = D1 D2 - (-1)^{|D1||D2|} D2 D1."""
    p1, p2 = D1.parity(), D2.parity()
    m = B.m
    acc = SVec.zero(m)
    sign12 = -1 if (p1 & p2) else 1
    for al, ka, la in D1.terms():
        for be, kb, lb in D2.terms():
            # alpha D_a(beta) D_b
            t = act_basic(B, ka, la, be)
            if not t.is_zero():
                acc = acc + SVec.basic(m, kb, lb).lmul(al.wedge(t))
            # -(-1)^{p1 p2} beta D_b(alpha) D_a
            t = act_basic(B, kb, lb, al)
            if not t.is_zero():
                term = SVec.basic(m, ka, la).lmul(be.wedge(t))
                acc = acc - term if sign12 == 1 else acc + term
            # (-1)^{|D_a||beta|} alpha beta [D_a, D_b]
            br = basic_bracket(B, ka, la, kb, lb)
            if not br.is_zero():
                b_ = grade_involution(be) if ka == INS else be
                acc = acc + br.lmul(al.wedge(b_))
    return acc


def commutator_action(B: Base, D1: SVec, D2: SVec, u: Form) -> Form:
    """D1(D2 u) - (-1)^{|D1||D2|} D2(D1 u), evaluated directly on a form."""
    s = -1 if (D1.parity() & D2.parity()) else 1
    x = act(B, D1, act(B, D2, u))
    y = act(B, D2, act(B, D1, u))
    return x - y if s == 1 else x + y


# -- graded 1-forms and 2-forms ---------------------------------------------

@dataclass(frozen=True)
class SOneForm:
    """Graded 1-form given on the frame derivations; ``<a D; beta> = a ^ <D; beta>``."""

    nab: tuple
    ins: tuple
    parity: int

    def pair(self, D: SVec) -> Form:
        acc = Form.zero(D.m)
        for coef, kind, l in D.terms():
            v = self.nab[l] if kind == NABLA else self.ins[l]
            if not v.is_zero():
                acc = acc + coef.wedge(v)
        return acc


@dataclass(frozen=True)
class STwoForm:
    """Graded 2-form as four m x m tables on frame derivation pairs."""

    NN: tuple
    NI: tuple
    IN: tuple
    II: tuple
    parity: int = 1

    @property
    def m(self) -> int:
        return len(self.NN)

    def table(self, k1: int, k2: int) -> tuple:
        return (self.NN, self.NI, self.IN, self.II)[2 * k1 + k2]

    def value(self, k1: int, l1: int, k2: int, l2: int) -> Form:
        return self.table(k1, k2)[l1][l2]

    def __eq__(self, other) -> bool:
        if not isinstance(other, STwoForm):
            return NotImplemented
        return all(
            self.table(a, b)[i][j] == other.table(a, b)[i][j]
            for a in (0, 1) for b in (0, 1) for i in range(self.m) for j in range(self.m)
        )

    def diff(self, other: "STwoForm") -> list:
        out = []
        names = {(0, 0): "nabla,nabla", (0, 1): "nabla,i", (1, 0): "i,nabla", (1, 1): "i,i"}
        for a in (0, 1):
            for b in (0, 1):
                for i in range(self.m):
                    for j in range(self.m):
                        if self.table(a, b)[i][j] != other.table(a, b)[i][j]:
                            out.append((names[(a, b)], i + 1, j + 1))
        return out

    def to_json(self) -> dict:
        return {
            "stwoform": {
                "parity": "odd" if self.parity else "even",
                "nabla,nabla": [[x.to_json() for x in r] for r in self.NN],
                "nabla,i": [[x.to_json() for x in r] for r in self.NI],
                "i,nabla": [[x.to_json() for x in r] for r in self.IN],
                "i,i": [[x.to_json() for x in r] for r in self.II],
            }
        }


def pair(D1: SVec, D2: SVec, T: STwoForm) -> Form:
    """<D1, D2; T> extended from the frame table (see module docstring)."""
    m = D1.m
    acc = Form.zero(m)
    for al, ka, la in D1.terms():
        for be, kb, lb in D2.terms():
            v = T.table(ka, kb)[la][lb]
            if v.is_zero():
                continue
            b_ = grade_involution(be) if ka == INS else be
            acc = acc + al.wedge(b_).wedge(v)
    return acc


def insert(D: SVec, T: STwoForm) -> SOneForm:
    """i_D T, the 1-form E -> <E, D; T> (insertion in the second slot)."""
    m = D.m
    nab = tuple(pair(SVec.nabla(m, l), D, T) for l in range(m))
    ins = tuple(pair(SVec.ins(m, l), D, T) for l in range(m))
    return SOneForm(nab, ins, (T.parity + D.parity()) & 1)


def lambda_H(B: Base) -> SOneForm:
    """Odd 1-form with <nabla_X; lambda> = H(X) and <i_X; lambda> = 0."""
    m = B.m
    nab = tuple(B.flat([1 if k == l else 0 for k in range(m)]) for l in range(m))
    return SOneForm(nab, tuple(Form.zero(m) for _ in range(m)), 1)


def d_one_form(B: Base, beta: SOneForm, D1: SVec, D2: SVec) -> Form:
    """<D1, D2; d beta> from the three-term formula."""
    s = -1 if (D1.parity() & D2.parity()) else 1
    x = act(B, D1, beta.pair(D2))
    y = act(B, D2, beta.pair(D1))
    z = beta.pair(bracket(B, D1, D2))
    return (x - y if s == 1 else x + y) - z


def _table(m, f) -> tuple:
    return tuple(tuple(f(i, j) for j in range(m)) for i in range(m))


def graded_d_of_lambda(B: Base) -> STwoForm:
    lam = lambda_H(B)
    m = B.m
    bs = {k: [SVec.basic(m, k, l) for l in range(m)] for k in (NABLA, INS)}
    tabs = [
        _table(m, lambda i, j, k1=k1, k2=k2: d_one_form(B, lam, bs[k1][i], bs[k2][j]))
        for k1 in (NABLA, INS) for k2 in (NABLA, INS)
    ]
    return STwoForm(*tabs, parity=1)


def omega_H(B: Base) -> STwoForm:
    """Odd 2-form omega_H on frame derivations.

    <nabla_X, nabla_Y> = (nabla_X H)Y - (nabla_Y H)X + H(Tor(X, Y)),
    <nabla_X, i_Y> = -H(X, Y), <i_X, nabla_Y> = H(Y, X), <i_X, i_Y> = 0.
    The torsion term vanishes for symmetric base connections.
    """
    m = B.m
    nH = [B.nabla_H(i) for i in range(m)]

    def nn(i, j):
        comps = {}
        for k in range(m):
            g = B.gamma
            t = sum(((g[l][i][j] - g[l][j][i]) * B.H[l][k] for l in range(m)), Poly())
            comps[(k,)] = nH[i][j][k] - nH[j][i][k] + t
        return Form.from_components(m, comps)

    NN = _table(m, nn)
    NI = _table(m, lambda i, j: Form.scalar(m, -B.H[i][j]))
    IN = _table(m, lambda i, j: Form.scalar(m, B.H[j][i]))
    II = _table(m, lambda i, j: Form.zero(m))
    return STwoForm(NN, NI, IN, II, parity=1)



# -- random samples for property checks -----------------------------------------

def random_form(m: int, rng, degree: int | None = None, lo: int = -2, hi: int = 2) -> Form:
    """Random constant form; a single degree if given, otherwise all degrees."""
    terms = {}
    for k in range(m + 1):
        if degree is not None and k != degree:
            continue
        for idx in combinations(range(m), k):
            c = rng.randint(lo, hi)
            if c:
                terms[(idx, ())] = c
    return Form(m, terms)


def random_svec(m: int, rng, parity: int, max_degree: int = 2) -> SVec:
    """Random homogeneous supervector field of the given Z2-degree."""
    a_degs = [d for d in range(min(m, max_degree) + 1) if d % 2 == parity]
    b_degs = [d for d in range(min(m, max_degree) + 1) if d % 2 != parity]
    a = VForm(random_form(m, rng, rng.choice(a_degs)) for _ in range(m))
    b = VForm(random_form(m, rng, rng.choice(b_degs)) for _ in range(m))
    return SVec(a, b)
