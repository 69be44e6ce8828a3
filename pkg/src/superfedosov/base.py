"""Flat-frame base manifolds with constant Christoffel symbols and a constant H."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import gla
from .symalg import Form, ParamSpace, Poly, SymalgError, parse_form

KINDS = ("symplectic", "riemannian", "general")


class BaseError(ValueError):
    pass


class VForm:
    """Vector-valued form sum_l w^l (x) d_l with constant-coefficient components."""

    __slots__ = ("m", "comps")

    def __init__(self, comps):
        comps = tuple(comps)
        if not comps:
            raise BaseError("empty VForm")
        self.m = comps[0].m
        if len(comps) != self.m or any(c.m != self.m for c in comps):
            raise BaseError("VForm must have m components of frame dimension m")
        self.comps = comps

    @classmethod
    def zero(cls, m: int) -> "VForm":
        return cls(Form.zero(m) for _ in range(m))

    @classmethod
    def vector(cls, m: int, vec) -> "VForm":
        """Constant vector field with Poly/rational components."""
        return cls(Form.scalar(m, Poly._coerce(v)) for v in vec)

    @classmethod
    def basis(cls, m: int, l: int) -> "VForm":
        return cls(Form.scalar(m, 1) if k == l else Form.zero(m) for k in range(m))

    def __getitem__(self, l: int) -> Form:
        return self.comps[l]

    def __add__(self, other: "VForm") -> "VForm":
        return VForm(a + b for a, b in zip(self.comps, other.comps))

    def __sub__(self, other: "VForm") -> "VForm":
        return VForm(a - b for a, b in zip(self.comps, other.comps))

    def __neg__(self) -> "VForm":
        return VForm(-a for a in self.comps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VForm):
            return NotImplemented
        return self.comps == other.comps

    def __hash__(self):
        return hash(self.comps)

    def lwedge(self, w: Form) -> "VForm":
        """w ^ self, the form multiplying from the left."""
        return VForm(w.wedge(a) for a in self.comps)

    def scale(self, s) -> "VForm":
        return VForm(a.scale(s) for a in self.comps)

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.comps)

    def degrees(self) -> set:
        out = set()
        for a in self.comps:
            out |= a.degrees()
        return out

    def parity(self) -> int:
        ps = {d & 1 for d in self.degrees()}
        if len(ps) > 1:
            raise BaseError("VForm of mixed parity")
        return ps.pop() if ps else 0

    def interior(self, k: int) -> "VForm":
        return VForm(a.interior(k) for a in self.comps)

    def interior_vec(self, vec) -> "VForm":
        return VForm(a.interior_vec(vec) for a in self.comps)

    def legs(self):
        """Decompose as sum of (form, constant vector) pairs: w^l (x) d_l."""
        return [(a, l) for l, a in enumerate(self.comps) if not a.is_zero()]

    def split_by_covector(self):
        """Write as sum over (I, mono): dx^I * c * V  with V a constant vector."""
        out: dict = {}
        for l, a in enumerate(self.comps):
            for (idx, mono), c in a.items():
                vec = out.setdefault(idx, [Poly() for _ in range(self.m)])
                vec[l] = vec[l] + Poly({mono: c})
        return out

    def render(self) -> str:
        parts = []
        for l, a in enumerate(self.comps):
            if a.is_zero():
                continue
            parts.append(f"({a.render()}) d{l + 1}")
        return " + ".join(parts) if parts else "0"

    __str__ = render

    def __repr__(self):
        return f"VForm({self.render()!r})"

    def to_json(self) -> dict:
        return {"vform": [a.to_json() for a in self.comps]}

    @classmethod
    def from_json(cls, obj, m: int, space: ParamSpace) -> "VForm":
        if isinstance(obj, dict) and "vform" in obj:
            obj = obj["vform"]
        if not isinstance(obj, list) or len(obj) != m:
            raise BaseError(f"VForm must list {m} components")
        return cls(parse_form(c, m, space) for c in obj)


@dataclass(frozen=True)
class Base:
    """Parallelizable base with zero frame brackets and constant data.

    ``gamma[k][i][j]`` is Gamma^k_{ij} (nabla_{d_i} d_j = Gamma^k_{ij} d_k),
    ``H[i][j]`` = H(d_i, d_j).
    """

    m: int
    gamma: tuple
    H: tuple
    kind: str = "general"
    params: ParamSpace = field(default_factory=ParamSpace, compare=False)
    name: str = "custom"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        m = self.m
        if m <= 0:
            raise BaseError("dimension must be positive")
        if self.kind not in KINDS:
            raise BaseError(f"kind must be one of {KINDS}")
        if len(self.gamma) != m or any(len(r) != m or any(len(c) != m for c in r) for r in self.gamma):
            raise BaseError("gamma must be an m x m x m array")
        if len(self.H) != m or any(len(r) != m for r in self.H):
            raise BaseError("H must be an m x m matrix")
        for p in self._all_polys():
            if not self.params.contains(p):
                raise BaseError(f"coefficient {p} uses undeclared parameters")
        if self.kind == "symplectic":
            if m % 2:
                raise BaseError("symplectic base needs even dimension")
            if any(self.H[i][j] != -self.H[j][i] for i in range(m) for j in range(m)):
                raise BaseError("symplectic kind requires skew-symmetric H")
        if self.kind == "riemannian":
            if any(self.H[i][j] != self.H[j][i] for i in range(m) for j in range(m)):
                raise BaseError("riemannian kind requires symmetric H")
        try:
            self.H_inv
        except gla.SingularBlockError as exc:
            raise BaseError("H is singular") from exc

    def _all_polys(self):
        for r in self.gamma:
            for c in r:
                yield from c
        for r in self.H:
            yield from r

    # -- cached derived data --
    @property
    def H_inv(self) -> tuple:
        cached = self._cache.get("H_inv")
        if cached is None:
            inv = gla.invert(gla.from_polys(self.H, self.m), "H")
            cached = tuple(tuple(x.scalar_part() for x in row) for row in inv)
            self._cache["H_inv"] = cached
        return cached

    def nabla_images(self, i: int) -> list:
        """Images of dx^k under nabla_{d_i}: -Gamma^k_{ij} dx^j."""
        key = ("nimg", i)
        cached = self._cache.get(key)
        if cached is None:
            cached = [
                Form.from_components(self.m, {(j,): -self.gamma[k][i][j] for j in range(self.m)})
                for k in range(self.m)
            ]
            self._cache[key] = cached
        return cached

    def nabla_form(self, i: int, u: Form) -> Form:
        return u.derive(self.nabla_images(i), 0)

    def nabla_vec(self, i: int, vec) -> list:
        """nabla_{d_i} of a constant vector (components are Polys)."""
        m = self.m
        return [
            sum((Poly._coerce(vec[j]) * self.gamma[k][i][j] for j in range(m)), Poly())
            for k in range(m)
        ]

    def gamma_vform(self, i: int, l: int) -> VForm:
        """nabla_{d_i} d_l as a VForm of degree 0."""
        return VForm.vector(self.m, [self.gamma[k][i][l] for k in range(self.m)])

    def nabla_dir(self, i: int, V):
        """Covariant derivative along d_i of a Form or a VForm."""
        if isinstance(V, Form):
            return self.nabla_form(i, V)
        m = self.m
        out = [self.nabla_form(i, V[l]) for l in range(m)]
        for l in range(m):
            if V[l].is_zero():
                continue
            for k in range(m):
                g = self.gamma[k][i][l]
                if not g.is_zero():
                    out[k] = out[k] + V[l].scale(g)
        return VForm(out)

    def nabla_along(self, X: VForm, V):
        """nabla_X V for a vector-valued form X = sum w^l d_l: sum w^l ^ nabla_l V."""
        m = self.m
        if isinstance(V, Form):
            acc = Form.zero(m)
            for l in range(m):
                if not X[l].is_zero():
                    acc = acc + X[l].wedge(self.nabla_form(l, V))
            return acc
        acc = VForm.zero(m)
        for l in range(m):
            if not X[l].is_zero():
                acc = acc + self.nabla_dir(l, V).lwedge(X[l])
        return acc

    # -- bilinear form --
    def H_pair(self, X: VForm, Y: VForm) -> Form:
        """H(X, Y) for vector-valued forms: forms wedge in argument order."""
        m = self.m
        acc = Form.zero(m)
        for i in range(m):
            if X[i].is_zero():
                continue
            for j in range(m):
                h = self.H[i][j]
                if h.is_zero() or Y[j].is_zero():
                    continue
                acc = acc + X[i].wedge(Y[j]).scale(h)
        return acc

    def flat(self, vec) -> Form:
        """H(v, .) as a 1-form for a constant vector v."""
        m = self.m
        return Form.from_components(
            m, {(k,): sum((Poly._coerce(vec[j]) * self.H[j][k] for j in range(m)), Poly()) for k in range(m)}
        )

    def nabla_H(self, i: int) -> list:
        """Matrix of (nabla_{d_i} H)(d_j, d_k)."""
        m = self.m
        out = []
        for j in range(m):
            row = []
            for k in range(m):
                acc = Poly()
                for l in range(m):
                    acc = acc - self.gamma[l][i][j] * self.H[l][k] - self.gamma[l][i][k] * self.H[j][l]
                row.append(acc)
            out.append(row)
        return out

    def lowered_gamma(self) -> list:
        """Gamma_{kij} = H_{kl} Gamma^l_{ij}."""
        m = self.m
        return [
            [[sum((self.H[k][l] * self.gamma[l][i][j] for l in range(m)), Poly()) for j in range(m)] for i in range(m)]
            for k in range(m)
        ]

    def is_torsion_free(self) -> bool:
        m = self.m
        return all(self.gamma[k][i][j] == self.gamma[k][j][i] for k, i, j in product(range(m), repeat=3))

    @property
    def curvature(self) -> tuple:
        cached = self._cache.get("curv")
        if cached is None:
            cached = base_curvature(self)
            self._cache["curv"] = cached
        return cached

    def curv_vform(self, i: int, j: int) -> VForm:
        """Curv(d_i, d_j) as the vector-valued 1-form sum_p dx^p (x) Curv(d_i,d_j)d_p."""
        m = self.m
        R = self.curvature
        return VForm(
            Form.from_components(m, {(p,): R[i][j][p][k] for p in range(m)}) for k in range(m)
        )

    def to_json(self) -> dict:
        return {
            "dim": self.m,
            "params": list(self.params.names),
            "gamma": [[[self.gamma[k][i][j].render() for j in range(self.m)] for i in range(self.m)] for k in range(self.m)],
            "H": [[self.H[i][j].render() for j in range(self.m)] for i in range(self.m)],
            "kind": self.kind,
        }


def make_base(m, gamma, H, kind="general", params=(), name="custom") -> Base:
    space = params if isinstance(params, ParamSpace) else ParamSpace(params)
    g = tuple(tuple(tuple(space.parse(x) if not isinstance(x, Poly) else x for x in c) for c in r) for r in gamma)
    h = tuple(tuple(space.parse(x) if not isinstance(x, Poly) else x for x in r) for r in H)
    return Base(m, g, h, kind, space, name)


def base_from_config(cfg: dict) -> Base:
    required = {"dim", "gamma", "H"}
    allowed = required | {"params", "kind"}
    if not isinstance(cfg, dict):
        raise BaseError("base config must be an object")
    extra = set(cfg) - allowed
    if extra:
        raise BaseError(f"unknown base keys {sorted(extra)}")
    missing = required - set(cfg)
    if missing:
        raise BaseError(f"missing base keys {sorted(missing)}")
    try:
        return make_base(cfg["dim"], cfg["gamma"], cfg["H"], cfg.get("kind", "general"), cfg.get("params", []))
    except SymalgError as exc:
        raise BaseError(str(exc)) from exc


# -- operations -----------------------------------------------------------

def base_curvature(B: Base) -> tuple:
    """R[i][j][k] = components of Curv(d_i, d_j) d_k."""
    m = B.m
    G = B.gamma
    out = []
    for i in range(m):
        ri = []
        for j in range(m):
            rij = []
            for k in range(m):
                comp = []
                for q in range(m):
                    acc = Poly()
                    for l in range(m):
                        acc = acc + G[q][i][l] * G[l][j][k] - G[q][j][l] * G[l][i][k]
                    comp.append(acc)
                rij.append(tuple(comp))
            ri.append(tuple(rij))
        out.append(tuple(ri))
    return tuple(out)


@dataclass
class FedosovBaseReport:
    fedosov: bool
    failures: list

    def to_json(self) -> dict:
        return {"fedosov": self.fedosov, "failures": self.failures}


def check_fedosov_base(B: Base) -> FedosovBaseReport:
    """Full symmetry of Gamma_{kij}: in (i,j) (torsion-free) and in (j,k) (parallel form)."""
    if B.kind != "symplectic":
        raise BaseError("check_fedosov_base needs a symplectic base")
    low = B.lowered_gamma()
    m = B.m
    failures = []
    for k, i, j in product(range(m), repeat=3):
        if i < j and low[k][i][j] != low[k][j][i]:
            failures.append({"condition": "a1", "indices": [k + 1, i + 1, j + 1]})
    for k, i, j in product(range(m), repeat=3):
        if j < k and low[k][i][j] != low[j][i][k]:
            failures.append({"condition": "a2", "indices": [k + 1, i + 1, j + 1]})
    return FedosovBaseReport(not failures, failures)


def parallel_H_check(B: Base) -> bool:
    return all(p.is_zero() for i in range(B.m) for row in B.nabla_H(i) for p in row)


def torus_family(a="a", b="b", c="c", d="d") -> Base:
    """Two-torus with w0 = dx1^dx2 and the four-parameter flat-frame connection."""
    args = [a, b, c, d]
    names = [x for x in args if isinstance(x, str)]
    space = ParamSpace(dict.fromkeys(names))
    a, b, c, d = (space.parse(x) for x in args)
    z = Poly()
    gamma = [[[z, z], [z, z]], [[z, z], [z, z]]]
    gamma[0][0][0] = -b
    gamma[1][0][0] = a
    gamma[0][0][1] = gamma[0][1][0] = -c
    gamma[1][0][1] = gamma[1][1][0] = b
    gamma[0][1][1] = -d
    gamma[1][1][1] = c
    H = [[Poly(), Poly.const(1)], [Poly.const(-1), Poly()]]
    return Base(2, tuple(tuple(tuple(c_) for c_ in r) for r in gamma), tuple(tuple(r) for r in H), "symplectic", space, "torus")


def fgh(B: Base):
    """f = ac - b^2, g = ad - bc, h = bd - c^2 for a torus base."""
    a, b, c, d = (B.params.var(n) for n in B.params.names[:4])
    return a * c - b * b, a * d - b * c, b * d - c * c


def canonical_symplectic(m: int) -> list:
    n = m // 2
    H = [[0] * m for _ in range(m)]
    for i in range(n):
        H[i][n + i] = 1
        H[n + i][i] = -1
    return H


def flat_base(m: int = 2, kind: str = "symplectic") -> Base:
    H = canonical_symplectic(m) if kind == "symplectic" else [[int(i == j) for j in range(m)] for i in range(m)]
    z = [[[0] * m for _ in range(m)] for _ in range(m)]
    b = make_base(m, z, H, kind)
    return Base(b.m, b.gamma, b.H, b.kind, b.params, "flat")


def _random_unimodular(m: int, rng: random.Random) -> list:
    P = [[int(i == j) for j in range(m)] for i in range(m)]
    for _ in range(3 * m):
        i, j = rng.sample(range(m), 2)
        f = rng.choice([-2, -1, 1, 2])
        P[i] = [x + f * y for x, y in zip(P[i], P[j])]
    return P


def random_symplectic_form(m: int, rng: random.Random) -> list:
    """P^t J P for a random unimodular integer P."""
    J = canonical_symplectic(m)
    P = _random_unimodular(m, rng)
    return [[sum(P[a][i] * J[a][b] * P[b][j] for a in range(m) for b in range(m)) for j in range(m)] for i in range(m)]


def random_fedosov_base(m: int, rng: random.Random, lo: int = -2, hi: int = 2) -> Base:
    """Symplectic base with torsion-free Gamma and nabla H = 0.

    Gamma^l_{ij} = (H^-1)_{lk} S_{kij} for a random fully symmetric S.
    """
    H = random_symplectic_form(m, rng)
    S = {}
    for key in product(range(m), repeat=3):
        s = tuple(sorted(key))
        if s not in S:
            S[s] = Fraction(rng.randint(lo, hi))
    Hinv = gla._const_inverse(H)
    gamma = [
        [[sum(Hinv[l][k] * S[tuple(sorted((k, i, j)))] for k in range(m)) for j in range(m)] for i in range(m)]
        for l in range(m)
    ]
    b = make_base(m, gamma, H, "symplectic")
    return Base(b.m, b.gamma, b.H, b.kind, b.params, f"random-fedosov-{m}")


def random_general_base(m: int, rng: random.Random, symmetric_gamma: bool = True, lo: int = -2, hi: int = 2) -> Base:
    """Random constant Gamma and random invertible H (nabla H generally non-zero)."""
    while True:
        H = [[rng.randint(lo, hi) for _ in range(m)] for _ in range(m)]
        if gla._const_inverse(H) is not None:
            break
    gamma = [[[0] * m for _ in range(m)] for _ in range(m)]
    for k in range(m):
        for i in range(m):
            for j in range(m):
                if symmetric_gamma and j < i:
                    gamma[k][i][j] = gamma[k][j][i]
                else:
                    gamma[k][i][j] = rng.randint(lo, hi)
    b = make_base(m, gamma, H, "general")
    return Base(b.m, b.gamma, b.H, b.kind, b.params, f"random-general-{m}")


_TORUS_RE = re.compile(r"^torus\(([^)]*)\)$")


def base_preset(name: str) -> Base:
    name = name.strip()
    if name == "torus":
        return torus_family()
    mt = _TORUS_RE.match(name)
    if mt:
        args = [s.strip() for s in mt.group(1).split(",")]
        if len(args) != 4:
            raise BaseError("torus preset takes four arguments")
        vals = []
        for s in args:
            if re.fullmatch(r"-?\d+(/\d+)?", s):
                vals.append(Fraction(s))
            elif s.isidentifier():
                vals.append(s)
            else:
                raise BaseError(f"bad torus argument {s!r}")
        return torus_family(*vals)
    mf = re.fullmatch(r"flat(?:\((\d+)\))?", name)
    if mf:
        return flat_base(int(mf.group(1) or 2))
    raise BaseError(f"unknown base preset {name!r}")
