"""Exact coefficient arithmetic.

``Poly`` is a sparse multivariate polynomial over the rationals in named
parameters.  ``Form`` is a constant-coefficient element of the exterior
algebra on an m-dimensional frame, with ``Poly`` coefficients.

Forms are stored flat, as ``{(index_subset, monomial): Fraction}``; this keeps
the wedge product a single double loop, which dominates the run time of the
curvature pipelines.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Union

Monomial = tuple  # tuple[tuple[str, int], ...], sorted by name
Index = tuple  # strictly increasing tuple of 0-based frame indices
Scalar = Union[int, Fraction]

ONE_MONO: Monomial = ()


class SymalgError(ValueError):
    pass


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    acc = dict(m1)
    for name, e in m2:
        acc[name] = acc.get(name, 0) + e
    return tuple(sorted(acc.items()))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_key(m: Monomial):
    # graded, then lexicographic on (name, exponent) pairs with higher powers first
    return (-_mono_degree(m), tuple((n, -e) for n, e in m))


class Poly:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean: dict = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[m] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def const(cls, c: Scalar) -> "Poly":
        return cls({ONE_MONO: c})

    @classmethod
    def var(cls, name: str, power: int = 1) -> "Poly":
        return cls({((name, power),): 1})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def is_const(self) -> bool:
        return all(m == ONE_MONO for m in self._terms)

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise SymalgError(f"polynomial {self} is not constant")
        return self._terms.get(ONE_MONO, Fraction(0))

    def variables(self) -> set:
        return {n for m in self._terms for n, _ in m}

    def degree(self) -> int:
        return max((_mono_degree(m) for m in self._terms), default=-1)

    @staticmethod
    def _coerce(x) -> "Poly":
        if isinstance(x, Poly):
            return x
        if isinstance(x, (int, Fraction)):
            return Poly.const(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to Poly")

    def __add__(self, other) -> "Poly":
        other = Poly._coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-Poly._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return Poly._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return Poly({m: c * other for m, c in self._terms.items()})
        if isinstance(other, Form):
            return NotImplemented
        other = Poly._coerce(other)
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, c: Scalar) -> "Poly":
        c = Fraction(c)
        if not c:
            raise ZeroDivisionError("polynomial division by zero")
        return Poly({m: v / c for m, v in self._terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def subs(self, values: Mapping[str, Scalar | "Poly"]) -> "Poly":
        out = Poly()
        for m, c in self._terms.items():
            term = Poly.const(c)
            for name, e in m:
                base = values.get(name)
                term = term * (Poly.var(name, e) if base is None else Poly._coerce(base) ** e)
            out = out + term
        return out

    def sorted_terms(self) -> list:
        return sorted(self._terms.items(), key=lambda t: _mono_key(t[0]))

    def render(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for m, c in self.sorted_terms():
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in m)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            pieces.append(("-" if c < 0 else "+", body))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    __str__ = render

    def __repr__(self) -> str:
        return f"Poly({self.render()!r})"

    def to_json(self) -> dict:
        return {
            "poly": [
                [{n: e for n, e in m}, str(c)] for m, c in self.sorted_terms()
            ]
        }

    @classmethod
    def from_json(cls, obj, space: "ParamSpace | None" = None) -> "Poly":
        if not isinstance(obj, dict) or set(obj) != {"poly"}:
            raise SymalgError("expected {'poly': [...]} object")
        terms: dict = {}
        for entry in obj["poly"]:
            mono_d, coef = entry
            for name in mono_d:
                if space is not None:
                    space.check(name)
            m = tuple(sorted((n, int(e)) for n, e in mono_d.items() if int(e)))
            terms[m] = terms.get(m, 0) + Fraction(coef)
        return cls(terms)


def poly_arith(p: Poly, q: Poly | None, op: str) -> Poly:
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    if op == "neg":
        return -p
    raise SymalgError(f"unknown poly op {op!r}")


class ParamSpace:
    """Declared parameter universe; unknown names are rejected."""

    def __init__(self, names: Iterable[str] = ()):
        names = tuple(names)
        for n in names:
            if not n.isidentifier():
                raise SymalgError(f"invalid parameter name {n!r}")
        if len(set(names)) != len(names):
            raise SymalgError("duplicate parameter names")
        self.names = names

    def check(self, name: str) -> None:
        if name not in self.names:
            raise SymalgError(f"unknown parameter {name!r} (declared: {list(self.names)})")

    def var(self, name: str) -> Poly:
        self.check(name)
        return Poly.var(name)

    def vars(self) -> tuple:
        return tuple(Poly.var(n) for n in self.names)

    def contains(self, p: Poly) -> bool:
        return p.variables() <= set(self.names)

    def parse(self, expr) -> Poly:
        """Parse ``"a*b - 3/2*c^2"``-style text (or a bare number)."""
        if isinstance(expr, bool):
            raise SymalgError("booleans are not polynomials")
        if isinstance(expr, (int, Fraction)):
            return Poly.const(expr)
        if isinstance(expr, dict):
            return Poly.from_json(expr, self)
        if not isinstance(expr, str):
            raise SymalgError(f"cannot parse {expr!r} as a polynomial")
        try:
            tree = ast.parse(expr.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise SymalgError(f"bad polynomial expression {expr!r}") from exc
        return self._eval(tree.body, expr)

    def _eval(self, node, src: str) -> Poly:
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Poly.const(node.value)
        if isinstance(node, ast.Name):
            return self.var(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self._eval(node.operand, src)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            left = self._eval(node.left, src)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int) and node.right.value >= 0):
                    raise SymalgError(f"exponent must be a non-negative integer in {src!r}")
                return left ** node.right.value
            right = self._eval(node.right, src)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if not right.is_const() or right.is_zero():
                    raise SymalgError(f"division only by non-zero constants in {src!r}")
                return left / right.const_value()
        raise SymalgError(f"unsupported syntax in polynomial {src!r}")


@lru_cache(maxsize=None)
def merge_sign(i: Index, j: Index):
    """Sign and sorted union for dx^I ^ dx^J, or (0, None) if they overlap."""
    if set(i) & set(j):
        return 0, None
    inv = 0
    for a in i:
        for b in j:
            if a > b:
                inv += 1
    return (-1 if inv & 1 else 1), tuple(sorted(i + j))


_UNIT = ((), ())


class Form:
    """Constant-coefficient differential form on an m-dimensional frame."""

    __slots__ = ("m", "_t")

    def __init__(self, m: int, terms: Mapping | None = None, _clean: bool = False):
        self.m = m
        if _clean:
            self._t = terms
            return
        t: dict = {}
        if terms:
            for key, c in terms.items():
                idx, mono = key
                if any(k < 0 or k >= m for k in idx) or list(idx) != sorted(set(idx)):
                    raise SymalgError(f"bad index subset {idx} for dimension {m}")
                c = Fraction(c)
                if c:
                    t[key] = t.get(key, 0) + c
            t = {k: v for k, v in t.items() if v}
        self._t = t

    # -- constructors --
    @classmethod
    def zero(cls, m: int) -> "Form":
        return cls(m, {}, _clean=True)

    @classmethod
    def scalar(cls, m: int, p: Poly | Scalar) -> "Form":
        p = Poly._coerce(p)
        return cls(m, {((), mono): c for mono, c in p.items()}, _clean=True)

    @classmethod
    def dx(cls, m: int, *idx: int) -> "Form":
        """Basis monomial dx^{i1}^...^dx^{ik} (0-based indices, any order)."""
        out = cls.scalar(m, 1)
        for i in idx:
            if not 0 <= i < m:
                raise SymalgError(f"frame index {i} out of range for m={m}")
            out = out.wedge(cls(m, {((i,), ONE_MONO): 1}, _clean=True))
        return out

    @classmethod
    def from_components(cls, m: int, comps: Mapping[Index, Poly]) -> "Form":
        t: dict = {}
        for idx, p in comps.items():
            s = tuple(sorted(idx))
            if len(set(s)) != len(s):
                continue
            sign = _perm_sign(idx)
            for mono, c in Poly._coerce(p).items():
                t[(s, mono)] = t.get((s, mono), 0) + sign * c
        return cls(m, t)

    # -- inspection --
    def items(self):
        return self._t.items()

    def is_zero(self) -> bool:
        return not self._t

    def components(self) -> dict:
        out: dict = {}
        for (idx, mono), c in self._t.items():
            out.setdefault(idx, {})[mono] = c
        return {idx: Poly(v) for idx, v in out.items()}

    def component(self, idx: Index) -> Poly:
        return Poly({mono: c for (i, mono), c in self._t.items() if i == idx})

    def degrees(self) -> set:
        return {len(idx) for idx, _ in self._t}

    def degree(self) -> int:
        """Z-degree of a homogeneous form (0 for the zero form)."""
        ds = self.degrees()
        if len(ds) > 1:
            raise SymalgError(f"form of mixed degree {sorted(ds)}")
        return ds.pop() if ds else 0

    def parity(self) -> int:
        ps = {d & 1 for d in self.degrees()}
        if len(ps) > 1:
            raise SymalgError("form of mixed parity")
        return ps.pop() if ps else 0

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def scalar_part(self) -> Poly:
        return self.component(())

    # -- arithmetic --
    def _check(self, other: "Form") -> None:
        if not isinstance(other, Form):
            raise TypeError(f"expected Form, got {type(other).__name__}")
        if other.m != self.m:
            raise SymalgError(f"frame dimension mismatch: {self.m} vs {other.m}")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        if not other._t:
            return self
        if not self._t:
            return other
        t = dict(self._t)
        for k, c in other._t.items():
            v = t.get(k, 0) + c
            if v:
                t[k] = v
            else:
                t.pop(k, None)
        return Form(self.m, t, _clean=True)

    def __neg__(self) -> "Form":
        return Form(self.m, {k: -c for k, c in self._t.items()}, _clean=True)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, s: Poly | Scalar) -> "Form":
        if isinstance(s, (int, Fraction)):
            if not s:
                return Form.zero(self.m)
            return Form(self.m, {k: c * s for k, c in self._t.items()}, _clean=True)
        return self.wedge(Form.scalar(self.m, s))

    def __mul__(self, s):
        if isinstance(s, Form):
            return self.wedge(s)
        return self.scale(s)

    __rmul__ = scale

    def _const(self):
        t = self._t
        if len(t) == 1:
            (key, c), = t.items()
            if key == _UNIT:
                return c
        return None

    def wedge(self, other: "Form") -> "Form":
        self._check(other)
        if not self._t or not other._t:
            return Form.zero(self.m)
        c = other._const()
        if c is not None:
            return self if c == 1 else Form(self.m, {k: v * c for k, v in self._t.items()}, _clean=True)
        c = self._const()
        if c is not None:
            return other if c == 1 else Form(self.m, {k: v * c for k, v in other._t.items()}, _clean=True)
        t: dict = {}
        for (i1, m1), c1 in self._t.items():
            for (i2, m2), c2 in other._t.items():
                sign, idx = merge_sign(i1, i2)
                if not sign:
                    continue
                key = (idx, _mono_mul(m1, m2))
                t[key] = t.get(key, 0) + sign * c1 * c2
        return Form(self.m, {k: v for k, v in t.items() if v}, _clean=True)

    __xor__ = wedge

    def interior(self, k: int) -> "Form":
        """Contraction i_{d_k} (graded derivation of degree -1)."""
        t: dict = {}
        for (idx, mono), c in self._t.items():
            if k in idx:
                pos = idx.index(k)
                key = (idx[:pos] + idx[pos + 1:], mono)
                t[key] = t.get(key, 0) + (-c if pos & 1 else c)
        return Form(self.m, {k_: v for k_, v in t.items() if v}, _clean=True)

    def interior_vec(self, vec) -> "Form":
        """Contraction with a constant vector given by components (Poly or scalars)."""
        out = Form.zero(self.m)
        for k, v in enumerate(vec):
            v = Poly._coerce(v)
            if not v.is_zero():
                out = out + self.interior(k).scale(v)
        return out

    def derive(self, images: list, parity: int) -> "Form":
        """Extend ``dx^k -> images[k]`` to a graded derivation of the given parity.

        Constant coefficients are killed (they are constants in the frame).
        """
        t: dict = {}
        for (idx, mono), c in self._t.items():
            for pos, k in enumerate(idx):
                img = images[k]
                if img.is_zero():
                    continue
                left, right = idx[:pos], idx[pos + 1:]
                sign0 = -1 if (parity and (pos & 1)) else 1
                for (ii, mi), ci in img._t.items():
                    s1, j1 = merge_sign(left, ii)
                    if not s1:
                        continue
                    s2, j2 = merge_sign(j1, right)
                    if not s2:
                        continue
                    key = (j2, _mono_mul(mono, mi))
                    t[key] = t.get(key, 0) + sign0 * s1 * s2 * c * ci
        return Form(self.m, {k_: v for k_, v in t.items() if v}, _clean=True)

    def subs(self, values: Mapping[str, Scalar | Poly]) -> "Form":
        out = Form.zero(self.m)
        for idx, p in self.components().items():
            out = out + Form.from_components(self.m, {idx: p.subs(values)})
        return out

    def variables(self) -> set:
        return {n for (_, mono) in self._t for n, _ in mono}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.m == other.m and self._t == other._t

    def __hash__(self) -> int:
        return hash((self.m, frozenset(self._t.items())))

    def sorted_components(self) -> list:
        return sorted(self.components().items(), key=lambda kv: (len(kv[0]), kv[0]))

    def render(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for idx, p in self.sorted_components():
            basis = "^".join(f"dx{i + 1}" for i in idx)
            coef = p.render()
            if not idx:
                parts.append(coef)
            elif len(p.items()) > 1:
                parts.append(f"({coef}) * {basis}")
            elif coef in ("1", "-1"):
                parts.append(coef[:-1] + basis)
            else:
                parts.append(f"{coef} * {basis}")
        out = parts[0]
        for piece in parts[1:]:
            out += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
        return out

    __str__ = render

    def __repr__(self) -> str:
        return f"Form(m={self.m}, {self.render()!r})"

    def to_json(self) -> dict:
        return {
            "form": {
                "dim": self.m,
                "components": [
                    [[i + 1 for i in idx], p.to_json()] for idx, p in self.sorted_components()
                ],
            }
        }

    @classmethod
    def from_json(cls, obj, space: ParamSpace | None = None, m: int | None = None) -> "Form":
        if not isinstance(obj, dict) or set(obj) != {"form"}:
            raise SymalgError("expected {'form': {...}} object")
        body = obj["form"]
        dim = body["dim"]
        if m is not None and dim != m:
            raise SymalgError(f"form dimension {dim} does not match frame dimension {m}")
        comps = {}
        for idx, pj in body["components"]:
            key = tuple(i - 1 for i in idx)
            comps[key] = comps.get(key, Poly()) + (space.parse(pj) if space else Poly.from_json(pj))
        return cls.from_components(dim, comps)


def _perm_sign(seq) -> int:
    inv = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                inv += 1
    return -1 if inv & 1 else 1


def wedge(u: Form, v: Form) -> Form:
    return u.wedge(v)


def degree_split(u: Form) -> list:
    """Homogeneous pieces of ``u`` in increasing degree; empty for zero."""
    by_deg: dict = {}
    for key, c in u.items():
        by_deg.setdefault(len(key[0]), {})[key] = c
    return [Form(u.m, by_deg[d], _clean=True) for d in sorted(by_deg)]


def basis_subsets(m: int, k: int) -> Iterator[Index]:
    return combinations(range(m), k)


def parse_form(text_or_json, m: int, space: ParamSpace) -> Form:
    """Read a form from JSON, a polynomial string (0-form), or ``{"1,2": "a"}`` shorthand."""
    if isinstance(text_or_json, dict) and "form" in text_or_json:
        return Form.from_json(text_or_json, space, m)
    if isinstance(text_or_json, dict):
        comps = {}
        for key, val in text_or_json.items():
            idx = tuple(int(s) - 1 for s in key.split(",")) if key.strip() else ()
            if any(i < 0 or i >= m for i in idx):
                raise SymalgError(f"form index {key!r} out of range for m={m}")
            comps[idx] = comps.get(idx, Poly()) + space.parse(val)
        return Form.from_components(m, comps)
    return Form.scalar(m, space.parse(text_or_json))
