"""Graded linear algebra: supermatrices over forms, and exact rational kernels."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Sequence

from .symalg import Form, Poly, SymalgError, _perm_sign

Block = list  # list[list[Form]]


class GlaError(ValueError):
    pass


class SingularBlockError(GlaError):
    def __init__(self, name: str, block):
        super().__init__(f"block {name} is singular")
        self.block_name = name
        self.block = block


# -- plain block helpers --------------------------------------------------

def zeros(n: int, m: int, cols: int | None = None) -> Block:
    cols = n if cols is None else cols
    return [[Form.zero(m) for _ in range(cols)] for _ in range(n)]


def identity(n: int, m: int) -> Block:
    return [[Form.scalar(m, 1) if i == j else Form.zero(m) for j in range(n)] for i in range(n)]


def from_polys(rows: Sequence[Sequence], m: int) -> Block:
    return [[Form.scalar(m, Poly._coerce(x)) for x in row] for row in rows]


def transpose(a: Block) -> Block:
    return [list(col) for col in zip(*a)] if a else []


def neg(a: Block) -> Block:
    return [[-x for x in row] for row in a]


def add(a: Block, b: Block) -> Block:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matmul(a: Block, b: Block) -> Block:
    if not a or not b:
        return []
    m = a[0][0].m
    n, k, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = Form.zero(m)
            for t in range(k):
                if a[i][t].is_zero() or b[t][j].is_zero():
                    continue
                acc = acc + a[i][t].wedge(b[t][j])
            row.append(acc)
        out.append(row)
    return out


def trace(a: Block) -> Form:
    m = a[0][0].m
    acc = Form.zero(m)
    for i in range(len(a)):
        acc = acc + a[i][i]
    return acc


def block_parity(a: Block) -> int | None:
    """Common Z2-degree of the non-zero entries, or None if all zero."""
    ps = set()
    for row in a:
        for x in row:
            if not x.is_zero():
                ps.add(x.parity())
    if len(ps) > 1:
        raise GlaError("block is not homogeneous")
    return ps.pop() if ps else None


def blocks_equal(a: Block, b: Block) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb)) and len(a) == len(b)


def _poly_det(rows: list) -> Poly:
    n = len(rows)
    acc = Poly()
    for perm in permutations(range(n)):
        term = Poly.const(_perm_sign(perm))
        for i, j in enumerate(perm):
            term = term * rows[i][j]
            if term.is_zero():
                break
        acc = acc + term
    return acc


def _const_inverse(rows: list) -> list | None:
    n = len(rows)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def invert(a: Block, name: str = "A") -> Block:
    """Inverse of a square block of degree-0 entries.

    Constant blocks use Gauss-Jordan; polynomial blocks need a non-zero
    constant determinant (adjugate formula).
    """
    n = len(a)
    m = a[0][0].m
    polys = []
    for row in a:
        prow = []
        for x in row:
            if x.degrees() - {0}:
                raise GlaError(f"block {name} has entries of positive degree; only degree-0 blocks are inverted")
            prow.append(x.scalar_part())
        polys.append(prow)
    if all(p.is_const() for row in polys for p in row):
        inv = _const_inverse([[p.const_value() for p in row] for row in polys])
        if inv is None:
            raise SingularBlockError(name, a)
        return [[Form.scalar(m, x) for x in row] for row in inv]
    det = _poly_det(polys)
    if det.is_zero() or not det.is_const():
        raise SingularBlockError(name, a)
    d = det.const_value()
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            minor = [[polys[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            cof = _poly_det(minor) if minor else Poly.const(1)
            row.append(Form.scalar(m, cof * Fraction((-1) ** (i + j)) / d))
        out.append(row)
    return out


# -- supermatrices ---------------------------------------------------------

@dataclass(frozen=True)
class SuperMatrix:
    """Parity-tagged 2x2 block matrix [[A, B], [C, D]] with n x n blocks.

    Degree-0 entries are accepted in any block: for constant structure data
    the Z2 tag is carried by the matrix, not by its numeric entries.
    """

    A: Block
    B: Block
    C: Block
    D: Block
    parity: int = 0

    def __post_init__(self):
        n = len(self.A)
        for name in "ABCD":
            blk = getattr(self, name)
            if len(blk) != n or any(len(r) != n for r in blk):
                raise GlaError(f"block {name} is not {n}x{n}")
        want = {"A": self.parity, "D": self.parity, "B": 1 - self.parity, "C": 1 - self.parity}
        for name, p in want.items():
            for row in getattr(self, name):
                for x in row:
                    if x.degrees() - {0} and any((d & 1) != p for d in x.degrees() if d):
                        raise GlaError(f"entry of block {name} has the wrong parity for a parity-{self.parity} supermatrix")

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def m(self) -> int:
        return self.A[0][0].m

    @classmethod
    def identity(cls, n: int, m: int) -> "SuperMatrix":
        return cls(identity(n, m), zeros(n, m), zeros(n, m), identity(n, m), 0)

    def full(self) -> Block:
        return [ra + rb for ra, rb in zip(self.A, self.B)] + [rc + rd for rc, rd in zip(self.C, self.D)]

    @classmethod
    def from_full(cls, rows: Block, parity: int) -> "SuperMatrix":
        n = len(rows) // 2
        return cls(
            [r[:n] for r in rows[:n]], [r[n:] for r in rows[:n]],
            [r[:n] for r in rows[n:]], [r[n:] for r in rows[n:]], parity,
        )

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        prod = matmul(self.full(), other.full())
        return SuperMatrix.from_full(prod, (self.parity + other.parity) & 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SuperMatrix):
            return NotImplemented
        return self.parity == other.parity and blocks_equal(self.full(), other.full())

    def to_json(self) -> dict:
        return {
            "supermatrix": {
                "parity": "odd" if self.parity else "even",
                "blocks": {
                    name: [[x.to_json() for x in row] for row in getattr(self, name)]
                    for name in "ABCD"
                },
            }
        }


def stranspose(M: SuperMatrix) -> SuperMatrix:
    """Supertranspose.

    even [[A,B],[C,D]] -> [[At, -Ct], [Bt, Dt]]
    odd  [[A,B],[C,D]] -> [[At,  Ct], [Bt, Dt]]
    """
    t = transpose
    if M.parity == 0:
        return SuperMatrix(t(M.A), neg(t(M.C)), t(M.B), t(M.D), 0)
    return SuperMatrix(t(M.A), t(M.C), t(M.B), t(M.D), 1)


def strace(M: SuperMatrix) -> Form:
    ta, td = trace(M.A), trace(M.D)
    return ta + td if M.parity else ta - td


def block_inverse(M: SuperMatrix) -> SuperMatrix:
    """Inverse of [[A, B], [C, 0]] as [[0, C^-1], [B^-1, -B^-1 A C^-1]]."""
    if any(not x.is_zero() for row in M.D for x in row):
        raise GlaError("block_inverse requires D = 0")
    bi = invert(M.B, "B")
    ci = invert(M.C, "C")
    d = neg(matmul(matmul(bi, M.A), ci))
    return SuperMatrix(zeros(M.n, M.m), ci, bi, d, M.parity)


# -- exact rational kernels ------------------------------------------------

@dataclass
class LinearSystem:
    """Homogeneous system ``rows . v = 0`` over the rationals."""

    labels: list
    rows: list = field(default_factory=list)

    def add_row(self, coeffs: dict) -> None:
        """``coeffs`` maps label -> rational coefficient."""
        index = {lab: i for i, lab in enumerate(self.labels)}
        row = [Fraction(0)] * len(self.labels)
        for lab, c in coeffs.items():
            row[index[lab]] += Fraction(c)
        if any(row):
            self.rows.append(row)

    @property
    def size(self) -> int:
        return len(self.labels)


def rref(rows: list, ncols: int):
    a = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pv = a[r][col]
        a[r] = [x / pv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def kernel_basis(S: LinearSystem) -> list:
    n = S.size
    red, pivots = rref(S.rows, n)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def rank(rows: list, ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def sample_kernel(S: LinearSystem, rng: random.Random, lo: int = -3, hi: int = 3) -> list:
    """Random rational combination of the kernel basis (small integer weights)."""
    n = S.size
    v = [Fraction(0)] * n
    for b in kernel_basis(S):
        w = rng.randint(lo, hi)
        if w:
            v = [x + w * y for x, y in zip(v, b)]
    return v


def satisfies(S: LinearSystem, v: list) -> bool:
    return all(sum(a * b for a, b in zip(row, v)) == 0 for row in S.rows)
