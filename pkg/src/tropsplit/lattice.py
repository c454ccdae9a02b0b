"""Exact integer lattice algebra.

Everything here works on Python ints, so there is no overflow and no
rounding.  Matrices act on column vectors: an ``m x n`` matrix is a map
from Z^n to Z^m, and a list of generators is stored as the columns of a
matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod
from typing import Iterable, Sequence

INFINITE = "infinite"


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix with row-major entries."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative matrix shape")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    # -- construction -------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        data = [tuple(int(x) for x in r) for r in rows]
        if cols is None:
            if not data:
                raise ValueError("cannot infer column count of an empty row list")
            cols = len(data[0])
        for r in data:
            if len(r) != cols:
                raise ValueError("ragged rows")
        return cls(len(data), cols, tuple(x for r in data for x in r))

    @classmethod
    def from_columns(cls, columns: Iterable[Sequence[int]], rows: int) -> "IntMatrix":
        cols = [tuple(int(x) for x in c) for c in columns]
        for c in cols:
            if len(c) != rows:
                raise ValueError(f"column {c} does not have length {rows}")
        return cls(rows, len(cols), tuple(cols[j][i] for i in range(rows) for j in range(len(cols))))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    # -- access -------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def columns(self) -> list[tuple]:
        return [self.col(j) for j in range(self.cols)]

    @property
    def shape(self):
        return (self.rows, self.cols)

    # -- algebra ------------------------------------------------------
    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_columns([self.row(i) for i in range(self.rows)], self.cols)

    T = property(transpose)

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            ocols = other.columns()
            out = []
            for i in range(self.rows):
                r = self.row(i)
                out.extend(sum(a * b for a, b in zip(r, c)) for c in ocols)
            return IntMatrix(self.rows, other.cols, tuple(out))
        vec = tuple(other)
        if len(vec) != self.cols:
            raise ValueError(f"vector of length {len(vec)} for matrix with {self.cols} columns")
        return tuple(sum(a * b for a, b in zip(self.row(i), vec)) for i in range(self.rows))

    def apply(self, vec):
        """Apply to a vector of ints or Fractions."""
        return self @ vec

    def __neg__(self):
        return IntMatrix(self.rows, self.cols, tuple(-x for x in self.entries))

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise ValueError("hstack needs equal row counts")
        return IntMatrix.from_columns(self.columns() + other.columns(), self.rows)

    def vstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.cols:
            raise ValueError("vstack needs equal column counts")
        return IntMatrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def select_columns(self, idx: Sequence[int]) -> "IntMatrix":
        return IntMatrix.from_columns([self.col(j) for j in idx], self.rows)

    def select_rows(self, idx: Sequence[int]) -> "IntMatrix":
        return IntMatrix.from_rows([self.row(i) for i in idx], self.cols)

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __repr__(self):
        return f"IntMatrix({self.to_rows()!r}, shape={self.shape})"


def as_matrix(m, rows: int | None = None, cols: int | None = None) -> IntMatrix:
    """Coerce nested lists (row-major) or an IntMatrix into an IntMatrix."""
    if isinstance(m, IntMatrix):
        return m
    data = [list(r) for r in m]
    if not data:
        return IntMatrix.zeros(0, cols or 0)
    return IntMatrix.from_rows(data)


def columns_matrix(vectors: Sequence[Sequence[int]], ambient_rank: int) -> IntMatrix:
    """Matrix whose columns are the given vectors."""
    return IntMatrix.from_columns(vectors, ambient_rank)


def block_diag(blocks: Sequence[IntMatrix]) -> IntMatrix:
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = [[0] * cols for _ in range(rows)]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                out[r0 + i][c0 + j] = b[i, j]
        r0 += b.rows
        c0 += b.cols
    return IntMatrix(rows, cols, tuple(x for r in out for x in r))


# ---------------------------------------------------------------------
# small vector helpers

def vgcd(v: Iterable[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


def primitive(v: Sequence) -> tuple:
    """Scale a rational vector to the primitive integer vector on its ray.

    The zero vector is returned unchanged (as ints).
    """
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = vgcd(ints)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


# ---------------------------------------------------------------------
# Smith normal form

@dataclass(frozen=True)
class SnfDecomposition:
    """``left @ input @ right == diag`` with unimodular ``left`` and ``right``."""

    left: IntMatrix
    diag: IntMatrix
    right: IntMatrix
    left_inverse: IntMatrix
    right_inverse: IntMatrix

    @property
    def divisors(self) -> list[int]:
        k = min(self.diag.rows, self.diag.cols)
        return [self.diag[i, i] for i in range(k)]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.divisors if d != 0)


def _identity_rows(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(m) -> SnfDecomposition:
    """Smith normal form with unimodular transforms.

    Pivots are chosen as the entry of smallest absolute value in the
    remaining block, ties broken by lowest row index and then lowest
    column index, so the output is a deterministic function of the input.
    """
    m = as_matrix(m)
    rows, cols = m.rows, m.cols
    a = m.to_rows()
    L = _identity_rows(rows)
    Linv = _identity_rows(rows)
    R = _identity_rows(cols)
    Rinv = _identity_rows(cols)

    # Row op "row_i += c * row_j" is E = I + c e_ij.  L <- E L and
    # Linv <- Linv E^{-1}, i.e. column_j of Linv -= c * column_i.
    def row_add(i, j, c):
        if c == 0:
            return
        a[i] = [x + c * y for x, y in zip(a[i], a[j])]
        L[i] = [x + c * y for x, y in zip(L[i], L[j])]
        for r in Linv:
            r[j] -= c * r[i]

    def row_swap(i, j):
        if i == j:
            return
        a[i], a[j] = a[j], a[i]
        L[i], L[j] = L[j], L[i]
        for r in Linv:
            r[i], r[j] = r[j], r[i]

    def row_neg(i):
        a[i] = [-x for x in a[i]]
        L[i] = [-x for x in L[i]]
        for r in Linv:
            r[i] = -r[i]

    # Column op "col_i += c * col_j": R <- R E, Rinv <- E^{-1} Rinv,
    # i.e. row_j of Rinv -= c * row_i.
    def col_add(i, j, c):
        if c == 0:
            return
        for r in a:
            r[i] += c * r[j]
        for r in R:
            r[i] += c * r[j]
        Rinv[j] = [x - c * y for x, y in zip(Rinv[j], Rinv[i])]

    def col_swap(i, j):
        if i == j:
            return
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in R:
            r[i], r[j] = r[j], r[i]
        Rinv[i], Rinv[j] = Rinv[j], Rinv[i]

    t = 0
    while t < min(rows, cols):
        # pick pivot in the block a[t:, t:]
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                x = a[i][j]
                if x != 0 and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, pi, pj = best
        row_swap(t, pi)
        col_swap(t, pj)
        while True:
            p = a[t][t]
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    row_add(i, t, -(a[i][t] // p))
                    if a[i][t]:
                        dirty = True
            for j in range(t + 1, cols):
                if a[t][j]:
                    col_add(j, t, -(a[t][j] // p))
                    if a[t][j]:
                        dirty = True
            if dirty:
                # a remainder smaller than the pivot appeared in row/col t
                best = None
                for i in range(t, rows):
                    x = a[i][t]
                    if x != 0 and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, t)
                for j in range(t, cols):
                    x = a[t][j]
                    if x != 0 and (best is None or abs(x) < best[0]):
                        best = (abs(x), t, j)
                _, pi, pj = best
                row_swap(t, pi)
                col_swap(t, pj)
                continue
            # row and column t are clear; enforce divisibility on the rest
            bad = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if a[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_add(t, bad, 1)
        if a[t][t] < 0:
            row_neg(t)
        t += 1

    def mk(rs, ncols):
        return IntMatrix(len(rs), ncols, tuple(x for r in rs for x in r))

    return SnfDecomposition(
        left=mk(L, rows),
        diag=mk(a, cols),
        right=mk(R, cols),
        left_inverse=mk(Linv, rows),
        right_inverse=mk(Rinv, cols),
    )


# ---------------------------------------------------------------------
# Hermite normal form (row style) -- used for canonical bases

def hermite_rows(vectors: Sequence[Sequence[int]], width: int) -> list[tuple]:
    """Row-style Hermite normal form of the lattice spanned by ``vectors``.

    Returns the nonzero rows: echelon form, positive pivots, and entries
    above each pivot reduced into ``[0, pivot)``.  The result depends only
    on the lattice, not on the generating set.
    """
    a = [list(int(x) for x in v) for v in vectors]
    for v in a:
        if len(v) != width:
            raise ValueError("vector of wrong width")
    out_rows = []
    r = 0
    for c in range(width):
        # gather rows r.. with nonzero entry in column c, gcd-combine into row r
        idx = [i for i in range(r, len(a)) if a[i][c] != 0]
        if not idx:
            continue
        piv = idx[0]
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, len(a)):
            if a[i][c] == 0:
                continue
            x, y = a[r][c], a[i][c]
            g, s, t = _xgcd(x, y)
            # [s t; -y/g x/g] is unimodular
            ri = [s * p + t * q for p, q in zip(a[r], a[i])]
            rj = [(-y // g) * p + (x // g) * q for p, q in zip(a[r], a[i])]
            a[r], a[i] = ri, rj
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
        p = a[r][c]
        for i in range(r):
            q = a[i][c] // p
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == len(a):
            break
    for i in range(r):
        out_rows.append(tuple(a[i]))
    return out_rows


def _xgcd(a: int, b: int):
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, rr = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while rr != 0:
        q = old_r // rr
        old_r, rr = rr, old_r - q * rr
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


# ---------------------------------------------------------------------
# indices, saturation, kernels

def sublattice_index(generators, ambient_rank: int):
    """Index of the column span of ``generators`` in Z^ambient_rank.

    Returns ``INFINITE`` when the span is not of full rank.
    """
    g = as_matrix(generators)
    if g.rows != ambient_rank:
        if g.cols == 0 and g.rows == 0:
            g = IntMatrix.zeros(ambient_rank, 0)
        else:
            raise ValueError(f"generators have {g.rows} rows, expected {ambient_rank}")
    if ambient_rank == 0:
        return 1
    snf = smith_normal_form(g)
    if snf.rank < ambient_rank:
        return INFINITE
    return prod(snf.divisors[:ambient_rank])


def saturation_index(m) -> int:
    """[im(m)^sat : im(m)], the product of the nonzero elementary divisors."""
    snf = smith_normal_form(as_matrix(m))
    return prod(d for d in snf.divisors if d != 0)


def canonical_column_basis(vectors: Sequence[Sequence[int]], ambient_rank: int) -> IntMatrix:
    """Hermite-reduced basis of the lattice spanned by ``vectors`` (as columns)."""
    rows = hermite_rows(vectors, ambient_rank)
    return IntMatrix.from_columns(rows, ambient_rank)


def saturate(generators, ambient_rank: int | None = None) -> IntMatrix:
    """Basis (columns) of the saturation of the column span of ``generators``."""
    g = as_matrix(generators)
    if ambient_rank is not None and g.rows != ambient_rank:
        if g.rows == 0 and g.cols == 0:
            g = IntMatrix.zeros(ambient_rank, 0)
        else:
            raise ValueError("generator matrix does not match ambient rank")
    n = g.rows
    snf = smith_normal_form(g)
    r = snf.rank
    cols = [snf.left_inverse.col(j) for j in range(r)]
    return canonical_column_basis(cols, n)


def rank(m) -> int:
    return smith_normal_form(as_matrix(m)).rank


@dataclass(frozen=True)
class Cokernel:
    free_rank: int
    torsion: tuple
    projection_to_free: IntMatrix


@dataclass(frozen=True)
class KernelImageCokernel:
    kernel_basis: IntMatrix
    image_basis: IntMatrix
    cokernel: Cokernel

    def __iter__(self):
        return iter((self.kernel_basis, self.image_basis, self.cokernel))


def kernel_basis(m) -> IntMatrix:
    """Saturated basis (columns) of the integer kernel of ``m``."""
    m = as_matrix(m)
    snf = smith_normal_form(m)
    r = snf.rank
    cols = [snf.right.col(j) for j in range(r, m.cols)]
    return canonical_column_basis(cols, m.cols)


def kernel_image_cokernel(m) -> KernelImageCokernel:
    m = as_matrix(m)
    snf = smith_normal_form(m)
    r = snf.rank
    ker = canonical_column_basis([snf.right.col(j) for j in range(r, m.cols)], m.cols)
    # image is spanned by d_i * (column i of L^-1)
    img_cols = [
        tuple(snf.divisors[i] * x for x in snf.left_inverse.col(i)) for i in range(r)
    ]
    img = canonical_column_basis(img_cols, m.rows)
    torsion = tuple(d for d in snf.divisors[:r] if d > 1)
    proj = IntMatrix.from_rows([snf.left.row(i) for i in range(r, m.rows)], m.rows)
    return KernelImageCokernel(ker, img, Cokernel(m.rows - r, torsion, proj))


def lattice_fiber_product(f, g):
    """Fiber product {(x, z) : f(x) = g(z)} with its two projections.

    Returns ``(rank, (p1, p2))`` where ``p1`` and ``p2`` map the fiber
    lattice into the sources of ``f`` and ``g``.  The basis is the
    saturated kernel of ``(x, z) -> f(x) - g(z)`` in Hermite form.
    """
    f, g = as_matrix(f), as_matrix(g)
    if f.rows != g.rows:
        raise ValueError("f and g must share a target")
    alpha = f.hstack(-g)
    k = kernel_basis(alpha)
    p1 = IntMatrix.from_rows([k.row(i) for i in range(f.cols)], k.cols)
    p2 = IntMatrix.from_rows([k.row(i) for i in range(f.cols, f.cols + g.cols)], k.cols)
    return k.cols, (p1, p2)


def multi_fiber_product(maps: Sequence[IntMatrix], target_rank: int) -> IntMatrix:
    """Basis of {(x_1..x_k) : f_1(x_1) = ... = f_k(x_k)} inside the product.

    Returns the basis as columns of a matrix with ``sum(source ranks)`` rows.
    With a single map the whole source lattice is returned.
    """
    maps = [as_matrix(f) for f in maps]
    widths = [f.cols for f in maps]
    total = sum(widths)
    eqs = []
    offs = [0]
    for w in widths:
        offs.append(offs[-1] + w)
    for a in range(len(maps) - 1):
        fa, fb = maps[a], maps[a + 1]
        for i in range(target_rank):
            row = [0] * total
            for j in range(fa.cols):
                row[offs[a] + j] += fa[i, j]
            for j in range(fb.cols):
                row[offs[a + 1] + j] -= fb[i, j]
            eqs.append(row)
    if not eqs:
        return IntMatrix.identity(total)
    return kernel_basis(IntMatrix.from_rows(eqs, total))


# ---------------------------------------------------------------------
# rational linear algebra helpers shared by the other modules

def rational_rank(vectors: Sequence[Sequence]) -> int:
    return len(_row_echelon([list(map(Fraction, v)) for v in vectors])[0])


def _row_echelon(rows):
    rows = [r[:] for r in rows]
    if not rows:
        return [], []
    width = len(rows[0])
    pivots = []
    r = 0
    for c in range(width):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def solve_rational(a: IntMatrix, b: Sequence):
    """Solve ``a @ x = b`` over Q; return one solution or None."""
    aug = [list(map(Fraction, a.row(i))) + [Fraction(b[i])] for i in range(a.rows)]
    red, piv = _row_echelon(aug)
    if a.cols in piv:
        return None
    x = [Fraction(0)] * a.cols
    for row, c in zip(red, piv):
        x[c] = row[-1]
    return x


def solve_integral(a: IntMatrix, b: Sequence[int]):
    """Solve ``a @ x = b`` over Z; return one integer solution or None."""
    snf = smith_normal_form(a)
    c = snf.left @ tuple(b)
    y = [0] * a.cols
    for i, ci in enumerate(c):
        d = snf.diag[i, i] if i < min(a.rows, a.cols) else 0
        if d == 0:
            if ci != 0:
                return None
        else:
            if ci % d:
                return None
            y[i] = ci // d
    return snf.right @ tuple(y)


def in_lattice(basis: IntMatrix, v: Sequence[int]) -> bool:
    return solve_integral(basis, v) is not None
