"""Rational polyhedral cones with exact V- and H-descriptions.

A cone is stored in a canonical form so that two descriptions of the
same cone compare equal as plain dataclasses:

* ``lineality`` is the Hermite basis of the saturated lineality lattice,
* ``rays`` are primitive, lie in the orthogonal complement of the
  lineality space, and are sorted,
* ``equations`` is the Hermite basis of the integer vectors vanishing on
  the cone,
* ``facet_normals`` are primitive, lie in the linear span of the cone,
  and are sorted.

With this normalisation the dual cone is obtained by swapping the two
descriptions.  Conversions between them use the double description
method with integer arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .lattice import (
    IntMatrix,
    as_matrix,
    canonical_column_basis,
    dot,
    kernel_basis,
    lattice_fiber_product,
    primitive,
    rational_rank,
)

OUTSIDE = "outside"
BOUNDARY = "boundary"
RELATIVE_INTERIOR = "relative_interior"


@dataclass(frozen=True)
class Cone:
    ambient_rank: int
    rays: tuple
    lineality: tuple
    facet_normals: tuple
    equations: tuple

    @property
    def dim(self) -> int:
        return self.ambient_rank - len(self.equations)

    @property
    def lineality_basis(self) -> tuple:
        return self.lineality

    @property
    def is_pointed(self) -> bool:
        return not self.lineality

    def generators(self) -> list[tuple]:
        """Rays plus both signs of the lineality basis."""
        out = list(self.rays)
        for l in self.lineality:
            out.append(l)
            out.append(tuple(-x for x in l))
        return out

    def interior_point(self) -> tuple:
        """Sum of the rays, a point of the relative interior."""
        pt = [0] * self.ambient_rank
        for r in self.rays:
            for i, x in enumerate(r):
                pt[i] += x
        return tuple(pt)

    def span_basis(self) -> IntMatrix:
        """Hermite basis (columns) of the saturated lattice spanned by the cone."""
        if self.dim == 0:
            return IntMatrix.zeros(self.ambient_rank, 0)
        eq = IntMatrix.from_rows(self.equations, self.ambient_rank)
        return kernel_basis(eq)

    def __repr__(self):
        parts = [f"rank={self.ambient_rank}", f"rays={list(self.rays)}"]
        if self.lineality:
            parts.append(f"lineality={list(self.lineality)}")
        return "Cone(" + ", ".join(parts) + ")"


# ---------------------------------------------------------------------
# double description

def _kernel_rows(rows: Sequence[Sequence[int]], n: int) -> list[tuple]:
    """Hermite basis of {x in Z^n : r.x = 0 for all rows r}."""
    if n == 0:
        return []
    if not rows:
        return [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    k = kernel_basis(IntMatrix.from_rows(rows, n))
    return k.columns()


def _pointed_rays(A: list[list[int]], w: int) -> list[tuple]:
    """Extreme rays of {y : A y >= 0} in Q^w, assuming A has rank w."""
    if w == 0:
        return []
    chosen: list[int] = []
    rows_sel: list[list[int]] = []
    for i, row in enumerate(A):
        if rational_rank(rows_sel + [row]) > len(rows_sel):
            chosen.append(i)
            rows_sel.append(row)
            if len(chosen) == w:
                break
    if len(chosen) < w:
        raise ValueError("constraint matrix is not of full column rank")
    # columns of the inverse of the chosen square block
    inv_cols = []
    for j in range(w):
        e = [Fraction(int(i == j)) for i in range(w)]
        inv_cols.append(_solve_square(rows_sel, e))
    rays = []
    for j in range(w):
        vec = primitive(inv_cols[j])
        zset = frozenset(chosen[k] for k in range(w) if k != j)
        rays.append((vec, zset))
    done = set(chosen)
    for i, a in enumerate(A):
        if i in done:
            continue
        vals = [dot(a, r[0]) for r in rays]
        pos = [k for k, v in enumerate(vals) if v > 0]
        neg = [k for k, v in enumerate(vals) if v < 0]
        new = []
        for k, v in enumerate(vals):
            if v > 0:
                new.append(rays[k])
            elif v == 0:
                new.append((rays[k][0], rays[k][1] | {i}))
        for p in pos:
            zp = rays[p][1]
            for q in neg:
                common = zp & rays[q][1]
                if len(common) < w - 2:
                    continue
                adjacent = True
                for k, (_, zk) in enumerate(rays):
                    if k != p and k != q and common <= zk:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vp, vq = vals[p], vals[q]
                comb = tuple(vp * y - vq * x for x, y in zip(rays[p][0], rays[q][0]))
                new.append((primitive(comb), common | {i}))
        rays = new
        done.add(i)
    return [r[0] for r in rays]


def _solve_square(rows, rhs):
    n = len(rows)
    aug = [list(map(Fraction, rows[i])) + [Fraction(rhs[i])] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [aug[i][n] for i in range(n)]


def _hrep_to_vrep(n: int, ineqs, eqs):
    """Rays and lineality of {x : E x = 0, A x >= 0}.

    Rays come back primitive, inside the orthogonal complement of the
    lineality space, deduplicated and sorted.
    """
    ineqs = [tuple(int(x) for x in a) for a in ineqs if any(a)]
    eqs = [tuple(int(x) for x in e) for e in eqs if any(e)]
    lin = _kernel_rows(eqs + ineqs, n)
    W = _kernel_rows(eqs + lin, n)
    w = len(W)
    if w == 0:
        return (), tuple(lin)
    A = [[dot(a, Wj) for Wj in W] for a in ineqs]
    ys = _pointed_rays(A, w)
    rays = set()
    for y in ys:
        x = [0] * n
        for coef, Wj in zip(y, W):
            if coef:
                for t in range(n):
                    x[t] += coef * Wj[t]
        rays.add(primitive(x))
    return tuple(sorted(rays)), tuple(lin)


# ---------------------------------------------------------------------
# constructors

def cone_from_rays(ambient_rank: int, generators: Sequence[Sequence[int]] = (), lineality: Sequence[Sequence[int]] = ()) -> Cone:
    """Canonical cone generated by ``generators`` plus the span of ``lineality``."""
    gens = [primitive(g) for g in generators]
    for g in gens:
        if len(g) != ambient_rank:
            raise ValueError(f"generator {g} not in rank {ambient_rank}")
    lin = [primitive(l) for l in lineality]
    facets, eqs = _hrep_to_vrep(ambient_rank, gens, lin)
    rays, lin2 = _hrep_to_vrep(ambient_rank, facets, eqs)
    return Cone(ambient_rank, rays, lin2, facets, eqs)


def cone_from_inequalities(ambient_rank: int, inequalities: Sequence[Sequence] = (), equations: Sequence[Sequence] = ()) -> Cone:
    """Canonical cone {x : a.x >= 0 for a in inequalities, e.x = 0 for e in equations}."""
    ineqs = [primitive(a) for a in inequalities]
    eqs = [primitive(e) for e in equations]
    rays, lin = _hrep_to_vrep(ambient_rank, ineqs, eqs)
    facets, eqs2 = _hrep_to_vrep(ambient_rank, rays, lin)
    return Cone(ambient_rank, rays, lin, facets, eqs2)


def zero_cone(ambient_rank: int) -> Cone:
    return cone_from_rays(ambient_rank, [])


def full_space(ambient_rank: int) -> Cone:
    basis = [tuple(int(i == j) for j in range(ambient_rank)) for i in range(ambient_rank)]
    return cone_from_rays(ambient_rank, [], basis)


def orthant(ambient_rank: int) -> Cone:
    basis = [tuple(int(i == j) for j in range(ambient_rank)) for i in range(ambient_rank)]
    return cone_from_rays(ambient_rank, basis)


# ---------------------------------------------------------------------
# operations

def dual_cone(c: Cone) -> Cone:
    """{u : <u, x> >= 0 for all x in c}."""
    return Cone(c.ambient_rank, c.facet_normals, c.equations, c.rays, c.lineality)


def membership(c: Cone, x: Sequence) -> str:
    """Classify ``x`` as outside, on the relative boundary, or in the relative interior."""
    if len(x) != c.ambient_rank:
        raise ValueError("dimension mismatch")
    xs = [Fraction(t) for t in x]
    for e in c.equations:
        if dot(e, xs) != 0:
            return OUTSIDE
    strict = True
    for a in c.facet_normals:
        v = dot(a, xs)
        if v < 0:
            return OUTSIDE
        if v == 0:
            strict = False
    return RELATIVE_INTERIOR if strict else BOUNDARY


def contains(c: Cone, x: Sequence) -> bool:
    return membership(c, x) != OUTSIDE


def contains_cone(big: Cone, small: Cone) -> bool:
    return all(contains(big, g) for g in small.generators())


def intersect_cones(a: Cone, b: Cone) -> Cone:
    if a.ambient_rank != b.ambient_rank:
        raise ValueError("ambient ranks differ")
    return cone_from_inequalities(
        a.ambient_rank,
        list(a.facet_normals) + list(b.facet_normals),
        list(a.equations) + list(b.equations),
    )


def map_cone(f, c: Cone) -> Cone:
    """Image of ``c`` under the integer matrix ``f``."""
    f = as_matrix(f)
    if f.cols != c.ambient_rank:
        raise ValueError("matrix source rank does not match cone")
    return cone_from_rays(f.rows, [f @ r for r in c.rays], [f @ l for l in c.lineality])


def preimage_cone(f, c: Cone) -> Cone:
    """{x : f(x) in c}."""
    f = as_matrix(f)
    ft = f.transpose()
    ineqs = [ft @ a for a in c.facet_normals]
    eqs = [ft @ e for e in c.equations]
    return cone_from_inequalities(f.cols, ineqs, eqs)


def face_from_normals(c: Cone, normals: Sequence[Sequence[int]]) -> Cone:
    """Intersection of ``c`` with the hyperplanes of the given supporting normals."""
    return cone_from_inequalities(
        c.ambient_rank, c.facet_normals, list(c.equations) + [tuple(n) for n in normals]
    )


def faces(c: Cone) -> list[Cone]:
    """All faces of ``c``, from the minimal face up to ``c`` itself."""
    ray_sets = {frozenset(range(len(c.rays)))}
    incid = [
        frozenset(i for i, r in enumerate(c.rays) if dot(a, r) == 0)
        for a in c.facet_normals
    ]
    frontier = list(ray_sets)
    while frontier:
        nxt = []
        for s in frontier:
            for inc in incid:
                t = s & inc
                if t not in ray_sets:
                    ray_sets.add(t)
                    nxt.append(t)
        frontier = nxt
    out = []
    for s in ray_sets:
        rays = [c.rays[i] for i in sorted(s)]
        out.append(cone_from_rays(c.ambient_rank, rays, c.lineality))
    uniq = {f: None for f in out}
    return sorted(uniq, key=lambda f: (f.dim, f.rays))


def is_face_of(f: Cone, c: Cone) -> bool:
    """True iff ``f`` is a face of ``c``."""
    if f.ambient_rank != c.ambient_rank or not contains_cone(c, f):
        return False
    gens = f.generators()
    tight = [a for a in c.facet_normals if all(dot(a, g) == 0 for g in gens)]
    return face_from_normals(c, tight) == f


def minimal_face_containing(c: Cone, x: Sequence) -> Cone:
    """Smallest face of ``c`` containing the point ``x`` (which must lie in ``c``)."""
    if not contains(c, x):
        raise ValueError("point is not in the cone")
    xs = [Fraction(t) for t in x]
    tight = [a for a in c.facet_normals if dot(a, xs) == 0]
    return face_from_normals(c, tight)


@dataclass(frozen=True)
class AffineSliceResult:
    kind: str
    point: tuple | None = None
    interior: bool | None = None


def affine_slice(subspace_basis, v: Sequence, c: Cone) -> AffineSliceResult:
    """Classify (span(subspace_basis) + v) ∩ c as empty, a point, or infinite.

    ``subspace_basis`` holds the spanning vectors as columns.
    """
    n = c.ambient_rank
    B = as_matrix(subspace_basis) if not isinstance(subspace_basis, IntMatrix) else subspace_basis
    if B.rows == 0 and B.cols == 0:
        B = IntMatrix.zeros(n, 0)
    if B.rows != n or len(v) != n:
        raise ValueError("rank mismatch in affine_slice")
    basis = canonical_column_basis(B.columns(), n) if B.cols else B
    k = basis.cols
    vs = [Fraction(t) for t in v]

    def row(a):
        coeffs = [dot(a, basis.col(j)) for j in range(k)] + [dot(a, vs)]
        return primitive(coeffs) if any(coeffs) else tuple(0 for _ in coeffs)

    ineqs = [row(a) for a in c.facet_normals]
    ineqs.append(tuple([0] * k + [1]))
    eqs = [row(e) for e in c.equations]
    rays, lin = _hrep_to_vrep(k + 1, ineqs, eqs)
    verts = [r for r in rays if r[k] > 0]
    if not verts:
        return AffineSliceResult("empty")
    if lin or any(r[k] == 0 for r in rays) or len(verts) > 1:
        return AffineSliceResult("infinite")
    r = verts[0]
    t = [Fraction(r[j], r[k]) for j in range(k)]
    pt = tuple(sum((basis[i, j] * t[j] for j in range(k)), Fraction(0)) + vs[i] for i in range(n))
    return AffineSliceResult("point", pt, membership(c, pt) == RELATIVE_INTERIOR)


def cone_fiber_product(c1: Cone, f1, c2: Cone, f2) -> Cone:
    """{(x, z) in c1 x c2 : f1(x) = f2(z)} in the coordinates of the fiber lattice.

    The fiber lattice basis is the one returned by ``lattice_fiber_product``.
    """
    f1, f2 = as_matrix(f1), as_matrix(f2)
    k, (p1, p2) = lattice_fiber_product(f1, f2)
    t1, t2 = p1.transpose(), p2.transpose()
    ineqs = [t1 @ a for a in c1.facet_normals] + [t2 @ a for a in c2.facet_normals]
    eqs = [t1 @ e for e in c1.equations] + [t2 @ e for e in c2.equations]
    return cone_from_inequalities(k, ineqs, eqs)


def product_cone(cones: Sequence[Cone]) -> Cone:
    """Cartesian product, coordinates concatenated in order."""
    total = sum(c.ambient_rank for c in cones)
    rays, lin = [], []
    off = 0
    for c in cones:
        pad_l = [0] * off
        pad_r = [0] * (total - off - c.ambient_rank)
        rays += [tuple(pad_l + list(r) + pad_r) for r in c.rays]
        lin += [tuple(pad_l + list(l) + pad_r) for l in c.lineality]
        off += c.ambient_rank
    return cone_from_rays(total, rays, lin)


def cone_to_json(c: Cone) -> dict:
    return {
        "ambient_rank": c.ambient_rank,
        "rays": [[str(x) for x in r] for r in c.rays],
        "facet_normals": [[str(x) for x in a] for a in c.facet_normals],
        "lineality": [[str(x) for x in l] for l in c.lineality],
        "equations": [[str(x) for x in e] for e in c.equations],
    }


def cone_from_json(d: dict) -> Cone:
    rays = [[int(x) for x in r] for r in d.get("rays", [])]
    lin = [[int(x) for x in l] for l in d.get("lineality", [])]
    return cone_from_rays(int(d["ambient_rank"]), rays, lin)
