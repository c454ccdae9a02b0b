"""Independent reference computations used only by the tests.

Nothing here imports tropsplit; the point is to compare against code
that shares no logic with the package.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import reduce
from math import gcd
from random import Random

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors


def sympy_divisors(rows):
    if not rows or not rows[0]:
        return ()
    return tuple(int(d) for d in invariant_factors(Matrix(rows), domain=ZZ))


def det(rows):
    """Exact determinant by fraction-valued elimination."""
    a = [[Fraction(x) for x in r] for r in rows]
    n = len(a)
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            out = -out
        out *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            for k in range(c, n):
                a[r][k] -= f * a[c][k]
    return int(out)


def rank_of(rows):
    return Matrix(rows).rank() if rows and rows[0] else 0


def minors_gcd(rows):
    """gcd of the maximal nonvanishing minors: the saturation index of the column span."""
    r = rank_of(rows)
    if r == 0:
        return 1
    n, k = len(rows), len(rows[0])
    g = 0
    for ri in itertools.combinations(range(n), r):
        for ci in itertools.combinations(range(k), r):
            g = gcd(g, det([[rows[i][j] for j in ci] for i in ri]))
    return abs(g)


def coset_count(rows, modulus):
    """[Z^n : L] by closing the columns under addition inside (Z/modulus)^n.

    Valid when modulus * Z^n is contained in L.
    """
    n = len(rows)
    gens = [tuple(rows[i][j] % modulus for i in range(n)) for j in range(len(rows[0]))]
    seen = {tuple([0] * n)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple((a + b) % modulus for a, b in zip(x, g))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return modulus ** n // len(seen)


def coset_saturation_index(rows):
    """[L^sat : L] from |Z^n / (L + D Z^n)| with D killing the torsion.

    That quotient has order (torsion) * D^(n - rank), and it is counted by
    closing the columns under addition modulo D.
    """
    divs = [d for d in sympy_divisors(rows) if d]
    D = lcm_all(divs) if divs else 1
    n, r = len(rows), len(divs)
    if D == 1:
        return 1
    return coset_count(rows, D) // D ** (n - r)


def random_small_matrices(count, seed=2024, max_rank=3, entry=5, max_divisor=6):
    """Deterministic list of integer matrices with small elementary divisors."""
    rng = Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(1, max_rank)
        k = rng.randint(1, max_rank)
        rows = [[rng.randint(-entry, entry) for _ in range(k)] for _ in range(n)]
        divs = [d for d in sympy_divisors(rows) if d]
        if all(d <= max_divisor for d in divs):
            out.append(rows)
    return out


def lcm_all(xs):
    return reduce(lambda a, b: a * b // gcd(a, b), xs, 1)


def ray_affine_solve(f_col, v, ray):
    """Solve t * f_col + v = s * ray for (t, s); None when no unique solution (2D only)."""
    a, b = f_col[0], -ray[0]
    c, d = f_col[1], -ray[1]
    dt = a * d - b * c
    if dt == 0:
        return None
    rhs = (-v[0], -v[1])
    t = Fraction(rhs[0] * d - b * rhs[1], dt)
    s = Fraction(a * rhs[1] - c * rhs[0], dt)
    return t, s


def _primitive(v):
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return tuple(int(x) // g for x in v) if g else tuple(int(x) for x in v)


def brute_facets(gens, d):
    """Facet normals of a full-dimensional cone by trying every (d-1)-subset of generators."""
    out = set()
    for sub in itertools.combinations(gens, d - 1):
        ns = Matrix(list(sub)).nullspace() if sub else [Matrix.eye(d).col(i) for i in range(d)]
        if len(ns) != 1:
            continue
        col = ns[0]
        den = lcm_all([int(x.q) for x in col])
        a = _primitive([int(x * den) for x in col])
        for s in (1, -1):
            cand = tuple(s * x for x in a)
            vals = [sum(p * q for p, q in zip(cand, g)) for g in gens]
            if all(v >= 0 for v in vals):
                tight = [g for g, v in zip(gens, vals) if v == 0]
                if rank_of(tight) == d - 1:
                    out.add(cand)
    return sorted(out)
