"""Pushforward of torus-invariant strata along a displacement vector.

A stratum V_Y(tau) of a subtorus closure is moved off itself by a
generic lattice vector ``v``; the limit cycle is a sum of strata
V_X(delta) weighted by lattice indices.  Everything here is exact.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .fans import Fan, FanError, star_quotient
from .lattice import (
    INFINITE,
    IntMatrix,
    as_matrix,
    primitive,
    rational_rank,
    saturation_index,
    sublattice_index,
)
from .polyhedral import (
    Cone,
    affine_slice,
    contains_cone,
    map_cone,
)


class NotGenericError(ValueError):
    def __init__(self, report: "GenericityReport"):
        super().__init__("not generic")
        self.kind = "not generic"
        self.report = report


class InfiniteIndexError(ArithmeticError):
    kind = "infinite index"


@dataclass(frozen=True)
class GenericityReport:
    verdict: bool
    witnesses: tuple = ()  # (cone index, AffineSliceResult)


@dataclass(frozen=True)
class TorusCycle:
    fan: Fan
    terms: tuple  # sorted (cone index, coefficient), no zero coefficients
    warnings: tuple = ()

    def as_dict(self) -> dict:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms


def _map_pool(fn, items, workers):
    if workers and workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def integral_direction(v: Sequence) -> tuple:
    """Primitive integer vector on the ray through ``v`` (zero stays zero)."""
    return primitive(v)


def check_generic(fan: Fan, subspace, tau: int | None, v: Sequence, workers: int | None = None) -> GenericityReport:
    """Check that span(subspace) + v meets every complementary cone properly.

    The test runs in the star of ``tau`` (apex when ``tau`` is None) on
    the projected subspace and vector.  A cone of complementary dimension
    fails when the slice is infinite or a single non-interior point.
    Witness indices refer to cones of ``fan``.
    """
    n = fan.lattice_rank
    sub = _as_subspace(subspace, n)
    tau = fan.apex if tau is None else tau
    star, q = star_quotient(fan, tau)
    qs = q @ sub
    qv = tuple(sum(q[i, j] * v[j] for j in range(n)) for i in range(q.rows))
    d = rational_rank(qs.columns()) if qs.cols else 0
    target = star.lattice_rank - d
    back = {}
    for j in fan.cones_containing(tau):
        back[star.index_of(map_cone(q, fan.cones[j]))] = j
    idx = [i for i in range(len(star)) if star.cones[i].dim == target]

    def test(i):
        res = affine_slice(qs, qv, star.cones[i])
        bad = res.kind == "infinite" or (res.kind == "point" and not res.interior)
        return (back[i], res) if bad else None

    witnesses = sorted((w for w in _map_pool(test, idx, workers) if w), key=lambda w: w[0])
    return GenericityReport(not witnesses, tuple(witnesses))


def _as_subspace(subspace, n: int) -> IntMatrix:
    m = subspace if isinstance(subspace, IntMatrix) else as_matrix(subspace)
    if m.rows == 0 and m.cols == 0:
        return IntMatrix.zeros(n, 0)
    if m.rows != n:
        raise ValueError("subspace basis does not live in the fan lattice")
    return m


def image_cone_index(fanX: Fan, f_N: IntMatrix, tau: Cone) -> int:
    """Cone of ``fanX`` whose relative interior contains the image of relint(tau)."""
    img = map_cone(f_N, tau)
    j = fanX.cone_with_relint(img.interior_point())
    if j is None or not contains_cone(fanX.cones[j], img):
        raise FanError("math", "image of the source cone lies in no cone of the fan")
    return j


def required_dimension(fanX: Fan, f_N: IntMatrix, tau_prime: int) -> int:
    """dim N(X) - dim f_N(N(Y)) + dim(f_N(N(Y)) ∩ N_tau')."""
    cols = f_N.columns()
    d_f = rational_rank(cols) if cols else 0
    t = fanX.cones[tau_prime]
    t_gens = list(t.rays) + list(t.lineality)
    d_t = t.dim
    d_sum = rational_rank(cols + t_gens) if (cols or t_gens) else 0
    return fanX.lattice_rank - d_f + (d_f + d_t - d_sum)


def pushforward(
    fanX: Fan,
    f_N,
    tau: Cone,
    v: Sequence,
    stack_sublattice=None,
    workers: int | None = None,
):
    """Return (TorusCycle, stack_index) for the displaced stratum V_Y(tau).

    ``tau`` is a cone of the source lattice N(Y); ``f_N`` maps N(Y) into
    the lattice of ``fanX``.  Raises NotGenericError when ``v`` fails the
    genericity test.
    """
    f_N = as_matrix(f_N)
    n = fanX.lattice_rank
    if f_N.rows == 0 and f_N.cols == 0:
        f_N = IntMatrix.zeros(n, tau.ambient_rank)
    if f_N.rows != n or f_N.cols != tau.ambient_rank:
        raise ValueError("f_N does not match the lattices")
    v = integral_direction(v)
    tp = image_cone_index(fanX, f_N, tau)
    report = check_generic(fanX, f_N, tp, v, workers)
    if not report.verdict:
        raise NotGenericError(report)
    want = required_dimension(fanX, f_N, tp)
    cand = [j for j in fanX.cones_containing(tp) if fanX.cones[j].dim == want]

    def weigh(j):
        delta = fanX.cones[j]
        if affine_slice(f_N, v, delta).kind == "empty":
            return None
        gens = f_N.hstack(delta.span_basis())
        m = sublattice_index(gens, n)
        if m == INFINITE:
            raise InfiniteIndexError(f"cone {j} together with the image has infinite index")
        return (j, m)

    terms = tuple(t for t in _map_pool(weigh, cand, workers) if t)
    warnings = []
    if not terms:
        warnings.append("empty")
    if not fanX.is_complete():
        warnings.append("non-complete fan")
    stack_index = 1
    if stack_sublattice is not None:
        sq = as_matrix(stack_sublattice)
        if sq.cols and sq.rows != f_N.cols:
            raise ValueError("stack sublattice must live in the source lattice")
        _, q = star_quotient(fanX, tp)
        stack_index = saturation_index(q @ f_N) if q.rows and f_N.cols else 1
    return TorusCycle(fanX, tuple(sorted(terms)), tuple(warnings)), stack_index
