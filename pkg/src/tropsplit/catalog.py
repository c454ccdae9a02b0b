"""Named instances and random generators used by tests, demos and the CLI docs."""
from __future__ import annotations

import math
from random import Random

from .fans import Fan, build_fan, fan_from_cones, projective_space_fan
from .lattice import IntMatrix, primitive, vgcd
from .polyhedral import Cone, cone_from_rays, map_cone
from .splitting import (
    STRICT,
    TRANSVERSE,
    AmbientType,
    SplitPoint,
    SplittingInstance,
)
from .tropical_types import (
    ConeComplex,
    CurveClass,
    DecoratedType,
    Edge,
    Leg,
    TypeError_,
    Vertex,
    evaluation_cone,
    split_type,
)


def cone_index(fan: Fan, *rays) -> int:
    i = fan.index_of(cone_from_rays(fan.lattice_rank, rays))
    if i is None:
        raise KeyError(f"no cone on rays {rays}")
    return i


# ---------------------------------------------------------------------
# small named instances

def a1_instance(mode: str = STRICT) -> SplittingInstance:
    """Two vertices on a single ray joined by an edge of contact order 1, trivial base."""
    fan = build_fan(1, [[0]], [(1,)])
    cx = ConeComplex.from_fan(fan)
    ray = cone_index(fan, (1,))
    tau = DecoratedType(
        (Vertex("v1", ray, 0, CurveClass.of("A1")), Vertex("v2", ray, 0, CurveClass.of("A2"))),
        (Edge("E", "v1", "v2", ray, (1,)),),
        (),
        ("E",),
    )
    pts = {"E": SplitPoint(fan, IntMatrix.zeros(0, 1), IntMatrix.identity(1))}
    return SplittingInstance(0, cx, tau, pts, displacement=(1,), injectivity=mode)


def degeneration_instance(mode: str = TRANSVERSE) -> SplittingInstance:
    """Base of rank 1; the edge runs horizontally between rays (0,1) and (1,1)."""
    fan = build_fan(2, [[0, 1]], [(0, 1), (1, 1)])
    cx = ConeComplex.from_fan(fan)
    tau = DecoratedType(
        (Vertex("v1", cone_index(fan, (0, 1))), Vertex("v2", cone_index(fan, (1, 1)))),
        (Edge("E", "v1", "v2", cone_index(fan, (0, 1), (1, 1)), (1, 0)),),
        (),
        ("E",),
    )
    pts = {"E": SplitPoint(fan, IntMatrix.from_rows([[0, 1]]), IntMatrix.identity(2))}
    return SplittingInstance(1, cx, tau, pts, displacement=(1, 1), injectivity=mode)


def plane_instance(two_ambients: bool = True, v=(3, 1), mode: str = TRANSVERSE) -> SplittingInstance:
    """Projective plane, trivial base: an edge from the apex out along e1.

    The glued type alone has too little room, so ambient types with a
    vertex moved off the apex supply the candidates.
    """
    fan = projective_space_fan(2)
    cx = ConeComplex.from_fan(fan)
    e1 = cone_index(fan, (1, 0))
    tau = DecoratedType(
        (Vertex("v1", cone_index(fan)), Vertex("v2", e1)),
        (Edge("E", "v1", "v2", e1, (1, 0)),),
        (),
        ("E",),
    )
    pts = {"E": SplitPoint(fan, IntMatrix.zeros(0, 2), IntMatrix.identity(2))}
    _, t2 = split_type(tau, ["E"])[0]
    quad = cone_index(fan, (1, 0), (0, 1))
    w1 = DecoratedType(
        (Vertex("v1", cone_index(fan, (0, 1))),), (), (Leg("E+", "v1", quad, (1, 0)),), ("E+",)
    )
    lower = cone_index(fan, (1, 0), (-1, -1))
    w2 = DecoratedType(
        (Vertex("v2", lower),), (), (Leg("E-", "v2", lower, (-1, 0)),), ("E-",)
    )
    ident = (({"v1": "v1"}, {}), ({"v2": "v2"}, {}))
    amb = [AmbientType((w1, t2), ident)]
    if two_ambients:
        amb.append(AmbientType((w1, w2), ident))
    return SplittingInstance(0, cx, tau, pts, tuple(amb), tuple(v), injectivity=mode)


# ---------------------------------------------------------------------
# random fans

def random_complete_fan(rng: Random, n_rays: int | None = None, box: int = 3) -> Fan:
    """Complete rank-2 fan on random primitive rays with all angular gaps below pi."""
    pool = sorted(
        {primitive((x, y)) for x in range(-box, box + 1) for y in range(-box, box + 1) if (x, y) != (0, 0)}
    )
    while True:
        k = n_rays or rng.randint(3, 6)
        rays = rng.sample(pool, k)
        rays.sort(key=lambda r: math.atan2(r[1], r[0]))
        ok = True
        for i in range(k):
            a, b = rays[i], rays[(i + 1) % k]
            if a[0] * b[1] - a[1] * b[0] <= 0:
                ok = False
                break
        if ok:
            cones = [[i, (i + 1) % k] for i in range(k)]
            return build_fan(2, cones, rays)


# ---------------------------------------------------------------------
# random splitting instances

def _relint_point(rng: Random, cone: Cone, height_row=None, height=None):
    """Integer point in the relative interior, optionally on a prescribed level set."""
    for _ in range(200):
        coeffs = [rng.randint(1, 3) for _ in cone.rays]
        pt = [0] * cone.ambient_rank
        for c, r in zip(coeffs, cone.rays):
            for i, x in enumerate(r):
                pt[i] += c * x
        if height_row is not None:
            h = sum(a * b for a, b in zip(height_row, pt))
            if h == 0 or height % h:
                continue
            pt = [x * (height // h) for x in pt]
        return tuple(pt)
    return None


def _row_times_inverse(row, m):
    """Integer row ``row @ m^-1`` for a 2x2 matrix, or None when not integral."""
    (a, b), (c, d) = m
    det = a * d - b * c
    out = [row[0] * d - row[1] * c, -row[0] * b + row[1] * a]
    if any(x % det for x in out):
        return None
    return [x // det for x in out]


def random_instance(seed: int, mode: str = TRANSVERSE) -> SplittingInstance | None:
    """Two vertices joined by one or two edges inside a 2-dim cone.

    Base rank is 0 or 1; for rank 1 every ray lies over the positive base
    ray and contact orders are horizontal.  The lattice of each split
    edge may be embedded with a non-unimodular map to make the indices
    interesting.  Returns None when the random choices are unrealizable.
    """
    rng = Random(seed)
    b = rng.choice([0, 1])
    if b == 0:
        fan = random_complete_fan(rng)
    else:
        xs = sorted(rng.sample(range(-3, 4), rng.randint(2, 4)))
        rays = [(x, 1) for x in xs]
        fan = build_fan(2, [[i, i + 1] for i in range(len(rays) - 1)], rays)
    cx = ConeComplex.from_fan(fan)
    sigma = rng.choice(fan.cones_of_dim(2))
    sub = [j for j in fan.faces_of(sigma) if fan.cones[j].dim >= (1 if b else 0)]
    s1, s2 = rng.choice(sub), rng.choice(sub)
    pi = (0, 1)
    if b:
        h = rng.choice([2, 6])
        V1 = _relint_point(rng, fan.cones[s1], pi, h)
        V2 = _relint_point(rng, fan.cones[s2], pi, h)
    else:
        V1 = _relint_point(rng, fan.cones[s1])
        V2 = _relint_point(rng, fan.cones[s2])
    if V1 is None or V2 is None or V1 == V2:
        return None
    diff = tuple(y - x for x, y in zip(V1, V2))
    g = vgcd(diff)
    divisors = [d for d in range(1, g + 1) if g % d == 0]
    n_edges = rng.choice([1, 2])
    edges = []
    for k in range(n_edges):
        d = rng.choice(divisors)
        edges.append(Edge(f"E{k + 1}", "v1", "v2", sigma, tuple(x // d for x in diff)))
    classes = ["A", "B", "C"]
    tau = DecoratedType(
        (
            Vertex("v1", s1, rng.randint(0, 1), CurveClass.of(rng.choice(classes))),
            Vertex("v2", s2, rng.randint(0, 1), CurveClass.of(rng.choice(classes))),
        ),
        tuple(edges),
        (),
        (),
    )
    if n_edges == 2 and rng.random() < 0.3:
        S = ["E1"]
    else:
        S = [e.id for e in edges]
    tau = tau.with_split_set(tuple(S))
    try:
        evaluation_cone(tau, cx)
    except TypeError_:
        return None
    pts = {}
    for p in S:
        if rng.random() < 0.5:
            emb = [[1, 0], [0, 1]]
        else:
            emb = rng.choice([[[1, 1], [0, 2]], [[2, 0], [0, 1]], [[1, 0], [1, 2]], [[3, 1], [0, 1]], [[1, 2], [0, 1]]])
        to_base = IntMatrix.zeros(0, 2)
        if b:
            # the base map of N_p must restrict to the projection of N_X
            row = _row_times_inverse(pi, emb)
            if row is None:
                emb = [[1, 0], [0, 1]]
                row = list(pi)
            to_base = IntMatrix.from_rows([row])
        E = IntMatrix.from_rows(emb)
        fan_p = fan_from_cones(2, [map_cone(E, fan.cones[sigma])])
        pts[p] = SplitPoint(fan_p, to_base, E)
    ambient = ()
    if rng.random() < 0.5:
        comps, _ = split_type(tau, S)
        grown = []
        maps = []
        for c in comps:
            verts = tuple(Vertex(v.id, sigma, v.genus, v.curve_class) for v in c.vertices)
            grown.append(DecoratedType(verts, c.edges, c.legs, c.split_set))
            maps.append(({v.id: v.id for v in c.vertices}, {e.id: e.id for e in c.edges}))
        try:
            for gtype in grown:
                evaluation_cone(gtype, cx)
            ambient = (AmbientType(tuple(comps), tuple(maps)), AmbientType(tuple(grown), tuple(maps)))
        except TypeError_:
            ambient = ()
    return SplittingInstance(b, cx, tau, pts, ambient, None, injectivity=mode)
