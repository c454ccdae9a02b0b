"""Fans, fan morphisms, star quotients and fiber products of fans."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .lattice import (
    IntMatrix,
    as_matrix,
    lattice_fiber_product,
    primitive,
    saturation_index,
)
from .polyhedral import (
    RELATIVE_INTERIOR,
    Cone,
    cone_fiber_product,
    cone_from_rays,
    contains_cone,
    faces,
    intersect_cones,
    is_face_of,
    map_cone,
    membership,
)


class FanError(ValueError):
    """Raised for invalid fan data.  ``kind`` is a short machine-readable tag."""

    def __init__(self, kind: str, message: str = ""):
        super().__init__(f"{kind}: {message}" if message else kind)
        self.kind = kind


@dataclass(frozen=True)
class Fan:
    lattice_rank: int
    rays: tuple
    cones: tuple  # canonical Cone objects, sorted by (dim, ray indices)
    cone_rays: tuple  # ray-index tuple for each cone
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.cones)})

    def __len__(self):
        return len(self.cones)

    def index_of(self, cone: Cone) -> int | None:
        return self._index.get(cone)

    @property
    def apex(self) -> int:
        return 0

    def dim(self, i: int) -> int:
        return self.cones[i].dim

    def is_face(self, i: int, j: int) -> bool:
        """True iff cone ``i`` is a face of cone ``j``."""
        return set(self.cone_rays[i]) <= set(self.cone_rays[j])

    def faces_of(self, j: int) -> list[int]:
        return [i for i in range(len(self.cones)) if self.is_face(i, j)]

    def cones_containing(self, i: int) -> list[int]:
        return [j for j in range(len(self.cones)) if self.is_face(i, j)]

    def maximal_cones(self) -> list[int]:
        out = []
        for j in range(len(self.cones)):
            if not any(k != j and self.is_face(j, k) for k in range(len(self.cones))):
                out.append(j)
        return out

    def cones_of_dim(self, d: int) -> list[int]:
        return [i for i, c in enumerate(self.cones) if c.dim == d]

    def cone_with_relint(self, x) -> int | None:
        """Index of the unique cone whose relative interior contains ``x``."""
        for i, c in enumerate(self.cones):
            if membership(c, x) == RELATIVE_INTERIOR:
                return i
        return None

    def is_complete(self) -> bool:
        n = self.lattice_rank
        maxi = self.maximal_cones()
        if any(self.cones[j].dim != n for j in maxi):
            return False
        if n == 0:
            return True
        for i in self.cones_of_dim(n - 1):
            if sum(1 for j in maxi if self.is_face(i, j)) != 2:
                return False
        return True

    def describe(self, i: int) -> list[list[int]]:
        return [list(self.rays[k]) for k in self.cone_rays[i]]


def build_fan(lattice_rank: int, cones: Sequence[Sequence[int]], rays: Sequence[Sequence[int]]) -> Fan:
    """Validate the given cones and close them under taking faces.

    Each entry of ``cones`` lists indices into ``rays``.  Rays are
    re-indexed in sorted order; rays not used by any cone are dropped.
    """
    rays = [tuple(int(x) for x in r) for r in rays]
    seen = set()
    for r in rays:
        if len(r) != lattice_rank:
            raise FanError("bad ray", f"{list(r)} is not in rank {lattice_rank}")
        if not any(r):
            raise FanError("bad ray", "zero vector")
        if primitive(r) != r:
            raise FanError("bad ray", f"{list(r)} is not primitive")
        if r in seen:
            raise FanError("bad ray", f"{list(r)} is repeated")
        seen.add(r)

    given = []
    for idx in cones:
        idx = list(idx)
        for k in idx:
            if not 0 <= k < len(rays):
                raise FanError("bad ray", f"index {k} out of range")
        gens = [rays[k] for k in idx]
        c = cone_from_rays(lattice_rank, gens)
        if c.lineality:
            raise FanError("overlap", f"cone on rays {idx} is not strongly convex")
        if set(c.rays) != set(gens):
            raise FanError("bad ray", f"cone on rays {idx} has a non-extreme generator")
        given.append(c)
    if not given:
        given.append(cone_from_rays(lattice_rank, []))

    uniq = list(dict.fromkeys(given))
    for a, b in combinations(uniq, 2):
        meet = intersect_cones(a, b)
        if not (is_face_of(meet, a) and is_face_of(meet, b)):
            raise FanError("overlap", f"{a!r} and {b!r} meet in a non-face")

    all_cones = {}
    for c in uniq:
        for f in faces(c):
            all_cones[f] = None
    fan_rays = sorted({r for c in all_cones for r in c.rays})
    pos = {r: i for i, r in enumerate(fan_rays)}
    keyed = sorted(
        ((c.dim, tuple(sorted(pos[r] for r in c.rays)), c) for c in all_cones),
        key=lambda t: (t[0], t[1]),
    )
    return Fan(
        lattice_rank,
        tuple(fan_rays),
        tuple(t[2] for t in keyed),
        tuple(t[1] for t in keyed),
    )


def fan_from_cones(lattice_rank: int, cones: Sequence[Cone]) -> Fan:
    """Build a fan from canonical pointed cones."""
    rays = sorted({r for c in cones for r in c.rays})
    pos = {r: i for i, r in enumerate(rays)}
    return build_fan(lattice_rank, [[pos[r] for r in c.rays] for c in cones], rays)


def star_quotient(fan: Fan, tau: int):
    """Fan of the stratum closure for cone ``tau`` and the quotient map.

    The quotient map has the primitive annihilator basis of span(tau) as
    rows, so its kernel is exactly the saturated span of ``tau``.
    """
    t = fan.cones[tau]
    n = fan.lattice_rank
    q = IntMatrix.from_rows(t.equations, n) if t.equations else IntMatrix.zeros(0, n)
    images = [map_cone(q, fan.cones[j]) for j in fan.cones_containing(tau)]
    return fan_from_cones(q.rows, images), q


def star_cone_map(fan: Fan, tau: int, star: Fan, q: IntMatrix) -> dict:
    """Map original cone index -> star cone index for cones containing ``tau``."""
    return {j: star.index_of(map_cone(q, fan.cones[j])) for j in fan.cones_containing(tau)}


@dataclass(frozen=True)
class FanMorphism:
    source: Fan
    target: Fan
    lattice_map: IntMatrix
    cone_assignment: tuple


def make_fan_morphism(source: Fan, target: Fan, matrix) -> FanMorphism:
    m = as_matrix(matrix)
    if m.rows == 0 and m.cols == 0:
        m = IntMatrix.zeros(target.lattice_rank, source.lattice_rank)
    if m.cols != source.lattice_rank or m.rows != target.lattice_rank:
        raise FanError("shape", "matrix does not match the fan ranks")
    assign = []
    for i, c in enumerate(source.cones):
        img = map_cone(m, c)
        j = target.cone_with_relint(img.interior_point())
        if j is None or not contains_cone(target.cones[j], img):
            raise FanError("not a morphism", f"image of source cone {i} lies in no target cone")
        assign.append(j)
    return FanMorphism(source, target, m, tuple(assign))


def fan_fiber_product(f: FanMorphism, g: FanMorphism):
    """Fiber product fan, its component count and the two projections."""
    if f.target.lattice_rank != g.target.lattice_rank:
        raise FanError("shape", "morphisms do not share a target")
    k, (p1, p2) = lattice_fiber_product(f.lattice_map, g.lattice_map)
    cells = []
    for a in f.source.maximal_cones():
        for b in g.source.maximal_cones():
            cells.append(
                cone_fiber_product(
                    f.source.cones[a], f.lattice_map, g.source.cones[b], g.lattice_map
                )
            )
    fan = fan_from_cones(k, list(dict.fromkeys(cells)))
    count = saturation_index(f.lattice_map.hstack(-g.lattice_map))
    proj = (make_fan_morphism(fan, f.source, p1), make_fan_morphism(fan, g.source, p2))
    return fan, count, proj


def minimal_cone_over(m: FanMorphism, target_cone: int) -> int:
    """Unique minimal source cone whose image meets relint(target_cone)."""
    tgt = m.target.cones[target_cone]
    cands = []
    for i, c in enumerate(m.source.cones):
        meet = intersect_cones(map_cone(m.lattice_map, c), tgt)
        if membership(tgt, meet.interior_point()) == RELATIVE_INTERIOR:
            cands.append(i)
    if not cands:
        raise FanError("none found", f"no source cone maps onto the interior of cone {target_cone}")
    minimal = [i for i in cands if not any(j != i and m.source.is_face(j, i) for j in cands)]
    if len(minimal) != 1:
        raise FanError("not unique", f"minimal candidates {minimal}")
    return minimal[0]


# ---------------------------------------------------------------------
# small standard fans used by tests and demos

def projective_space_fan(n: int) -> Fan:
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    rays.append(tuple(-1 for _ in range(n)))
    cones = [[k for k in range(n + 1) if k != skip] for skip in range(n + 1)]
    return build_fan(n, cones, rays)


def product_of_lines_fan(n: int) -> Fan:
    """Fan of (P^1)^n."""
    rays = []
    for i in range(n):
        rays.append(tuple(int(i == j) for j in range(n)))
        rays.append(tuple(-int(i == j) for j in range(n)))
    cones = []
    for signs in range(2 ** n):
        cones.append([2 * i + ((signs >> i) & 1) for i in range(n)])
    return build_fan(n, cones, rays)


def ray_fan(n: int = 1) -> Fan:
    """Fan of affine space: the positive orthant and its faces."""
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return build_fan(n, [list(range(n))], rays)


def point_fan() -> Fan:
    return build_fan(0, [[]], [])


def fan_to_json(fan: Fan) -> dict:
    return {
        "lattice_rank": fan.lattice_rank,
        "rays": [[str(x) for x in r] for r in fan.rays],
        "cones": [list(c) for c in fan.cone_rays],
    }


def fan_from_json(d: dict) -> Fan:
    rays = [[int(x) for x in r] for r in d.get("rays", [])]
    return build_fan(int(d["lattice_rank"]), d.get("cones", [[]]), rays)
