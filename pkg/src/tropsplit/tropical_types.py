"""Decorated tropical types, their basic and evaluation cones, splitting and contraction.

Conventions
-----------
* ``u`` of an edge is the displacement from tail to head:
  ``V_head - V_tail = l_E * u``.
* A marking on an edge sits at ``V_tail + l_p * u`` with ``0 <= l_p <= l_E``.
* A marking on a leg sits at ``V_v + l_p * u`` and must lie in sigma(leg).
* Cutting an edge ``E`` produces a leg ``E+`` at the tail carrying ``u``
  and a leg ``E-`` at the head carrying ``-u``.

Coordinates of an evaluation cone are ordered: vertex positions (in the
lattice of each vertex cell, vertices in type order), then edge lengths
in edge order, then marking positions in split-set order.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .fans import Fan
from .lattice import IntMatrix, dot
from .polyhedral import (
    RELATIVE_INTERIOR,
    Cone,
    cone_from_inequalities,
    face_from_normals,
    membership,
)


class TypeError_(ValueError):
    """Structured error for type computations; ``kind`` is a short tag."""

    def __init__(self, kind: str, message: str = ""):
        super().__init__(f"{kind}: {message}" if message else kind)
        self.kind = kind


# ---------------------------------------------------------------------
# curve classes

@dataclass(frozen=True)
class CurveClass:
    """Formal integer combination of opaque class symbols."""

    terms: tuple = ()

    @classmethod
    def of(cls, spec) -> "CurveClass":
        if spec is None or spec == "0" or spec == 0:
            return cls()
        if isinstance(spec, CurveClass):
            return spec
        if isinstance(spec, str):
            return cls(((spec, 1),))
        if isinstance(spec, dict):
            return cls._norm((str(k), int(v)) for k, v in spec.items())
        raise TypeError_("schema", f"bad curve class {spec!r}")

    @classmethod
    def _norm(cls, pairs: Iterable) -> "CurveClass":
        acc: dict[str, int] = {}
        for s, c in pairs:
            acc[s] = acc.get(s, 0) + c
        return cls(tuple(sorted((s, c) for s, c in acc.items() if c)))

    def __add__(self, other: "CurveClass") -> "CurveClass":
        return CurveClass._norm(list(self.terms) + list(other.terms))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for s, c in self.terms:
            parts.append(s if c == 1 else f"{c}*{s}")
        return " + ".join(parts)

    def to_json(self):
        if not self.terms:
            return "0"
        if len(self.terms) == 1 and self.terms[0][1] == 1:
            return self.terms[0][0]
        return {s: str(c) for s, c in self.terms}


# ---------------------------------------------------------------------
# cone complexes

@dataclass(frozen=True)
class ConeComplex:
    cells: tuple  # (lattice_rank, Cone)
    face_arrows: tuple  # (src, tgt, IntMatrix)
    _reach: dict = field(default=None, compare=False, repr=False, hash=False)
    fan: object = field(default=None, compare=False, repr=False, hash=False)  # source fan, if any

    def __post_init__(self):
        adj: dict[int, list] = {}
        for s, t, m in self.face_arrows:
            adj.setdefault(s, []).append((t, m))
        reach = {}
        for s, (r, _) in enumerate(self.cells):
            seen = {s: IntMatrix.identity(r)}
            stack = [s]
            while stack:
                a = stack.pop()
                for b, m in adj.get(a, ()):
                    if b not in seen:
                        seen[b] = m @ seen[a]
                        stack.append(b)
            for t, m in seen.items():
                reach[(s, t)] = m
        object.__setattr__(self, "_reach", reach)

    @classmethod
    def from_fan(cls, fan: Fan) -> "ConeComplex":
        n = fan.lattice_rank
        cells = tuple((n, c) for c in fan.cones)
        ident = IntMatrix.identity(n)
        arrows = []
        for j in range(len(fan.cones)):
            for i in fan.faces_of(j):
                if i != j:
                    arrows.append((i, j, ident))
        return cls(cells, tuple(arrows), fan=fan)

    def rank(self, i: int) -> int:
        return self.cells[i][0]

    def cone(self, i: int) -> Cone:
        return self.cells[i][1]

    def arrow(self, src: int, tgt: int) -> IntMatrix | None:
        return self._reach.get((src, tgt))

    def is_face(self, src: int, tgt: int) -> bool:
        return (src, tgt) in self._reach

    @property
    def has_identity_arrows(self) -> bool:
        return all(
            m.rows == m.cols and m == IntMatrix.identity(m.rows) for _, _, m in self.face_arrows
        )

    def find_face_cell(self, cone: Cone, within: int) -> int | None:
        for j in range(len(self.cells)):
            if self.is_face(j, within) and self.cells[j][1] == cone:
                return j
        return None


# ---------------------------------------------------------------------
# types

@dataclass(frozen=True)
class Vertex:
    id: str
    sigma: int
    genus: int = 0
    curve_class: CurveClass = CurveClass()


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    sigma: int
    u: tuple


@dataclass(frozen=True)
class Leg:
    id: str
    vertex: str
    sigma: int
    u: tuple


@dataclass(frozen=True)
class DecoratedType:
    vertices: tuple
    edges: tuple = ()
    legs: tuple = ()
    split_set: tuple = ()

    def vertex(self, vid: str) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def edge(self, eid: str) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def leg(self, lid: str) -> Leg:
        for l in self.legs:
            if l.id == lid:
                return l
        raise KeyError(lid)

    def element(self, xid: str):
        for coll in (self.edges, self.legs):
            for x in coll:
                if x.id == xid:
                    return x
        raise KeyError(xid)

    @property
    def vertex_ids(self) -> list[str]:
        return [v.id for v in self.vertices]

    def with_split_set(self, S: Sequence[str]) -> "DecoratedType":
        return replace(self, split_set=tuple(S))

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        comps = _components([v.id for v in self.vertices], [(e.tail, e.head) for e in self.edges])
        return len(comps) == 1


def _components(vids: Sequence[str], pairs: Iterable[tuple]) -> list[list[str]]:
    parent = {v: v for v in vids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb, key=vids.index)] = min(ra, rb, key=vids.index)
    groups: dict[str, list[str]] = {}
    for v in vids:
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values(), key=lambda g: vids.index(g[0]))


def validate_type(t: DecoratedType, cx: ConeComplex, require_connected: bool = False) -> list[str]:
    """List of human-readable violations (empty when valid)."""
    out = []
    ids = [v.id for v in t.vertices]
    if len(set(ids)) != len(ids):
        out.append("duplicate vertex id")
    el_ids = [e.id for e in t.edges] + [l.id for l in t.legs]
    if len(set(el_ids)) != len(el_ids):
        out.append("duplicate edge or leg id")
    vset = set(ids)
    ncell = len(cx.cells)

    def cell_ok(what, s):
        if not isinstance(s, int) or not 0 <= s < ncell:
            out.append(f"{what}: sigma {s!r} is not a cell")
            return False
        return True

    for v in t.vertices:
        cell_ok(f"vertex {v.id}", v.sigma)
        if v.genus < 0:
            out.append(f"vertex {v.id}: negative genus")
    for e in t.edges:
        if e.tail not in vset or e.head not in vset:
            out.append(f"edge {e.id}: unknown endpoint")
            continue
        if not cell_ok(f"edge {e.id}", e.sigma):
            continue
        if len(e.u) != cx.rank(e.sigma):
            out.append(f"edge {e.id}: contact order has wrong length")
        for end in (e.tail, e.head):
            s = t.vertex(end).sigma
            if 0 <= s < ncell and not cx.is_face(s, e.sigma):
                out.append(f"edge {e.id}: sigma({end}) is not a face of sigma({e.id})")
    for l in t.legs:
        if l.vertex not in vset:
            out.append(f"leg {l.id}: unknown vertex")
            continue
        if not cell_ok(f"leg {l.id}", l.sigma):
            continue
        if len(l.u) != cx.rank(l.sigma):
            out.append(f"leg {l.id}: contact order has wrong length")
        s = t.vertex(l.vertex).sigma
        if 0 <= s < ncell and not cx.is_face(s, l.sigma):
            out.append(f"leg {l.id}: sigma({l.vertex}) is not a face of sigma({l.id})")
    for p in t.split_set:
        if p not in el_ids:
            out.append(f"split element {p} is not an edge or leg")
    if require_connected and not t.is_connected():
        out.append("graph is not connected")
    return out


def split_type(t: DecoratedType, S: Sequence[str]):
    """Cut the edges in ``S``; return (component types, pairing edge -> ((i, leg), (j, leg)))."""
    S = list(S)
    edge_ids = {e.id for e in t.edges}
    for p in S:
        if p not in edge_ids:
            raise TypeError_("schema", f"{p} is not an edge")
    kept = [e for e in t.edges if e.id not in S]
    comps = _components(t.vertex_ids, [(e.tail, e.head) for e in kept])
    where = {v: i for i, c in enumerate(comps) for v in c}
    new_legs: list[list[Leg]] = [[] for _ in comps]
    pairing = {}
    for eid in S:
        e = t.edge(eid)
        a, b = where[e.tail], where[e.head]
        lp = Leg(f"{eid}+", e.tail, e.sigma, tuple(e.u))
        lm = Leg(f"{eid}-", e.head, e.sigma, tuple(-x for x in e.u))
        new_legs[a].append(lp)
        new_legs[b].append(lm)
        pairing[eid] = ((a, lp.id), (b, lm.id))
    types = []
    for i, c in enumerate(comps):
        cs = set(c)
        types.append(
            DecoratedType(
                vertices=tuple(v for v in t.vertices if v.id in cs),
                edges=tuple(e for e in kept if e.tail in cs),
                legs=tuple(l for l in t.legs if l.vertex in cs) + tuple(new_legs[i]),
                split_set=tuple(l.id for l in new_legs[i]),
            )
        )
    return types, pairing


# ---------------------------------------------------------------------
# contractions

def _fibre_genus_excess(fibre: Sequence[str], contracted: Sequence[Edge]) -> int:
    """First Betti number of the contracted subgraph on ``fibre``."""
    n_comp = len(_components(list(fibre), [(e.tail, e.head) for e in contracted]))
    return len(contracted) - len(fibre) + n_comp


def is_contraction(rho: DecoratedType, tau: DecoratedType, vertex_map: dict, edge_map: dict, cx: ConeComplex | None = None) -> bool:
    """True iff the maps describe tau as an edge contraction of rho.

    ``edge_map`` sends each edge of rho to an edge of tau or to None
    (contracted).  Legs are matched by id unless ``edge_map`` names them.
    When ``cx`` is given, sigma of every tau element must be a face of
    sigma of each preimage.
    """
    try:
        return _check_contraction(rho, tau, vertex_map, edge_map, cx)
    except KeyError:
        return False


def _check_contraction(rho, tau, vmap, emap, cx):
    if set(vmap) != set(rho.vertex_ids) or set(vmap.values()) != set(tau.vertex_ids):
        return False
    contracted = [e for e in rho.edges if emap.get(e.id) is None]
    surviving = [e for e in rho.edges if emap.get(e.id) is not None]
    if sorted(emap[e.id] for e in surviving) != sorted(e.id for e in tau.edges):
        return False
    for e in contracted:
        if vmap[e.tail] != vmap[e.head]:
            return False
    lmap = {l.id: emap.get(l.id, l.id) for l in rho.legs}
    if sorted(lmap.values()) != sorted(l.id for l in tau.legs):
        return False

    def face(a, b):
        return cx is None or cx.is_face(a, b)

    for w in tau.vertices:
        fibre = [v for v in rho.vertex_ids if vmap[v] == w.id]
        inner = [e for e in contracted if vmap[e.tail] == w.id]
        if len(_components(fibre, [(e.tail, e.head) for e in inner])) != 1:
            return False
        genus = sum(rho.vertex(v).genus for v in fibre) + _fibre_genus_excess(fibre, inner)
        if genus != w.genus:
            return False
        cls = CurveClass()
        for v in fibre:
            cls = cls + rho.vertex(v).curve_class
        if cls != w.curve_class:
            return False
        if not all(face(w.sigma, rho.vertex(v).sigma) for v in fibre):
            return False
        if not all(face(w.sigma, e.sigma) for e in inner):
            return False
    for e in surviving:
        f = tau.edge(emap[e.id])
        if (vmap[e.tail], vmap[e.head]) != (f.tail, f.head) or tuple(e.u) != tuple(f.u):
            return False
        if not face(f.sigma, e.sigma):
            return False
    for l in rho.legs:
        m = tau.leg(lmap[l.id])
        if vmap[l.vertex] != m.vertex or tuple(l.u) != tuple(m.u):
            return False
        if not face(m.sigma, l.sigma):
            return False
    return True


# ---------------------------------------------------------------------
# evaluation cones

@dataclass(frozen=True)
class EvaluationCone:
    ambient_rank: int
    cone: Cone
    legend: tuple  # ("V", vertex id, k) | ("l", edge id) | ("lp", marking id)
    evt: IntMatrix
    evt_blocks: tuple  # (marking id, first row, rank)

    def index(self, *key) -> int:
        return self.legend.index(tuple(key))


def _coordinates(t: DecoratedType, cx: ConeComplex):
    legend = []
    vpos = {}
    for v in t.vertices:
        vpos[v.id] = len(legend)
        legend += [("V", v.id, k) for k in range(cx.rank(v.sigma))]
    epos = {}
    for e in t.edges:
        epos[e.id] = len(legend)
        legend.append(("l", e.id))
    ppos = {}
    for p in t.split_set:
        ppos[p] = len(legend)
        legend.append(("lp", p))
    return legend, vpos, epos, ppos


def _marking_affine(t, cx, p, vpos, epos, ppos, width):
    """Rows (in the marking cell's lattice) of the marking position, and its cell."""
    try:
        e = t.edge(p)
        base_v, cell, u = e.tail, e.sigma, e.u
    except KeyError:
        l = t.leg(p)
        base_v, cell, u = l.vertex, l.sigma, l.u
    A = cx.arrow(t.vertex(base_v).sigma, cell)
    if A is None:
        raise TypeError_("math", f"no face arrow for marking {p}")
    rows = []
    for i in range(cx.rank(cell)):
        row = [0] * width
        for k in range(A.cols):
            row[vpos[base_v] + k] += A[i, k]
        row[ppos[p]] += u[i]
        rows.append(row)
    return rows, cell


def evaluation_cone(t: DecoratedType, cx: ConeComplex, check_realizable: bool = True) -> EvaluationCone:
    """Cone of tropical maps of type ``t`` with one marking per split element."""
    bad = validate_type(t, cx)
    if bad:
        raise TypeError_("math", "; ".join(bad))
    legend, vpos, epos, ppos = _coordinates(t, cx)
    w = len(legend)
    ineqs, eqs = [], []

    def pad(vec, off):
        row = [0] * w
        for k, x in enumerate(vec):
            row[off + k] = x
        return row

    for v in t.vertices:
        c = cx.cone(v.sigma)
        ineqs += [pad(a, vpos[v.id]) for a in c.facet_normals]
        eqs += [pad(e, vpos[v.id]) for e in c.equations]
    for e in t.edges:
        ineqs.append(pad([1], epos[e.id]))
        At = cx.arrow(t.vertex(e.tail).sigma, e.sigma)
        Ah = cx.arrow(t.vertex(e.head).sigma, e.sigma)
        for i in range(cx.rank(e.sigma)):
            row = [0] * w
            for k in range(Ah.cols):
                row[vpos[e.head] + k] += Ah[i, k]
            for k in range(At.cols):
                row[vpos[e.tail] + k] -= At[i, k]
            row[epos[e.id]] -= e.u[i]
            eqs.append(row)
    evt_rows, blocks = [], []
    for p in t.split_set:
        rows, cell = _marking_affine(t, cx, p, vpos, epos, ppos, w)
        blocks.append((p, len(evt_rows), len(rows)))
        evt_rows += rows
        ineqs.append(pad([1], ppos[p]))
        if p in epos:
            row = [0] * w
            row[epos[p]] = 1
            row[ppos[p]] = -1
            ineqs.append(row)
        else:
            c = cx.cone(cell)
            ineqs += [[dot(a, col) for col in zip(*rows)] for a in c.facet_normals]
            eqs += [[dot(a, col) for col in zip(*rows)] for a in c.equations]
    cone = cone_from_inequalities(w, ineqs, eqs)
    evt = IntMatrix.from_rows(evt_rows, w) if evt_rows else IntMatrix.zeros(0, w)
    ec = EvaluationCone(w, cone, tuple(legend), evt, tuple(blocks))
    if check_realizable:
        _check_realizable(t, cx, ec)
    return ec


def basic_cone(t: DecoratedType, cx: ConeComplex) -> EvaluationCone:
    return evaluation_cone(t.with_split_set(()), cx)


def _check_realizable(t, cx, ec):
    x = ec.cone.interior_point()
    for v in t.vertices:
        pos = ec.index("V", v.id, 0) if cx.rank(v.sigma) else None
        pt = x[pos:pos + cx.rank(v.sigma)] if pos is not None else ()
        if membership(cx.cone(v.sigma), pt) != RELATIVE_INTERIOR:
            raise TypeError_("unrealizable", f"vertex {v.id} cannot reach the interior of its cell")
    for e in t.edges:
        if x[ec.index("l", e.id)] <= 0:
            raise TypeError_("unrealizable", f"edge {e.id} is forced to length zero")


def evt_map(ec: EvaluationCone) -> IntMatrix:
    return ec.evt


# ---------------------------------------------------------------------
# faces and contracted types

def _minimal_cell(cx: ConeComplex, within: int, point, direction=None) -> int:
    """Smallest face cell of ``within`` containing point + t*direction for small t > 0."""
    c = cx.cone(within)
    tight = []
    for a in c.facet_normals:
        if dot(a, point) == 0 and (direction is None or dot(a, direction) == 0):
            tight.append(a)
    face = face_from_normals(c, tight)
    j = cx.find_face_cell(face, within)
    if j is None:
        raise TypeError_("math", "face of a cell is not a cell of the complex")
    return j


def face_to_type(t: DecoratedType, cx: ConeComplex, face: Cone, ec: EvaluationCone | None = None):
    """Contracted type for a face of the evaluation cone of ``t``.

    Returns ``(type, vertex_map, edge_map)`` where the maps go from ``t``
    to the new type.  Needs a complex whose face arrows are identities.
    """
    if not cx.has_identity_arrows:
        raise TypeError_("unsupported", "face_to_type needs identity face arrows")
    ec = ec or evaluation_cone(t, cx, check_realizable=False)
    gens = face.generators()
    x = face.interior_point()

    def coord(key):
        return ec.index(*key)

    zero_edges = [e for e in t.edges if all(g[coord(("l", e.id))] == 0 for g in gens)]
    for p in t.split_set:
        if any(e.id == p for e in zero_edges):
            raise TypeError_("unsupported", f"marked edge {p} is contracted")
    comps = _components(t.vertex_ids, [(e.tail, e.head) for e in zero_edges])
    vmap = {}
    new_vertices = []

    def vpoint(vid):
        r = cx.rank(t.vertex(vid).sigma)
        if r == 0:
            return ()
        i = coord(("V", vid, 0))
        return tuple(x[i:i + r])

    for comp in comps:
        nid = comp[0] if len(comp) == 1 else "+".join(sorted(comp))
        members = [t.vertex(v) for v in comp]
        inner = [e for e in zero_edges if e.tail in comp]
        genus = sum(m.genus for m in members) + _fibre_genus_excess(comp, inner)
        cls = CurveClass()
        for m in members:
            cls = cls + m.curve_class
        base = members[0]
        sigma = _minimal_cell(cx, base.sigma, vpoint(base.id))
        new_vertices.append(Vertex(nid, sigma, genus, cls))
        for v in comp:
            vmap[v] = nid
    new_edges, emap = [], {}
    for e in t.edges:
        if e in zero_edges:
            emap[e.id] = None
            continue
        sigma = _minimal_cell(cx, e.sigma, vpoint(e.tail), e.u)
        new_edges.append(Edge(e.id, vmap[e.tail], vmap[e.head], sigma, tuple(e.u)))
        emap[e.id] = e.id
    new_legs = []
    for l in t.legs:
        sigma = _minimal_cell(cx, l.sigma, vpoint(l.vertex), l.u)
        new_legs.append(Leg(l.id, vmap[l.vertex], sigma, tuple(l.u)))
    nt = DecoratedType(tuple(new_vertices), tuple(new_edges), tuple(new_legs), t.split_set)
    return nt, vmap, emap


def contraction_embedding(rho: DecoratedType, tau: DecoratedType, vmap: dict, emap: dict, cx: ConeComplex) -> IntMatrix:
    """Linear map from evaluation coordinates of ``tau`` to those of ``rho``.

    Positions are transported along face arrows, contracted edges get
    length zero and markings are matched by id.
    """
    lr, vr, er, pr = _coordinates(rho, cx)
    lt, vt, et, pt = _coordinates(tau, cx)
    cols = [[0] * len(lr) for _ in lt]
    for v in rho.vertices:
        w = tau.vertex(vmap[v.id])
        A = cx.arrow(w.sigma, v.sigma)
        if A is None:
            raise TypeError_("math", f"sigma of {w.id} is not a face of sigma of {v.id}")
        for k in range(A.cols):
            for i in range(A.rows):
                cols[vt[w.id] + k][vr[v.id] + i] += A[i, k]
    for e in rho.edges:
        f = emap.get(e.id)
        if f is not None:
            cols[et[f]][er[e.id]] = 1
    for p in rho.split_set:
        cols[pt[p]][pr[p]] = 1
    return IntMatrix.from_columns([tuple(c) for c in cols], len(lr)) if cols else IntMatrix.zeros(len(lr), 0)


# ---------------------------------------------------------------------
# JSON

def type_to_json(t: DecoratedType) -> dict:
    return {
        "vertices": [
            {"id": v.id, "genus": str(v.genus), "class": v.curve_class.to_json(), "sigma": str(v.sigma)}
            for v in t.vertices
        ],
        "edges": [
            {"id": e.id, "tail": e.tail, "head": e.head, "sigma": str(e.sigma), "u": [str(x) for x in e.u]}
            for e in t.edges
        ],
        "legs": [
            {"id": l.id, "vertex": l.vertex, "sigma": str(l.sigma), "u": [str(x) for x in l.u]}
            for l in t.legs
        ],
        "split_set": list(t.split_set),
    }


def type_from_json(d: dict, resolve_sigma=int) -> DecoratedType:
    """Parse a type; ``resolve_sigma`` turns the JSON sigma field into a cell index."""
    verts = tuple(
        Vertex(str(v["id"]), resolve_sigma(v["sigma"]), int(v.get("genus", 0)), CurveClass.of(v.get("class")))
        for v in d.get("vertices", [])
    )
    edges = tuple(
        Edge(str(e["id"]), str(e["tail"]), str(e["head"]), resolve_sigma(e["sigma"]), tuple(int(x) for x in e["u"]))
        for e in d.get("edges", [])
    )
    legs = tuple(
        Leg(str(l["id"]), str(l["vertex"]), resolve_sigma(l["sigma"]), tuple(int(x) for x in l["u"]))
        for l in d.get("legs", [])
    )
    return DecoratedType(verts, edges, legs, tuple(str(p) for p in d.get("split_set", [])))
