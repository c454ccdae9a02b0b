"""Generic displacement vectors and the multiplicities of the splitting formula.

An instance fixes a glued type ``tau`` with split edges ``S``, one
toric fan ``Sigma_p`` per split edge with a map to the base lattice, and
a list of ambient types whose faces are searched for the decorated types
appearing in the formula.

Injectivity of the restricted evaluation difference ``eps`` can be read
in two ways, selected with ``injectivity``:

``"strict"``
    ``eps`` is injective on the whole span of the candidate face.
``"transverse"``
    ``eps`` is injective on that span modulo the matched cone of the
    glued type (which ``eps`` always kills).

See the decisions ledger for why both exist.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from .fans import Fan, FanError, build_fan, fan_from_cones, make_fan_morphism
from .lattice import (
    INFINITE,
    IntMatrix,
    block_diag,
    multi_fiber_product,
    rank as lattice_rank,
    saturation_index,
    solve_integral,
    sublattice_index,
)
from .polyhedral import (
    RELATIVE_INTERIOR,
    Cone,
    contains,
    contains_cone,
    faces,
    is_face_of,
    map_cone,
    membership,
    orthant,
    product_cone,
)
from .tropical_types import (
    ConeComplex,
    DecoratedType,
    contraction_embedding,
    evaluation_cone,
    face_to_type,
    is_contraction,
    split_type,
)

STRICT = "strict"
TRANSVERSE = "transverse"

GENERIC = "generic"
NOT_GENERIC = "not generic"
UNSATISFIABLE = "unsatisfiable"


class EngineError(ValueError):
    def __init__(self, kind: str, message: str = ""):
        super().__init__(f"{kind}: {message}" if message else kind)
        self.kind = kind


class NotGeneric(EngineError):
    def __init__(self, report: "DisplacementReport"):
        super().__init__(report.verdict, report.reason)
        self.report = report


# ---------------------------------------------------------------------
# instance data

@dataclass(frozen=True)
class SplitPoint:
    """Toric data attached to one split edge."""

    fan: Fan
    to_base: IntMatrix
    embed: IntMatrix
    delta: int | None = None

    @property
    def rank(self) -> int:
        return self.fan.lattice_rank


@dataclass(frozen=True)
class AmbientType:
    """Component types omega_i, each with maps (vertex_map, edge_map) onto tau_i."""

    components: tuple
    maps: tuple


@dataclass(frozen=True)
class SplittingInstance:
    base_rank: int
    complex: ConeComplex
    tau: DecoratedType
    points: dict
    ambient: tuple = ()
    displacement: tuple | None = None
    base_cone: Cone | None = None
    injectivity: str = STRICT

    def with_displacement(self, v) -> "SplittingInstance":
        return SplittingInstance(
            self.base_rank, self.complex, self.tau, self.points, self.ambient,
            None if v is None else tuple(int(x) for x in v), self.base_cone, self.injectivity,
        )

    def with_mode(self, mode: str) -> "SplittingInstance":
        return SplittingInstance(
            self.base_rank, self.complex, self.tau, self.points, self.ambient,
            self.displacement, self.base_cone, mode,
        )


# ---------------------------------------------------------------------
# lattice maps

@dataclass(frozen=True)
class Lattices:
    components: tuple  # tau_i
    legs: tuple  # per component: tuple of (leg id, split edge id)
    n_tau_i: tuple  # basis matrices of N_{tau_i} inside prod_{legs} N_p
    n_tau: IntMatrix  # basis of N_tau inside prod_{p in S} N_p
    psi: IntMatrix
    diagonal: IntMatrix  # N_tau -> prod N_{tau_i}
    rank_target: int
    p_offsets: dict


def _split_edge_of(leg_id: str) -> str:
    return leg_id[:-1]


def build_lattices(inst: SplittingInstance) -> Lattices:
    S = list(inst.tau.split_set)
    comps, _ = split_type(inst.tau, S)
    off, total = {}, 0
    for p in S:
        off[p] = total
        total += inst.points[p].rank
    legs = tuple(tuple((l, _split_edge_of(l)) for l in c.split_set) for c in comps)
    b = inst.base_rank
    n_i = tuple(
        multi_fiber_product([inst.points[p].to_base for _, p in lg], b) for lg in legs
    )
    n_tau = multi_fiber_product([inst.points[p].to_base for p in S], b)
    # psi: each leg column block contributes +/- to its split edge rows
    psi_cols = []
    for lg, basis in zip(legs, n_i):
        lo = 0
        blocks = []
        for leg, p in lg:
            r = inst.points[p].rank
            blocks.append((leg, p, lo, r))
            lo += r
        for j in range(basis.cols):
            col = [0] * total
            for leg, p, start, r in blocks:
                sign = 1 if leg.endswith("+") else -1
                for k in range(r):
                    col[off[p] + k] += sign * basis[start + k, j]
            psi_cols.append(tuple(col))
    psi = IntMatrix.from_columns(psi_cols, total) if psi_cols else IntMatrix.zeros(total, 0)
    # diagonal N_tau -> prod N_{tau_i}, written in the N_{tau_i} bases
    diag_cols = []
    for j in range(n_tau.cols):
        x = n_tau.col(j)
        col = []
        for lg, basis in zip(legs, n_i):
            vec = []
            for _, p in lg:
                vec += list(x[off[p]:off[p] + inst.points[p].rank])
            y = solve_integral(basis, vec)
            if y is None:
                raise EngineError("math", "glued lattice does not map into a component lattice")
            col += list(y)
        diag_cols.append(tuple(col))
    width = sum(m.cols for m in n_i)
    diagonal = IntMatrix.from_columns(diag_cols, width) if diag_cols else IntMatrix.zeros(width, 0)
    return Lattices(tuple(comps), legs, n_i, n_tau, psi, diagonal, total, off)


def psi_map(inst: SplittingInstance) -> IntMatrix:
    return build_lattices(inst).psi


def component_count_N(inst: SplittingInstance) -> int:
    return saturation_index(build_lattices(inst).psi)


def dimension_report(inst: SplittingInstance, lat: Lattices | None = None) -> dict:
    """Both counts for the excess dimension of the gluing.

    ``direct`` is computed from the constructed lattices and is the one
    used by the engine; the two closed forms are reported for audit.
    """
    lat = lat or build_lattices(inst)
    S = len(inst.tau.split_set)
    r = len(lat.components)
    b = inst.base_rank
    sum_np = sum(inst.points[p].rank for p in inst.tau.split_set)
    direct = sum(m.cols for m in lat.n_tau_i) - lat.n_tau.cols
    stated = sum_np - (S - r - 1) * b
    corrected = sum_np - (S - r + 1) * b
    return {
        "direct": direct,
        "closed_form": stated,
        "corrected_closed_form": corrected,
        "used": "direct",
        "matches_closed_form": direct == stated,
        "matches_corrected_closed_form": direct == corrected,
    }


# ---------------------------------------------------------------------
# evaluation difference

def _evt_into_points(inst, comp: DecoratedType, ec) -> IntMatrix:
    """Stack of embed_p o evt for every leg of ``comp``, rows in leg order."""
    rows = []
    for leg, r0, nr in ec.evt_blocks:
        p = _split_edge_of(leg)
        block = inst.points[p].embed @ IntMatrix.from_rows(
            [ec.evt.row(r0 + k) for k in range(nr)], ec.evt.cols
        )
        rows += block.to_rows()
    return IntMatrix.from_rows(rows, ec.evt.cols) if rows else IntMatrix.zeros(0, ec.evt.cols)


def epsilon_map(inst: SplittingInstance, components: Sequence[DecoratedType], lat: Lattices | None = None) -> IntMatrix:
    """prod_p (embed evt(p+) - embed evt(p-)) on the concatenated coordinates."""
    lat = lat or build_lattices(inst)
    ecs = [evaluation_cone(c, inst.complex, check_realizable=False) for c in components]
    return _epsilon_from(inst, lat, components, ecs)


def _epsilon_from(inst, lat, components, ecs) -> IntMatrix:
    widths = [ec.ambient_rank for ec in ecs]
    total = sum(widths)
    out = [[0] * total for _ in range(lat.rank_target)]
    c0 = 0
    for comp, ec in zip(components, ecs):
        ev = _evt_into_points(inst, comp, ec)
        r0 = 0
        for leg in comp.split_set:
            p = _split_edge_of(leg)
            nr = inst.points[p].rank
            sign = 1 if leg.endswith("+") else -1
            for k in range(nr):
                for j in range(ec.ambient_rank):
                    out[lat.p_offsets[p] + k][c0 + j] += sign * ev[r0 + k, j]
            r0 += nr
        c0 += ec.ambient_rank
    return IntMatrix.from_rows(out, total) if out else IntMatrix.zeros(0, total)


# ---------------------------------------------------------------------
# candidates

@dataclass(frozen=True)
class Candidate:
    ambient_index: int
    types: tuple  # rho_i
    faces: tuple  # F_i inside the coordinates of omega_i
    key: tuple
    dim: int
    eps_rank: int
    image: Cone
    m: int
    m_prime: object
    injective: bool
    impossible: bool
    universal: bool


def type_key(t: DecoratedType) -> tuple:
    return (
        tuple(sorted((v.id, v.sigma, v.genus, v.curve_class.terms) for v in t.vertices)),
        tuple(sorted((e.id, e.tail, e.head, e.sigma, tuple(e.u)) for e in t.edges)),
        tuple(sorted((l.id, l.vertex, l.sigma, tuple(l.u)) for l in t.legs)),
    )


@dataclass
class Prepared:
    inst: SplittingInstance
    lattices: Lattices
    tau_tilde_dim: int
    dims: dict
    candidates: list = field(default_factory=list)
    psi_image_rank: int = 0
    sources: dict = field(default_factory=dict)  # candidate key -> ambient indices producing it
    scope_conflicts: list = field(default_factory=list)  # keys whose multiplicities differ by ambient


def _pool(fn, items, workers):
    if workers and workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _default_ambient(comps) -> tuple:
    maps = []
    for c in comps:
        vm = {v.id: v.id for v in c.vertices}
        em = {e.id: e.id for e in c.edges}
        maps.append((vm, em))
    return (AmbientType(tuple(comps), tuple(maps)),)


def validate_instance(inst: SplittingInstance) -> list[str]:
    """Problems with the instance data (empty list when consistent)."""
    out = []
    cx = inst.complex
    S = list(inst.tau.split_set)
    if not S:
        out.append("split set is empty")
    for p in S:
        try:
            e = inst.tau.edge(p)
        except KeyError:
            out.append(f"split element {p} is not an edge")
            continue
        if p not in inst.points:
            out.append(f"no toric data for split edge {p}")
            continue
        pt = inst.points[p]
        n_x = cx.rank(e.sigma)
        if pt.to_base.rows != inst.base_rank or pt.to_base.cols != pt.rank:
            out.append(f"{p}: base map has the wrong shape")
        if pt.embed.rows != pt.rank or pt.embed.cols != n_x:
            out.append(f"{p}: embedding has the wrong shape")
            continue
        img = map_cone(pt.embed, cx.cone(e.sigma))
        if pt.delta is not None and not contains_cone(pt.fan.cones[pt.delta], img):
            out.append(f"{p}: the cell of the edge does not map into the chosen cone")
        if pt.delta is None and pt.fan.cone_with_relint(img.interior_point()) is None:
            out.append(f"{p}: the cell of the edge lies in no cone of its fan")
        base_u = pt.to_base @ (pt.embed @ tuple(e.u))
        if any(base_u):
            out.append(f"{p}: contact order is not vertical over the base")
    if not inst.tau.is_connected():
        out.append("glued type is not connected")
    if inst.injectivity not in (STRICT, TRANSVERSE):
        out.append(f"unknown injectivity mode {inst.injectivity!r}")
    if out:
        return out
    comps, _ = split_type(inst.tau, S)
    for a, amb in enumerate(inst.ambient):
        if len(amb.components) != len(comps):
            out.append(f"ambient {a}: expected {len(comps)} components")
            continue
        for i, (w, (vm, em), t) in enumerate(zip(amb.components, amb.maps, comps)):
            if tuple(sorted(w.split_set)) != tuple(sorted(t.split_set)):
                out.append(f"ambient {a} component {i}: split legs differ from the split type")
            elif not is_contraction(w, t, vm, em, cx):
                out.append(f"ambient {a} component {i}: does not contract to the split type")
    if inst.displacement is not None:
        total = sum(inst.points[p].rank for p in S)
        if len(inst.displacement) != total:
            out.append("displacement has the wrong length")
    return out


def _check_base(inst: SplittingInstance):
    """Every Sigma_p maps to the base fan."""
    b = inst.base_rank
    base_cone = inst.base_cone or orthant(b)
    base_fan = fan_from_cones(b, [base_cone]) if b else build_fan(0, [[]], [])
    for p in inst.tau.split_set:
        pt = inst.points[p]
        try:
            make_fan_morphism(pt.fan, base_fan, pt.to_base)
        except FanError as exc:
            raise EngineError("math", f"{p}: fan does not map to the base fan ({exc})")


def prepare(inst: SplittingInstance, workers: int | None = None) -> Prepared:
    """Everything that does not depend on the displacement vector."""
    bad = validate_instance(inst)
    if bad:
        raise EngineError("math", "; ".join(bad))
    _check_base(inst)
    cx = inst.complex
    lat = build_lattices(inst)
    comps = lat.components
    amb = inst.ambient or _default_ambient(comps)
    tau_ec = evaluation_cone(inst.tau, cx)
    tau_i_ecs = [evaluation_cone(t, cx) for t in comps]
    dims = dimension_report(inst, lat)
    prep = Prepared(inst, lat, tau_ec.cone.dim, dims)
    prep.psi_image_rank = lattice_rank(lat.psi) if lat.psi.cols else 0
    total_np = lat.rank_target

    jobs = []
    for a, w in enumerate(amb):
        per_comp = []
        for i, (om, (vm, em), t) in enumerate(zip(w.components, w.maps, comps)):
            ec = evaluation_cone(om, cx)
            emb = contraction_embedding(om, t, vm, em, cx)
            tau_face = map_cone(emb, tau_i_ecs[i].cone)
            if not is_face_of(tau_face, ec.cone):
                raise EngineError("math", f"ambient {a}: the split type is not a face of component {i}")
            opts = []
            for F in faces(ec.cone):
                if not contains_cone(F, tau_face):
                    continue
                rho, rvm, rem = face_to_type(om, cx, F, ec)
                rho_ec = evaluation_cone(rho, cx, check_realizable=False)
                back = contraction_embedding(om, rho, rvm, rem, cx)
                if map_cone(back, rho_ec.cone) != F:
                    continue
                vmap, emap = _compose(rho, rvm, rem, vm, em)
                if vmap is None or not is_contraction(rho, t, vmap, emap, cx):
                    continue
                opts.append((F, rho))
            per_comp.append((om, ec, opts))
        for choice in product(*[c[2] for c in per_comp]):
            jobs.append((a, per_comp, choice))

    want = dims["direct"]

    def evaluate_choice(job):
        a, per_comp, choice = job
        dim_f = sum(F.dim for F, _ in choice)
        if dim_f - prep.tau_tilde_dim != want:
            return None
        return _build_candidate(prep, a, per_comp, choice, dim_f, total_np)

    found = [c for c in _pool(evaluate_choice, jobs, workers) if c is not None]
    uniq = {}
    for c in found:
        first = uniq.setdefault(c.key, c)
        prep.sources.setdefault(c.key, [])
        if c.ambient_index not in prep.sources[c.key]:
            prep.sources[c.key].append(c.ambient_index)
        if (first.m, first.m_prime, first.image) != (c.m, c.m_prime, c.image) and c.key not in prep.scope_conflicts:
            prep.scope_conflicts.append(c.key)
    prep.candidates = [uniq[k] for k in sorted(uniq)]
    return prep


def _compose(rho, rvm, rem, vm, em):
    """Maps rho -> tau_i from omega -> rho and omega -> tau_i."""
    vmap = {}
    for v_om, v_rho in rvm.items():
        tgt = vm[v_om]
        if vmap.setdefault(v_rho, tgt) != tgt:
            return None, None
    emap = {}
    for e_om, e_rho in rem.items():
        if e_rho is not None:
            emap[e_rho] = em.get(e_om)
    return vmap, emap


def _build_candidate(prep, a, per_comp, choice, dim_f, total_np):
    inst, lat = prep.inst, prep.lattices
    oms = [pc[0] for pc in per_comp]
    ecs = [pc[1] for pc in per_comp]
    eps = _epsilon_from(inst, lat, oms, ecs)
    Fs = [F for F, _ in choice]
    bases = [F.span_basis() for F in Fs]
    B = block_diag(bases)
    eB = eps @ B
    r = lattice_rank(eB) if eB.cols and eB.rows else 0
    image = map_cone(eps, product_cone(Fs))
    if inst.injectivity == STRICT:
        need, excess = dim_f, dim_f
    else:
        need, excess = dim_f - prep.tau_tilde_dim, dim_f - prep.tau_tilde_dim
    injective = r == need
    impossible = excess > total_np
    m = saturation_index(eB) if eB.cols and eB.rows else 1
    m_prime = _m_prime(inst, lat, oms, ecs, bases)
    universal = all(contains(image, lat.psi.col(j)) and contains(image, tuple(-x for x in lat.psi.col(j)))
                    for j in range(lat.psi.cols))
    types = tuple(rho for _, rho in choice)
    key = tuple(type_key(t) for t in types)
    return Candidate(a, types, tuple(Fs), key, dim_f, r, image, m, m_prime, injective, impossible, universal)


def _m_prime(inst, lat, oms, ecs, bases):
    """[prod N_{tau_i} : im(diagonal) + prod im(ev_i)] with ev_i in N_{tau_i} coordinates."""
    blocks = []
    for om, ec, basis, D in zip(oms, ecs, bases, lat.n_tau_i):
        ev = _evt_into_points(inst, om, ec) @ basis
        cols = []
        for j in range(ev.cols):
            y = solve_integral(D, ev.col(j))
            if y is None:
                raise EngineError("math", "evaluation does not factor through the component lattice")
            cols.append(tuple(y))
        blocks.append(IntMatrix.from_columns(cols, D.cols) if cols else IntMatrix.zeros(D.cols, 0))
    gens = lat.diagonal.hstack(block_diag(blocks))
    width = sum(D.cols for D in lat.n_tau_i)
    return sublattice_index(gens, width)


# ---------------------------------------------------------------------
# verdicts

@dataclass(frozen=True)
class DisplacementReport:
    verdict: str
    reason: str
    mode: str
    dimension: dict
    terms: tuple = ()  # Candidates passing (i)-(iii)
    witnesses: tuple = ()  # (Candidate, why)
    universal: bool = False
    component_count: int = 1


def evaluate(prep: Prepared, v: Sequence[int] | None = None) -> DisplacementReport:
    inst = prep.inst
    v = inst.displacement if v is None else tuple(v)
    if v is None:
        raise EngineError("schema", "no displacement vector given")
    n_count = saturation_index(prep.lattices.psi) if prep.lattices.psi.cols else 1
    common = dict(mode=inst.injectivity, dimension=prep.dims, component_count=n_count)
    passing = [c for c in prep.candidates if contains(c.image, v)]
    impossible = [c for c in passing if c.impossible]
    if impossible:
        c = impossible[0]
        excess = c.dim if inst.injectivity == STRICT else c.dim - prep.tau_tilde_dim
        why = (
            f"candidate needs injectivity on a {excess}-dimensional space but the target "
            f"has rank {prep.lattices.rank_target}"
        )
        return DisplacementReport(
            UNSATISFIABLE, "no generic displacement vector exists: " + why,
            terms=tuple(passing), witnesses=tuple((c, why) for c in impossible),
            universal=any(c.universal for c in impossible), **common,
        )
    psi = prep.lattices.psi
    in_image = solve_integral(psi, v) is not None if psi.cols else not any(v)
    if not in_image:
        return DisplacementReport(NOT_GENERIC, "displacement is not in the image of psi", **common)
    witnesses = []
    for c in passing:
        if not c.injective:
            witnesses.append((c, "restricted evaluation difference is not injective"))
        elif membership(c.image, v) != RELATIVE_INTERIOR:
            witnesses.append((c, "displacement lies on the boundary of the image cone"))
    if witnesses:
        return DisplacementReport(
            NOT_GENERIC, witnesses[0][1], terms=tuple(passing), witnesses=tuple(witnesses), **common
        )
    return DisplacementReport(GENERIC, "", terms=tuple(passing), **common)


def check_displacement(inst: SplittingInstance, workers: int | None = None) -> DisplacementReport:
    return evaluate(prepare(inst, workers))


@dataclass(frozen=True)
class Term:
    key: tuple
    types: tuple
    faces: tuple
    m: int
    m_prime: object
    ambients: tuple = ()  # indices of the ambient types that produced this term

    @property
    def identity_holds(self) -> bool:
        return self.m_prime != INFINITE


def enumerate_delta(inst: SplittingInstance, workers: int | None = None, prep: Prepared | None = None):
    """(terms, component count) for a generic displacement; raises NotGeneric otherwise."""
    prep = prep or prepare(inst, workers)
    rep = evaluate(prep, inst.displacement)
    if rep.verdict != GENERIC:
        raise NotGeneric(rep)
    terms = []
    for c in rep.terms:
        if c.m_prime == INFINITE or rep.component_count * c.m_prime != c.m:
            raise EngineError(
                "math", f"multiplicity check failed: {rep.component_count} * {c.m_prime} != {c.m}"
            )
        terms.append(Term(c.key, c.types, c.faces, c.m, c.m_prime, tuple(prep.sources.get(c.key, ()))))
    return terms, rep.component_count


def find_displacement(inst: SplittingInstance, search_bound: int, workers: int | None = None,
                      prep: Prepared | None = None):
    """First generic vector in the image of psi within the box, in graded lex order.

    Returns ``(vector or None, reason)``.  ``prep`` may be reused from an
    earlier ``prepare`` of the same instance.
    """
    prep = prep or prepare(inst.with_displacement(None), workers)
    psi = prep.lattices.psi
    n = prep.lattices.rank_target
    rng = range(-search_bound, search_bound + 1)
    box = sorted(product(rng, repeat=n), key=lambda x: (sum(abs(t) for t in x), x))
    last = "no vector in the search box passed"
    for v in box:
        if psi.cols == 0 and any(v):
            continue
        if psi.cols and solve_integral(psi, v) is None:
            continue
        rep = evaluate(prep, v)
        if rep.verdict == GENERIC:
            return tuple(v), ""
        if rep.verdict == UNSATISFIABLE and rep.universal:
            return None, rep.reason
        last = rep.reason
    return None, last


# ---------------------------------------------------------------------
# formula assembly

@dataclass(frozen=True)
class SplittingFormula:
    terms: tuple
    component_count: int
    text: str
    kunneth_text: str | None = None
    kunneth: tuple | None = None


def _rho_label(k: int, total: int) -> str:
    return "ρ" if total == 1 else f"ρ{k + 1}"


def assemble_formula(terms: Sequence[Term], N: int, r: int, kunneth=None) -> SplittingFormula:
    """Symbolic right-hand side of the splitting formula.

    ``kunneth`` is an optional list of ``(alpha, [class symbol per component])``.
    """
    ordered = sorted(terms, key=lambda t: t.key)
    if not ordered:
        text = "δ_* [M(τ)] = 0"
    else:
        parts = []
        for k, t in enumerate(ordered):
            lab = _rho_label(k, len(ordered))
            factors = " × ".join(f"[M_{{{lab}}}(τ_{i + 1})]" for i in range(r))
            parts.append(f"{t.m} · {factors}")
        text = "δ_* [M(τ)] = " + " + ".join(parts)
    ktext, kdata = None, None
    if kunneth is not None:
        outer = []
        kd = []
        for alpha, classes in kunneth:
            if len(classes) != r:
                raise EngineError("schema", "each Künneth term needs one class per component")
            inner = []
            inner_d = []
            for k, t in enumerate(ordered):
                lab = _rho_label(k, len(ordered))
                ints = [f"∫_{{{lab},{i + 1}}} e*({classes[i]})" for i in range(r)]
                inner.append(f"{t.m} · " + " · ".join(ints))
                inner_d.append({"rho": lab, "m": t.m, "integrals": ints})
            body = " + ".join(inner) if inner else "0"
            outer.append(f"({alpha}) · ({body})")
            kd.append({"alpha": alpha, "terms": inner_d})
        ktext = "deg [M(τ)] = " + (" + ".join(outer) if outer else "0")
        kdata = tuple(kd)
    return SplittingFormula(tuple(ordered), N, text, ktext, kdata)
