"""JSON documents: parsing with located errors, and canonical emission.

Every number is written as a decimal string (rationals as ``"p/q"``)
so that nothing is lost to floating point.  Errors carry a kind
(``schema``, ``reference`` or ``math``) and a JSON pointer.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from .fans import Fan, FanError, build_fan, fan_to_json
from .lattice import IntMatrix
from .polyhedral import Cone, cone_from_rays, cone_to_json
from .splitting import (
    STRICT,
    TRANSVERSE,
    AmbientType,
    SplitPoint,
    SplittingInstance,
)
from .tropical_types import DecoratedType, TypeError_, type_from_json, type_to_json

SCHEMA_VERSION = "1"
_INT = re.compile(r"^-?\d+$")
_RAT = re.compile(r"^-?\d+/\d+$")


class DocumentError(ValueError):
    def __init__(self, kind: str, pointer: str, message: str):
        super().__init__(f"{kind} error at {pointer or '/'}: {message}")
        self.kind = kind
        self.pointer = pointer
        self.message = message

    def to_json(self) -> dict:
        return {"kind": self.kind, "pointer": self.pointer or "/", "message": self.message}


def _ptr(base: str, key) -> str:
    k = str(key).replace("~", "~0").replace("/", "~1")
    return f"{base}/{k}"


# ---------------------------------------------------------------------
# primitive readers

def read_int(x, ptr: str) -> int:
    if isinstance(x, bool):
        raise DocumentError("schema", ptr, "expected an integer")
    if isinstance(x, int):
        return x
    if isinstance(x, str) and _INT.match(x.strip()):
        return int(x.strip())
    raise DocumentError("schema", ptr, f"expected an integer, got {x!r}")


def read_rational(x, ptr: str) -> Fraction:
    if isinstance(x, str) and _RAT.match(x.strip()):
        p, q = x.strip().split("/")
        if int(q) == 0:
            raise DocumentError("schema", ptr, "zero denominator")
        return Fraction(int(p), int(q))
    return Fraction(read_int(x, ptr))


def read_vector(x, ptr: str, length: int | None = None, rational: bool = False) -> tuple:
    if not isinstance(x, list):
        raise DocumentError("schema", ptr, "expected an array")
    reader = read_rational if rational else read_int
    out = tuple(reader(v, _ptr(ptr, i)) for i, v in enumerate(x))
    if length is not None and len(out) != length:
        raise DocumentError("schema", ptr, f"expected length {length}, got {len(out)}")
    return out


def read_matrix(x, ptr: str, rows: int | None = None, cols: int | None = None) -> IntMatrix:
    """Row-major array of arrays."""
    if not isinstance(x, list):
        raise DocumentError("schema", ptr, "expected an array of rows")
    data = [read_vector(r, _ptr(ptr, i)) for i, r in enumerate(x)]
    if data:
        width = len(data[0])
        if any(len(r) != width for r in data):
            raise DocumentError("schema", ptr, "rows have different lengths")
    else:
        width = cols or 0
    if rows is not None and len(data) != rows:
        raise DocumentError("schema", ptr, f"expected {rows} rows")
    if cols is not None and data and width != cols:
        raise DocumentError("schema", ptr, f"expected {cols} columns")
    return IntMatrix.from_rows(data, width)


def _obj(x, ptr: str) -> dict:
    if not isinstance(x, dict):
        raise DocumentError("schema", ptr, "expected an object")
    return x


def _need(d: dict, key: str, ptr: str):
    if key not in d:
        raise DocumentError("schema", _ptr(ptr, key), "missing field")
    return d[key]


# ---------------------------------------------------------------------
# writers

def num(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)


def vec_json(v) -> list:
    return [num(x) for x in v]


def matrix_json(m: IntMatrix) -> list:
    return [[num(x) for x in r] for r in m.to_rows()]


def dumps(obj, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------
# documents

@dataclass
class Document:
    raw: dict
    fans: dict
    morphisms: dict
    type_specs: dict

    def fan(self, name, ptr: str) -> Fan:
        if not isinstance(name, str) or name not in self.fans:
            raise DocumentError("reference", ptr, f"unknown fan {name!r}")
        return self.fans[name]

    def type_spec(self, name, ptr: str) -> tuple:
        if not isinstance(name, str) or name not in self.type_specs:
            raise DocumentError("reference", ptr, f"unknown type {name!r}")
        return self.type_specs[name], f"/types/{name}"

    def section(self, key: str) -> dict:
        if key not in self.raw:
            raise DocumentError("schema", f"/{key}", "missing section")
        return _obj(self.raw[key], f"/{key}")


def parse_fan(d, ptr: str) -> Fan:
    d = _obj(d, ptr)
    n = read_int(_need(d, "lattice_rank", ptr), _ptr(ptr, "lattice_rank"))
    rays_raw = d.get("rays", [])
    if not isinstance(rays_raw, list):
        raise DocumentError("schema", _ptr(ptr, "rays"), "expected an array")
    rays = [read_vector(r, _ptr(_ptr(ptr, "rays"), i), n) for i, r in enumerate(rays_raw)]
    cones_raw = d.get("cones", [[]])
    if not isinstance(cones_raw, list):
        raise DocumentError("schema", _ptr(ptr, "cones"), "expected an array")
    cones = []
    for i, c in enumerate(cones_raw):
        cp = _ptr(_ptr(ptr, "cones"), i)
        idx = read_vector(c, cp)
        for j, k in enumerate(idx):
            if not 0 <= k < len(rays):
                raise DocumentError("reference", _ptr(cp, j), f"ray index {k} does not exist")
        cones.append(list(idx))
    try:
        return build_fan(n, cones, rays)
    except FanError as exc:
        raise DocumentError("math", ptr, str(exc))


def parse_cone(d, ptr: str, n: int | None = None) -> Cone:
    d = _obj(d, ptr)
    rank = read_int(d["ambient_rank"], _ptr(ptr, "ambient_rank")) if "ambient_rank" in d else n
    if rank is None:
        raise DocumentError("schema", _ptr(ptr, "ambient_rank"), "missing field")
    rays = [read_vector(r, _ptr(_ptr(ptr, "rays"), i), rank) for i, r in enumerate(d.get("rays", []))]
    lin = [read_vector(r, _ptr(_ptr(ptr, "lineality"), i), rank) for i, r in enumerate(d.get("lineality", []))]
    return cone_from_rays(rank, rays, lin)


def parse_document(data) -> Document:
    """Parse bytes/str/dict into a Document with fans built and validated."""
    if isinstance(data, (bytes, str)):
        try:
            raw = json.loads(data)
        except json.JSONDecodeError as exc:
            raise DocumentError("schema", "/", f"invalid JSON: {exc.msg}")
    else:
        raw = data
    raw = _obj(raw, "")
    ver = raw.get("schema_version", SCHEMA_VERSION)
    if str(ver) != SCHEMA_VERSION:
        raise DocumentError("schema", "/schema_version", f"unsupported version {ver!r}")
    fans = {}
    for name, fd in _obj(raw.get("fans", {}), "/fans").items():
        fans[name] = parse_fan(fd, _ptr("/fans", name))
    morphisms = {}
    for name, md in _obj(raw.get("fan_morphisms", {}), "/fan_morphisms").items():
        mp = _ptr("/fan_morphisms", name)
        md = _obj(md, mp)
        src = _need(md, "source", mp)
        tgt = _need(md, "target", mp)
        if src not in fans:
            raise DocumentError("reference", _ptr(mp, "source"), f"unknown fan {src!r}")
        if tgt not in fans:
            raise DocumentError("reference", _ptr(mp, "target"), f"unknown fan {tgt!r}")
        mat = read_matrix(_need(md, "matrix", mp), _ptr(mp, "matrix"),
                          fans[tgt].lattice_rank, fans[src].lattice_rank)
        if mat.rows == 0 or mat.cols == 0:
            mat = IntMatrix.zeros(fans[tgt].lattice_rank, fans[src].lattice_rank)
        morphisms[name] = (src, tgt, mat)
    types = {}
    for name, td in _obj(raw.get("types", {}), "/types").items():
        types[name] = _obj(td, _ptr("/types", name))
    return Document(raw, fans, morphisms, types)


def sigma_resolver(fan: Fan, ptr_base: str):
    def resolve(s):
        if isinstance(s, list):
            rays = [read_vector(r, ptr_base, fan.lattice_rank) for r in s]
            i = fan.index_of(cone_from_rays(fan.lattice_rank, rays))
            if i is None:
                raise DocumentError("reference", ptr_base, f"no cone with rays {s}")
            return i
        i = read_int(s, ptr_base)
        if not 0 <= i < len(fan.cones):
            raise DocumentError("reference", ptr_base, f"cone index {i} does not exist")
        return i

    return resolve


def parse_type(spec: dict, fan: Fan, ptr: str) -> DecoratedType:
    def located(kind, items):
        for i, it in enumerate(items):
            ip = _ptr(_ptr(ptr, kind), i)
            _obj(it, ip)
            for key in {"vertices": ("id", "sigma"), "edges": ("id", "tail", "head", "sigma", "u"),
                        "legs": ("id", "vertex", "sigma", "u")}[kind]:
                _need(it, key, ip)
            sigma_resolver(fan, _ptr(ip, "sigma"))(it["sigma"])
            if "u" in it:
                read_vector(it["u"], _ptr(ip, "u"))
            if "genus" in it:
                read_int(it["genus"], _ptr(ip, "genus"))

    for kind in ("vertices", "edges", "legs"):
        items = spec.get(kind, [])
        if not isinstance(items, list):
            raise DocumentError("schema", _ptr(ptr, kind), "expected an array")
        located(kind, items)
    try:
        t = type_from_json(spec, sigma_resolver(fan, ptr))
    except (TypeError_, ValueError, KeyError) as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError("schema", ptr, str(exc))
    ids = set(t.vertex_ids)
    for i, e in enumerate(t.edges):
        for end in ("tail", "head"):
            if getattr(e, end) not in ids:
                raise DocumentError("reference", _ptr(_ptr(_ptr(ptr, "edges"), i), end), "unknown vertex")
    for i, l in enumerate(t.legs):
        if l.vertex not in ids:
            raise DocumentError("reference", _ptr(_ptr(_ptr(ptr, "legs"), i), "vertex"), "unknown vertex")
    elems = {e.id for e in t.edges} | {l.id for l in t.legs}
    for i, p in enumerate(t.split_set):
        if p not in elems:
            raise DocumentError("reference", _ptr(_ptr(ptr, "split_set"), i), f"unknown edge or leg {p!r}")
    return t


def type_json(t: DecoratedType, fan: Fan | None = None) -> dict:
    """Canonical type JSON; with a fan, sigma is written as its ray list."""
    d = type_to_json(t)
    if fan is not None:
        for coll in ("vertices", "edges", "legs"):
            for item in d[coll]:
                item["sigma"] = [vec_json(r) for r in fan.describe(int(item["sigma"]))]
    return d


def parse_instance(doc: Document) -> SplittingInstance:
    from .tropical_types import ConeComplex

    d = doc.section("instance")
    ptr = "/instance"
    b = read_int(d.get("base_rank", 0), _ptr(ptr, "base_rank"))
    fan = doc.fan(_need(d, "complex", ptr), _ptr(ptr, "complex"))
    cx = ConeComplex.from_fan(fan)
    spec, tptr = doc.type_spec(_need(d, "tau", ptr), _ptr(ptr, "tau"))
    tau = parse_type(spec, fan, tptr)
    base_cone = parse_cone(d["base_cone"], _ptr(ptr, "base_cone"), b) if "base_cone" in d else None
    points = {}
    praw = _obj(d.get("points", {}), _ptr(ptr, "points"))
    for p in tau.split_set:
        if p not in praw:
            raise DocumentError("reference", _ptr(_ptr(ptr, "points"), p), "no toric data for this split edge")
    for p, pd in praw.items():
        pp = _ptr(_ptr(ptr, "points"), p)
        pd = _obj(pd, pp)
        if p not in tau.split_set:
            raise DocumentError("reference", pp, f"{p!r} is not in the split set")
        pfan = doc.fan(_need(pd, "fan", pp), _ptr(pp, "fan"))
        n_p = pfan.lattice_rank
        n_x = fan.lattice_rank
        to_base = (read_matrix(pd["to_base"], _ptr(pp, "to_base"), b, n_p)
                   if "to_base" in pd else IntMatrix.zeros(b, n_p))
        if to_base.rows == 0 or to_base.cols == 0:
            to_base = IntMatrix.zeros(b, n_p)
        embed = (read_matrix(pd["embed"], _ptr(pp, "embed"), n_p, n_x)
                 if "embed" in pd else IntMatrix.identity(n_p))
        if embed.rows != n_p or embed.cols != n_x:
            raise DocumentError("schema", _ptr(pp, "embed"), "embedding has the wrong shape")
        delta = sigma_resolver(pfan, _ptr(pp, "delta"))(pd["delta"]) if "delta" in pd else None
        points[p] = SplitPoint(pfan, to_base, embed, delta)
    ambient = []
    for a, ad in enumerate(d.get("ambient", [])):
        ap = _ptr(_ptr(ptr, "ambient"), a)
        ad = _obj(ad, ap)
        comps = []
        for i, name in enumerate(_need(ad, "components", ap)):
            s, sp = doc.type_spec(name, _ptr(_ptr(ap, "components"), i))
            comps.append(parse_type(s, fan, sp))
        maps_raw = ad.get("maps", [{} for _ in comps])
        if len(maps_raw) != len(comps):
            raise DocumentError("schema", _ptr(ap, "maps"), "one map per component is required")
        maps = []
        for i, (c, md) in enumerate(zip(comps, maps_raw)):
            mp = _ptr(_ptr(ap, "maps"), i)
            md = _obj(md, mp)
            vm = {v.id: v.id for v in c.vertices}
            vm.update({str(k): str(v) for k, v in _obj(md.get("vertices", {}), _ptr(mp, "vertices")).items()})
            em = {e.id: e.id for e in c.edges}
            for k, v in _obj(md.get("edges", {}), _ptr(mp, "edges")).items():
                em[str(k)] = None if v is None else str(v)
            maps.append((vm, em))
        ambient.append(AmbientType(tuple(comps), tuple(maps)))
    disp = None
    if d.get("displacement") is not None:
        disp = read_vector(d["displacement"], _ptr(ptr, "displacement"))
    mode = d.get("injectivity", STRICT)
    if mode not in (STRICT, TRANSVERSE):
        raise DocumentError("schema", _ptr(ptr, "injectivity"), f"expected {STRICT!r} or {TRANSVERSE!r}")
    return SplittingInstance(b, cx, tau, points, tuple(ambient), disp, base_cone, mode)


def canonical_document(data) -> dict:
    """Parse and re-emit fans, morphisms and types in canonical form."""
    doc = parse_document(data)
    out = {k: v for k, v in doc.raw.items() if k not in ("fans", "fan_morphisms")}
    out["schema_version"] = SCHEMA_VERSION
    if doc.fans:
        out["fans"] = {k: fan_to_json(f) for k, f in doc.fans.items()}
    if doc.morphisms:
        out["fan_morphisms"] = {
            k: {"source": s, "target": t, "matrix": matrix_json(m)} for k, (s, t, m) in doc.morphisms.items()
        }
    return json.loads(dumps(out))


def instance_document(inst: SplittingInstance, fan: Fan | None = None) -> dict:
    """Document for ``split-*`` commands describing ``inst``.

    The complex must come from a fan (given, or remembered by the complex).
    """
    fan = fan or inst.complex.fan
    if fan is None:
        raise ValueError("instance complex has no fan to serialize")
    fans = {"X": fan_to_json(fan)}
    types = {"tau": type_json(inst.tau, fan)}
    points = {}
    for p, sp in sorted(inst.points.items()):
        fans[f"P_{p}"] = fan_to_json(sp.fan)
        pd = {"fan": f"P_{p}", "to_base": matrix_json(sp.to_base), "embed": matrix_json(sp.embed)}
        if sp.delta is not None:
            pd["delta"] = [vec_json(r) for r in sp.fan.describe(sp.delta)]
        points[p] = pd
    ambient = []
    for a, amb in enumerate(inst.ambient):
        names = []
        for i, c in enumerate(amb.components):
            name = f"amb{a}_{i}"
            types[name] = type_json(c, fan)
            names.append(name)
        maps = [{"vertices": dict(vm), "edges": dict(em)} for vm, em in amb.maps]
        ambient.append({"components": names, "maps": maps})
    d = {
        "base_rank": inst.base_rank,
        "complex": "X",
        "tau": "tau",
        "points": points,
        "injectivity": inst.injectivity,
    }
    if ambient:
        d["ambient"] = ambient
    if inst.displacement is not None:
        d["displacement"] = vec_json(inst.displacement)
    if inst.base_cone is not None:
        d["base_cone"] = cone_to_json(inst.base_cone)
    return {"schema_version": SCHEMA_VERSION, "fans": fans, "types": types, "instance": d}


__all__ = [
    "instance_document",
    "DocumentError",
    "Document",
    "parse_document",
    "parse_fan",
    "parse_cone",
    "parse_type",
    "parse_instance",
    "canonical_document",
    "cone_to_json",
    "dumps",
    "num",
    "vec_json",
    "matrix_json",
    "type_json",
    "read_matrix",
    "read_vector",
]
