"""Command-line entry point.

    tropsplit lattice snf --in doc.json
    tropsplit split-formula --in inst.json --kunneth k.json --pretty

Exit status: 0 on success, 2 when the answer is a negative verdict
(not generic / unsatisfiable / nothing found), 1 on any error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .fans import FanError, fan_fiber_product, fan_to_json, make_fan_morphism, star_quotient
from .fs_calculus import InfiniteIndexError, NotGenericError, pushforward
from .lattice import (
    INFINITE,
    saturate,
    saturation_index,
    smith_normal_form,
    sublattice_index,
)
from .polyhedral import cone_to_json
from .serialize import (
    Document,
    DocumentError,
    dumps,
    matrix_json,
    num,
    parse_cone,
    parse_document,
    parse_instance,
    parse_type,
    read_matrix,
    read_vector,
    type_json,
    vec_json,
)
from .splitting import (
    GENERIC,
    TRANSVERSE,
    EngineError,
    NotGeneric,
    assemble_formula,
    enumerate_delta,
    evaluate,
    find_displacement,
    prepare,
)
from .tropical_types import (
    ConeComplex,
    TypeError_,
    evaluation_cone,
    split_type,
    validate_type,
)

COMMANDS = {
    "lattice": ("snf", "index", "saturate"),
    "fan": ("build", "star", "product"),
    "fs-push": (),
    "type": ("validate", "split", "cone"),
    "split-check": (),
    "split-delta": (),
    "split-formula": (),
    "split-search": (),
}


class Invalid(Exception):
    """Type validation failed; reported as an error (exit 1) with the list."""

    def __init__(self, payload):
        super().__init__("invalid type")
        self.payload = payload


class Negative(Exception):
    """Carries a result document whose verdict is negative (exit 2)."""

    def __init__(self, payload):
        super().__init__("negative verdict")
        self.payload = payload


# ---------------------------------------------------------------------
# lattice / fan / fs / type

def _lattice(doc: Document, action: str, args):
    sec = doc.section("lattice")
    m = read_matrix(sec.get("matrix", []), "/lattice/matrix")
    if action == "snf":
        snf = smith_normal_form(m)
        return {
            "left": matrix_json(snf.left),
            "diag": matrix_json(snf.diag),
            "right": matrix_json(snf.right),
            "divisors": [num(d) for d in snf.divisors],
        }
    if action == "index":
        n = m.rows if "ambient_rank" not in sec else int(sec["ambient_rank"])
        idx = sublattice_index(m, n)
        return {"index": "infinite" if idx == INFINITE else num(idx), "saturation_index": num(saturation_index(m))}
    s = saturate(m)
    return {"basis": [vec_json(c) for c in s.columns()]}


def _fan(doc: Document, action: str, args):
    sec = doc.section("fan")
    if action == "build":
        f = doc.fan(sec.get("fan"), "/fan/fan")
        return {"fan": fan_to_json(f), "complete": f.is_complete(), "maximal_cones": f.maximal_cones()}
    if action == "star":
        f = doc.fan(sec.get("fan"), "/fan/fan")
        from .serialize import sigma_resolver

        tau = sigma_resolver(f, "/fan/tau")(sec.get("tau", 0))
        s, q = star_quotient(f, tau)
        return {"fan": fan_to_json(s), "quotient_map": matrix_json(q)}
    names = [sec.get("f"), sec.get("g")]
    morphs = []
    for key, name in zip("fg", names):
        if name not in doc.morphisms:
            raise DocumentError("reference", f"/fan/{key}", f"unknown fan morphism {name!r}")
        src, tgt, mat = doc.morphisms[name]
        morphs.append(make_fan_morphism(doc.fans[src], doc.fans[tgt], mat))
    fp, count, (p1, p2) = fan_fiber_product(*morphs)
    return {
        "fan": fan_to_json(fp),
        "component_count": num(count),
        "projections": [matrix_json(p1.lattice_map), matrix_json(p2.lattice_map)],
    }


def _fs_push(doc: Document, args):
    sec = doc.section("fs_push")
    fanX = doc.fan(sec.get("fanX"), "/fs_push/fanX")
    f_raw = sec.get("f_N", [])
    f_N = read_matrix(f_raw, "/fs_push/f_N", fanX.lattice_rank)
    tau = parse_cone(sec.get("tau", {"ambient_rank": f_N.cols}), "/fs_push/tau", f_N.cols)
    if f_N.rows == 0 or f_N.cols == 0:
        from .lattice import IntMatrix

        f_N = IntMatrix.zeros(fanX.lattice_rank, tau.ambient_rank)
    v = read_vector(sec.get("v"), "/fs_push/v", fanX.lattice_rank, rational=True)
    stack = None
    if sec.get("stack_sublattice") is not None:
        stack = read_matrix(sec["stack_sublattice"], "/fs_push/stack_sublattice", tau.ambient_rank)
    try:
        cyc, si = pushforward(fanX, f_N, tau, v, stack, workers=args.threads)
    except NotGenericError as exc:
        raise Negative({
            "verdict": "not generic",
            "witnesses": [
                {"cone": [vec_json(r) for r in fanX.describe(i)], "index": num(i), "slice": res.kind,
                 "interior": res.interior}
                for i, res in exc.report.witnesses
            ],
        })
    return {
        "verdict": "generic",
        "terms": [
            {"cone": [vec_json(r) for r in fanX.describe(i)], "index": num(i), "coeff": num(c)}
            for i, c in cyc.terms
        ],
        "stack_index": num(si),
        "warnings": list(cyc.warnings),
    }


def _type(doc: Document, action: str, args):
    sec = doc.section("type")
    fan = doc.fan(sec.get("complex"), "/type/complex")
    spec, ptr = doc.type_spec(sec.get("type"), "/type/type")
    t = parse_type(spec, fan, ptr)
    cx = ConeComplex.from_fan(fan)
    if action == "validate":
        bad = validate_type(t, cx, bool(sec.get("require_connected", False)))
        if not bad:
            try:
                evaluation_cone(t, cx)
            except TypeError_ as exc:
                bad.append(f"not realizable: {exc}")
        if bad:
            raise Invalid({"valid": False, "violations": bad})
        return {"valid": True, "violations": []}
    if action == "split":
        S = sec.get("split", list(t.split_set))
        types, pairing = split_type(t, S)
        return {
            "types": [type_json(x, fan) for x in types],
            "pairing": {e: [[num(a), la], [num(b), lb]] for e, ((a, la), (b, lb)) in pairing.items()},
        }
    ec = evaluation_cone(t, cx)
    return {
        "legend": [list(map(str, k)) for k in ec.legend],
        "cone": cone_to_json(ec.cone),
        "dim": num(ec.cone.dim),
        "evt": matrix_json(ec.evt),
    }


# ---------------------------------------------------------------------
# splitting

def _instance(doc: Document, args):
    inst = parse_instance(doc)
    if args.injectivity:
        inst = inst.with_mode(args.injectivity)
    return inst


def _candidate_json(c, fan) -> dict:
    return {
        "types": [type_json(t, fan) for t in c.types],
        "faces": [cone_to_json(F) for F in c.faces],
        "image": cone_to_json(c.image),
        "dim": num(c.dim),
        "eps_rank": num(c.eps_rank),
        "m": num(c.m),
        "m_prime": "infinite" if c.m_prime == INFINITE else num(c.m_prime),
        "injective": c.injective,
    }


def _dims_json(d: dict) -> dict:
    return {k: (v if isinstance(v, (bool, str)) else num(v)) for k, v in d.items()}


def _report_json(rep, fan) -> dict:
    return {
        "verdict": rep.verdict,
        "reason": rep.reason,
        "injectivity": rep.mode,
        "dimension_count": _dims_json(rep.dimension),
        "component_count": num(rep.component_count),
        "candidates": [_candidate_json(c, fan) for c in rep.terms],
        "witnesses": [{"candidate": _candidate_json(c, fan), "why": why} for c, why in rep.witnesses],
        "universal": rep.universal,
    }


def _split_check(doc, args):
    inst = _instance(doc, args)
    fan = _complex_fan(doc)
    rep = evaluate(prepare(inst, args.threads))
    out = _report_json(rep, fan)
    if rep.verdict != GENERIC:
        raise Negative(out)
    return out


def _complex_fan(doc):
    return doc.fans[doc.raw["instance"]["complex"]]


def _terms_json(terms, fan):
    return [
        {
            "types": [type_json(t, fan) for t in term.types],
            "faces": [cone_to_json(F) for F in term.faces],
            "m": num(term.m),
            "m_prime": num(term.m_prime),
            "ambient_sources": [num(a) for a in term.ambients],
        }
        for term in sorted(terms, key=lambda t: t.key)
    ]


def _delta(doc, args):
    inst = _instance(doc, args)
    fan = _complex_fan(doc)
    prep = prepare(inst, args.threads)
    try:
        terms, N = enumerate_delta(inst, prep=prep)
    except NotGeneric as exc:
        raise Negative(_report_json(exc.report, fan))
    return inst, prep, terms, N, fan


def _split_delta(doc, args):
    inst, prep, terms, N, fan = _delta(doc, args)
    return {
        "verdict": GENERIC,
        "component_count": num(N),
        "scope_conflicts": num(len(prep.scope_conflicts)),
        "terms": _terms_json(terms, fan),
        "dimension_count": _dims_json(prep.dims),
        "injectivity": inst.injectivity,
    }


def _split_formula(doc, args):
    inst, prep, terms, N, fan = _delta(doc, args)
    kun = None
    if args.kunneth:
        with open(args.kunneth, "rb") as fh:
            raw = json.loads(fh.read())
        if not isinstance(raw, list):
            raise DocumentError("schema", "/", "Künneth file must be an array")
        kun = []
        for i, item in enumerate(raw):
            if not isinstance(item, dict) or "alpha" not in item or "classes" not in item:
                raise DocumentError("schema", f"/{i}", "expected {alpha, classes}")
            kun.append((str(item["alpha"]), [str(c) for c in item["classes"]]))
    formula = assemble_formula(terms, N, len(prep.lattices.components), kun)
    out = {
        "formula": formula.text,
        "component_count": num(N),
        "terms": _terms_json(terms, fan),
        "dimension_count": _dims_json(prep.dims),
        "injectivity": inst.injectivity,
    }
    if kun is not None:
        out["kunneth_formula"] = formula.kunneth_text
        out["kunneth"] = [
            {"alpha": k["alpha"], "terms": [{"rho": t["rho"], "m": num(t["m"]), "integrals": t["integrals"]}
                                           for t in k["terms"]]}
            for k in formula.kunneth
        ]
    return out


def _split_search(doc, args):
    inst = _instance(doc, args)
    v, why = find_displacement(inst, args.bound, args.threads)
    if v is None:
        raise Negative({"vector": None, "reason": why, "bound": num(args.bound)})
    return {"vector": vec_json(v), "bound": num(args.bound)}


# ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tropsplit", description="Exact tropical splitting computations.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("action", nargs="?", default=None)
    ap.add_argument("--in", dest="infile", default="-", help="input document (default stdin)")
    ap.add_argument("--out", dest="outfile", default="-", help="output file (default stdout)")
    ap.add_argument("--pretty", action="store_true")
    ap.add_argument("--kunneth", default=None, help="JSON list of {alpha, classes} for split-formula")
    ap.add_argument("--bound", type=int, default=2, help="search box for split-search")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--injectivity", choices=["strict", TRANSVERSE], default=None,
                    help="override the instance's injectivity reading")
    return ap


def run_command(data, command: str, action: str | None = None, **flags):
    """Run one command on a document; returns (exit code, output dict)."""
    ns = argparse.Namespace(
        kunneth=flags.get("kunneth"), bound=flags.get("bound", 2),
        threads=flags.get("threads", 1), injectivity=flags.get("injectivity"),
    )
    try:
        subs = COMMANDS.get(command)
        if subs is None:
            raise DocumentError("schema", "/", f"unknown command {command!r}")
        if subs and action not in subs:
            raise DocumentError("schema", "/", f"{command} needs one of {', '.join(subs)}")
        doc = parse_document(data)
        if command == "lattice":
            out = _lattice(doc, action, ns)
        elif command == "fan":
            out = _fan(doc, action, ns)
        elif command == "fs-push":
            out = _fs_push(doc, ns)
        elif command == "type":
            out = _type(doc, action, ns)
        elif command == "split-check":
            out = _split_check(doc, ns)
        elif command == "split-delta":
            out = _split_delta(doc, ns)
        elif command == "split-formula":
            out = _split_formula(doc, ns)
        else:
            out = _split_search(doc, ns)
        return 0, out
    except Negative as neg:
        return 2, neg.payload
    except Invalid as bad:
        msg = "; ".join(bad.payload["violations"])
        return 1, dict(bad.payload, error={"kind": "math", "pointer": "/type/type", "message": msg})
    except DocumentError as exc:
        return 1, {"error": exc.to_json()}
    except (FanError, TypeError_, EngineError, InfiniteIndexError) as exc:
        kind = getattr(exc, "kind", "math")
        return 1, {"error": {"kind": "math", "pointer": "/", "message": str(exc), "detail": kind}}
    except (ValueError, KeyError) as exc:
        return 1, {"error": {"kind": "math", "pointer": "/", "message": str(exc)}}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.infile == "-":
        data = sys.stdin.buffer.read()
    else:
        try:
            with open(args.infile, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            print(f"tropsplit: cannot read {args.infile}: {exc.strerror}", file=sys.stderr)
            return 1
    code, out = run_command(
        data, args.command, args.action,
        kunneth=args.kunneth, bound=args.bound, threads=args.threads, injectivity=args.injectivity,
    )
    text = dumps(out, args.pretty)
    if args.outfile == "-":
        sys.stdout.write(text)
    else:
        with open(args.outfile, "w", encoding="utf-8") as fh:
            fh.write(text)
    if code == 1:
        print(f"tropsplit: {out['error']['kind']} error: {out['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
