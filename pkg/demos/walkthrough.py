"""A guided tour: torus pushforward, then three splitting instances.

    python demos/walkthrough.py
"""
from tropsplit.catalog import a1_instance, degeneration_instance, plane_instance
from tropsplit.fans import product_of_lines_fan
from tropsplit.fs_calculus import NotGenericError, pushforward
from tropsplit.lattice import IntMatrix
from tropsplit.polyhedral import zero_cone
from tropsplit.splitting import (
    TRANSVERSE,
    assemble_formula,
    check_displacement,
    enumerate_delta,
    find_displacement,
)


def show_cycle(fan, cyc):
    return " + ".join(f"{c}·[ray {fan.rays[fan.cone_rays[i][0]]}]" for i, c in cyc.terms) or "0"


def torus_part():
    print("== diagonal line in P1 x P1, moved by v")
    fan = product_of_lines_fan(2)
    diag = IntMatrix.from_rows([[1], [1]])
    for v in [(1, 0), (0, 1), (2, 0), (1, 1)]:
        try:
            cyc, _ = pushforward(fan, diag, zero_cone(1), v)
            print(f"  v={v}: {show_cycle(fan, cyc)}")
        except NotGenericError as exc:
            print(f"  v={v}: not generic ({len(exc.report.witnesses)} cones met at their apex)")
    cyc, _ = pushforward(fan, IntMatrix.from_rows([[2], [2]]), zero_cone(1), (1, 0))
    print(f"  doubled map, v=(1,0): {show_cycle(fan, cyc)}")


def splitting_part():
    print("\n== two vertices on a ray, trivial base")
    inst = a1_instance()
    rep = check_displacement(inst)
    print(f"  strict reading: {rep.verdict}: {rep.reason}")
    inst_t = inst.with_mode(TRANSVERSE)
    terms, N = enumerate_delta(inst_t)
    print(f"  transverse reading: {check_displacement(inst_t).verdict};",
          assemble_formula(terms, N, 2).text)

    print("\n== base of rank 1")
    inst = degeneration_instance()
    d = check_displacement(inst).dimension
    print(f"  excess dimension: direct {d['direct']}, closed form {d['closed_form']}, "
          f"corrected {d['corrected_closed_form']} (engine uses {d['used']})")
    terms, N = enumerate_delta(inst)
    print("  ", assemble_formula(terms, N, 2).text)

    print("\n== projective plane with two ambient types")
    inst = plane_instance()
    terms, N = enumerate_delta(inst)
    print(f"  v={inst.displacement}:", assemble_formula(terms, N, 2).text)
    rep = check_displacement(inst.with_displacement((1, 0)))
    print(f"  v=(1, 0): {rep.verdict} ({rep.reason})")
    v, _ = find_displacement(inst.with_displacement(None), 2)
    print(f"  first generic vector found by search: {v}")


if __name__ == "__main__":
    torus_part()
    splitting_part()
