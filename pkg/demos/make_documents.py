"""Write the example instance documents used in the README into demos/data/."""
import json
from pathlib import Path

from tropsplit.catalog import a1_instance, degeneration_instance, plane_instance
from tropsplit.serialize import dumps, instance_document

OUT = Path(__file__).parent / "data"

P1xP1 = {"lattice_rank": 2, "rays": [["1", "0"], ["0", "1"], ["-1", "0"], ["0", "-1"]],
         "cones": [[0, 1], [1, 2], [2, 3], [3, 0]]}


def main():
    OUT.mkdir(exist_ok=True)
    docs = {
        "a1.json": instance_document(a1_instance()),
        "degeneration.json": instance_document(degeneration_instance()),
        "plane.json": instance_document(plane_instance()),
        "diagonal.json": {
            "schema_version": "1",
            "fans": {"X": P1xP1},
            "fs_push": {"fanX": "X", "f_N": [["1"], ["1"]], "v": ["1", "0"]},
        },
        "snf.json": {"schema_version": "1", "lattice": {"matrix": [["2", "4"], ["6", "8"]]}},
    }
    # the degeneration's fans and type, addressed by the fan/type commands
    typed = instance_document(degeneration_instance())
    del typed["instance"]
    typed["fan"] = {"fan": "X", "tau": [["0", "1"]]}
    typed["type"] = {"complex": "X", "type": "tau"}
    docs["degeneration_type.json"] = typed
    for name, doc in docs.items():
        (OUT / name).write_text(dumps(doc, pretty=True))
    (OUT / "kunneth.json").write_text(
        json.dumps([{"alpha": "1", "classes": ["pt", "1"]}, {"alpha": "-1", "classes": ["H", "H"]}],
                   ensure_ascii=False, indent=2) + "\n"
    )
    print("wrote", ", ".join(sorted(p.name for p in OUT.iterdir())))


if __name__ == "__main__":
    main()
