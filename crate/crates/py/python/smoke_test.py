"""Smoke test for the coopkit Python bindings."""

import json
from pathlib import Path

import coopkit_py as ck

DATA = Path(__file__).resolve().parents[2] / "core" / "data"


def main():
    assert [len(ck.trees(n)) for n in range(1, 7)] == [1, 1, 3, 16, 125, 1296]

    gr = ck.GraphCooperad(4)
    assert gr.rank(3) == 3
    assert gr.basis(3)[0] == "1 2 3; 1-2 1-3"
    assert gr.cocomp("[1 | 1>1,2>1]") == [[1]]
    report = gr.verify(3)
    assert report.all_pass(), report.to_text()
    assert all(e["status"] == "pass" for e in json.loads(report.to_json()))

    bad = ck.GraphCooperad(4, corrupt="wrong-counit")
    failures = bad.verify(3).failures()
    assert failures and failures[0][0].startswith("counit"), failures

    cosimp = ck.GraphCooperad(3, directed=True).verify_cosimplicial(3, 3)
    assert cosimp.all_pass(), cosimp.to_text()

    coalg = (DATA / "coalgebra_gr.json").read_text()
    assert ck.GraphCooperad(3).verify_coalgebra(coalg, 3, 3).all_pass()

    a = ck.SymSeq.from_json((DATA / "seq_a.json").read_text())
    b = ck.SymSeq.from_json((DATA / "seq_b.json").read_text())
    for n in range(4):
        assert ck.compare_closed_form(a, b, n) == ck.compose_rank([a, b], n)
    assert a.act([1, 0]) == [[1, 0], [0, -1]]

    assert ck.verify_complexes(3).all_pass()
    assert ck.run_cli(["trees", "enum", "--max-set", "4", "--out", "/dev/null"]) == 0
    print("coopkit_py smoke test passed")


if __name__ == "__main__":
    main()
