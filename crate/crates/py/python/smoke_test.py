"""Smoke test for the compiled extension.

Build and run from the workspace root:

    cargo build -p s2l-py --release --features extension-module
    cp target/release/libs2l_py.so crates/py/python/s2l.so
    python3 crates/py/python/smoke_test.py
"""

import json
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import s2l  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "..", "core", "fixtures")


def main():
    text = s2l.describe_sequence([0, 0, 3, 3, 3, 0])
    assert s2l.parse_sequence_description(text) == [0, 0, 3, 3, 3, 0], text
    assert s2l.brackets_from_names(s2l.name_brackets("([{<>}])", "alias")) == "([{<>}])"
    assert s2l.linearize_table("rank|nation\n1|SWE") == "rank: 1; nation: SWE"
    assert s2l.lookup_smiles("CCCO") == "Propionylo"
    assert s2l.emoji_name("U+1F62D") == "crying face"
    try:
        s2l.lookup_smiles("CCN(CC)CC")
        raise AssertionError("expected a lookup miss")
    except KeyError:
        pass

    assert s2l.dyck_oracle("([]") == ")"
    assert s2l.shift_oracle([1, 0, 0], 2) == [0, 0, 1]
    pairs, target, gold, k = s2l.gen_arc(5, 1, 3, 8)
    assert s2l.shift_oracle(target, k) == gold and len(pairs) == 3

    assert abs(s2l.pearson([1, 2, 3], [1, 2, 4]) - 0.98198) < 1e-5
    assert abs(s2l.token_f1("jack smith", "jack") - 2 / 3) < 1e-12
    assert s2l.exact_match("The Nile.", ["nile"]) == 1

    query = s2l.build_query("Input: {s1}", [("s1", "0,1")], "s2l-sub", {"s1": "a 0, followed by a 1"})
    assert query == "Input: a 0, followed by a 1", query
    assert s2l.extract_answer("dyck", "The answer is )]") == ")]"
    assert len(s2l.EMOTIONS) == 8

    with tempfile.TemporaryDirectory() as out:
        report, code = s2l.run(tasks=["dyck", "sentiment"], methods=["zs", "s2l-cat"], n=5,
                               data_dir=FIXTURES, out_dir=out)
        assert code == 0
        rows = json.loads(report)["rows"]
        assert rows and all(r["value"] == 1.0 for r in rows)
        assert os.path.exists(os.path.join(out, "report.md"))
    print("python smoke test passed")


if __name__ == "__main__":
    main()
