"""Smoke test for the pyibn extension.

Build it first:
    cargo build --release -p ibn-py
    cp target/release/libpyibn.so python/pyibn.so
"""

import json
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pyibn


def main():
    seq = pyibn.DegreeSequence.sequence_tree(256)
    assert seq.level_size(10) == 8, seq.level_size(10)
    assert seq.ball_size(20) == sum(seq.level_size(n) for n in range(21))

    sweep = pyibn.ibn_estimate(seq, [0.3, 0.5, 0.7], [16, 32, 64, 128, 256])
    assert sweep["lower"] == 0.5 and sweep["upper"] == 0.7, sweep
    print("sequence tree IBN bracket:", sweep["lower"], sweep["upper"])

    assert seq.survival(0.3, 64) > 1e-6
    assert seq.effective_conductance(0.7, 256) < 1e-3
    assert seq.return_frequency(0.7, 500, 100_000, 1) > 0.99

    fire = pyibn.DegreeSequence.sequence_tree(450).lambda_c(2, [0.2, 0.8], 1.0, [16, 32, 64, 128, 200])
    assert fire["lower"] == 0.2 and fire["upper"] == 0.8, fire

    tree = pyibn.Tree.random(3, 5, 3, 0.1)
    again = pyibn.Tree.from_text(tree.to_text())
    assert len(again) == len(tree) and again.level_sizes() == tree.level_sizes()
    value, cut = tree.min_cut(0.5, tree.height())
    assert value > 0 and cut

    arena = pyibn.DegreeSequence.sequence_tree(64).to_tree(64)
    rt = pyibn.rt_estimate(arena, 0.7, [0.5, 1.0, 2.0], [16, 32, 64], 4)
    print("conductance sweep classes:", rt["classes"])

    growth = pyibn.nathanson_growth(12)
    assert growth[-1][0] == 12 and growth[-1][1] > growth[-2][1]
    lex = pyibn.nathanson_tree(10)
    assert len(lex) == growth[9][1] + 1

    assert pyibn.is_trivial("bcd") and not pyibn.is_trivial("ab")
    assert pyibn.loop_erase("bb") == ""
    word, orbit = pyibn.search_word(10)
    assert orbit == pyibn.orbit_sizes(word)[-1] == 6
    marks = pyibn.branch_marks(word)
    assert sum(marks) == orbit
    assert abs(pyibn.orbit_exponent() - 0.7674) < 1e-4

    with tempfile.TemporaryDirectory() as out:
        config = {
            "command": "nathanson",
            "depth": 10,
            "emit_tree": None,
            "emit_stats": "stats.csv",
            "seed": 0,
            "out_dir": out,
        }
        summary = json.loads(pyibn.run_config(json.dumps(config)))
        assert summary["kind"] == "nathanson"
        assert os.path.exists(os.path.join(out, "stats.csv.manifest.json"))

    try:
        pyibn.nathanson_growth(40, memory_cap=100)
    except MemoryError:
        pass
    else:
        raise AssertionError("memory cap not enforced")

    print("pyibn", pyibn.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
