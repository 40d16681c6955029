"""Smoke test for the cimwalk_py extension.

Build first:  cargo build -p cimwalk-py --features extension-module --release
Then run:     python3 crates/python/python/smoke.py
"""

import json
import pathlib
import shutil
import sys
import tempfile

root = pathlib.Path(__file__).resolve().parents[3]
lib = next(
    (p for p in (root / "target" / "release" / "libcimwalk_py.so", root / "target" / "debug" / "libcimwalk_py.so") if p.exists()),
    None,
)
if lib is None:
    sys.exit("libcimwalk_py.so not found; build the extension first")
tmp = tempfile.mkdtemp()
shutil.copy(lib, pathlib.Path(tmp) / "cimwalk_py.so")
sys.path.insert(0, tmp)

import cimwalk_py as cw  # noqa: E402

chain = cw.Dag(3, [(0, 1), (1, 2)])
collider = cw.Dag(3, [(0, 1), (2, 1)])
assert not cw.markov_equivalent(chain, collider)
assert cw.markov_equivalent(chain, cw.Dag(3, [(1, 0), (1, 2)]))
assert [0, 1, 2] in cw.full_imset(collider)
assert cw.shd(chain.mec(), collider.mec()) == 2

turns = chain.mec().turn_moves()
assert [m.target for m in turns] == [collider.mec()]
assert turns[0].kind == "VStructureAddition"

rows, truth = cw.simulate(5, 1.5, 5000, 3)
stats = cw.Stats.from_rows(rows)
mec, trace = stats.discover("greedy-cim")
steps = json.loads(trace)["steps"]
assert all(s["score_after"] > s["score_before"] for s in steps)
arcs = [(a["from"], a["to"]) for a in json.loads(truth)["arcs"]]
true_mec = cw.Dag(5, arcs).mec()
print("greedy-cim shd", cw.shd(mec, true_mec), "score", round(stats.score_mec(mec), 3))

census = json.loads(cw.census(3))
assert census["vertices"] == 11
print("smoke ok")
