"""Quick check of the tlcharges_py extension. Run with the built module on PYTHONPATH."""

import json

import tlcharges_py as tl

w = tl.Word("[0 1 2]")
assert w.sequence == [0, 1, 2]
assert w.params == (3, 0, 0, 0)
assert tl.Word.from_sequence([0, 1, 2]) == w
assert len(w) == 3

q4 = tl.build_charge(4)
assert len(q4) == 12
assert q4.get("[0 1]") == "-2"
assert q4.get("[0 1 2]") == "2*tau"
assert tl.coefficient(4, w) == "2*tau"
assert abs(q4.evaluate("[0 1 2]", 1.5) - 3.0) < 1e-12
assert json.loads(q4.to_json())["k"] == 4

assert tl.triangle_check(6, 7)
assert tl.commutator_vanishes(5)
assert json.loads(tl.check_identities(4))["passed"]

a3 = tl.a_series(3)
g = tl.boost_series(3)
assert len(g) == 3 and a3.k == 3

assert tl.charge_commutator(4, 8) == 0.0
assert tl.charge_commutator(4, 8, twist="diag:2") == 0.0
assert tl.charge_commutator(3, 10, exact=False) < 1e-10
assert tl.relations_check(6) == []
assert tl.relations_check(6, twist="general:1,1,1,2") != []

try:
    tl.Word("[0 0]")
except ValueError:
    pass
else:
    raise AssertionError("repeated index accepted")

assert tl.selftest() == []
print("smoke test ok")
