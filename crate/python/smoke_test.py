"""Smoke test for the pydivseq extension module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

from fractions import Fraction

import pydivseq as ds


def fibonacci(count):
    out = [0, 1]
    while len(out) < count:
        out.append(out[-1] + out[-2])
    return out[:count]


def main():
    fib = ds.Recurrence([-1, -1, 1], [0, 1])
    assert fib.order == 2
    assert fib.terms(20) == fibonacci(20)
    assert fib.term(90) == fibonacci(91)[90]

    ev = ds.Evaluator(["-1", "-1", "1"])
    for n in range(15):
        assert ev.det_exact(n) == fibonacci(15)[n]
        assert ev.evaluate(n)["agreement"] != "Mismatch"

    mersenne = ds.Evaluator([2, -3, 1])
    assert mersenne.closed_form(10) == {"exact": 2**10 - 1}
    assert ds.gv_det_exact([2, -3, 1], 12) == 2**12 - 1

    assert ds.nondegeneracy_check([-1, -1, 1]) == "NonDegenerate"
    assert ds.nondegeneracy_check([-1, 0, 1]) != "NonDegenerate"

    table = ds.impulse_table([-1, -1, 1], 6)
    assert table[0][:2] == [1, 0] and table[1][:2] == [0, 1]

    # Classical Vandermonde on distinct nodes: product of differences.
    nodes = [Fraction(1, 2), 3, -2]
    expected = 1
    for i in range(3):
        for j in range(i + 1, 3):
            expected *= nodes[j] - nodes[i]
    assert ds.flowe_harris([(x, 1) for x in nodes]) == expected

    rep = ds.verify_theorem(fib, 30)
    assert rep["is_divisibility_prefix"] and not rep["finding"]
    assert all(row["divides"] for row in rep["theorem_results"])

    lucas = ds.Recurrence([-1, -1, 1], [2, 1])
    assert ds.check_divisibility_prefix(lucas, 10)["def_violations"]

    cert = ds.cramer_certificate(fib, 7)
    assert cert["numerator_det"] == cert["d_value"] == 13

    assert ds.remark_product([-1, -1, 1], 9)["interval"] is not None

    try:
        ds.Evaluator([1, 0, 1])
    except ds.DivseqError:
        pass
    else:
        raise AssertionError("degenerate polynomial accepted")

    print("pydivseq smoke test passed")


if __name__ == "__main__":
    main()
