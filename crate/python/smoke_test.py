"""Smoke test for the Python bindings.

Build first:  maturin develop -m crates/python/Cargo.toml
"""

import json
import math

import sis_invariance as sis


def main():
    grid = sis.Grid(64, 8)
    assert grid.samples_per_unit == 64 and len(grid) == 64
    assert math.isclose(grid.omega(0), 1 / 128)

    two = sis.Spectrum.indicator([(0, 1), (2, 3)], grid)
    order = sis.invariance_order([two], 8, grid)
    assert order["declared"] == {"exact": 2}, order["declared"]
    assert sis.rank_sum_test([two], 2, grid)["invariant"]
    assert not sis.rank_sum_test([two], 4, grid)["invariant"]

    unit = sis.Spectrum.indicator([(0, 1)], grid)
    double = sis.Spectrum.indicator([(0, 2)], grid)
    assert sis.ti_check([unit], grid) and not sis.ti_check([double], grid)

    lower, upper = sis.frame_bounds([unit, sis.Spectrum.indicator([(1, 2)], grid)], grid)
    assert math.isclose(lower, 1) and math.isclose(upper, 1)

    assert sis.invariance_oracle([two], 2, grid)["max_residual"] < 1e-10
    membership = sis.refined_membership(unit, double, 1)
    assert abs(membership["max_residual"] - 1 / math.sqrt(2)) < 1e-9

    z = sis.zero_set_bound_check([unit], 3, 0.0, grid)
    assert z["bound"] == 2.0 and z["pass"]

    h = sis.modulation_h(3, 1, 1.5)
    assert math.isclose(abs(h), 1.0) and sis.in_partition(3, 1, 1.5)

    haar = sis.Spectrum.from_json('{"type": "bspline", "order": 0}', grid)
    assert math.isclose(abs(haar.get(0, 0)), 1.0, rel_tol=1e-3)

    try:
        sis.Grid(1, 8)
    except ValueError:
        pass
    else:
        raise AssertionError("M = 1 accepted")

    config = {"generators": [{"type": "piecewise_constant", "breakpoints": ["0", "1", "2", "3"],
                              "values": [[1, 0], [0, 0], [1, 0]]}],
              "grid": {"M": 64, "K": 8}, "n_max": 6}
    report = json.loads(sis.analyze(json.dumps(config)))
    assert report["schema"] == sis.SCHEMA
    assert report["order"]["declared"] == {"exact": 2}

    print("python smoke test passed")


if __name__ == "__main__":
    main()
