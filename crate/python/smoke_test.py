"""Smoke test for the bfamily extension module."""

import json
import math
import tempfile
from pathlib import Path

import bfamily


def main():
    grid = bfamily.Grid(64)
    xs = grid.points()
    u = bfamily.Field(grid, [math.sin(4 * x) for x in xs])
    assert abs(u.besov_norm(2.0) - 16 * math.sqrt(math.pi)) < 1e-10
    assert abs(u.derivative().max_abs() - 4.0) < 1e-10

    bump = bfamily.Field(grid, [0.3 * math.exp(-((x - 3) ** 2)) for x in xs])
    result = bfamily.simulate(bump, bfamily.Field.zeros(grid), bfamily.ParamSet.b_family(2.0, 1.0), 1.0)
    assert result["verdict"] == "completed"
    assert abs(result["times"][-1] - 1.0) < 1e-12
    series = result["series"]
    assert all(0.25 * l * l <= m <= l * l for l, m in zip(series["l2_u"], series["m_chi"]))

    steep = bfamily.Field(grid, [-5 * math.sin(x) for x in xs])
    dp = bfamily.simulate(steep, bfamily.Field.zeros(grid), bfamily.ParamSet.constant(1, 3, 1, 1), 1.0)
    assert dp["verdict"] == "blew_up", dp["verdict"]

    assert abs(bfamily.lemma32_bound([1.5], 0.3, 2.0, 0) - 2.1) < 1e-15

    config = "scenario = simulate\ngrid.n = 64\ndata.u.preset = zero\n"
    with tempfile.TemporaryDirectory() as out:
        code, summary = bfamily.run_config(config, out)
        assert code == 0
        assert json.loads(summary)["exit_code"] == 0
        assert (Path(out) / "series.csv").exists()

    try:
        bfamily.Grid(100)
    except ValueError:
        pass
    else:
        raise AssertionError("a non power-of-two grid must be rejected")
    print("smoke test passed")


if __name__ == "__main__":
    main()
