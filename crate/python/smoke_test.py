"""Smoke test for the cdsp extension module.

Build and install first:  pip install --no-build-isolation ./crates/python
"""
import json
import math
import random

import cdsp


def main():
    rng = random.Random(1)
    x = [rng.uniform(0, 3) for _ in range(200)]
    y = [2 * xi + rng.uniform(-1, 1) for xi in x]

    res = cdsp.infer(x, y, boot_outer=50, boot_inner=50, seed=3)
    print(res)
    assert res.direction == "x_to_y"
    assert 0.0 <= res.p_cdsp <= 1.0
    assert res.p_cdsp == res.favorable / 50
    assert res.i_hat_x > res.i_hat_y
    assert json.loads(res.to_json())["favorable"] == res.favorable

    again = cdsp.infer(x, y, boot_outer=50, boot_inner=50, seed=3)
    assert again.to_json() == res.to_json()

    direction, xtoy, ytox = cdsp.point_estimate(x, y, n_boot=60)
    assert direction == "x_to_y" and ytox.index_hat > xtoy.index_hat

    lg = cdsp.lingam(x, y, n_boot=50)
    print(lg)
    assert lg.direction in ("x_to_y", "y_to_x")

    assert cdsp.hsic(x, y) > cdsp.hsic(x, [rng.random() for _ in x])
    assert cdsp.support_category(0.9) == "Very strong"
    assert "paper-d3" in cdsp.presets()

    summary = json.loads(cdsp.simulate("paper-d1", n=60, reps=3, n_mc=1000, boot=50))
    assert summary["completed"] == 3

    try:
        cdsp.infer([1.0] * 40, [2.0] * 40, boot_outer=50, boot_inner=50)
    except cdsp.DegenerateError:
        pass
    else:
        raise AssertionError("constant input should be degenerate")

    try:
        cdsp.infer(x[:5], y[:5])
    except ValueError:
        pass
    else:
        raise AssertionError("tiny sample should be rejected")

    assert not math.isnan(res.xtoy.theta_hat)
    print("smoke test passed")


if __name__ == "__main__":
    main()
