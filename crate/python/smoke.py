"""Smoke test for the `inscribe` extension module.

Build and install first, e.g. `pip install ./crates/py --no-build-isolation`
or `maturin develop -m crates/py/Cargo.toml`, then run `python python/smoke.py`.
"""

import json
import math

import inscribe


def close(a, b, tol=1e-9):
    return abs(a - b) < tol


def check_curves():
    circle = inscribe.Curve.circle()
    assert close(circle(0.0), 1 + 0j)
    assert close(circle.derivative(0.0), 1j)
    report = circle.validate()
    assert report["simple"] and report["immersed"] and report["turning_number"] == 1
    again = inscribe.Curve.from_json(circle.to_json())
    assert close(again(1.3), circle(1.3))
    assert circle.maslov_index(3) == 6

    ellipse = inscribe.Curve([(1, 1 + 0j), (-1, 0.3 + 0j)])
    polyline = ellipse.sample(128)
    fitted = inscribe.Curve.fit(polyline, 8)
    assert fitted.validate()["simple"]
    assert close(fitted(0.0), polyline[0], 1e-2)
    assert close(fitted(math.pi), polyline[64], 1e-2)

    figure_eight = [complex(math.sin(t), math.sin(2 * t) / 2) for t in (2 * math.pi * k / 80 for k in range(80))]
    try:
        inscribe.Curve.fit(figure_eight, 8)
    except inscribe.InscribeError as e:
        assert "FitProducesInvalidCurve" in str(e)
    else:
        raise AssertionError("figure eight accepted")


def check_configs():
    square = inscribe.Config.pinwheel(2, math.pi / 2)
    assert square.n == 2 and square.is_interleaved()
    forms = square.forms()
    assert all(close(v, 2.0) for v in forms["lambda_pos"] + forms["mu_pos"])
    assert isinstance(forms["mu_raw"][0], complex)

    config = inscribe.Config([1, 1j, -1], [2, -2j, 0.5 + 0.5j])
    rows = config.transfer_matrix()
    assert all(close(sum(row), 1 + 0j) for row in rows)
    coeffs = inscribe.interpolate(config.alpha, [1, 2, 3])
    value = sum(c * config.alpha[1] ** k for k, c in enumerate(coeffs))
    assert close(value, 2 + 0j)
    assert json.loads(config.to_json())["alpha"][1] == [0.0, 1.0]

    try:
        inscribe.Config.pinwheel(3, 3.0)
    except inscribe.InscribeError as e:
        assert "ThetaOutOfRange" in str(e)
    else:
        raise AssertionError("theta out of range accepted")


def check_solve():
    circle = inscribe.Curve.circle()
    config = inscribe.Config.pinwheel(3, 0.7)
    report = inscribe.solve(circle, config, n_starts=1500, seed=1, threads=2)
    rotated = [
        ins
        for ins in report["inscriptions"]
        if abs(ins["poly"][0]) < 1e-6 and close(abs(ins["poly"][1]), 1.0, 1e-6) and abs(ins["poly"][2]) < 1e-6
    ]
    assert rotated, "no rotation found"
    again = inscribe.solve(circle, config, n_starts=1500, seed=1, threads=2)
    assert [i["poly"] for i in again["inscriptions"]] == [i["poly"] for i in report["inscriptions"]]

    colinear = inscribe.Config([-2.5, -0.5, 1.5], [-1.5, 0.5, 2.5])
    assert inscribe.solve(circle, colinear, degree=2, n_starts=2000)["inscriptions"] == []

    try:
        inscribe.solve(circle, config, degree=4)
    except inscribe.InscribeError as e:
        assert "DegreeMismatch" in str(e)
    else:
        raise AssertionError("wrong degree accepted")


def check_verify():
    report = inscribe.verify("maslov", 10)
    assert report["pass"]
    assert inscribe.verify("forms", 30, seed=3)["pass"]


if __name__ == "__main__":
    check_curves()
    check_configs()
    check_solve()
    check_verify()
    print(f"inscribe {inscribe.__version__}: smoke test passed")
