import json
import math

import pytest

import bdlab


def test_coefficients_tau():
    lam = bdlab.coefficients("delta", 10)
    assert lam[1] == 1.0
    assert lam[2] == pytest.approx(-24 / 2 ** 5.5, rel=1e-15)


def test_bessel_and_gamma():
    assert bdlab.bessel_j(11, 25.0) == pytest.approx(-0.16823599003225700956, rel=1e-13)
    z = bdlab.log_gamma(complex(5, 30))
    assert z.real == pytest.approx(-30.883004541385086391, rel=1e-14)
    assert z.imag == pytest.approx(78.769617695308664998, rel=1e-14)


def test_kloosterman_weil_bound():
    for n, r in [(1, 1), (3, 5), (10, 17)]:
        assert abs(bdlab.kloosterman(n, r, 31)) <= 2 * math.sqrt(31)


def test_conductor():
    assert bdlab.analytic_conductor("delta", 0.0) == pytest.approx(42 / (4 * math.pi ** 2))


def test_weber():
    assert bdlab.weber_identity(0.1, 0.2, 10.0, 12)["rel_diff"] < 1e-8


def test_voronoi_delta():
    r = bdlab.voronoi_check("delta", 1, 5)
    assert r["truncated"]
    assert r["rel_diff"] < 1e-6


def test_central_value():
    p = bdlab.lvalue("delta", 0.0, 1.0)
    assert p["value"].real == pytest.approx(0.792122838646, rel=1e-10)


def test_precondition_errors_surface():
    with pytest.raises(ValueError):
        bdlab.lvalue("delta", 100.0, 1.0, n_max=50)
    with pytest.raises(ValueError):
        bdlab.run({"colour": "red"})


def test_run_writes_results(tmp_path):
    out = tmp_path / "out"
    assert bdlab.run({"suite": "special-check", "out": str(out)}) == 0
    res = json.loads((out / "results.json").read_text())
    assert res["pass"] is True
    assert bdlab.run({"suite": "none", "out": str(tmp_path / "none")}) == 2
