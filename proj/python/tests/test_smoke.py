import csv
import io
import math

import numpy as np
import pytest

import mixedtri


def test_triangle_layout():
    t = mixedtri.triangle(60.0, 40.0)
    assert t["O"] == (0.0, 0.0)
    assert t["A"][0] == pytest.approx(1.0)
    assert t["A"][1] == pytest.approx(-1.0 / math.tan(math.radians(60.0)))
    assert t["gamma"] == pytest.approx(math.radians(80.0))
    assert t["neumann_vertex"] == "acute"


def test_right_isosceles_eigenvalue():
    e = mixedtri.eigen(45.0, 45.0, n=32)
    # Legs of length sqrt(2): mu = pi^2 / 2.
    assert e["mu"] * 2.0 == pytest.approx(math.pi**2, rel=2e-3)
    u = e["u"]
    assert u.shape == (e["vertices"].shape[0],)
    assert e["cells"].shape[1] == 3
    assert np.argmax(u) == int(np.argmin(np.linalg.norm(e["vertices"], axis=1)))


def test_verify_report():
    r = mixedtri.verify(60.0, 40.0, n=32, positivity_grid=2)
    assert r["all_pass"]
    assert r["failures"] == []
    assert r["max_class"] == "NeumannVertex"
    assert "summary.all_pass = true" in r["report"]


def test_sweep_csv_shape():
    text = mixedtri.sweep_csv([(60.0, 40.0), (30.0, 30.0), (100.0, 90.0)], n=8, workers=2)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0][0] == "alpha_deg"
    assert len(rows) == 4
    assert all(len(r) == 13 for r in rows)
    assert rows[3][12].startswith("AngleDomain")


def test_continuation_and_errors():
    path = mixedtri.continuation(-1.1, 1.2, [1.0, 2.0], n=16)
    assert [p["t"] for p in path] == [1.0, 2.0]
    assert path[1]["gamma"] > path[0]["gamma"] > math.pi / 2
    assert all(p["monotone_pass"] for p in path)
    with pytest.raises(mixedtri.Error, match="ParamDomain"):
        mixedtri.continuation(-0.5, 1.2, [1.0], n=8)
    with pytest.raises(mixedtri.Error, match="AngleDomain"):
        mixedtri.triangle(100.0, 90.0)


def test_cli_entry(tmp_path):
    code, out, err = mixedtri.run_cli(["--n", "8", "--out", str(tmp_path), "mesh"])
    assert code == 0, err
    assert "mesh.valid = true" in out
    assert (tmp_path / "mesh" / "45x45" / "manifest.txt").exists()
    code, _, err = mixedtri.run_cli(["sweep", "--grid-count", "0"])
    assert code == 1 and "Usage" in err
