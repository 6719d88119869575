import json
import math
import os
import subprocess
from pathlib import Path

import pytest

import nmembrane as nm

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def test_projection_matches_oracle():
    v, w = [3.0, 1.0, 2.0, -1.0], [1.0, 2.0, 1.0, 0.5]
    a = nm.isotonic_project(v, w)
    b = nm.qp_oracle_project(v, w)
    assert max(abs(x - y) for x, y in zip(a, b)) < 1e-12
    assert all(a[i] >= a[i + 1] for i in range(3))


def test_cone_catalogue():
    cones = nm.enumerate_cones([1, 1], [1, -1])
    assert [c["id"] for c in cones] == ["L", "0", "R"]
    assert math.isclose(cones[0]["weiss"], math.pi / 16, rel_tol=1e-14)


def test_translation_is_tau():
    minus, plus = nm.tau([1, 1], [1, -1], "L")
    s = 0.4
    v = nm.h_eval([1, 1], [1, -1], "L", [s * m for m in minus], [s * p for p in plus], 1.0)
    assert math.isclose(v[0], 0.5 * 1.4**2, rel_tol=1e-12)
    (g,) = nm.b_to_gamma([1, 1], [1, -1], "L", [s * m for m in minus], [s * p for p in plus])
    assert math.isclose(g, -s, rel_tol=1e-12)


def test_solve_disk_shapes():
    r = nm.solve_disk([1, 1], [1, -1], rotation=0.3, h=1 / 16)
    n = len(r["x"])
    assert r["u"].shape == (n, 2)
    assert r["kkt_residual"] < 1e-8
    assert (r["u"][:, 0] >= r["u"][:, 1] - 1e-12).all()


def test_errors_are_python_exceptions():
    with pytest.raises(nm.NmembraneError):
        nm.normalize([1, 1], [-1, 1])
    with pytest.raises(nm.ScenarioError):
        nm.run_scenario({"pipeline": "cones"})


def test_run_scenario_and_manifest():
    files, manifest = nm.run_scenario(json.loads((SCENARIOS / "cones_n3.json").read_text()))
    cones = json.loads(files["cones.json"])
    assert cones["count"] == 9
    assert manifest["pipeline"] == "cones"


def test_scenarios_match_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema = nm.schema()
    if os.environ.get("NMEMBRANE_SCHEMA"):
        assert schema == json.loads(Path(os.environ["NMEMBRANE_SCHEMA"]).read_text())
    for path in sorted(SCENARIOS.glob("*.json")):
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError:
            assert path.name.startswith("bad_")
            continue
        errors = list(jsonschema.Draft202012Validator(schema).iter_errors(doc))
        if path.name == "bad_unknown_key.json":
            assert errors
        elif not path.name.startswith("bad_"):
            assert not errors, (path.name, errors[0].message)


@pytest.mark.skipif(not os.environ.get("NMEMBRANE_CLI"), reason="CLI path not provided")
def test_cli_rejects_bad_input(tmp_path):
    out = tmp_path / "out"
    rc = subprocess.run(
        [os.environ["NMEMBRANE_CLI"], "run", "--scenario", str(SCENARIOS / "bad_forces.json"), "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert rc.returncode == 2
    assert "/problem/forces/1" in rc.stderr
    assert not out.exists()
