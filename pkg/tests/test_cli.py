import json
import subprocess
import sys
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest

from affine_fractals.cli import main
from affine_fractals.exporter import dumps, export_json, load_json
from affine_fractals.generator import default_frame, generate_points_recurrence, map_frame

from test_lattice_core import PRINTED_N2


@pytest.fixture
def run(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)

    def _run(*argv):
        code = main([str(a) for a in argv])
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 1, out
        return code, json.loads(out[0])

    return _run


def rationals(table):
    return [[[Fraction(x) for x in row] for row in m] for m in table]


def test_generate_carpet_svg(run, tmp_path):
    code, report = run("generate", "--kind", "sponge", "--n", 2, "--m", 3, "--format", "svg", "-o", "carpet.svg")
    assert code == 0 and report["cells"] == 512
    root = ET.parse(tmp_path / "carpet.svg").getroot()
    assert len(root.findall(".//{http://www.w3.org/2000/svg}polygon")) == 512


def test_generate_pyramid_obj(run, tmp_path):
    code, report = run("generate", "--kind", "simplex", "--n", 3, "--m", 1, "--format", "obj", "-o", "pyr.obj")
    assert code == 0 and report["cells"] == 4
    faces = [l for l in (tmp_path / "pyr.obj").read_text().splitlines() if l.startswith("f ")]
    assert len(faces) == 16


def test_generate_sponge4_json(run, tmp_path):
    code, report = run("generate", "--kind", "sponge", "--n", 4, "--m", 1, "--format", "json", "-o", "s.json")
    assert code == 0 and report["cells"] == 48
    assert len(load_json(tmp_path / "s.json").cells) == 48


def test_generate_default_name_and_cells_only(run, tmp_path):
    assert run("generate", "--kind", "simplex", "--n", 2, "--m", 2)[0] == 0
    box = (tmp_path / "simplex_n2_m2.svg").read_bytes()
    assert run("generate", "--kind", "simplex", "--n", 2, "--m", 2, "--cells-only", "-o", "c.svg")[0] == 0
    assert (tmp_path / "c.svg").read_bytes() == box


def test_generate_is_idempotent(run, tmp_path):
    for name in ("a.obj", "b.obj"):
        run("generate", "--kind", "sponge", "--n", 3, "--m", 2, "-o", name)
    assert (tmp_path / "a.obj").read_bytes() == (tmp_path / "b.obj").read_bytes()


def test_slice_sponge4(run, tmp_path):
    code, report = run("slice", "--kind", "sponge", "--n", 4, "--m", 1, "-o", "s4")
    assert code == 0 and report["slices"] == 4 and report["format"] == "obj"
    assert sorted(p.name for p in tmp_path.glob("s4_t*.obj")) == [f"s4_t{t}.obj" for t in range(4)]
    manifest = json.loads((tmp_path / "s4_pairs.json").read_text())
    assert len(manifest["pairs"]) == 48
    assert all(p["top"] == p["bottom"] + 1 for p in manifest["pairs"])


def test_slice_sponge3_svg(run, tmp_path):
    code, report = run("slice", "--kind", "sponge", "--n", 3, "--m", 1)
    assert code == 0 and report["format"] == "svg"
    assert len(list(tmp_path.glob("sponge_n3_m1_t*.svg"))) == 4


def test_slice_simplex4_and_generate_flag(run, tmp_path):
    code, report = run("generate", "--slice", "--kind", "simplex", "--n", 4, "--m", 1, "-o", "p4.obj")
    assert code == 0 and len(report["files"]) == 3
    assert sorted(p.name for p in tmp_path.glob("p4_t*")) == ["p4_t0.obj", "p4_t1.obj", "p4_t2.obj"]


def test_invariants_default_carpet(run):
    code, report = run("invariants", "--kind", "sponge", "--n", 2)
    assert code == 0 and report["self_similar"] is True
    assert rationals(report["invariants"]) == PRINTED_N2


def test_invariants_equivalence_and_perturbation(run, tmp_path):
    frame = default_frame("sponge", 2)
    plain = generate_points_recurrence(frame, (4, 4))
    mapped = generate_points_recurrence(map_frame(frame, [[2, 1], [Fraction(1, 3), 5]], [7, -3]), (4, 4))
    export_json(plain, tmp_path / "a.json")
    export_json(mapped, tmp_path / "b.json")
    code, report = run("invariants", "a.json", "b.json")
    assert code == 0 and report["equivalent"] is True

    doc = json.loads(dumps(plain))
    doc["points"][5]["coords"][0] = {"num": "1", "den": "2"}
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    code, report = run("invariants", "bad.json")
    assert code == 0 and report["self_similar"] is False
    code, report = run("invariants", "a.json", "bad.json")
    assert report["equivalent"] is False


@pytest.mark.parametrize("n", [2, 3, 4])
def test_verify_canonical_passes(run, n):
    code, report = run("verify", "--n", n, "--m", 1)
    assert code == 0 and report["passed"]
    assert {c["name"] for c in report["checks"]} >= {"commutation", "hyperplane", "structure_residual", "count"}


@pytest.mark.parametrize("m, cells", [(1, 20), (2, 400), (3, 8000)])
def test_verify_counts(run, m, cells):
    code, report = run("verify", "--n", 3, "--m", m)
    count = next(c for c in report["checks"] if c["name"] == "count")
    assert code == 0 and count["closed_form"] == count["enumerated"] == cells


def test_verify_tampered_matrices(run, tmp_path):
    tampered = [[list(r) for r in m] for m in PRINTED_N2]
    tampered[0][1][2] = 3
    (tmp_path / "m.json").write_text(json.dumps({"matrices": tampered}))
    code, report = run("verify", "--n", 2, "--matrices", "m.json")
    assert code == 1 and not report["passed"]
    failed = {c["name"] for c in report["checks"] if not c["passed"]}
    assert "commutation" in failed and "hyperplane" in failed


@pytest.mark.parametrize(
    "kind, n, m, expected",
    [("sponge", 4, 2, 2304), ("simplex", 5, 3, 216), ("sponge", 2, 1, 8)],
)
def test_count(run, kind, n, m, expected):
    code, report = run("count", "--kind", kind, "--n", n, "--m", m)
    assert code == 0 and report["closed_form"] == expected and report["agree"] is True


def test_config_file(run, tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"kind": "simplex", "n": 2, "m": 6}))
    code, report = run("count", "--config", "cfg.json")
    assert report["closed_form"] == 729
    code, report = run("count", "--config", "cfg.json", "--m", 2)
    assert report["closed_form"] == 9


def test_exit_codes(run, tmp_path):
    assert run("count", "--n", 9)[0] == 2
    assert run("generate", "--kind", "sponge", "--n", 3, "--m", 1, "--format", "svg")[0] == 2
    assert run("generate", "--kind", "sponge", "--n", 6, "--m", 4)[0] == 2
    (tmp_path / "flat.json").write_text('{"mode":"affine","base":[0,0],"neighbors":[[1,1],[2,2]]}')
    code, report = run("generate", "--frame", "flat.json")
    assert code == 3 and "neighbors[1]" in report["message"]
    (tmp_path / "broken.json").write_text('{"mode":')
    assert run("generate", "--frame", "broken.json")[0] == 3
    assert run("generate", "--frame", "missing.json")[0] == 4
    assert run("generate", "-o", tmp_path / "no" / "dir.svg")[0] == 4


def test_argparse_errors_exit_2(capsys):
    assert main(["generate", "--kind", "cube"]) == 2
    assert json.loads(capsys.readouterr().out)["error"] == "usage"
    assert main([]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "affine_fractals", "count", "--kind", "sponge", "--n", "3", "--m", "2"],
        capture_output=True, text=True, cwd=tmp_path,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["closed_form"] == 400
