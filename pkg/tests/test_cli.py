import csv
import subprocess
import sys

import pytest

from aptile.cli import main
from aptile.cutproject import cp_points_1d, cp_points_octa
from aptile.render_io import export, import_
from aptile.random_tiling import rtiling_from_patch
from aptile.robinson import RobGrid, all_tiles, verify_grid
from aptile.substitution import fixed_point_1d

from conftest import ab_square, penrose_sun


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, (out.read_bytes() if out.exists() else None)


def test_inflate_matches_the_library(tmp_path):
    code, data = run(tmp_path, "inflate", "--system", "silver1d", "--steps", "3")
    assert code == 0 and data == export(fixed_point_1d(3))
    code, data = run(tmp_path, "inflate", "--system", "ab", "--steps", "2", "--seed", "square")
    assert code == 0 and data == export(ab_square(2))
    code, data = run(tmp_path, "inflate", "--system", "penrose", "--steps", "2", "--strip")
    assert code == 0 and data == export(penrose_sun(2).strip_decorations())


def test_inflate_echoes_parameters(tmp_path, capsys):
    run(tmp_path, "inflate", "--system", "ab", "--steps", "1")
    err = capsys.readouterr().err
    assert "system=ab" in err and "steps=1" in err and "seed=square" in err


def test_bad_seed_is_a_domain_error(tmp_path):
    code, data = run(tmp_path, "inflate", "--system", "penrose", "--steps", "1", "--seed", "star")
    assert code == 1 and data is None


def test_cutproject(tmp_path):
    code, data = run(tmp_path, "cutproject", "--system", "ab", "--radius", "4")
    assert code == 0 and data == export(cp_points_octa(4.0))
    code, data = run(tmp_path, "cutproject", "--system", "silver1d", "--range", "-3", "7")
    assert code == 0 and data == export(cp_points_1d(-3.0, 7.0))


def test_diffract_analytic(tmp_path):
    code, data = run(tmp_path, "diffract", "--system", "ab", "--kmax", "2")
    rows = list(csv.DictReader(data.decode().splitlines()))
    assert code == 0
    first = rows[0]
    assert [first[k] for k in ("m1", "m2", "m3", "m4")] == ["0", "0", "0", "0"]
    assert float(first["intensity"]) == 1.0


def test_diffract_compare(tmp_path):
    code, data = run(tmp_path, "diffract", "--system", "silver1d", "--kmax", "1.5",
                     "--mode", "compare", "--n", "8")
    rows = list(csv.DictReader(data.decode().splitlines()))
    assert code == 0 and rows
    assert all(float(r["rel_error"]) < 0.02 for r in rows[:10])


def test_diffract_numeric_from_a_file(tmp_path):
    pts = tmp_path / "pts.json"
    pts.write_bytes(export(cp_points_octa(12.0)))
    code, data = run(tmp_path, "diffract", "--system", "ab", "--kmax", "1.5", "--mode", "numeric",
                     "--points", str(pts))
    rows = list(csv.DictReader(data.decode().splitlines()))
    assert code == 0 and float(rows[0]["intensity"]) == pytest.approx(1.0)


def test_flip_mc_zero_steps_is_the_identity(tmp_path):
    src = tmp_path / "t.json"
    src.write_bytes(export(rtiling_from_patch(ab_square(2).strip_decorations())))
    code, data = run(tmp_path, "flip-mc", "--steps", "0", "--seed", "1", "--in", str(src))
    assert code == 0 and data == src.read_bytes()


def test_flip_mc_is_deterministic(tmp_path):
    stats = tmp_path / "s.jsonl"
    a = run(tmp_path, "flip-mc", "--steps", "200", "--seed", "9", "--n", "2", "--stats-out", str(stats))
    b = run(tmp_path, "flip-mc", "--steps", "200", "--seed", "9", "--n", "2")
    assert a == b and a[0] == 0
    assert stats.read_text().count("\n") >= 2


def _with(g, t):
    h = RobGrid(g.width, g.height, [row[:] for row in g.cells])
    h[1, 1] = t
    return h


def test_robinson_pipeline(tmp_path):
    grid = tmp_path / "g.json"
    assert main(["robinson", "search", "--width", "5", "--height", "5", "--out", str(grid)]) == 0
    assert isinstance(import_(grid.read_bytes()), RobGrid)
    code, data = run(tmp_path, "robinson", "verify", "--in", str(grid))
    assert code == 0 and data == b"ok\n"
    code, data = run(tmp_path, "robinson", "hierarchy", "--in", str(grid))
    assert code == 0 and data.startswith(b"row,col,side\n")
    # an illegal grid fails verification with exit status 1
    g = import_(grid.read_bytes())
    g[1, 1] = next(t for t in all_tiles() if t.signature != g[1, 1].signature
                   and not verify_grid(_with(g, t)).ok)
    bad = tmp_path / "bad.json"
    bad.write_bytes(export(g))
    code, data = run(tmp_path, "robinson", "verify", "--in", str(bad))
    assert code == 1
    assert data.splitlines() and all(l.split()[0] in (b"edge", b"corner") for l in data.splitlines())
    assert run(tmp_path, "robinson", "verify")[0] == 1


def test_render(tmp_path):
    src = tmp_path / "p.json"
    src.write_bytes(export(ab_square(1)))
    code, data = run(tmp_path, "render", "--in", str(src), "--style", "decorated", "--unit", "20")
    assert code == 0 and data.startswith(b"<?xml") and b"<svg" in data


def test_domain_errors_exit_with_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_bytes(b'{"format": "aptile-v1", "kind": "points", "data": {"system": "ab", "points": [[0.5')
    assert run(tmp_path, "render", "--in", str(bad))[0] == 1
    assert run(tmp_path, "render", "--in", str(tmp_path / "missing.json"))[0] == 1
    assert run(tmp_path, "inflate", "--system", "ab", "--steps", "-1")[0] == 1
    assert run(tmp_path, "robinson", "search", "--width", "40")[0] == 1


def test_usage_errors_exit_with_two(tmp_path, capsys):
    assert main([]) == 2
    assert main(["inflate", "--system", "hexagon", "--steps", "1"]) == 2
    assert main(["inflate", "--system", "ab"]) == 2
    assert main(["diffract", "--system", "ab", "--kmax", "two"]) == 2


def test_threads(tmp_path, monkeypatch):
    monkeypatch.setenv("APTILE_THREADS", "4")
    assert run(tmp_path, "inflate", "--system", "silver1d", "--steps", "1")[0] == 0
    monkeypatch.setenv("APTILE_THREADS", "many")
    assert run(tmp_path, "inflate", "--system", "silver1d", "--steps", "1")[0] == 1
    monkeypatch.delenv("APTILE_THREADS")
    assert main(["--threads", "0", "inflate", "--system", "silver1d", "--steps", "1"]) == 1
    assert main(["--threads", "2", "inflate", "--system", "silver1d", "--steps", "1",
                 "--out", str(tmp_path / "x")]) == 0


def test_module_entry_point_writes_to_stdout():
    proc = subprocess.run([sys.executable, "-m", "aptile", "inflate", "--system", "silver1d", "--steps", "2"],
                          capture_output=True)
    assert proc.returncode == 0
    assert proc.stdout == export(fixed_point_1d(2))
    proc = subprocess.run([sys.executable, "-m", "aptile", "frobnicate"], capture_output=True)
    assert proc.returncode == 2
