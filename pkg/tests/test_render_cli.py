import json
from pathlib import Path

import pytest

from ot12.cli import main
from ot12.configuration import Configuration, from_text, to_text
from ot12.lattice import Torus, Window
from ot12.render import render_svg


def test_render_empty_outline_only(torus3):
    svg = render_svg(Configuration(torus3))
    assert svg.startswith("<?xml")
    assert 'stroke="#000000"' not in svg  # nothing solid
    assert 'stroke="#cccccc"' in svg


def test_render_all_horizontal_solid_a_edges(torus3):
    cfg = Configuration.all_horizontal(torus3)
    svg = render_svg(cfg)
    assert svg.count('stroke="#000000"') == torus3.n_edges // 3
    assert svg.count('stroke="#cccccc"') == 2 * torus3.n_edges // 3


def test_render_deterministic(torus3):
    cfg = Configuration.all_horizontal(torus3)
    assert render_svg(cfg, code=1) == render_svg(cfg, code=1)
    assert 'fill="#e41a1c"' in render_svg(cfg, code=1)


def test_render_oversize_rejected():
    with pytest.raises(ValueError):
        render_svg(Configuration(Torus(128)))


def test_cli_enumerate(capsys):
    assert main(["enumerate", "--L", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["count"] == 450


def test_cli_sample_census_render_pipeline(tmp_path, capsys):
    outdir = tmp_path / "run1"
    rc = main(
        [
            "sample",
            "--L", "6",
            "--a", "1", "--b", "1", "--c", "1",
            "--seed", "5",
            "--sweeps", "4",
            "--burn-in", "20",
            "--thin", "2",
            "--out", str(outdir),
        ]
    )
    assert rc == 0
    files = sorted(p.name for p in outdir.iterdir())
    assert "manifest.json" in files and "config.json" in files
    assert "diagnostics.json" in files
    samples = [p for p in files if p.startswith("sample_")]
    assert len(samples) == 4
    cfg = from_text((outdir / samples[0]).read_text())
    assert cfg.geometry.L == 6
    manifest = json.loads((outdir / "manifest.json").read_text())
    assert manifest["seed"] == 5 and manifest["tool"] == "ot12"
    assert "config_hash" in manifest

    censusdir = tmp_path / "census1"
    rc = main(
        ["census", str(outdir), "--window", "0", "0", "5", "5", "--out", str(censusdir), "--svg"]
    )
    assert rc == 0
    assert (censusdir / "census.csv").read_text().startswith("sample,")
    assert (censusdir / "first_sample.svg").exists()

    svg_out = tmp_path / "pic.svg"
    rc = main(["render", "--in", str(outdir / samples[0]), "--out", str(svg_out), "--code", "1"])
    assert rc == 0
    assert svg_out.read_text().startswith("<?xml")


def test_cli_surgery_rewire(tmp_path):
    src = tmp_path / "in.ot12"
    src.write_text(to_text(Configuration.all_horizontal(Torus(16))))
    outdir = tmp_path / "surg"
    rc = main(
        ["surgery", "--op", "rewire", "--N", "2", "--center", "8", "8",
         "--in", str(src), "--out", str(outdir)]
    )
    assert rc == 0
    report = json.loads((outdir / "report.json").read_text())
    assert report["op"] == "rewire"
    assert report["n_modified"] == 0  # all-horizontal is a fixed point
    assert (outdir / "after.svg").exists()
    assert from_text((outdir / "after.ot12").read_text()) is not None


def test_cli_keane(tmp_path, capsys):
    rundir = tmp_path / "samples"
    assert main(
        ["sample", "--L", "17", "--seed", "3", "--sweeps", "3", "--burn-in", "30",
         "--thin", "1", "--out", str(rundir)]
    ) == 0
    outdir = tmp_path / "keane"
    rc = main(
        ["keane", str(rundir), "--s", "2", "--N", "1", "--center", "8", "8",
         "--window", "0", "0", "16", "16", "--out", str(outdir)]
    )
    assert rc == 0
    report = json.loads((outdir / "keane.json").read_text())
    assert report["n_samples"] == 3
    assert report["violations"] == []


def test_cli_partitions(capsys):
    assert main(["partitions", "--Ysize", "5"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["max_family"] == 3 and out["bound"] == 3


def test_cli_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["enumerate", "--nonsense"])
    assert exc.value.code == 2


def test_cli_bad_input_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.ot12"
    bad.write_text("not a configuration\n")
    rc = main(["census", str(bad), "--out", str(tmp_path / "cout")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_cli_out_root_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("OT12_OUT_ROOT", str(tmp_path))
    rc = main(["sample", "--L", "4", "--seed", "1", "--sweeps", "1",
               "--burn-in", "5", "--thin", "1", "--out", "relrun"])
    assert rc == 0
    assert (tmp_path / "relrun" / "manifest.json").exists()
