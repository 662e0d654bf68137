import csv
import json
import subprocess
import sys

import pytest

from chiralchain import __version__
from chiralchain.cli import RunConfig, UsageError, load_meta, main, parse_config

REF_ARGS = ["--omega", "0.5", "--delta", "0.25", "--delta-bar", "-0.25", "--gamma", "0"]


def read_csv(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_empty_argv_prints_usage(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_spectral_with_loss_is_rejected(capsys):
    assert main(["g2", "--method", "spectral", "--gamma", "1"]) == 2
    assert "spectral" in capsys.readouterr().err
    with pytest.raises(UsageError):
        parse_config(["g2", "--method", "spectral", "--gamma", "1"])


def test_bad_values_are_usage_errors():
    for argv in (["optimal-n", "--threshold", "1.2"], ["g2", "--n", "-1"],
                 ["g2", "--nu-max", "0"], ["g2", "--gamma", "-1"]):
        with pytest.raises(UsageError):
            parse_config(argv)


def test_reference_g2_run(tmp_path):
    out = tmp_path / "ref.csv"
    assert main(["g2", "--n", "10", *REF_ARGS, "--r-points", "21", "-o", str(out)]) == 0
    text = out.read_text().splitlines()
    assert text[0] == f"# chiralchain {__version__} g2"
    assert text[2] == "r,g2,ReBound,ImBound,ReLoc,ImLoc,RePlane,ImPlane"
    rows = read_csv(out)
    assert len(rows) == 21
    assert float(rows[-1]["r"]) == 0 and float(rows[-1]["g2"]) < 0.05
    # 17 significant digits round-trip exactly
    assert all(repr(float(v)) == repr(float("%.17g" % float(v))) for v in rows[3].values())
    meta = json.loads((tmp_path / "ref.meta.json").read_text())
    assert meta["method"] == "spectral" and meta["version"] == __version__
    assert meta["params"]["rabi"] == 0.5 and "quadrature_error" in meta


def test_default_output_names(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["transmission", "--n", "3", "--gamma", "0.5"]) == 0
    assert (tmp_path / "transmission.csv").exists()
    assert (tmp_path / "transmission.meta.json").exists()
    rows = read_csv(tmp_path / "transmission.csv")
    assert [int(r["n"]) for r in rows] == [0, 1, 2, 3]


def test_reruns_are_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name / "g2.csv"
        out.parent.mkdir()
        assert main(["g2", "--n", "4", "--gamma", "0.3", "--r-points", "30", "-o", str(out)]) == 0
        outs.append(out)
    assert outs[0].read_bytes() == outs[1].read_bytes()
    meta = [json.loads((o.parent / "g2.meta.json").read_text()) for o in outs]
    for m in meta:
        m["config"].pop("output")
    assert meta[0] == meta[1]


def test_meta_round_trip(tmp_path):
    out = tmp_path / "t.csv"
    argv = ["transmission", "--n", "5", "--gamma", "0.2", "-o", str(out)]
    assert main(argv) == 0
    meta, cfg = load_meta(tmp_path / "t.meta.json")
    assert cfg == parse_config(argv)
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    assert meta["columns"] == ["n", "transmission"]


def test_config_file_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# lossy run\nomega = 0.7\ngamma = 0.4  # lossy\nn = 6\n")
    cfg = parse_config(["g2", "--config", str(conf), "--omega", "0.9"])
    assert cfg.params["rabi"] == 0.9
    assert cfg.params["gamma_loss"] == 0.4
    assert cfg.numeric["n"] == 6
    assert cfg.params["delta"] == 0.25


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("omega = 0.5\ncolour = blue\n")
    assert main(["g2", "--config", str(conf)]) == 2
    assert "colour" in capsys.readouterr().err


def test_decompose_has_class_columns(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["decompose", "--n", "2", *REF_ARGS, "--r-points", "5", "-o", str(out)]) == 0
    row = read_csv(out)[0]
    for col in ("ReTotal", "ImTotal", "ReBound", "ImBound", "ReLoc", "ImLoc", "RePlane", "ImPlane"):
        assert col in row
    total = complex(float(row["ReTotal"]), float(row["ImTotal"]))
    parts = sum(complex(float(row["Re" + k]), float(row["Im" + k])) for k in ("Bound", "Loc", "Plane"))
    assert abs(total - parts) < 1e-12


def test_eigenstate_bound(tmp_path):
    out = tmp_path / "e.json"
    assert main(["eigenstate", "--family", "bound", *REF_ARGS, "--r-points", "11",
                 "--format", "json", "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["meta"]["class"] and len(data["data"]["r"]) == 11
    assert abs(complex(data["meta"]["eigenvalue"]["re"], data["meta"]["eigenvalue"]["im"])) == \
        pytest.approx(1, abs=1e-12)


def test_sweep_one_row_per_value(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--axis", "gamma_loss", "--values", "0,0.5,1,2", "--n", "3",
                 "-o", str(out)]) == 0
    rows = read_csv(out)
    assert [float(r["gamma_loss"]) for r in rows] == [0, 0.5, 1, 2]
    assert all(r["n_opt"] == "" for r in rows)


def test_sweep_soft_failure_exits_zero(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--axis", "omega", "--values", "0,0.5", "--delta-bar", "0",
                 "--method", "cascade", "-o", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0]["g2_zero"] == "nan" and float(rows[1]["g2_zero"]) == pytest.approx(1)
    meta = json.loads((tmp_path / "s.meta.json").read_text())
    assert "DegenerateAlpha" in meta["warnings"]["0"]


def test_critical_and_optimal(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["critical-n", *REF_ARGS, "--n-max", "12", "--method", "cascade", "-o", str(out)]) == 0
    meta, _ = load_meta(tmp_path / "c.meta.json")
    assert meta["critical_n"] == 4
    out = tmp_path / "o.csv"
    assert main(["optimal-n", *REF_ARGS, "-o", str(out)]) == 0
    meta, _ = load_meta(tmp_path / "o.meta.json")
    assert meta["n_opt"] <= 10 and meta["T_opt_sq"] == pytest.approx(1)


def test_hard_error_exit_code(tmp_path, capsys):
    # Omega = 0 is the two-level limit, outside the spectral solver
    assert main(["g2", "--omega", "0", "--method", "spectral", "-o", str(tmp_path / "x.csv")]) == 1
    assert "error" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "chiralchain", "transmission", "--n", "2",
                           "-o", str(tmp_path / "t.csv")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert [p.rsplit("/", 1)[-1] for p in proc.stdout.split()] == ["t.csv", "t.meta.json"]


def test_eit_sweep(tmp_path):
    out = tmp_path / "eit.csv"
    assert main(["eit-sweep", "--omega", "1", "--delta", "0.4", "--delta-bar", "-0.2",
                 "--gamma", "0.1", "--values", "1,1.25", "-o", str(out)]) == 0
    rows = read_csv(out)
    assert [int(r["n_opt"]) for r in rows] == [66, 126]
    assert all(0 < float(r["transmission"]) < 1 for r in rows)
    assert main(["eit-sweep"]) == 2
