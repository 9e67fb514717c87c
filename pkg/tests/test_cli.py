import json

import pytest

from levygal.cli import ConfigError, csv_text, main, parse_config, read_csv, format_value

MINIMAL = "operator = p_laplacian\nT = 0.1\ndt = 0.01\nn = 4\nseed = 1\n"


def test_minimal_defaults():
    pc = parse_config(MINIMAL)
    assert pc.solver.gamma == 1.0 and pc.solver.p == 4.0 and pc.solver.truncation is None
    assert pc.resolved["noise.q0"] == 0.0 and pc.resolved["study.paths"] == 200
    assert pc.study["m"] == pytest.approx(0.9 * 4 / 3)


def test_p_must_exceed_two():
    with pytest.raises(ConfigError, match="p must exceed 2") as exc:
        parse_config(MINIMAL + "operator.p = 1.5\n")
    assert exc.value.line == 6


def test_duplicate_cites_both_lines():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + "# c\nn = 5\n")
    assert "line 7" in str(exc.value) and "line 4" in str(exc.value)


@pytest.mark.parametrize("text,line", [(MINIMAL + "bogus = 1\n", 6), (MINIMAL.replace("n = 4", "n = 4.5"), 4),
                                       (MINIMAL + "convection = yes\n", 6), (MINIMAL + "noise.marks = 3\n", 6)])
def test_line_numbered_errors(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == line


def test_missing_required_key():
    with pytest.raises(ConfigError, match="missing required key 'seed'"):
        parse_config(MINIMAL.replace("seed = 1\n", ""))


def test_csv_roundtrip():
    rows = [[0.1, 1 / 3, 2, True, "a"], [1e-300, -0.0, 7, False, "b"]]
    text = csv_text(["x", "y", "k", "flag", "s"], rows)
    header, parsed = read_csv(text)
    assert csv_text(header, parsed) == text
    assert parsed[0][1] == 1 / 3
    assert format_value(0.1) == "0.10000000000000001"


def test_simulate_zero_and_rerun(tmp_path, capsys):
    cfg = tmp_path / "z.cfg"
    cfg.write_text(MINIMAL)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a"), "--quiet"]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b"), "--quiet"]) == 0
    man_a = json.loads((tmp_path / "a" / "manifest.json").read_text())
    man_b = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert man_a["outputs"] == man_b["outputs"]
    header, rows = read_csv((tmp_path / "a" / "trajectory.csv").read_text())
    assert header[:2] == ["t", "coeff_1"] and header[-4:] == ["H_norm", "V_norm", "X_norm", "jump_flag"]
    assert all(v == 0 for r in rows for v in r[1:])
    assert main(["rerun", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "c"), "--quiet"]) == 0
    for f in ("trajectory.csv", "ledger.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "c" / f).read_bytes()


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text(MINIMAL + "operator.p = 1.5\n")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o"), "--quiet"]) == 2
    blow = tmp_path / "blow.cfg"
    blow.write_text("operator = smagorinsky\nT = 0.1\ndt = 1e-3\nn = 16\nseed = 0\n"
                    "initial.kind = coeffs\ninitial.coeffs = [5, 2]\n")
    assert main(["simulate", "--config", str(blow), "--out", str(tmp_path / "o2"), "--quiet"]) == 3
    smag = tmp_path / "smag.cfg"
    smag.write_text("operator = smagorinsky\nT = 0.1\ndt = 0.01\nn = 4\nseed = 0\nstudy.pairs = 500\n")
    assert main(["properties", "--config", str(smag), "--out", str(tmp_path / "o3"), "--quiet"]) == 4
    assert main(["rerun", str(tmp_path / "missing.json"), "--quiet"]) == 2


def test_properties_p_laplacian_passes(tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text(MINIMAL + "study.pairs = 500\n")
    assert main(["properties", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"]) == 0
    header, rows = read_csv((tmp_path / "o" / "properties.csv").read_text())
    assert all(r[1] == 1 for r in rows)
    _, consts = read_csv((tmp_path / "o" / "constants.csv").read_text())
    names = {r[0] for r in consts}
    assert {"c1", "rho"} <= names


def test_converge_duplicates_and_overrides(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(MINIMAL + "study.axis = n\nstudy.values = [8, 8]\nnoise.q0 = 0.01\nnoise.s = 2\n")
    assert main(["converge", "--config", str(cfg), "--out", str(tmp_path / "o"), "--seed", "5", "--quiet"]) == 0
    _, rows = read_csv((tmp_path / "o" / "converge.csv").read_text())
    assert rows == [[8, 8, 0, 0]]
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["seed"] == 5 and man["config"]["seed"] == 5


@pytest.mark.parametrize("sub,extra,out", [
    ("uniqueness", "implicit_F = true\nstudy.delta0 = 1e-8\n", "uniqueness_summary.csv"),
    ("moments", "noise.q0 = 0.1\n", "moments.csv"),
    ("occupancy", "initial.kind = coeffs\ninitial.coeffs = [0.5]\nimplicit_F = true\n", "occupancy.csv"),
    ("seminorm", "noise.q0 = 0.1\n", "seminorm.csv"),
])
def test_other_subcommands(tmp_path, sub, extra, out):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(MINIMAL + extra)
    assert main([sub, "--config", str(cfg), "--out", str(tmp_path / "o"), "--paths", "3", "--quiet"]) == 0
    text = (tmp_path / "o" / out).read_text()
    header, rows = read_csv(text)
    assert csv_text(header, rows) == text
