import json

import numpy as np
import pytest

from onlinecode.cli import main


def test_encode_decode_roundtrip(tmp_path):
    x = np.array([0.5, -1.0, 2.0, 0.25, 3.0])
    (tmp_path / "x.csv").write_text("\n".join(repr(float(v)) for v in x) + "\n")
    args = ["--seed", "9", "--k", "3", "--mu", "0.5"]
    assert main(["encode", *args, "--input", str(tmp_path / "x.csv"),
                 "--out", str(tmp_path / "z.csv")]) == 0
    z = np.loadtxt(tmp_path / "z.csv")
    assert z.size == 20
    assert main(["decode", *args, "--t", "5", "--input", str(tmp_path / "z.csv"),
                 "--out", str(tmp_path / "xh.csv"), "--report", str(tmp_path / "r.json")]) == 0
    np.testing.assert_allclose(np.loadtxt(tmp_path / "xh.csv"), x, atol=1e-9)
    report = json.loads((tmp_path / "r.json").read_text())
    assert {"x_hat", "residual_dagger", "certified_bound", "lp_stats", "rank_deficient"} <= set(report)


def test_mu_zero_warns(tmp_path):
    (tmp_path / "x.csv").write_text("1\n2\n")
    with pytest.warns(UserWarning, match="mu=0"):
        main(["encode", "--mu", "0", "--k", "2", "--input", str(tmp_path / "x.csv"),
              "--out", str(tmp_path / "z.csv")])


def test_simulate(tmp_path):
    (tmp_path / "s.toml").write_text(
        '[ensemble]\nk = 2\nT = 8\n[noise]\nkind = "zero"\n[schedule]\ntimes = [4, 8]\n')
    out = tmp_path / "o.csv"
    assert main(["simulate", "--scenario", str(tmp_path / "s.toml"), "--csv", str(out),
                 "--json", str(tmp_path / "o.json"), "--seed", "3"]) == 0
    assert out.read_text().startswith("schema_version,trial,t,metric,value")


@pytest.mark.parametrize("what, header", [("opnorm", "t,opnorm"), ("blocks", "block,opnorm"),
                                          ("invertibility", "t,estimate,witness_norm,starts"),
                                          ("prefix", "t,estimate,witness_norm,starts")])
def test_analyze(tmp_path, what, header):
    out = tmp_path / "a.csv"
    extra = ["--j0", "2"] if what == "prefix" else []
    assert main(["analyze", "--what", what, "--k", "2", "--T", "8", "--ts", "2", "4",
                 "--starts", "4", "--out", str(out), *extra]) == 0
    assert out.read_text().startswith(header)


def test_lowerbound(tmp_path):
    out = tmp_path / "lb.csv"
    assert main(["lowerbound", "--mu", "1", "--c0", "1", "--k", "1", "--T", "1", "4",
                 "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "T,primal,dual,tau_H_T"
    assert float(rows[1].split(",")[1]) == pytest.approx(1.0)


@pytest.mark.parametrize("check", ["tail", "l1upper", "smallball", "nu", "dominance", "nonzero"])
def test_concentration(tmp_path, check):
    out = tmp_path / "c.json"
    assert main(["concentration", "--check", check, "--N", "2000", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["check"] == check


def test_calibrate(tmp_path):
    out = tmp_path / "cal.csv"
    assert main(["calibrate", "--ks", "2", "--T", "4", "--seeds", "2", "--inv-seeds", "1",
                 "--starts", "4", "--out", str(out)]) == 0
    assert out.read_text().startswith("schema_version,k,T")


def test_accept_subset(tmp_path, capsys):
    assert main(["accept", "--only", "2", "10", "--report", str(tmp_path / "a.json")]) == 0
    assert "2/2 criteria passed" in capsys.readouterr().out


def test_bad_input_exit_code(tmp_path):
    assert main(["decode", "--k", "2", "--input", str(tmp_path / "missing.csv"),
                 "--out", str(tmp_path / "o.csv")]) == 2
