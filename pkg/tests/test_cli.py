import json
import math

import pytest

from hypspec import cli, read_hypmesh

G2 = {
    "pants": [{"cuffs": [1, 1, 1]}, {"cuffs": [1, 1, 1]}],
    "gluings": [{"from": [0, c], "to": [1, c]} for c in range(3)],
}


@pytest.fixture(scope="module")
def g2_path(tmp_path_factory):
    p = tmp_path_factory.mktemp("specs") / "g2.json"
    p.write_text(json.dumps(G2))
    return str(p)


def test_build_text(g2_path, capsys):
    assert cli.main(["build", g2_path]) == 0
    out = capsys.readouterr().out
    assert "genus=2" in out
    assert "area=12.5664" in out


def test_build_json(g2_path, capsys):
    assert cli.main(["build", g2_path, "--format", "json"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["genus"] == 2
    assert info["pants"] == 2
    assert info["area"] == pytest.approx(4 * math.pi, rel=1e-12)


def test_build_rejects_bad_spec(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"pants": [{"cuffs": [1, 1, 1]}], "gluings": []}))
    assert cli.main(["build", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


def test_build_missing_file(capsys):
    assert cli.main(["build", "/nonexistent/surface.json"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_mesh_roundtrip(g2_path, tmp_path, capsys):
    out = tmp_path / "g2.hypmesh"
    assert cli.main(["mesh", g2_path, "--h-max", "1.5", "--out", str(out)]) == 0
    err = capsys.readouterr().err
    assert "vertices=" in err
    with open(out) as fh:
        mesh = read_hypmesh(fh)
    assert mesh.genus == 2
    assert mesh.max_edge <= 1.5


def test_mesh_bad_h(g2_path, capsys):
    assert cli.main(["mesh", g2_path, "--h-max", "0"]) == 2
    assert "error:" in capsys.readouterr().err


def test_spectrum_csv(g2_path, capsys):
    assert cli.main(["spectrum", g2_path, "--h-max", "1.5", "--eigs", "4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "index,eigenvalue,residual"
    assert len(lines) == 5
    assert float(lines[1].split(",")[1]) <= 1e-8


def test_spectrum_solver_failure(g2_path, capsys):
    rc = cli.main(["spectrum", g2_path, "--h-max", "0.6",
                   "--tol", "1e-14", "--maxiter", "2"])
    assert rc == 4
    assert "error:" in capsys.readouterr().err


def test_partition_json(g2_path, capsys):
    assert cli.main(["partition", g2_path, "--k", "2"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["k"] == 2
    assert info["cells"] == 16
    assert info["alpha"] == len(info["blocks"])
    covered = sorted(v for b in info["blocks"] for v in b) + sorted(info["remainder"])
    assert sorted(covered) == list(range(16))
    for b in info["blocks"]:
        assert 4 <= len(b) <= 7
    assert len(info["remainder"]) < 4


def test_cheeger_json(g2_path, capsys):
    assert cli.main(["cheeger", g2_path]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["method"] == "exact"
    assert info["value"] == pytest.approx(3 / (2 * math.pi), rel=1e-12)
    assert len(info["side"]) == 8


def test_certify_small_branch(g2_path, capsys):
    assert cli.main(["certify", g2_path, "--epsilon", "0.4"]) == 0
    cert = json.loads(capsys.readouterr().out)
    assert cert["branch"] == "small"
    assert cert["conforming"] is True
    assert cert["target_index"] == 1
    assert cert["lower_bound"] == pytest.approx((3 / (2 * math.pi)) ** 2 / 4, rel=1e-10)
    assert "min_cell_area" in cert


def test_certify_warns_nonconforming(g2_path, capsys):
    assert cli.main(["certify", g2_path, "--epsilon", "2", "--k-override", "1"]) == 0
    captured = capsys.readouterr()
    assert "non-conforming" in captured.err
    assert json.loads(captured.out)["conforming"] is False


def test_certify_epsilon_domain(g2_path, capsys):
    assert cli.main(["certify", g2_path, "--epsilon", "3"]) == 2
    assert cli.main(["certify", g2_path, "--epsilon", "-1"]) == 2


def test_sharpness_stdout(g2_path, capsys):
    assert cli.main(["sharpness", "--k", "1,2,3", "--l", "1", "--h-max", "0.7"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert set(rep) == {"l", "rows", "fit_upper_exponent", "fit_lambda_exponent"}
    assert [r["k"] for r in rep["rows"]] == [1, 2, 3]


def test_sharpness_dedupes_k(capsys):
    assert cli.main(["sharpness", "--k", "2,1,3,2", "--l", "1", "--h-max", "0.7"]) == 0
    captured = capsys.readouterr()
    assert "deduplicated" in captured.err
    assert [r["k"] for r in json.loads(captured.out)["rows"]] == [1, 2, 3]


def test_sharpness_bad_k(capsys):
    assert cli.main(["sharpness", "--k", "two,3", "--l", "1"]) == 2
    assert cli.main(["sharpness", "--k", ",", "--l", "1"]) == 2
    assert cli.main(["sharpness", "--k", "1,2", "--l", "1"]) == 2


def test_sharpness_files(tmp_path, capsys):
    prefix = str(tmp_path / "sharp")
    rc = cli.main(["sharpness", "--k", "1,2,3", "--l", "1",
                   "--h-max", "0.7", "--out", prefix])
    assert rc == 0
    assert "fit_upper_exponent=" in capsys.readouterr().out
    rep = json.loads(open(prefix + ".json").read())
    assert len(rep["rows"]) == 3
    tsv = open(prefix + ".tsv").read().splitlines()
    assert tsv[0] == "k\tupper\tlambda"
    assert len(tsv) == 4
    png = open(prefix + ".png", "rb").read()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_sharpness_no_figure(tmp_path):
    import os
    prefix = str(tmp_path / "plain")
    rc = cli.main(["sharpness", "--k", "1,2,3", "--l", "1",
                   "--h-max", "0.7", "--out", prefix, "--no-figure"])
    assert rc == 0
    assert os.path.exists(prefix + ".json")
    assert os.path.exists(prefix + ".tsv")
    assert not os.path.exists(prefix + ".png")


def test_outputs_deterministic(g2_path, tmp_path, capsys):
    files = []
    for tag in ("a", "b"):
        out = tmp_path / f"cert_{tag}.json"
        assert cli.main(["certify", g2_path, "--epsilon", "2",
                         "--out", str(out)]) == 0
        files.append(out.read_bytes())
    assert files[0] == files[1]

    blobs = []
    for tag in ("a", "b"):
        prefix = str(tmp_path / f"sh_{tag}")
        assert cli.main(["sharpness", "--k", "1,2,3", "--l", "1",
                         "--h-max", "0.7", "--out", prefix]) == 0
        blobs.append(tuple(open(prefix + ext, "rb").read()
                           for ext in (".json", ".tsv", ".png")))
    assert blobs[0] == blobs[1]
    capsys.readouterr()


@pytest.fixture(scope="module")
def twisted_path(tmp_path_factory):
    spec = dict(G2)
    spec["gluings"] = [{"from": [0, 0], "to": [1, 0]},
                       {"from": [0, 1], "to": [1, 1]},
                       {"from": [0, 2], "to": [1, 2], "twist": 0.25}]
    p = tmp_path_factory.mktemp("specs") / "g2_twisted.json"
    p.write_text(json.dumps(spec))
    return str(p)


def test_twisted_surface_commands(twisted_path, capsys):
    assert cli.main(["cheeger", twisted_path]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["value"] > 0.0
    assert cli.main(["certify", twisted_path, "--epsilon", "0.4"]) == 0
    assert json.loads(capsys.readouterr().out)["branch"] == "small"
    assert cli.main(["certify", twisted_path, "--epsilon", "2"]) == 2
    assert "aligned" in capsys.readouterr().err
    assert cli.main(["partition", twisted_path, "--k", "2"]) == 2
    assert "degree" in capsys.readouterr().err


def test_triangle_budget_env(g2_path, monkeypatch, capsys):
    monkeypatch.setenv("HYPSPEC_MAX_TRIANGLES", "50")
    assert cli.main(["mesh", g2_path, "--h-max", "0.5"]) == 3
    assert "error:" in capsys.readouterr().err
    monkeypatch.setenv("HYPSPEC_MAX_TRIANGLES", "abc")
    assert cli.main(["mesh", g2_path, "--h-max", "0.5"]) == 2
    monkeypatch.setenv("HYPSPEC_MAX_TRIANGLES", "0")
    assert cli.main(["mesh", g2_path, "--h-max", "0.5"]) == 2
