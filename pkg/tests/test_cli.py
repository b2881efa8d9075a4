import json

import numpy as np
import pytest

from wmgraph import LimitParams, WeightSeq
from wmgraph.cli import main


@pytest.fixture
def weights_file(tmp_path):
    path = tmp_path / "weights.json"
    path.write_text(WeightSeq([2.0, 1.0, 1.0]).to_json())
    return str(path)


@pytest.fixture
def limit_file(tmp_path):
    path = tmp_path / "limit.json"
    path.write_text(LimitParams(alpha=-1.0, beta=1.0, kappa=1.0).to_json())
    return str(path)


def test_simulate_lifo_writes_artifacts(tmp_path, weights_file):
    out = tmp_path / "run"
    rc = main(["simulate", "--mode", "lifo", "--weights", weights_file,
               "--seed", "3", "--out", str(out)])
    assert rc == 0
    for name in ("trace.csv", "pinches.csv", "graph.csv",
                 "components.csv", "masses.csv"):
        assert (out / name).exists(), name
    assert (out / "trace.csv").read_text().splitlines()[0] \
        == "time,event,client,Y,H"
    assert (out / "masses.csv").read_text().splitlines()[0] == "rank,mass"


def test_simulate_markov_and_direct(tmp_path, weights_file):
    out1 = tmp_path / "m"
    rc = main(["simulate", "--mode", "markov", "--weights", weights_file,
               "--horizon", "30.0", "--out", str(out1)])
    assert rc == 0
    assert (out1 / "trace.csv").exists()
    out2 = tmp_path / "d"
    rc = main(["simulate", "--mode", "direct", "--weights", weights_file,
               "--out", str(out2)])
    assert rc == 0
    assert (out2 / "graph.csv").exists()
    assert (out2 / "components.csv").exists()


def test_simulate_deterministic(tmp_path, weights_file):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        main(["simulate", "--mode", "lifo", "--weights", weights_file,
              "--seed", "9", "--out", str(out)])
        outs.append((out / "trace.csv").read_text())
    assert outs[0] == outs[1]


def test_verify_passes_and_writes_report(tmp_path, weights_file, capsys):
    out = tmp_path / "v"
    rc = main(["verify", "--identities", "--weights", weights_file,
               "--replicas", "5", "--horizon", "40.0", "--seed", "1",
               "--out", str(out)])
    assert rc == 0
    assert "identities: pass" in capsys.readouterr().out
    d = json.loads((out / "identities.json").read_text())
    assert d["passed"] is True
    assert len(d["reports"]) == 5


def test_scaling_report(tmp_path, limit_file):
    out = tmp_path / "s"
    rc = main(["scaling", "--limit", limit_file, "--out", str(out)])
    assert rc == 0
    d = json.loads((out / "scaling.json").read_text())
    assert d["largest_root"] == pytest.approx(2.0, abs=1e-6)
    assert d["is_grey"] is True
    assert set(d["extinction_profile"]) == {"0.25", "0.5", "1", "2", "4"}


def test_metric_matrix(tmp_path, weights_file):
    out = tmp_path / "mm"
    rc = main(["metric", "--weights", weights_file, "--eps", "0.5",
               "--out", str(out)])
    assert rc == 0
    rows = (out / "matrix.csv").read_text().splitlines()
    assert rows[0].startswith("t,")
    n = len(rows) - 1
    mat = np.array([[float(x) for x in r.split(",")[1:]] for r in rows[1:]])
    assert mat.shape == (n, n)
    assert mat == pytest.approx(mat.T)
    assert np.all(np.diag(mat) == 0.0)


def test_continuum_outputs(tmp_path, limit_file):
    out = tmp_path / "c"
    rc = main(["continuum", "--limit", limit_file, "--horizon", "1.0",
               "--dt", "0.001", "--topk", "5", "--out", str(out)])
    assert rc == 0
    lines = (out / "limit_path.csv").read_text().splitlines()
    assert lines[0] == "t,Y"
    assert len(lines) == 1002
    masses = (out / "limit_masses.csv").read_text().splitlines()
    assert masses[0] == "rank,mass"
    assert 1 <= len(masses) - 1 <= 5


def test_compare_small(tmp_path, weights_file, capsys):
    out = tmp_path / "cmp"
    rc = main(["compare", "--edge-law", "--weights", weights_file,
               "--replicas", "1500", "--out", str(out)])
    captured = capsys.readouterr().out
    assert "marginals_pass=" in captured
    d = json.loads((out / "compare.json").read_text())
    assert rc == (0 if d["passed"] else 1)
    assert d["passed"] is True


def test_usage_errors(tmp_path, weights_file):
    assert main(["simulate", "--mode", "bogus", "--weights", weights_file,
                 "--out", str(tmp_path)]) == 2
    assert main(["nosuchcommand"]) == 2
    assert main(["simulate", "--mode", "lifo", "--weights",
                 str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
