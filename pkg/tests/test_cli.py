import json

import pytest

from pdhg_primal.main import EXIT_FAILURE, EXIT_OK, EXIT_REJECTED, main
from pdhg_primal.services.trace_io import read_audit, read_trace


@pytest.fixture
def manifest(tmp_path):
    path = tmp_path / "canonical.json"
    path.write_text(json.dumps({"A": [[2.0]], "b": [2.0], "g": {"family": "quadratic"}}),
                    encoding="utf-8")
    return str(path)


@pytest.fixture
def consensus_manifest(tmp_path):
    path = tmp_path / "p5.json"
    path.write_text(json.dumps({
        "graph": {"nodes": 5, "edges": [[0, 1], [1, 2], [2, 3], [3, 4]]},
        "g_i": [{"family": "quadratic", "params": {"center": float(i)}} for i in range(1, 6)],
    }), encoding="utf-8")
    return str(path)


def test_solve_writes_trace(tmp_path, manifest, capsys):
    out = str(tmp_path / "trace.csv")
    code = main(["solve", "--manifest", manifest, "--max-iters", "10000", "--record-every", "100",
                 "--out", out])
    assert code == EXIT_OK
    trace = read_trace(out)
    assert list(trace.ks()[:2]) == [0, 100]
    assert trace.final.k == 10000
    assert trace.final.residual_s <= 2e-3
    assert "Output saved to" in capsys.readouterr().out


def test_inadmissible_lambda_is_rejected(tmp_path, manifest, capsys):
    code = main(["solve", "--manifest", manifest, "--lambda", "10", "--out", str(tmp_path / "t.csv")])
    assert code == EXIT_REJECTED
    assert "40" in capsys.readouterr().out


def test_missing_manifest_fails(tmp_path):
    assert main(["solve", "--manifest", str(tmp_path / "none.json")]) == EXIT_FAILURE


def test_bad_x0_is_rejected(tmp_path, manifest):
    code = main(["solve", "--manifest", manifest, "--x0", "1,2", "--out", str(tmp_path / "t.csv")])
    assert code == EXIT_REJECTED


@pytest.mark.parametrize("variant", ["primal", "accel"])
def test_audit_of_solver_output(tmp_path, manifest, capsys, variant):
    trace_path = str(tmp_path / "trace.csv")
    audit_path = str(tmp_path / "audit.csv")
    assert main(["solve", "--manifest", manifest, "--variant", variant, "--max-iters", "500",
                 "--x0", "0.5", "--snapshots", "--out", trace_path]) == EXIT_OK
    assert main(["audit", "--trace", trace_path, "--manifest", manifest, "--out", audit_path]) == EXIT_OK
    rows = read_audit(audit_path)
    assert rows
    assert all(row.satisfied for row in rows)
    if variant == "accel":
        assert "dist_upper" in {row.quantity for row in rows}
    assert "All" in capsys.readouterr().out


def test_audit_needs_sidecar(tmp_path, manifest):
    trace_path = tmp_path / "bare.csv"
    trace_path.write_text("k,f_x,f_s,g_s,F_k_s,residual_s,dx_norm\n0,2,2,0,0,2,0\n", encoding="utf-8")
    code = main(["audit", "--trace", str(trace_path), "--manifest", manifest,
                 "--out", str(tmp_path / "audit.csv")])
    assert code == EXIT_REJECTED


@pytest.mark.parametrize("variant,per_iteration", [("primal", 1), ("pdhg", 2)])
def test_consensus_command(tmp_path, consensus_manifest, variant, per_iteration):
    out = str(tmp_path / "consensus.csv")
    code = main(["consensus", "--manifest", consensus_manifest, "--variant", variant,
                 "--max-iters", "200", "--record-every", "20", "--out", out])
    assert code == EXIT_OK
    trace = read_trace(out)
    assert "consensus_gap" in trace.columns
    assert trace.metadata["communications"] == 200 * per_iteration


def test_consensus_command_rejects_constrained_manifest(tmp_path, manifest):
    assert main(["consensus", "--manifest", manifest, "--out", str(tmp_path / "c.csv")]) == EXIT_REJECTED


def test_oracle_modes(tmp_path, manifest):
    out = tmp_path / "oracle.json"
    assert main(["oracle", "--manifest", manifest, "--mode", "kkt", "--out", str(out)]) == EXIT_OK
    result = json.loads(out.read_text(encoding="utf-8"))
    assert result["x_star"] == pytest.approx([1.0])
    assert result["D_y"] == pytest.approx(0.5)

    assert main(["oracle", "--manifest", manifest, "--mode", "penalized", "--rho", "1",
                 "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["x_hat"] == pytest.approx([0.8])

    assert main(["oracle", "--manifest", manifest, "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["f_star"] == pytest.approx(0.0)

    assert main(["oracle", "--manifest", manifest, "--mode", "penalized",
                 "--out", str(out)]) == EXIT_REJECTED


def test_kkt_oracle_rejects_singular_quadratic_part(tmp_path, capsys):
    path = tmp_path / "linear.json"
    path.write_text(json.dumps({"A": [[1.0, 1.0]], "b": [2.0],
                                "g": {"family": "linear", "params": {"c": [1.0, -1.0]}}}),
                    encoding="utf-8")
    out = tmp_path / "oracle.json"
    code = main(["oracle", "--manifest", str(path), "--mode", "kkt", "--out", str(out)])
    assert code == EXIT_REJECTED
    assert "strongly convex" in capsys.readouterr().out
    assert not out.exists()
