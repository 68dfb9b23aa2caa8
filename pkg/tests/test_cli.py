"""Tests for the command-line surface: exit codes, report envelopes and output formats."""

from __future__ import annotations

import json

import pytest

from natmap.cli.dependencies import resolve_parallelism
from natmap.main import EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_OK, run
from natmap.services.errors import ConvergenceError, NatmapError

SMALL = ["--phi-nodes", "2", "--rho-nodes", "2", "--quad-order", "256"]


def _json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


class TestBarycenterCommand:
    def test_json_report(self, capsys):
        assert run(["barycenter", "--measure", "three-atoms"]) == EXIT_OK
        report = _json(capsys)
        assert report["v"] == "v1"
        assert report["command"] == "barycenter"
        assert report["result"]["atoms"] == 3
        assert report["result"]["residual"] < 1e-10
        assert set(report["versions"]) == {"natmap", "numpy", "scipy"}

    def test_csv_report(self, capsys):
        assert run(["barycenter", "--measure", "tetrahedron", "--format", "csv"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("# v1\nkey,value\n")

    def test_output_is_deterministic(self, tmp_path):
        out = tmp_path / "report.json"
        assert run(["barycenter", "--measure", "three-atoms", "--out", str(out)]) == EXIT_OK
        first = out.read_bytes()
        assert run(["barycenter", "--measure", "three-atoms", "--out", str(out)]) == EXIT_OK
        assert out.read_bytes() == first

    def test_measure_from_file(self, tmp_path, capsys):
        path = tmp_path / "atoms.json"
        path.write_text(json.dumps({"atoms": [[1, 1, 0, 1], [1, -1, 0, 1], [1, 0, 1, 1], [1, 0, -1, 1]]}))
        assert run(["barycenter", "--measure", str(path)]) == EXIT_OK
        assert _json(capsys)["result"]["point"] == pytest.approx([1.0, 0.0, 0.0], abs=1e-9)


class TestExitCodes:
    def test_unknown_flag(self):
        assert run(["barycenter", "--bogus"]) == EXIT_INVALID

    def test_missing_option(self):
        assert run(["barycenter"]) == EXIT_INVALID

    def test_unknown_measure(self, capsys):
        assert run(["barycenter", "--measure", "no-such-measure"]) == EXIT_INVALID
        assert "Unknown measure" in capsys.readouterr().err

    def test_bad_format(self):
        assert run(["barycenter", "--measure", "three-atoms", "--format", "xml"]) == EXIT_INVALID

    def test_invalid_point(self):
        assert run(["natmap", "eval", "--cocycle", "std-embed", "--point", "2,0,0"]) == EXIT_INVALID

    def test_not_converged(self, monkeypatch):
        def fail(*args, **kwargs):
            raise ConvergenceError("no progress", residual=1.0)

        monkeypatch.setattr("natmap.cli.v1.barycenter.barycenter", fail)
        assert run(["barycenter", "--measure", "three-atoms"]) == EXIT_NOT_CONVERGED


class TestParallelism:
    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv("NATMAP_NUM_THREADS", "3")
        assert resolve_parallelism(2) == 2
        assert resolve_parallelism(None) == 3

    def test_default(self, monkeypatch):
        monkeypatch.delenv("NATMAP_NUM_THREADS", raising=False)
        assert resolve_parallelism(None) == 1

    def test_bad_environment(self, monkeypatch):
        monkeypatch.setenv("NATMAP_NUM_THREADS", "many")
        with pytest.raises(NatmapError):
            resolve_parallelism(None)


class TestMapCommands:
    def test_eval(self, capsys):
        args = ["natmap", "eval", "--cocycle", "std-embed", "--point", "1,0,0", "--quad-order", "256"]
        assert run(args) == EXIT_OK
        result = _json(capsys)["result"]
        assert result["jacobian"] == pytest.approx(1.0, abs=1e-8)
        assert result["isometric"]
        assert result["audit_holds"]

    def test_jacobian_scan_csv(self, capsys):
        assert run(["jacobian-scan", "--cocycle", "std-embed", *SMALL]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "# v1"
        assert lines[1] == "cell,x,ball_1,ball_2,weight,jacobian,min_singular,max_singular,residual"
        assert len(lines) == 2 + 16 * 2 * 2 * 16

    def test_volume_twisted_chain(self, capsys):
        assert run(["volume", "--cocycle", "std-embed-twisted", "--twisted-chain", *SMALL[:4]]) == EXIT_OK
        result = _json(capsys)["result"]
        assert result["verdict"] == "maximal"
        assert result["map_kind"] == "chain"
        assert result["equivariance_deviation"] < 1e-8

    def test_volume_dump_cells(self, tmp_path, capsys):
        dump = tmp_path / "chain.csv"
        assert run(["volume", "--cocycle", "std-embed", "--dump-cells", str(dump), *SMALL[:4]]) == EXIT_OK
        assert _json(capsys)["result"]["verdict"] == "maximal"
        lines = dump.read_text().splitlines()
        assert lines[:2] == ["# v1", "cell,x,weight,jacobian,min_singular,max_singular,residual"]
        assert len(lines) == 2 + 16 * 2 * 2 * 16
        assert all(float(line.split(",")[3]) == pytest.approx(1.0, abs=1e-12) for line in lines[2:])

    def test_natural_volume_with_rigidity(self, tmp_path, capsys):
        dump = tmp_path / "cells.csv"
        args = ["natural-volume", "--cocycle", "std-embed", "--rigidity", "--dump-cells", str(dump), *SMALL]
        assert run(args) == EXIT_OK
        result = _json(capsys)["result"]
        assert result["verdict"] == "maximal"
        assert result["rigidity"]["attempted"]
        lines = dump.read_text().splitlines()
        assert lines[0] == "# v1"
        assert lines[1].startswith("cell,x,weight,jacobian")

    def test_degree_identity(self, capsys):
        assert run(["degree", "--covering", "identity-genus2", *SMALL]) == EXIT_OK
        result = _json(capsys)["result"]
        assert result["degree"] == 1
        assert result["natural_ratio"] == pytest.approx(1.0, abs=1e-12)
        assert result["bound_holds"]

    def test_ps_check(self, capsys):
        assert run(["ps-check", "--radius", "6", "--quad-order", "256"]) == EXIT_OK
        result = _json(capsys)["result"]
        assert result["orbit_points"] > 1
        assert 0.0 <= result["binned_total_variation"] <= 1.0

    def test_selftest(self, capsys):
        assert run(["selftest"]) == EXIT_OK
        assert _json(capsys)["result"]["passed"]
