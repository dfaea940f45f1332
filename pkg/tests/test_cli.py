from __future__ import annotations

import csv
import json
import os

import pytest

from vertexlab.cli import main


def _floats(obj) -> list:
    if isinstance(obj, float):
        return [obj]
    if isinstance(obj, dict):
        return [f for v in obj.values() for f in _floats(v)]
    if isinstance(obj, list):
        return [f for v in obj for f in _floats(v)]
    return []


class TestExamples:
    def test_character(self, capsys):
        assert main(["character", "--gram", "[[2]]", "--coset", "0", "--wmax", "2"]) == 0
        assert capsys.readouterr().out.splitlines() == ["0 1", "1 3", "2 4"]

    def test_check_lemmas(self):
        assert main(["check", "lemmas", "--gram", "[[4]]", "--h", "1/2", "--wmax", "3"]) == 0

    def test_extend(self, tmp_path, capsys):
        out = tmp_path / "ext.json"
        code = main(["extend", "--gram", "[[8]]", "--h", "1/2", "--wmax", "4",
                     "--report", str(out)])
        assert code == 0
        assert "parity: even" in capsys.readouterr().out
        data = json.loads(out.read_text())
        assert data["meta"]["parity"] == "even"
        eq = data["meta"]["equivalence"]
        assert eq["ambient_gram"] == [["2"]]
        assert eq["character"][:3] == [["0", 1], ["1", 3], ["2", 4]]
        assert eq["character"] == eq["oracle_character"]
        assert not _floats(data)


class TestErrors:
    @pytest.mark.parametrize("argv,where", [
        (["character", "--gram", "[[2],[1]]", "--wmax", "2"], "--gram[0]"),
        (["character", "--gram", "[[2]", "--wmax", "2"], "--gram: bad JSON at column"),
        (["character", "--gram", "[[3]]", "--wmax", "2"], "--gram: gram diagonal"),
        (["twist", "--h", "0.5"], "--h[0]"),
        (["twist", "--wmax", "-1"], "--wmax"),
        (["module-pair", "--gram", "[[8]]", "--h", "1/2"], "--mu"),
        (["check", "axioms", "--cocycle", "[[2]]"], "--cocycle[0][0]"),
        (["character", "--gram", "[[2]]"], "--wmax"),
    ])
    def test_exit_two_with_location(self, argv, where, capsys):
        assert main(argv) == 2
        assert where in capsys.readouterr().err

    def test_config_file_location(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"wmax": 2,\n "h": [1/2]}')
        assert main(["twist", "--config", str(cfg)]) == 2
        assert f"{cfg}:2:" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"wmax": "2", "bogus": 1}')
        assert main(["twist", "--config", str(cfg)]) == 2
        assert "key 'bogus'" in capsys.readouterr().err

    def test_unknown_suite_is_usage_error(self, capsys):
        assert main(["check", "nope"]) == 2

    def test_corrupted_cocycle_fails(self, capsys):
        code = main(["check", "axioms", "--gram", "[[2,-1],[-1,2]]", "--cocycle", "[[1,1],[1,1]]",
                     "--wmax", "1", "--mode-bound", "2"])
        assert code == 1
        assert "FAIL commutator" in capsys.readouterr().out


class TestConfig:
    def test_flags_override_file(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"gram": [[2]], "wmax": "1", "coset": "1/2"}))
        assert main(["character", "--config", str(cfg), "--wmax", "9/4"]) == 0
        assert capsys.readouterr().out.splitlines() == ["1/4 2", "5/4 2", "9/4 6"]

    def test_csv_report(self, tmp_path):
        out = tmp_path / "r.csv"
        assert main(["check", "delta", "--wmax", "1", "--format", "csv",
                     "--report", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        assert rows and all(r["pass"] == "true" for r in rows)
        assert {"suite", "tag", "cells", "window", "counterexample"} <= set(rows[0])

    def test_writes_only_the_report(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["contragredient", "--wmax", "1", "--mode-bound", "1",
                     "--report", "out.json"]) == 0
        assert os.listdir(tmp_path) == ["out.json"]
        assert json.loads((tmp_path / "out.json").read_text())["suite"] == "contragredient"

    def test_several_suites_keep_their_defaults(self, tmp_path):
        out = tmp_path / "both.json"
        assert main(["check", "contragredient", "delta", "--wmax", "1", "--mode-bound", "1",
                     "--report", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["suite"] == "contragredient+delta"
        # delta keeps its own lattice, contragredient its own
        assert data["meta"]["delta"]["gram"] == [["8"]]
        assert data["meta"]["contragredient"]["gram"] == [["2"]]
