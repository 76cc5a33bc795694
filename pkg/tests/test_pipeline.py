import json

import pytest

from fracpat.cli import main
from fracpat.errors import ParameterError, StageError
from fracpat.pipeline import RunConfig, run_pipeline, sweep, write_bundle


def small(**kw):
    base = dict(set={"kind": "full", "resolution": 9})
    base.update(kw)
    return RunConfig(**base)


def test_full_set_positive_with_witness():
    b = run_pipeline(small())
    assert b["certificate"]["status"] == "POSITIVE"
    assert b["witness"] is not None and b["consistent"]
    assert b["corollary"]["matches_p"]
    assert b["config"]["l"] == 5 and b["config"]["s"] == pytest.approx(0.975)


def test_deterministic():
    assert run_pipeline(small())["sha256"] == run_pipeline(small())["sha256"]


def test_eps_ordering_rejected():
    with pytest.raises(StageError) as info:
        run_pipeline(small(eps=[0.1]))
    assert info.value.stage == "validate"
    assert isinstance(info.value.cause, ParameterError)


def test_stage_named_on_failure():
    cfg = small(set={"kind": "cantor", "pattern": [0, 3], "depth": 5}, measure="spectral_gap")
    with pytest.raises(StageError) as info:
        run_pipeline(cfg)
    assert info.value.stage == "measure"


def test_quarter_cantor_q_sweep():
    for q in (-0.5, 0.0, 0.5):
        b = run_pipeline(RunConfig(set={"kind": "cantor", "pattern": [0, 3], "depth": 5}, measure="frostman",
                                   beta=0.5, q=q))
        if b["witness"] is not None:
            assert b["corollary"]["matches_p"]
        assert b["consistent"]


def test_sweep_tables():
    assert sweep(small(), "q", []).strip().count("\n") == 0
    text = sweep(small(), "trilinear_l", [0, 1, 2])
    assert "kappa_hat" in text
    with pytest.raises(ParameterError):
        sweep(small(), "bogus", [1])


def test_config_roundtrip():
    cfg = small(A=8.0, B=32.0)
    assert RunConfig.from_json(json.dumps(cfg.to_dict())) == cfg
    with pytest.raises(ParameterError):
        RunConfig.from_dict({"nope": 1})


def test_write_bundle(tmp_path):
    b = run_pipeline(small())
    paths = write_bundle(b, tmp_path)
    assert {p.name for p in paths} == {"bundle.json", "spectrum.csv", "ledger.csv"}
    assert json.loads((tmp_path / "bundle.json").read_text())["sha256"] == b["sha256"]


class TestCli:
    def test_generate_and_content(self, tmp_path, capsys):
        out = tmp_path / "set.json"
        assert main(["generate", "--kind", "cantor", "--depth", "4", "--out", str(out)]) == 0
        assert main(["content", "--set-file", str(out), "--beta", "0.5", "--delta", "0.1"]) == 0
        res = json.loads(capsys.readouterr().out)
        assert res["content"] == pytest.approx(1.0)

    def test_search_points(self, capsys):
        assert main(["search", "--points", "0,1", "--l", "0"]) == 0
        assert json.loads(capsys.readouterr().out)["points"] == [0.0, 1.0, 1.0]
        assert main(["search", "--points", "0,1", "--l", "0", "--distinct"]) == 0
        assert json.loads(capsys.readouterr().out) is None

    def test_decompose_csv(self, capsys):
        assert main(["decompose", "--resolution", "8", "--measure", "frostman", "--csv"]) == 0
        assert capsys.readouterr().out.startswith("x+t")

    def test_spectrum_measure_certify(self, capsys):
        assert main(["spectrum", "--resolution", "8", "--measure", "uniform", "--max-freq", "4"]) == 0
        assert capsys.readouterr().out.startswith("xi,re,im,abs")
        assert main(["measure", "--resolution", "12", "--A", "4", "--B", "16", "--T", "5"]) == 0
        assert json.loads(capsys.readouterr().out)["construction"]["T"] == 5
        assert main(["certify", "--resolution", "8", "--measure", "uniform", "--eps", "0.03"]) == 0
        assert json.loads(capsys.readouterr().out)["status"] == "POSITIVE"

    def test_error_exit_code(self, capsys):
        assert main(["run", "--resolution", "8", "--eps", "0.5"]) == 2
        assert "validate" in capsys.readouterr().err

    def test_run_and_sweep(self, tmp_path, capsys):
        assert main(["run", "--resolution", "8", "--out", str(tmp_path)]) == 0
        assert json.loads(capsys.readouterr().out)["status"] == "POSITIVE"
        assert main(["sweep", "--resolution", "8", "--axis", "eps", "--values", "0.03,0.02"]) == 0
        assert capsys.readouterr().out.count("\n") == 3
