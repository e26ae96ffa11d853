import json

import numpy as np
import pytest

from latentce import cli, corpus, dae


def run_cli(*argv):
    return cli.main(list(argv))


class TestGenerateData:
    def test_writes_manifest_and_images(self, tmp_path, capsys):
        out = tmp_path / "data"
        assert run_cli("generate-data", "--n", "100", "--seed", "3", "--out", str(out)) == 0
        assert "manifest" in capsys.readouterr().out
        samples = corpus.load_corpus(out / "manifest.csv")
        assert len(samples) == 100

    def test_too_small_corpus_is_domain_error(self, tmp_path, capsys):
        assert run_cli("generate-data", "--n", "10", "--out", str(tmp_path / "d")) == 1
        assert "error:" in capsys.readouterr().err


class TestUsageErrors:
    def test_unknown_command_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("frobnicate")
        assert exc.value.code == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("train", "--bogus-flag", "1")
        assert exc.value.code == 2

    def test_missing_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run_cli()
        assert exc.value.code == 2


class TestTrainErrors:
    def test_zero_steps_is_domain_error(self, tmp_path, capsys):
        out = tmp_path / "data"
        run_cli("generate-data", "--n", "100", "--seed", "3", "--out", str(out))
        code = run_cli("train", "--data", str(out / "manifest.csv"), "--steps", "0")
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_manifest_is_domain_error(self, tmp_path, capsys):
        code = run_cli("train", "--data", str(tmp_path / "absent.csv"), "--steps", "1")
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_checkpoint_is_domain_error(self, tmp_path, capsys):
        out = tmp_path / "data"
        run_cli("generate-data", "--n", "100", "--seed", "3", "--out", str(out))
        code = run_cli("embed", "--data", str(out / "manifest.csv"),
                       "--checkpoint", str(tmp_path / "absent.daec"),
                       "--out", str(tmp_path / "z.zsem"))
        assert code == 1
        assert "error:" in capsys.readouterr().err


@pytest.fixture(scope="module")
def pipeline_home(tmp_path_factory):
    """Run the whole pipeline once at miniature scale and share the artifacts."""
    home = tmp_path_factory.mktemp("cli_home")
    data = home / "data"
    ck = home / "model.daec"
    probe = home / "probe.json"
    assert cli.main(["generate-data", "--n", "100", "--seed", "9", "--out", str(data)]) == 0
    assert cli.main(["train", "--data", str(data / "manifest.csv"), "--steps", "5",
                     "--batch-size", "4", "--seed", "9", "--out", str(ck)]) == 0
    # shrink the sampling grids so counterfactual/evaluate stay fast
    model = dae.load_checkpoint(ck)
    model.encode_steps = 4
    model.decode_steps = 4
    dae.save_checkpoint(model, ck)
    assert cli.main(["fit-probe", "--data", str(data / "manifest.csv"),
                     "--checkpoint", str(ck), "--out", str(probe)]) == 0
    assert cli.main(["calibrate", "--data", str(data / "manifest.csv"),
                     "--checkpoint", str(ck), "--probe", str(probe)]) == 0
    return {"home": home, "data": data / "manifest.csv", "ck": ck, "probe": probe}


class TestEndToEnd:
    def test_probe_artifact_has_calibration(self, pipeline_home):
        payload = json.loads(pipeline_home["probe"].read_text())
        assert "n" in payload and "b" in payload
        assert payload["cal"]["mode"] == "means-of-extremes"

    def test_embed_writes_latent_cache(self, pipeline_home, capsys):
        out = pipeline_home["home"] / "z.zsem"
        code = run_cli("embed", "--data", str(pipeline_home["data"]),
                       "--checkpoint", str(pipeline_home["ck"]),
                       "--split", "test", "--out", str(out))
        assert code == 0
        records = dae.load_latents(out)
        assert len(records) == 10  # 10% of 100

    def test_evaluate_writes_report(self, pipeline_home, capsys):
        out = pipeline_home["home"] / "report"
        code = run_cli("evaluate", "--data", str(pipeline_home["data"]),
                       "--checkpoint", str(pipeline_home["ck"]),
                       "--probe", str(pipeline_home["probe"]),
                       "--recon-count", "1", "--out", str(out))
        assert code == 0
        report = json.loads((pipeline_home["home"] / "report.json").read_text())
        assert report["task"] == "synthetic-grading"
        assert 0.0 <= report["auc"] <= 1.0
        assert "auc" in capsys.readouterr().out

    def test_counterfactual_writes_frames(self, pipeline_home, capsys):
        samples = corpus.load_corpus(pipeline_home["data"])
        sid = corpus.by_split(samples, "test")[0].id
        out = pipeline_home["home"] / "ce"
        code = run_cli("counterfactual", "--data", str(pipeline_home["data"]),
                       "--checkpoint", str(pipeline_home["ck"]),
                       "--probe", str(pipeline_home["probe"]),
                       "--id", str(sid), "--mode", "target-grade", "--grade", "3",
                       "--out", str(out))
        assert code == 0
        payload = json.loads((out / f"ce_{sid}.json").read_text())
        assert payload["requested_grades"] == [3.0]
        frame = corpus.read_pgm(out / f"ce_{sid}_3.pgm")
        assert frame.shape == (32, 32)

    def test_counterfactual_unknown_id_is_domain_error(self, pipeline_home, capsys):
        code = run_cli("counterfactual", "--data", str(pipeline_home["data"]),
                       "--checkpoint", str(pipeline_home["ck"]),
                       "--probe", str(pipeline_home["probe"]),
                       "--id", "99999", "--mode", "reflect")
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_project_writes_coords(self, pipeline_home):
        out = pipeline_home["home"] / "proj.json"
        code = run_cli("project", "--data", str(pipeline_home["data"]),
                       "--checkpoint", str(pipeline_home["ck"]),
                       "--split", "test", "--out", str(out))
        assert code == 0
        payload = json.loads(out.read_text())
        coords = np.array(payload["coords"])
        assert coords.shape == (len(payload["ids"]), 2)
        assert len(payload["explained_variance_ratio"]) == 2
