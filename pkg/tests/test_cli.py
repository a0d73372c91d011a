import json

from lognet import read_latents_csv, read_pgm
from lognet.cli import main


def test_synth_writes_dataset(tmp_path):
    out = tmp_path / "synth"
    assert main(["synth", "--rps", "4", "--aps", "8", "--per-rp", "3",
                 "--seed", "1", "--out", str(out)]) == 0
    assert (out / "fingerprints.csv").exists()
    assert (out / "rp_map.csv").exists()


def test_encode_bitmap_trace_chain(tmp_path, fixture_dir, capsys):
    out = tmp_path / "enc"
    assert main(["encode", "--data", f"{fixture_dir}/fingerprints_2rp3ap.csv",
                 "--gate", "nor", "--hidden", "1", "--out", str(out)]) == 0
    rp_ids, bits = read_latents_csv(out / "latents.csv")
    assert bits.shape == (12, 2)

    assert main(["bitmap", "--latents", str(out / "latents.csv"), "--out", str(out)]) == 0
    assert read_pgm(out / "latent_bitmap.pgm").shape == (2, 2)

    assert main(["trace", "--latents", str(out / "latents.csv"),
                 "--rp-a", "0", "--rp-b", "1", "--hidden", "1", "--ap-count", "3",
                 "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "rp 0 vs rp 1" in printed
    assert (out / "trace.txt").exists()


def test_train_then_eval(tmp_path, fixture_dir):
    out = tmp_path / "train"
    assert main(["train", "--data", f"{fixture_dir}/fingerprints_2rp3ap.csv",
                 "--model", "lognet", "--gate", "nor", "--epochs", "60",
                 "--out", str(out)]) == 0
    assert main(["eval", "--model-file", str(out / "model.json"),
                 "--data", f"{fixture_dir}/fingerprints_2rp3ap.csv",
                 "--rp-map", f"{fixture_dir}/rp_map_2rp.csv",
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["per_ci"]["0"]["accuracy"] == 1.0


def test_run_on_fixture_produces_ten_ci_report(tmp_path, fixture_dir):
    out = tmp_path / "run"
    assert main(["run", "--data", f"{fixture_dir}/fingerprints_2rp3ap.csv",
                 "--rp-map", f"{fixture_dir}/rp_map_2rp.csv",
                 "--model", "lognet", "--gate", "nor", "--epochs", "40",
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert sorted(int(ci) for ci in report["per_ci"]) == list(range(10))


def test_run_flags_override_config_file(tmp_path, fixture_dir):
    cfg = {
        "synth": {"num_rps": 4, "num_aps": 8, "fingerprints_per_rp": 4, "seed": 2},
        "model": {"family": "lognet", "gate": "and", "hidden_layers": 1},
        "train": {"epochs": 10, "seed": 0},
        "out_dir": str(tmp_path / "from-file"),
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "from-flags"
    assert main(["run", "--config", str(cfg_path), "--gate", "nor",
                 "--epochs", "12", "--out", str(out)]) == 0
    echo = json.loads((out / "report.json").read_text())["config"]
    assert echo["model"]["gate"] == "nor"
    assert echo["train"]["epochs"] == 12


def test_run_rejects_both_sources(tmp_path, fixture_dir, capsys):
    code = main(["run", "--data", f"{fixture_dir}/fingerprints_2rp3ap.csv",
                 "--rp-map", f"{fixture_dir}/rp_map_2rp.csv",
                 "--synth-rps", "4", "--synth-aps", "8",
                 "--out", str(tmp_path / "x")])
    assert code == 1
    assert "exactly one" in capsys.readouterr().err


def test_run_nonzero_exit_on_stage_failure(tmp_path, fixture_dir, capsys):
    bad_map = tmp_path / "bad_map.csv"
    bad_map.write_text("rp_id,x_m,y_m\n0,0.0,0.0\n")  # rp 1 missing
    code = main(["run", "--data", f"{fixture_dir}/fingerprints_2rp3ap.csv",
                 "--rp-map", str(bad_map), "--epochs", "5",
                 "--out", str(tmp_path / "fail")])
    assert code == 1
    assert "load" in capsys.readouterr().err


def test_compare_variants(tmp_path):
    out = tmp_path / "cmp"
    assert main(["compare", "--synth-rps", "6", "--synth-aps", "12",
                 "--synth-per-rp", "4", "--variants", "lognet-nor-1,lognet-xor-1,dnn-1",
                 "--epochs", "8", "--out", str(out)]) == 0
    lines = (out / "comparison.csv").read_text().splitlines()
    assert len(lines) == 4
    assert (out / "comparison.txt").exists()


def test_env_var_sets_default_out_root(tmp_path, monkeypatch):
    monkeypatch.setenv("LOGNET_OUT_ROOT", str(tmp_path / "root"))
    assert main(["synth", "--rps", "3", "--aps", "6"]) == 0
    assert (tmp_path / "root" / "synth" / "fingerprints.csv").exists()


def test_delta_csv_flag_feeds_non_ed_noise(tmp_path):
    delta_path = tmp_path / "delta.csv"
    lines = ["ap_index,delta_db"] + [f"{i},{(-1.0) ** i * 2.0}" for i in range(8)]
    delta_path.write_text("\n".join(lines) + "\n")
    out = tmp_path / "run"
    assert main(["run", "--synth-rps", "4", "--synth-aps", "8",
                 "--noise-mode", "non-ed", "--delta-csv", str(delta_path),
                 "--epochs", "8", "--out", str(out)]) == 0
    echo = json.loads((out / "report.json").read_text())["config"]
    assert echo["noise"]["mode"] == "non-ed"
    assert len(echo["noise"]["delta"]) == 8


def test_schedule_file_flag(tmp_path):
    sched_path = tmp_path / "sched.json"
    sched_path.write_text(json.dumps([[0, 0.0], [1, 0.5], [4, 1.0]]))
    out = tmp_path / "run"
    assert main(["run", "--synth-rps", "4", "--synth-aps", "8",
                 "--schedule", str(sched_path), "--epochs", "8",
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert sorted(int(ci) for ci in report["per_ci"]) == [0, 1, 4]
