import json

import pytest
import soundfile as sf
import torch

from app.config import dump_run_config
from app.main import main
from app.services import manifest_service, training_service


def summary(capsys) -> dict:
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1
    return json.loads(lines[0])


@pytest.fixture
def run_config(tmp_path, tiny_model_cfg, tiny_train_cfg):
    cfg = tiny_train_cfg.model_copy(update={"max_steps": 10, "checkpoint_interval": 5})
    path = tmp_path / "run.env"
    path.write_text(dump_run_config(tiny_model_cfg, cfg))
    return path


@pytest.fixture
def trained_run(toy_manifest, run_config, tmp_path, capsys):
    manifest, _ = toy_manifest
    out_dir = tmp_path / "run"
    assert main(["train", "--manifest", str(manifest), "--config", str(run_config), "--out-dir", str(out_dir)]) == 0
    capsys.readouterr()
    return out_dir


def test_unknown_verb_and_missing_flag():
    assert main(["frobnicate"]) == 2
    assert main(["prepare", "--noise-dir", "x", "--out-manifest", "m.jsonl"]) == 2


def test_prepare_writes_manifest_deterministically(toy_corpus, tmp_path, capsys):
    clean_dir, noise_dir = toy_corpus
    args = ["prepare", "--clean-dir", str(clean_dir), "--noise-dir", str(noise_dir), "--seed", "3"]

    assert main(args + ["--out-manifest", str(tmp_path / "a.jsonl"), "--audio-out-dir", str(tmp_path / "a")]) == 0
    result = summary(capsys)
    assert result["clean"] == 12 and result["noisy"] == 12

    entries = manifest_service.read_manifest(tmp_path / "a.jsonl")
    assert all(5.0 <= e.snr_db <= 20.0 for e in entries if e.is_noisy)

    assert main(args + ["--out-manifest", str(tmp_path / "b.jsonl"), "--audio-out-dir", str(tmp_path / "a")]) == 0
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_prepare_missing_directory_is_usage_error(tmp_path, toy_corpus):
    _, noise_dir = toy_corpus
    code = main([
        "prepare", "--clean-dir", str(tmp_path / "missing"), "--noise-dir", str(noise_dir),
        "--out-manifest", str(tmp_path / "m.jsonl")
    ])
    assert code == 2


def test_train_then_resume(trained_run, toy_manifest, run_config, tiny_model_cfg, tiny_train_cfg, capsys):
    records = training_service.read_loss_log(trained_run / training_service.LOSS_LOG)
    assert len(records) == 10
    assert (trained_run / "step_0000010.ckpt").is_file()

    longer = run_config.parent / "longer.env"
    longer.write_text(dump_run_config(
        tiny_model_cfg, tiny_train_cfg.model_copy(update={"max_steps": 12, "checkpoint_interval": 5})
    ))
    manifest, _ = toy_manifest
    code = main([
        "train", "--manifest", str(manifest), "--config", str(longer),
        "--out-dir", str(trained_run), "--resume", str(trained_run / "step_0000010.ckpt")
    ])
    assert code == 0
    assert summary(capsys)["checkpoint"].endswith("step_0000012.ckpt")
    steps = [r.step for r in training_service.read_loss_log(trained_run / training_service.LOSS_LOG)]
    assert steps == list(range(12))


def test_train_rejects_unknown_config_key(toy_manifest, tmp_path):
    manifest, _ = toy_manifest
    bad = tmp_path / "bad.env"
    bad.write_text("learning_rate=0.001\nwarmup=5\n")
    assert main(["train", "--manifest", str(manifest), "--config", str(bad), "--out-dir", str(tmp_path / "o")]) == 2


def test_train_non_finite_loss_fails(toy_manifest, run_config, tmp_path, monkeypatch, caplog):
    manifest, _ = toy_manifest
    monkeypatch.setattr(training_service.loss_service, "kl_loss", lambda *a: torch.tensor(float("inf")))
    code = main(["train", "--manifest", str(manifest), "--config", str(run_config), "--out-dir", str(tmp_path / "o")])
    assert code == 1
    assert "'kl'" in caplog.text


def test_convert_writes_wav_with_scenario(trained_run, toy_manifest, tmp_path, capsys):
    _, entries = toy_manifest
    clean = [e for e in entries if not e.is_noisy]
    noisy = [e for e in entries if e.is_noisy]
    out_wav = tmp_path / "converted.wav"
    code = main([
        "convert", "--checkpoint", str(trained_run / "step_0000010.ckpt"),
        "--source", noisy[0].audio_path, "--target", clean[-1].audio_path,
        "--out-wav", str(out_wav), "--scenario", "SN-TC"
    ])
    assert code == 0
    assert summary(capsys)["scenario"] == "SN-TC"
    info = sf.info(str(out_wav))
    assert (info.samplerate, info.channels) == (16000, 1)
    assert json.loads(out_wav.with_suffix(".json").read_text())["scenario"] == "SN-TC"


def test_convert_missing_source_is_usage_error(trained_run, tmp_path):
    code = main([
        "convert", "--checkpoint", str(trained_run / "step_0000010.ckpt"),
        "--source", str(tmp_path / "nope.wav"), "--target", str(tmp_path / "nope.wav"),
        "--out-wav", str(tmp_path / "o.wav")
    ])
    assert code == 2


def test_evaluate_identical_pair(toy_manifest, tmp_path, capsys):
    _, entries = toy_manifest
    pairs = tmp_path / "pairs.txt"
    pairs.write_text(f"{entries[0].audio_path} {entries[0].audio_path}\n")
    assert main(["evaluate", "--pairs-file", str(pairs), "--out-report", str(tmp_path / "mcd.jsonl")]) == 0
    result = summary(capsys)
    assert result["mean_mcd_db"] == 0.0 and result["count"] == 1


def test_probe_mel_and_missing_checkpoint(toy_manifest, tmp_path, capsys):
    manifest, _ = toy_manifest
    out = tmp_path / "probe.json"
    assert main(["probe", "--manifest", str(manifest), "--kind", "mel", "--out-report", str(out)]) == 0
    assert summary(capsys)["test_accuracy"] >= 0.9
    assert json.loads(out.read_text())["kind"] == "mel"

    assert main(["probe", "--manifest", str(manifest), "--kind", "content"]) == 2


def test_project(trained_run, toy_manifest, tmp_path, capsys):
    manifest, entries = toy_manifest
    checkpoint = str(trained_run / "step_0000010.ckpt")
    out_csv = tmp_path / "proj.csv"
    assert main(["project", "--checkpoint", checkpoint, "--manifest", str(manifest), "--out-csv", str(out_csv)]) == 0
    assert summary(capsys)["rows"] == len(entries)
    assert out_csv.read_text().splitlines()[0] == "x,y,domain,speaker"

    clean = next(e for e in entries if not e.is_noisy)
    noisy = next(e for e in entries if e.clean_pair_id == clean.utterance_id and e.is_noisy)
    small = manifest_service.write_manifest([clean, noisy], tmp_path / "small.jsonl")
    assert main(["project", "--checkpoint", checkpoint, "--manifest", str(small), "--out-csv", str(out_csv)]) == 2


def test_resume_latest(trained_run, toy_manifest, run_config, tmp_path, capsys):
    manifest, _ = toy_manifest
    base = ["train", "--manifest", str(manifest), "--config", str(run_config), "--resume", "latest"]
    assert main(base + ["--out-dir", str(tmp_path / "empty")]) == 2

    assert main(base + ["--out-dir", str(trained_run)]) == 0
    assert summary(capsys)["checkpoint"].endswith("step_0000010.ckpt")


@pytest.fixture
def deterministic(monkeypatch):
    threads = torch.get_num_threads()
    monkeypatch.setattr(training_service.settings, "DETERMINISTIC", True)
    yield
    torch.use_deterministic_algorithms(False)
    torch.set_num_threads(threads)


def _snapshot(root) -> dict:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file() and p.suffix in (".jsonl", ".wav", ".ckpt")
    }


@pytest.mark.slow
def test_pipeline_repeats_byte_for_byte(deterministic, toy_corpus, tmp_path, tiny_model_cfg, tiny_train_cfg, capsys):
    clean_dir, noise_dir = toy_corpus
    config = tmp_path / "run.env"
    config.write_text(dump_run_config(
        tiny_model_cfg, tiny_train_cfg.model_copy(update={"max_steps": 100, "checkpoint_interval": 50})
    ))
    work = tmp_path / "work"
    manifest = work / "manifest.jsonl"

    snapshots = []
    for _ in range(2):
        assert main([
            "prepare", "--clean-dir", str(clean_dir), "--noise-dir", str(noise_dir), "--seed", "1",
            "--out-manifest", str(manifest), "--audio-out-dir", str(work / "noisy")
        ]) == 0
        assert main(["train", "--manifest", str(manifest), "--config", str(config), "--out-dir", str(work / "run")]) == 0
        entries = manifest_service.read_manifest(manifest)
        source = next(e for e in entries if e.is_noisy)
        target = next(e for e in entries if not e.is_noisy and e.speaker_id != source.speaker_id)
        assert main([
            "convert", "--checkpoint", str(work / "run" / "step_0000100.ckpt"),
            "--source", source.audio_path, "--target", target.audio_path, "--out-wav", str(work / "converted.wav")
        ]) == 0
        capsys.readouterr()
        snapshots.append(_snapshot(work))

    assert "manifest.jsonl" in snapshots[0] and "converted.wav" in snapshots[0]
    assert any(name.endswith("loss_log.jsonl") for name in snapshots[0])
    assert snapshots[0] == snapshots[1]
