import numpy as np
import pytest
from pydantic import ValidationError

from app.schemas.audio import DomainLabel
from app.schemas.manifest import ManifestEntry
from app.services import audio_service, manifest_service
from tests.conftest import tone, write_wav


@pytest.fixture
def small_corpus(tmp_path):
    clean_dir, noise_dir = tmp_path / "clean", tmp_path / "noise"
    write_wav(clean_dir / "spkA" / "u1.wav", tone(220, 0.3))
    write_wav(clean_dir / "spkB" / "u2.wav", tone(330, 0.3))
    write_wav(noise_dir / "hiss.wav", np.random.default_rng(0).uniform(-0.3, 0.3, 16000).astype(np.float32))
    return clean_dir, noise_dir


def test_counts_two_clean_one_noise(small_corpus, tmp_path):
    clean_dir, noise_dir = small_corpus
    entries = manifest_service.build_manifest(clean_dir, noise_dir, tmp_path / "out")
    assert len(entries) == 4
    assert sum(e.is_noisy for e in entries) == 2
    assert {e.speaker_id for e in entries} == {"spkA", "spkB"}
    for entry in entries:
        assert entry.split == "train"
        if entry.is_noisy:
            assert entry.noise_type == "hiss"
            assert entry.clean_pair_id in {"spkA_u1", "spkB_u2"}


def test_snr_within_range_and_measured(small_corpus, tmp_path):
    clean_dir, noise_dir = small_corpus
    entries = manifest_service.build_manifest(
        clean_dir, noise_dir, tmp_path / "out", snr_range=(5.0, 20.0), augmentations=3, seed=3
    )
    clean_by_id = manifest_service.clean_pairs(entries)
    noise = manifest_service.noise_portion(
        audio_service.load_waveform(noise_dir / "hiss.wav"), 0.75, "train"
    )
    for entry in (e for e in entries if e.is_noisy):
        assert 5.0 <= entry.snr_db <= 20.0
        clean = audio_service.load_waveform(clean_by_id[entry.clean_pair_id].audio_path).samples
        segment = audio_service.noise_segment(noise.samples, len(clean), entry.noise_offset)
        scaled, _ = audio_service.scale_noise(clean, segment, entry.snr_db)
        assert audio_service.measured_snr(clean, scaled) == pytest.approx(entry.snr_db, abs=1e-6)


def test_same_seed_same_manifest(small_corpus, tmp_path):
    clean_dir, noise_dir = small_corpus
    a = manifest_service.build_manifest(clean_dir, noise_dir, tmp_path / "out", seed=7, augmentations=2)
    path_a = manifest_service.write_manifest(a, tmp_path / "a.jsonl")
    b = manifest_service.build_manifest(clean_dir, noise_dir, tmp_path / "out", seed=7, augmentations=2)
    path_b = manifest_service.write_manifest(b, tmp_path / "b.jsonl")
    assert path_a.read_bytes() == path_b.read_bytes()


def test_test_split_uses_held_out_noise(small_corpus, tmp_path):
    clean_dir, noise_dir = small_corpus
    entries = manifest_service.build_manifest(clean_dir, noise_dir, tmp_path / "out", split="test")
    noisy = [e for e in entries if e.is_noisy]
    assert all(e.split == "test" for e in entries)
    # the test portion is the last quarter: 4000 samples, shorter-than-utterance clips get tiled
    assert all(e.noise_offset < 4000 for e in noisy)
    assert all("/test/" in e.audio_path.replace("\\", "/") for e in noisy)


def test_every_noise_type(tmp_path, small_corpus):
    clean_dir, noise_dir = small_corpus
    write_wav(noise_dir / "buzz.wav", tone(60, 1.0, amplitude=0.2))
    entries = manifest_service.build_manifest(clean_dir, noise_dir, tmp_path / "out", every_noise_type=True)
    noisy = [e for e in entries if e.is_noisy]
    assert len(noisy) == 4
    assert sorted({e.noise_type for e in noisy}) == ["buzz", "hiss"]


def test_empty_corpora(tmp_path, small_corpus):
    clean_dir, noise_dir = small_corpus
    (tmp_path / "empty").mkdir()
    with pytest.raises(ValueError, match="No clean utterances"):
        manifest_service.build_manifest(tmp_path / "empty", noise_dir, tmp_path / "out")
    with pytest.raises(ValueError, match="No noise clips"):
        manifest_service.build_manifest(clean_dir, tmp_path / "empty", tmp_path / "out")


def test_manifest_io_round_trip_validates_pairs(small_corpus, tmp_path):
    clean_dir, noise_dir = small_corpus
    entries = manifest_service.build_manifest(clean_dir, noise_dir, tmp_path / "out")
    path = manifest_service.write_manifest(entries, tmp_path / "m.jsonl")
    assert manifest_service.read_manifest(path) == entries

    orphan = [e for e in entries if e.is_noisy]
    manifest_service.write_manifest(orphan, tmp_path / "orphan.jsonl")
    with pytest.raises(ValueError, match="clean pair"):
        manifest_service.read_manifest(tmp_path / "orphan.jsonl")


def test_entry_domain_fields():
    with pytest.raises(ValidationError):
        ManifestEntry(utterance_id="n", audio_path="n.wav", speaker_id="s", domain=DomainLabel.NOISY, clean_pair_id="c")
    with pytest.raises(ValidationError):
        ManifestEntry(utterance_id="c", audio_path="c.wav", speaker_id="s", domain=DomainLabel.CLEAN, clean_pair_id="x")


def test_filter_entries(toy_manifest):
    _, entries = toy_manifest
    clean = manifest_service.filter_entries(entries, split="train", clean_only=True)
    assert clean and all(not e.is_noisy for e in clean)
    assert manifest_service.filter_entries(entries, split="test") == []


def test_noisy_minus_clean_is_scaled_noise_segment(small_corpus, tmp_path):
    clean_dir, noise_dir = small_corpus
    entries = manifest_service.build_manifest(clean_dir, noise_dir, tmp_path / "out", seed=3)
    pairs = manifest_service.clean_pairs(entries)
    for entry in (e for e in entries if e.is_noisy):
        clean = audio_service.load_waveform(pairs[entry.clean_pair_id].audio_path).samples
        noisy = audio_service.load_waveform(entry.audio_path).samples
        noise = manifest_service.noise_portion(audio_service.load_waveform(entry.noise_path), 0.75, "train")
        segment = audio_service.noise_segment(noise.samples, len(clean), entry.noise_offset)
        scaled, _ = audio_service.scale_noise(clean, segment, entry.snr_db)
        np.testing.assert_allclose(noisy.astype(np.float64) - clean, scaled, atol=1e-3)
