import struct

import numpy as np
import pytest
import torch

from app.services import checkpoint_service, training_service


@pytest.fixture
def trained(tiny_model_cfg, tiny_train_cfg, toy_manifest):
    _, entries = toy_manifest
    model = training_service.build_model(tiny_model_cfg, 0)
    optimizer = training_service.build_optimizer(model, tiny_train_cfg)
    store = training_service.FeatureStore(entries)
    rng, generator = training_service.step_generators(0, 0)
    batch = training_service.dataset_service.make_batch(entries, tiny_train_cfg, rng, store)
    training_service.train_step(model, optimizer, batch, tiny_model_cfg, tiny_train_cfg, 0, generator)
    return model, optimizer


def test_save_and_restore_parameters(trained, tiny_train_cfg, tmp_path):
    model, optimizer = trained
    path = checkpoint_service.save_checkpoint(tmp_path / "a.ckpt", model, optimizer, tiny_train_cfg, step=1)
    ckpt = checkpoint_service.load_checkpoint(path)
    assert ckpt.step == 1 and ckpt.optimizer_step == 1
    assert ckpt.train_config == tiny_train_cfg

    restored = checkpoint_service.restore_model(ckpt, expected=model.cfg)
    assert not restored.training
    for (name, a), (_, b) in zip(model.named_parameters(), restored.named_parameters()):
        assert torch.equal(a.detach(), b.detach()), name


def test_layout_header(trained, tmp_path):
    model, _ = trained
    raw = checkpoint_service.save_checkpoint(tmp_path / "a.ckpt", model).read_bytes()
    assert raw[:8] == b"NRVCKPT\x00"
    version, header_length = struct.unpack_from("<II", raw, 8)
    assert version == checkpoint_service.FORMAT_VERSION
    assert raw[16:16 + header_length].startswith(b'{"format_version"')
    (count,) = struct.unpack_from("<I", raw, 16 + header_length)
    assert count == len(list(model.parameters()))


def test_optimizer_moments_restored(trained, tiny_train_cfg, tmp_path):
    model, optimizer = trained
    ckpt = checkpoint_service.load_checkpoint(
        checkpoint_service.save_checkpoint(tmp_path / "a.ckpt", model, optimizer, tiny_train_cfg, 1)
    )
    restored = checkpoint_service.restore_model(ckpt)
    fresh = training_service.build_optimizer(restored, tiny_train_cfg)
    checkpoint_service.restore_optimizer(ckpt, restored, fresh)
    for (_, a), (_, b) in zip(model.named_parameters(), restored.named_parameters()):
        np.testing.assert_array_equal(optimizer.state[a]["exp_avg"].numpy(), fresh.state[b]["exp_avg"].numpy())
        np.testing.assert_array_equal(optimizer.state[a]["exp_avg_sq"].numpy(), fresh.state[b]["exp_avg_sq"].numpy())


def test_config_mismatch(trained, tmp_path):
    model, _ = trained
    ckpt = checkpoint_service.load_checkpoint(checkpoint_service.save_checkpoint(tmp_path / "a.ckpt", model))
    other = model.cfg.model_copy(update={"speaker_dim": 8})
    with pytest.raises(ValueError, match="does not match"):
        checkpoint_service.restore_model(ckpt, expected=other)

    ckpt.model_config = other
    with pytest.raises(ValueError, match="mismatch"):
        checkpoint_service.restore_model(ckpt)


def test_rejects_foreign_and_truncated(trained, tmp_path):
    model, _ = trained
    foreign = tmp_path / "foreign.ckpt"
    foreign.write_bytes(b"not a checkpoint")
    with pytest.raises(ValueError, match="Not a checkpoint"):
        checkpoint_service.load_checkpoint(foreign)

    path = checkpoint_service.save_checkpoint(tmp_path / "a.ckpt", model)
    path.write_bytes(path.read_bytes()[:200])
    with pytest.raises(ValueError):
        checkpoint_service.load_checkpoint(path)

    with pytest.raises(FileNotFoundError):
        checkpoint_service.load_checkpoint(tmp_path / "missing.ckpt")


def test_latest_checkpoint(trained, tmp_path):
    model, _ = trained
    assert checkpoint_service.latest_checkpoint(tmp_path) is None
    for step in (2, 10, 4):
        checkpoint_service.save_checkpoint(tmp_path / f"step_{step:07d}.ckpt", model, step=step)
    assert checkpoint_service.latest_checkpoint(tmp_path).name == "step_0000010.ckpt"


def test_save_load_save_is_byte_identical(trained, tiny_train_cfg, tmp_path):
    model, optimizer = trained
    first = checkpoint_service.save_checkpoint(tmp_path / "a.ckpt", model, optimizer, tiny_train_cfg, step=1)
    second = checkpoint_service.write_checkpoint(checkpoint_service.load_checkpoint(first), tmp_path / "b.ckpt")
    assert first.read_bytes() == second.read_bytes()

    ckpt = checkpoint_service.load_checkpoint(first)
    restored = checkpoint_service.restore_model(ckpt)
    fresh = training_service.build_optimizer(restored, tiny_train_cfg)
    checkpoint_service.restore_optimizer(ckpt, restored, fresh)
    third = checkpoint_service.save_checkpoint(tmp_path / "c.ckpt", restored, fresh, tiny_train_cfg, step=1)
    assert first.read_bytes() == third.read_bytes()
