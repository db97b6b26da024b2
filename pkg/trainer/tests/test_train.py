import json

import pytest
import torch

from tinylm.records import check_compatible
from tinylm.schedule import learning_rate
from tinylm.train import TrainerConfig, build_model, load_checkpoint, train

from test_loss import VOCAB, _toy_batch


def _config(**overrides):
    base = dict(vocab_size=VOCAB, layers=1, hidden_size=16, num_heads=2,
                max_seq_len=16, total_steps=4, warmup_steps=1, batch_size=2,
                peak_lr=1e-3, dropout=0.0, seed=1)
    base.update(overrides)
    return TrainerConfig(**base)


def test_schedule_endpoints():
    assert learning_rate(5000, 5e-3, 5000, 10_000) == pytest.approx(5e-3)
    assert learning_rate(10_000, 5e-3, 5000, 10_000) == 0.0
    assert learning_rate(2500, 5e-3, 5000, 10_000) == pytest.approx(2.5e-3)
    assert learning_rate(7500, 5e-3, 5000, 10_000) == pytest.approx(2.5e-3)
    assert learning_rate(1, 1.0, 0, 10) == pytest.approx(0.9)  # no warmup: decay only
    assert learning_rate(3, 1.0, 3, 3) == pytest.approx(1.0)   # no decay phase


def test_config_validation():
    with pytest.raises(ValueError, match="divisible"):
        _config(hidden_size=15)
    with pytest.raises(ValueError, match="warmup"):
        _config(warmup_steps=10, total_steps=5)


def test_zero_steps_keeps_initialization():
    config = _config(total_steps=0, warmup_steps=0)
    model, metrics = train(config, _toy_batch(seed=1, n=6))
    assert metrics == []
    reference = build_model(config)
    for trained, init in zip(model.state_dict().values(), reference.state_dict().values()):
        assert torch.equal(trained, init)


def test_training_is_deterministic(tmp_path):
    config = _config(total_steps=5)
    instances = _toy_batch(seed=2, n=8)
    model_a, metrics_a = train(config, instances, metrics_path=tmp_path / "a.jsonl")
    model_b, metrics_b = train(config, instances, metrics_path=tmp_path / "b.jsonl")
    assert metrics_a == metrics_b
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    for a, b in zip(model_a.state_dict().values(), model_b.state_dict().values()):
        assert torch.equal(a, b)


def test_metrics_log_schema(tmp_path):
    config = _config(total_steps=3)
    _, metrics = train(config, _toy_batch(seed=3, n=4), metrics_path=tmp_path / "m.jsonl")
    lines = (tmp_path / "m.jsonl").read_text().splitlines()
    assert len(lines) == len(metrics) == 3
    entry = json.loads(lines[0])
    assert set(entry) == {"step", "lr", "loss_mlm", "loss_drp", "drp_acc"}
    assert entry["step"] == 1
    assert entry["lr"] == pytest.approx(config.peak_lr)  # step 1 = warmup end
    assert json.loads(lines[-1])["lr"] == 0.0


def test_vocab_mismatch_rejected_before_training():
    bad = _toy_batch(seed=4)
    bad[0].token_ids[1] = VOCAB + 5
    with pytest.raises(ValueError, match="vocab size"):
        train(_config(), bad)
    long = _toy_batch(seed=4)
    long[0].token_ids = long[0].token_ids * 4
    with pytest.raises(ValueError, match="max_seq_len"):
        check_compatible(long, VOCAB, 16)


def test_checkpoint_roundtrip(tmp_path):
    config = _config(total_steps=2)
    model, _ = train(config, _toy_batch(seed=5, n=4), checkpoint_path=tmp_path / "ckpt.pt")
    loaded, loaded_config = load_checkpoint(tmp_path / "ckpt.pt")
    assert loaded_config == config
    for a, b in zip(model.state_dict().values(), loaded.state_dict().values()):
        assert torch.equal(a, b)


def test_drp_ablation_training_runs():
    config = _config(total_steps=3, include_drp=False)
    _, metrics = train(config, _toy_batch(seed=6, n=6))
    assert all(m["loss_drp"] >= 0 for m in metrics)  # still reported, just not optimized


def test_empty_stream_rejected():
    with pytest.raises(ValueError, match="no training instances"):
        train(_config(), [])
