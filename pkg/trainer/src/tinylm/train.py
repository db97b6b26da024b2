"""Training loop: AdamW with decoupled weight decay and a linear warmup/decay schedule.

Batch composition is fully determined by the config seed (shuffled epochs,
wrapping across epoch boundaries), so two runs with the same config and
instances produce identical checkpoints. Per-step metrics (losses, rate,
relation accuracy) stream to a line-delimited log.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
import torch

from .loss import compute_joint_loss
from .model import TinyEncoder
from .records import Instance, check_compatible
from .schedule import learning_rate


@dataclass
class TrainerConfig:
    vocab_size: int
    layers: int = 2
    hidden_size: int = 128
    num_heads: int = 2
    max_seq_len: int = 128
    betas: tuple[float, float] = (0.9, 0.98)
    weight_decay: float = 0.01
    peak_lr: float = 5e-3
    warmup_steps: int = 100
    total_steps: int = 1000
    batch_size: int = 32
    seed: int = 0
    dropout: float = 0.1
    include_drp: bool = True
    pad_id: int = 0

    def __post_init__(self) -> None:
        if self.hidden_size % self.num_heads:
            raise ValueError("hidden_size must be divisible by num_heads")
        if self.warmup_steps > self.total_steps:
            raise ValueError("warmup_steps must be <= total_steps")


@dataclass
class Batch:
    token_ids: torch.Tensor
    type_ids: torch.Tensor
    pad_mask: torch.Tensor
    mlm_positions: torch.Tensor
    mlm_mask: torch.Tensor
    mlm_labels: torch.Tensor  # flat, aligned with nonzero(mlm_mask) row order
    drp_labels: torch.Tensor


def collate(instances: list[Instance], pad_id: int) -> Batch:
    n = len(instances)
    width = max(len(i.token_ids) for i in instances)
    mask_width = max(1, max(len(i.mlm_positions) for i in instances))
    token_ids = torch.full((n, width), pad_id, dtype=torch.long)
    type_ids = torch.zeros((n, width), dtype=torch.long)
    pad_mask = torch.ones((n, width), dtype=torch.bool)
    positions = torch.zeros((n, mask_width), dtype=torch.long)
    mask = torch.zeros((n, mask_width), dtype=torch.bool)
    labels = []
    drp = torch.zeros(n, dtype=torch.long)
    for row, instance in enumerate(instances):
        length = len(instance.token_ids)
        token_ids[row, :length] = torch.tensor(instance.token_ids)
        type_ids[row, :length] = torch.tensor(instance.type_ids)
        pad_mask[row, :length] = False
        count = len(instance.mlm_positions)
        if count:
            positions[row, :count] = torch.tensor(instance.mlm_positions)
            mask[row, :count] = True
            labels.extend(instance.mlm_labels)
        drp[row] = instance.drp_label
    return Batch(token_ids=token_ids, type_ids=type_ids, pad_mask=pad_mask,
                 mlm_positions=positions, mlm_mask=mask,
                 mlm_labels=torch.tensor(labels, dtype=torch.long),
                 drp_labels=drp)


def _batch_indices(n: int, batch_size: int, rng: np.random.Generator):
    """Yield seed-determined index batches, wrapping across shuffled epochs."""
    buffer: list[int] = []
    while True:
        while len(buffer) < batch_size:
            buffer.extend(rng.permutation(n).tolist())
        yield buffer[:batch_size]
        del buffer[:batch_size]


def build_model(config: TrainerConfig) -> TinyEncoder:
    torch.manual_seed(config.seed)
    return TinyEncoder(vocab_size=config.vocab_size, hidden_size=config.hidden_size,
                       layers=config.layers, num_heads=config.num_heads,
                       max_seq_len=config.max_seq_len, dropout=config.dropout)


def train(config: TrainerConfig, instances: list[Instance],
          metrics_path=None, checkpoint_path=None) -> tuple[TinyEncoder, list[dict]]:
    """Train a fresh model on the instance stream; returns (model, metrics)."""
    if not instances:
        raise ValueError("no training instances")
    check_compatible(instances, config.vocab_size, config.max_seq_len)
    model = build_model(config)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.peak_lr,
                                  betas=config.betas, weight_decay=config.weight_decay)
    rng = np.random.default_rng(config.seed)
    batches = _batch_indices(len(instances), config.batch_size, rng)
    metrics: list[dict] = []
    model.train()
    log = open(metrics_path, "w", encoding="utf-8") if metrics_path else None
    try:
        for step in range(1, config.total_steps + 1):
            lr = learning_rate(step, config.peak_lr, config.warmup_steps, config.total_steps)
            for group in optimizer.param_groups:
                group["lr"] = lr
            batch = collate([instances[i] for i in next(batches)], config.pad_id)
            outputs = model(batch.token_ids, batch.type_ids, batch.pad_mask,
                            batch.mlm_positions, batch.mlm_mask)
            loss = compute_joint_loss(outputs, batch.mlm_labels, batch.drp_labels,
                                      include_drp=config.include_drp)
            optimizer.zero_grad()
            loss.total.backward()
            optimizer.step()
            accuracy = (outputs.drp_logits.argmax(dim=1) == batch.drp_labels).float().mean()
            entry = {"step": step, "lr": lr, "loss_mlm": float(loss.mlm.detach()),
                     "loss_drp": float(loss.drp.detach()), "drp_acc": float(accuracy)}
            metrics.append(entry)
            if log:
                log.write(json.dumps(entry) + "\n")
    finally:
        if log:
            log.close()
    if checkpoint_path:
        save_checkpoint(model, config, checkpoint_path)
    return model, metrics


def save_checkpoint(model: TinyEncoder, config: TrainerConfig, path) -> None:
    torch.save({"config": asdict(config), "state_dict": model.state_dict()}, path)


def load_checkpoint(path) -> tuple[TinyEncoder, TrainerConfig]:
    payload = torch.load(path, weights_only=True)
    raw = dict(payload["config"])
    raw["betas"] = tuple(raw["betas"])
    config = TrainerConfig(**raw)
    model = build_model(config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, config
