"""Held-out evaluation: relation accuracy and masked-token loss on designated tokens."""

from __future__ import annotations

import torch
import torch.nn.functional as F

from .model import TinyEncoder
from .records import Instance
from .train import collate, load_checkpoint


def _resolve(model_or_path) -> TinyEncoder:
    if isinstance(model_or_path, TinyEncoder):
        return model_or_path
    model, _ = load_checkpoint(model_or_path)
    return model


def _batched(instances, size=64):
    for start in range(0, len(instances), size):
        yield instances[start:start + size]


@torch.no_grad()
def evaluate_drp_accuracy(model_or_path, instances: list[Instance],
                          pad_id: int = 0) -> float:
    """Fraction of instances whose relation class is predicted correctly."""
    model = _resolve(model_or_path)
    model.eval()
    correct = 0
    for chunk in _batched(instances):
        batch = collate(chunk, pad_id)
        outputs = model(batch.token_ids, batch.type_ids, batch.pad_mask,
                        batch.mlm_positions, batch.mlm_mask)
        correct += int((outputs.drp_logits.argmax(dim=1) == batch.drp_labels).sum())
    return correct / len(instances)


@torch.no_grad()
def evaluate_bridge_tokens(model_or_path, instances: list[Instance],
                           bridge_token_ids, pad_id: int = 0) -> float:
    """Mean negative log-likelihood at masked positions labeled with bridge tokens.

    The eval instances are expected to mask only designated bridge tokens;
    positions with non-bridge labels are ignored defensively.
    """
    bridge = set(int(b) for b in bridge_token_ids)
    if not bridge:
        raise ValueError("bridge token set is empty")
    model = _resolve(model_or_path)
    model.eval()
    total = 0.0
    count = 0
    for chunk in _batched(instances):
        batch = collate(chunk, pad_id)
        outputs = model(batch.token_ids, batch.type_ids, batch.pad_mask,
                        batch.mlm_positions, batch.mlm_mask)
        keep = torch.tensor([int(lbl) in bridge for lbl in batch.mlm_labels],
                            dtype=torch.bool)
        if not bool(keep.any()):
            continue
        nll = F.cross_entropy(outputs.mlm_logits[keep], batch.mlm_labels[keep],
                              reduction="sum")
        total += float(nll)
        count += int(keep.sum())
    if count == 0:
        raise ValueError("no masked positions carry bridge-token labels")
    return total / count
