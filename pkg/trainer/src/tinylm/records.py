"""Readers for the upstream data engine's file formats.

The trainer consumes two external formats: the one-token-per-line vocab
file (id = line number) and line-delimited instance records with keys
token_ids / type_ids / mlm_positions / mlm_labels / drp_label. Nothing
here imports the data engine itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

SPECIAL_TOKENS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")


@dataclass(frozen=True)
class Vocab:
    token_to_id: dict[str, int]
    pad_id: int
    mask_id: int
    cls_id: int

    @property
    def size(self) -> int:
        return len(self.token_to_id)


def read_vocab(path) -> Vocab:
    token_to_id: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for idx, line in enumerate(fh):
            token_to_id[line.rstrip("\n")] = idx
    for special in SPECIAL_TOKENS:
        if special not in token_to_id:
            raise ValueError(f"vocab file is missing {special}")
    return Vocab(token_to_id=token_to_id, pad_id=token_to_id["[PAD]"],
                 mask_id=token_to_id["[MASK]"], cls_id=token_to_id["[CLS]"])


@dataclass
class Instance:
    token_ids: list[int]
    type_ids: list[int]
    mlm_positions: list[int]
    mlm_labels: list[int]
    drp_label: int


def read_instances(path) -> list[Instance]:
    instances = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            try:
                instances.append(Instance(
                    token_ids=record["token_ids"], type_ids=record["type_ids"],
                    mlm_positions=record["mlm_positions"], mlm_labels=record["mlm_labels"],
                    drp_label=record["drp_label"],
                ))
            except KeyError as exc:
                raise ValueError(f"{path}: line {lineno}: missing key {exc}") from exc
    return instances


def check_compatible(instances: list[Instance], vocab_size: int, max_seq_len: int) -> None:
    """Reject streams that do not fit the model before training starts."""
    for i, instance in enumerate(instances):
        top = max(instance.token_ids, default=0)
        if top >= vocab_size or max(instance.mlm_labels, default=0) >= vocab_size:
            raise ValueError(
                f"instance {i} uses token id {top} >= model vocab size {vocab_size}")
        if len(instance.token_ids) > max_seq_len:
            raise ValueError(
                f"instance {i} has length {len(instance.token_ids)} > max_seq_len {max_seq_len}")
