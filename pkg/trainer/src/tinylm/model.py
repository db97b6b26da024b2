"""Tiny transformer encoder with a tied masked-token head and a relation head."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn


@dataclass
class ModelOutputs:
    mlm_logits: torch.Tensor   # (total masked positions, vocab)
    drp_logits: torch.Tensor   # (batch, 3), from the position-0 representation


class TinyEncoder(nn.Module):
    """BERT-shaped encoder scaled down to desk size.

    The masked-token decoder ties its weight matrix to the input token
    embedding; relation logits come from the hidden state at position 0
    (the [CLS] slot).
    """

    def __init__(self, vocab_size: int, hidden_size: int = 128, layers: int = 2,
                 num_heads: int = 2, max_seq_len: int = 128, dropout: float = 0.1):
        super().__init__()
        if hidden_size % num_heads:
            raise ValueError("hidden_size must be divisible by num_heads")
        self.vocab_size = vocab_size
        self.max_seq_len = max_seq_len
        self.token_emb = nn.Embedding(vocab_size, hidden_size)
        self.pos_emb = nn.Embedding(max_seq_len, hidden_size)
        self.type_emb = nn.Embedding(2, hidden_size)
        self.emb_norm = nn.LayerNorm(hidden_size)
        self.emb_dropout = nn.Dropout(dropout)
        layer = nn.TransformerEncoderLayer(
            d_model=hidden_size, nhead=num_heads, dim_feedforward=4 * hidden_size,
            dropout=dropout, activation="gelu", batch_first=True)
        self.encoder = nn.TransformerEncoder(layer, num_layers=layers)
        self.mlm_transform = nn.Sequential(
            nn.Linear(hidden_size, hidden_size), nn.GELU(), nn.LayerNorm(hidden_size))
        self.mlm_bias = nn.Parameter(torch.zeros(vocab_size))
        self.drp_head = nn.Linear(hidden_size, 3)
        self.apply(self._init_weights)

    @staticmethod
    def _init_weights(module: nn.Module) -> None:
        if isinstance(module, nn.Linear):
            nn.init.normal_(module.weight, std=0.02)
            if module.bias is not None:
                nn.init.zeros_(module.bias)
        elif isinstance(module, nn.Embedding):
            nn.init.normal_(module.weight, std=0.02)

    def encode(self, token_ids: torch.Tensor, type_ids: torch.Tensor,
               pad_mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(token_ids.size(1), device=token_ids.device)
        h = self.token_emb(token_ids) + self.pos_emb(positions) + self.type_emb(type_ids)
        h = self.emb_dropout(self.emb_norm(h))
        return self.encoder(h, src_key_padding_mask=pad_mask)

    def forward(self, token_ids: torch.Tensor, type_ids: torch.Tensor,
                pad_mask: torch.Tensor, mlm_positions: torch.Tensor,
                mlm_mask: torch.Tensor) -> ModelOutputs:
        """mlm_positions: (B, M) padded position indices; mlm_mask: (B, M) validity."""
        hidden = self.encode(token_ids, type_ids, pad_mask)
        rows, cols = torch.nonzero(mlm_mask, as_tuple=True)
        gathered = hidden[rows, mlm_positions[rows, cols]]
        mlm_logits = self.mlm_transform(gathered) @ self.token_emb.weight.T + self.mlm_bias
        drp_logits = self.drp_head(hidden[:, 0])
        return ModelOutputs(mlm_logits=mlm_logits, drp_logits=drp_logits)
