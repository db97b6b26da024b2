"""Joint objective: masked-token cross-entropy plus relation cross-entropy.

The masked-token term is the mean negative log-likelihood over all masked
positions in the batch (instances with no masks simply contribute no
positions); the relation term is the mean over instances. The two are
summed unweighted.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from .model import ModelOutputs


@dataclass
class JointLoss:
    total: torch.Tensor
    mlm: torch.Tensor
    drp: torch.Tensor


def compute_joint_loss(outputs: ModelOutputs, mlm_labels: torch.Tensor,
                       drp_labels: torch.Tensor, include_drp: bool = True) -> JointLoss:
    """mlm_labels: flat (total masked,) original ids; drp_labels: (batch,)."""
    if outputs.mlm_logits.numel() and mlm_labels.numel():
        mlm = F.cross_entropy(outputs.mlm_logits, mlm_labels)
    else:
        mlm = outputs.drp_logits.new_zeros(())
    drp = F.cross_entropy(outputs.drp_logits, drp_labels)
    total = mlm + drp if include_drp else mlm
    return JointLoss(total=total, mlm=mlm, drp=drp)
