"""tinylm: desk-scale transformer trainer for segment-pair instance records.

Consumes the data engine's instance records and vocab file, trains a tiny
encoder with the joint masked-token + segment-relation objective, and
evaluates whether linked-document packing internalizes cross-document
knowledge.
"""

from .evaluate import evaluate_bridge_tokens, evaluate_drp_accuracy
from .loss import JointLoss, compute_joint_loss
from .model import ModelOutputs, TinyEncoder
from .records import Instance, Vocab, read_instances, read_vocab
from .schedule import learning_rate
from .train import TrainerConfig, load_checkpoint, save_checkpoint, train

__version__ = "0.1.0"
