"""Trainer acceptance: joint-loss correctness and the bridged-knowledge experiment.

Run with ``pytest tests/test_acceptance.py -s``. The experiment trains two
models on CPU and takes several minutes.
"""

import math
import time

import numpy as np
import torch

from tinylm.experiment import run_bridged_experiment
from tinylm.loss import compute_joint_loss
from tinylm.model import ModelOutputs
from tinylm.train import collate

from test_loss import _loss_for, _tiny_model, _toy_batch


def _report(name, ok, detail, elapsed, budget):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(f"[{status}] {name}: {detail} ({elapsed:.1f}s / budget {budget:.0f}s)")
    assert ok, f"{name}: {detail}"
    assert elapsed < budget, f"{name} exceeded runtime budget"


def test_joint_loss_correctness():
    """Uniform logits give ln V + ln 3 within 1e-6; analytic grads match
    central finite differences with relative error < 1e-4."""
    start = time.monotonic()
    vocab_size = 29
    outputs = ModelOutputs(mlm_logits=torch.zeros((4, vocab_size), dtype=torch.float64),
                           drp_logits=torch.zeros((3, 3), dtype=torch.float64))
    loss = compute_joint_loss(outputs, torch.zeros(4, dtype=torch.long),
                              torch.zeros(3, dtype=torch.long))
    expected = math.log(vocab_size) + math.log(3)
    uniform_ok = abs(float(loss.total) - expected) < 1e-6

    model = _tiny_model()
    batch = collate(_toy_batch(seed=11), pad_id=0)
    total = _loss_for(model, batch)
    model.zero_grad()
    total.backward()
    rng = np.random.default_rng(23)
    worst = 0.0
    for _, param in model.named_parameters():
        flat = param.detach().view(-1)
        grad = param.grad.view(-1)
        for _ in range(2):
            idx = int(rng.integers(flat.numel()))
            origin = float(flat[idx])
            h = 1e-5 * max(1.0, abs(origin))
            with torch.no_grad():
                flat[idx] = origin + h
            plus = float(_loss_for(model, batch).detach())
            with torch.no_grad():
                flat[idx] = origin - h
            minus = float(_loss_for(model, batch).detach())
            with torch.no_grad():
                flat[idx] = origin
            numeric = (plus - minus) / (2 * h)
            analytic = float(grad[idx])
            if abs(numeric) < 1e-10 and abs(analytic) < 1e-10:
                continue
            worst = max(worst, abs(numeric - analytic) / max(abs(numeric), abs(analytic)))
    grad_ok = 0.0 < worst < 1e-4
    detail = (f"uniform loss {float(loss.total):.8f} vs {expected:.8f}; "
              f"max gradient rel-err {worst:.2e}")
    _report("joint-loss correctness", uniform_ok and grad_ok,
            detail, time.monotonic() - start, 120)


def test_bridged_knowledge_experiment(tmp_path):
    """Linked-mix training beats an identical no-link budget on bridge tokens
    and reaches >= 0.90 held-out relation accuracy."""
    start = time.monotonic()
    result = run_bridged_experiment(
        tmp_path, n_pairs=12, count=32_000, max_seq_len=32,
        total_steps=6000, batch_size=32, peak_lr=1e-3, seed=0)
    accuracy_ok = result.drp_accuracy >= 0.90
    margin_ok = result.bridge_loss_mix < result.bridge_loss_nolink
    detail = (f"held-out relation accuracy {result.drp_accuracy:.3f}; "
              f"bridge-token loss {result.bridge_loss_mix:.3f} (linked mix) vs "
              f"{result.bridge_loss_nolink:.3f} (no linked option)")
    _report("bridged-knowledge experiment", accuracy_ok and margin_ok,
            detail, time.monotonic() - start, 1800)
