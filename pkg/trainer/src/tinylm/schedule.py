"""Linear warmup then linear decay learning-rate schedule."""

from __future__ import annotations


def learning_rate(step: int, peak: float, warmup_steps: int, total_steps: int) -> float:
    """Rate for 1-indexed step: peak exactly at step == warmup, 0 at the final step.

    With warmup_steps == total_steps there is no decay phase and the rate
    holds at peak after warmup.
    """
    if step <= 0:
        return 0.0
    if warmup_steps > 0 and step <= warmup_steps:
        return peak * step / warmup_steps
    if total_steps <= warmup_steps:
        return peak
    return peak * (total_steps - step) / (total_steps - warmup_steps)
