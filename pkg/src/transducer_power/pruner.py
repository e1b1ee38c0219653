"""Adam-pruning selection: drop the live weights with the smallest
squared-gradient statistic, a fixed number per step.

Only the selection rule lives here. The squared-gradient estimates are
supplied by the caller (typically refreshed by training between steps).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np


@dataclass(frozen=True)
class PruneState:
    values: np.ndarray
    grad_sq: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        grad_sq = np.asarray(self.grad_sq, dtype=float)
        mask = np.asarray(self.mask, dtype=bool)
        if not (values.shape == grad_sq.shape == mask.shape) or values.ndim != 1:
            raise ValueError("values, grad_sq and mask must be 1-D arrays of equal length")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "grad_sq", grad_sq)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def dense(cls, values, grad_sq) -> "PruneState":
        values = np.asarray(values, dtype=float)
        return cls(values, grad_sq, np.ones(values.shape, dtype=bool))

    @property
    def live_count(self) -> int:
        return int(self.mask.sum())

    @property
    def sparsity(self) -> float:
        return 1.0 - self.live_count / len(self.mask) if len(self.mask) else 0.0

    def with_grad_sq(self, grad_sq) -> "PruneState":
        return PruneState(self.values, grad_sq, self.mask)


def adam_prune_step(s: PruneState, k: int) -> PruneState:
    """Prune the ``k`` live entries with the smallest ``grad_sq``.

    Ties go to the lower index.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > s.live_count:
        raise ValueError(f"cannot prune {k} parameters: only {s.live_count} are live")
    if k == 0:
        return s
    live = np.flatnonzero(s.mask)
    order = np.argsort(s.grad_sq[live], kind="stable")
    mask = s.mask.copy()
    mask[live[order[:k]]] = False
    return PruneState(s.values, s.grad_sq, mask)


def sparsity_schedule(total_params: int, target_sparsity: float, steps: int) -> list:
    """Per-step prune counts summing to round-half-even(total * sparsity).

    Counts differ by at most one; the earlier steps take the remainder.
    """
    if not 0 <= target_sparsity < 1:
        raise ValueError("target_sparsity must be in [0, 1)")
    if steps < 1:
        raise ValueError("need at least one step")
    total_k = round(total_params * target_sparsity)
    base, extra = divmod(total_k, steps)
    return [base + (1 if i < extra else 0) for i in range(steps)]


def adam_prune(
    s: PruneState,
    schedule: Iterable[int],
    refresh: Optional[Callable[[PruneState, int], np.ndarray]] = None,
) -> list:
    """Run a schedule of prune steps; returns the state after each step.

    ``refresh(state, step)`` may return new grad_sq estimates before each
    step (step counts from 0).
    """
    history = []
    for i, k in enumerate(schedule):
        if refresh is not None:
            s = s.with_grad_sq(refresh(s, i))
        s = adam_prune_step(s, k)
        history.append(s)
    return history


def write_state_csv(s: PruneState, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "value", "grad_sq", "live"])
        for i, (v, g, m) in enumerate(zip(s.values, s.grad_sq, s.mask)):
            w.writerow([i, repr(float(v)), repr(float(g)), int(m)])


def read_state_csv(path) -> PruneState:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    rows.sort(key=lambda r: int(r["index"]))
    if [int(r["index"]) for r in rows] != list(range(len(rows))):
        raise ValueError("indices must be 0..n-1 without gaps")
    return PruneState(
        np.array([float(r["value"]) for r in rows]),
        np.array([float(r["grad_sq"]) for r in rows]),
        np.array([r["live"].strip() in ("1", "true", "True") for r in rows]),
    )
