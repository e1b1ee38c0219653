"""Local-memory allocation of component weights.

Every byte moved from off-chip to local memory saves
``freq * (offchip_pj - local_pj)`` per second, so the value of a byte is
proportional to its component's invocation frequency. Fractional
placement is therefore a continuous knapsack solved exactly by filling in
descending frequency order; whole-component placement is a 0/1 knapsack,
solved exactly by meet-in-the-middle enumeration.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

FRACTIONAL = "fractional"
WHOLE = "whole_component"
MODES = (FRACTIONAL, WHOLE)
MAX_WHOLE_COMPONENTS = 32


def normalize_mode(mode: str) -> str:
    if mode in ("whole", WHOLE):
        return WHOLE
    if mode == FRACTIONAL:
        return FRACTIONAL
    raise ValueError(f"unknown placement mode {mode!r}")


class PlacementItem(NamedTuple):
    name: str
    stored_bytes: float
    freq_hz: float


@dataclass(frozen=True)
class Placement:
    local: Mapping[str, float] = field(default_factory=dict)
    offchip: Mapping[str, float] = field(default_factory=dict)
    mode: str = WHOLE

    def __post_init__(self):
        object.__setattr__(self, "local", dict(self.local))
        object.__setattr__(self, "offchip", dict(self.offchip))

    @property
    def local_total(self) -> float:
        return float(sum(self.local.values()))

    def split(self, name: str) -> tuple:
        return self.local.get(name, 0.0), self.offchip.get(name, 0.0)

    def is_fully_local(self, name: str) -> bool:
        return self.offchip.get(name, 0.0) <= 0.0

    @classmethod
    def all_offchip(cls, items: Iterable, mode: str = WHOLE) -> "Placement":
        items = list(items)
        return cls({it.name: 0.0 for it in items}, {it.name: float(it.stored_bytes) for it in items}, mode)


def _tie_key(item: PlacementItem):
    # higher frequency first, then smaller component, then name
    return (-item.freq_hz, item.stored_bytes, item.name)


def _fractional(items: list, capacity: float) -> dict:
    local = {it.name: 0.0 for it in items}
    remaining = float(capacity)
    for it in sorted(items, key=_tie_key):
        if remaining <= 0 or it.freq_hz <= 0:
            break
        take = min(float(it.stored_bytes), remaining)
        local[it.name] = take
        remaining -= take
    return local


def _enumerate(weights: np.ndarray, values: np.ndarray):
    k = len(weights)
    masks = np.arange(1 << k, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(k)) & 1).astype(float)
    return masks, bits @ weights, bits @ values


def best_subset(weights, values, capacity: float) -> tuple:
    """Exact 0/1 knapsack by meet-in-the-middle; returns (chosen indices, value)."""
    weights = np.asarray(weights, dtype=float)
    values = np.asarray(values, dtype=float)
    n = len(weights)
    if n > MAX_WHOLE_COMPONENTS:
        raise ValueError(f"whole-component placement supports at most {MAX_WHOLE_COMPONENTS} components")
    if n == 0:
        return (), 0.0
    cap = capacity * (1 + 1e-12)
    half = n // 2
    a_masks, a_w, a_v = _enumerate(weights[:half], values[:half])
    b_masks, b_w, b_v = _enumerate(weights[half:], values[half:])

    order = np.lexsort((b_masks, b_w))
    b_w, b_v, b_masks = b_w[order], b_v[order], b_masks[order]
    best_idx = np.zeros(len(b_v), dtype=np.int64)
    run = 0
    for i in range(1, len(b_v)):
        if b_v[i] > b_v[run]:
            run = i
        best_idx[i] = run
    b_w_list = b_w.tolist()

    best_value, best_pair = -1.0, (0, 0)
    for am, aw, av in zip(a_masks.tolist(), a_w.tolist(), a_v.tolist()):
        if aw > cap:
            continue
        j = bisect.bisect_right(b_w_list, cap - aw) - 1
        if j < 0:
            continue
        bi = best_idx[j]
        total = av + b_v[bi]
        if total > best_value:
            best_value, best_pair = total, (am, int(b_masks[bi]))
    am, bm = best_pair
    chosen = [i for i in range(half) if am >> i & 1] + [half + i for i in range(n - half) if bm >> i & 1]
    return tuple(chosen), float(best_value)


def allocate_local(items: Iterable, capacity: float, mode: str = WHOLE) -> Placement:
    """Power-optimal split of each item's bytes between local and off-chip memory."""
    mode = normalize_mode(mode)
    items = [PlacementItem(*it) for it in items]
    if capacity <= 0:
        return Placement.all_offchip(items, mode)
    if mode == FRACTIONAL:
        local = _fractional(items, capacity)
    else:
        candidates = [it for it in items if it.freq_hz > 0 and it.stored_bytes > 0]
        chosen, _ = best_subset(
            [it.stored_bytes for it in candidates],
            [it.stored_bytes * it.freq_hz for it in candidates],
            capacity,
        )
        picked = {candidates[i].name for i in chosen}
        local = {it.name: (float(it.stored_bytes) if it.name in picked else 0.0) for it in items}
    offchip = {it.name: float(it.stored_bytes) - local[it.name] for it in items}
    return Placement(local, offchip, mode)


def placement_items(states, frequencies: Mapping[str, float]) -> list:
    return [PlacementItem(s.name, s.stored_bytes, frequencies[s.name]) for s in states]


def placement_power_delta(before: Placement, after: Placement, frequencies: Mapping[str, float], m) -> float:
    """Memory power saved (mW) going from ``before`` to ``after``."""

    def power(pl: Placement) -> float:
        total = 0.0
        for name, f in frequencies.items():
            local, off = pl.split(name)
            total += f * (local * m.local_energy_pj_per_byte + off * m.offchip_energy_pj_per_byte)
        return m.energy_calibration * total * 1e-9

    return power(before) - power(after)
