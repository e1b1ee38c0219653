"""Memory traffic, power and real-time-factor estimates.

Weights are re-streamed from wherever they live on every invocation, so a
component's traffic per tier is simply the bytes held in that tier times
its invocation frequency. Activation traffic is not modelled; the
``energy_calibration`` scalar on :class:`MemoryConfig` absorbs the
difference when fitting to measured tables.

Units: bytes/s for traffic, pJ/byte for energy, mW for power.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .placement import WHOLE, Placement, allocate_local, placement_items
from .spec_model import ComponentState, MemoryConfig
from .workload import InvocationProfile

# pJ/s -> mW
PJ_PER_S_TO_MW = 1e-9


def component_frequencies(states: Sequence[ComponentState], profile: InvocationProfile) -> dict:
    return {s.name: profile.for_role(s.spec.role) for s in states}


def memory_traffic(c: ComponentState, f: float, pl: Placement) -> tuple:
    """(local, off-chip) bytes per second for one component."""
    local, off = pl.split(c.name)
    stored = c.stored_bytes
    if abs(local + off - stored) > 1e-9 * max(stored, 1.0):
        raise ValueError(
            f"placement holds {local + off:.0f} bytes for {c.name!r} but the component stores {stored:.0f}"
        )
    return local * f, off * f


def memory_power(traffic: tuple, m: MemoryConfig) -> float:
    local_bps, off_bps = traffic
    pj_per_s = local_bps * m.local_energy_pj_per_byte + off_bps * m.offchip_energy_pj_per_byte
    return m.energy_calibration * pj_per_s * PJ_PER_S_TO_MW


def ops_per_second(c: ComponentState, f: float) -> float:
    return c.spec.ops_factor * 2.0 * c.live_params * f


def compute_power(c: ComponentState, f: float, m: MemoryConfig) -> float:
    return ops_per_second(c, f) / (m.compute_efficiency_gops_per_mw * 1e9)


@dataclass(frozen=True)
class ComponentPower:
    name: str
    freq_hz: float
    live_params: int
    local_bytes: float
    offchip_bytes: float
    local_bps: float
    offchip_bps: float
    memory_mw: float
    compute_mw: float

    @property
    def total_mw(self) -> float:
        return self.memory_mw + self.compute_mw


@dataclass(frozen=True)
class PowerBreakdown:
    components: tuple

    @property
    def memory_mw(self) -> float:
        return sum(c.memory_mw for c in self.components)

    @property
    def compute_mw(self) -> float:
        return sum(c.compute_mw for c in self.components)

    @property
    def total_mw(self) -> float:
        return self.memory_mw + self.compute_mw

    @property
    def local_bps(self) -> float:
        return sum(c.local_bps for c in self.components)

    @property
    def offchip_bps(self) -> float:
        return sum(c.offchip_bps for c in self.components)

    @property
    def compute_share(self) -> float:
        total = self.total_mw
        return self.compute_mw / total if total > 0 else 0.0

    @property
    def compute_below_1pct(self) -> bool:
        """True in the expected regime where memory traffic dominates."""
        return self.compute_share < 0.01

    def __getitem__(self, name: str) -> ComponentPower:
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)


def total_power(
    states: Sequence[ComponentState],
    profile: InvocationProfile,
    placement: Placement,
    m: MemoryConfig,
) -> PowerBreakdown:
    freqs = component_frequencies(states, profile)
    rows = []
    for s in states:
        f = freqs[s.name]
        traffic = memory_traffic(s, f, placement)
        local, off = placement.split(s.name)
        rows.append(ComponentPower(
            name=s.name,
            freq_hz=f,
            live_params=s.live_params,
            local_bytes=local,
            offchip_bytes=off,
            local_bps=traffic[0],
            offchip_bps=traffic[1],
            memory_mw=memory_power(traffic, m),
            compute_mw=compute_power(s, f, m),
        ))
    return PowerBreakdown(tuple(rows))


def rtf_terms(
    states: Sequence[ComponentState],
    profile: InvocationProfile,
    placement: Placement,
    m: MemoryConfig,
) -> tuple:
    """(memory term, compute term) of the serialized RTF estimate."""
    freqs = component_frequencies(states, profile)
    local_s_per_b = m.local_latency_ns_per_64B / 64.0 * 1e-9
    off_s_per_b = m.offchip_latency_ns_per_64B / 64.0 * 1e-9
    mem = comp = 0.0
    for s in states:
        local_bps, off_bps = memory_traffic(s, freqs[s.name], placement)
        mem += local_bps * local_s_per_b + off_bps * off_s_per_b
        comp += ops_per_second(s, freqs[s.name]) / (m.peak_compute_gops * 1e9)
    return mem, comp


def estimate_rtf(states, profile, placement, m) -> float:
    mem, comp = rtf_terms(states, profile, placement, m)
    return mem + comp


def place(
    states: Sequence[ComponentState],
    profile: InvocationProfile,
    m: MemoryConfig,
    mode: str = WHOLE,
    capacity: Optional[float] = None,
) -> Placement:
    freqs = component_frequencies(states, profile)
    cap = m.local_weight_capacity_bytes if capacity is None else capacity
    return allocate_local(placement_items(states, freqs), cap, mode)


def evaluate(
    states: Sequence[ComponentState],
    profile: InvocationProfile,
    m: MemoryConfig,
    mode: str = WHOLE,
    capacity: Optional[float] = None,
) -> tuple:
    """Place weights optimally, then return ``(placement, breakdown)``."""
    pl = place(states, profile, m, mode, capacity)
    return pl, total_power(states, profile, pl, m)

