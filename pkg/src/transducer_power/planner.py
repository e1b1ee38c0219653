"""Power-to-accuracy sensitivity ranking and greedy compression planning.

Power sensitivity is the marginal memory power of one million parameters
of a component: its invocation frequency times the energy unit of the tier
the next removed bytes would come from. Accuracy sensitivity is the slope
of the component's fitted accuracy curve at its current size. The planner
repeatedly shrinks whichever component has the highest ratio of the two,
re-optimising local-memory placement after every step, until the requested
power reduction is met or nothing more can be removed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .curvefit import AccuracyCurve, accuracy_sensitivity, predict_wer
from .energy import component_frequencies, evaluate
from .placement import WHOLE, Placement
from .spec_model import ComponentState, MemoryConfig
from .workload import InvocationProfile

TARGET_REACHED = "target reached"
FLOOR_REACHED = "floor reached"
NO_POWER_REDUCTION = "no power reduction"

OFFCHIP = "offchip"
LOCAL = "local"


def normalize_curves(curves: Mapping) -> dict:
    """Accept ``{component: curve}`` or ``{component: {dataset: curve}}``."""
    out = {}
    for comp, value in curves.items():
        if isinstance(value, AccuracyCurve):
            out[comp] = {"default": value}
        else:
            out[comp] = dict(value)
    return out


def curves_from_entries(entries) -> dict:
    """Build the planner's curve mapping from config-document curve entries."""
    out: dict = {}
    for e in entries:
        curve = AccuracyCurve.flat() if e.zero_sensitivity else AccuracyCurve(e.a, e.b, e.c)
        out.setdefault(e.component, {})[e.dataset] = curve
    return out


def marginal_tier(name: str, placement: Placement) -> str:
    return LOCAL if placement.is_fully_local(name) else OFFCHIP


def power_sensitivity(c: ComponentState, f: float, placement: Placement, m: MemoryConfig) -> float:
    """mW saved per million parameters removed at the margin."""
    tier = marginal_tier(c.name, placement)
    unit = m.offchip_energy_pj_per_byte if tier == OFFCHIP else m.local_energy_pj_per_byte
    return f * unit * c.spec.bytes_per_param * 1e6 * m.energy_calibration * 1e-9


def _accuracy_sensitivity(name: str, curves: Mapping, live_params: int) -> float:
    try:
        per_dataset = curves[name]
    except KeyError:
        raise KeyError(f"missing accuracy curve for component {name!r}") from None
    size = live_params / 1e6
    values = [accuracy_sensitivity(cv, size) for cv in per_dataset.values()]
    return sum(values) / len(values)


def _ratio(power: float, acc: float) -> float:
    if acc > 0:
        return power / acc
    return math.inf if power > 0 else 0.0


@dataclass(frozen=True)
class ComponentSensitivity:
    name: str
    live_params: int
    freq_hz: float
    marginal_tier: str
    power_sensitivity: float
    accuracy_sensitivity: float
    ratio: float

    @property
    def infinite_ratio(self) -> bool:
        return math.isinf(self.ratio)


@dataclass(frozen=True)
class SensitivityReport:
    components: tuple
    placement: Placement

    def __getitem__(self, name: str) -> ComponentSensitivity:
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)

    def ranked(self, names: Optional[Sequence[str]] = None) -> list:
        pool = [c for c in self.components if names is None or c.name in names]
        return sorted(pool, key=lambda c: (-c.ratio, -c.power_sensitivity, c.name))


def sensitivity_report(
    states: Sequence[ComponentState],
    curves: Mapping,
    profile: InvocationProfile,
    placement: Placement,
    m: MemoryConfig,
    names: Optional[Sequence[str]] = None,
) -> SensitivityReport:
    curves = normalize_curves(curves)
    freqs = component_frequencies(states, profile)
    rows = []
    for s in states:
        if names is not None and s.name not in names:
            continue
        ps = power_sensitivity(s, freqs[s.name], placement, m)
        acc = _accuracy_sensitivity(s.name, curves, s.live_params)
        rows.append(ComponentSensitivity(
            name=s.name,
            live_params=s.live_params,
            freq_hz=freqs[s.name],
            marginal_tier=marginal_tier(s.name, placement),
            power_sensitivity=ps,
            accuracy_sensitivity=acc,
            ratio=_ratio(ps, acc),
        ))
    return SensitivityReport(tuple(rows), placement)


def sensitivity_ratio(component: str, curves, states, profile, placement, m) -> float:
    return sensitivity_report(states, curves, profile, placement, m, names=[component])[component].ratio


def predicted_wer(states, curves: Mapping, reference_states) -> dict:
    """Per-dataset WER assuming component-wise WER changes add up.

    The baseline for a dataset is the mean of its curves' predictions at the
    reference sizes; each component then contributes its own curve's change.
    """
    curves = normalize_curves(curves)
    ref = {s.name: s.live_params / 1e6 for s in reference_states}
    datasets = sorted({d for per in curves.values() for d in per})
    out = {}
    for d in datasets:
        base, n, delta = 0.0, 0, 0.0
        for s in states:
            cv = curves.get(s.name, {}).get(d)
            if cv is None:
                continue
            w_ref = predict_wer(cv, ref[s.name])
            base += w_ref
            n += 1
            delta += predict_wer(cv, s.live_params / 1e6) - w_ref
        if n:
            out[d] = base / n + delta
    return out


@dataclass(frozen=True)
class PlanStep:
    index: int
    component: str
    params_removed: int
    live_params: int
    ratio: float
    total_mw: float
    predicted_wer: Mapping[str, float]
    placement: Placement


@dataclass(frozen=True)
class CompressionPlan:
    steps: tuple
    initial_mw: float
    target_mw_reduction: float
    achieved_mw_reduction: float
    termination_reason: str
    final_states: tuple = field(default=())

    @property
    def first_touched(self) -> list:
        seen = []
        for s in self.steps:
            if s.component not in seen:
                seen.append(s.component)
        return seen

    @property
    def final_mw(self) -> float:
        return self.initial_mw - self.achieved_mw_reduction


def plan_compression(
    states: Sequence[ComponentState],
    curves: Mapping,
    profile: InvocationProfile,
    m: MemoryConfig,
    target_mw: float,
    step_millions: float = 0.4,
    min_params: Optional[Mapping[str, int]] = None,
    mode: str = WHOLE,
    reference_states: Optional[Sequence[ComponentState]] = None,
) -> CompressionPlan:
    """Greedy compression schedule toward a power reduction of ``target_mw``.

    ``min_params`` overrides each component's own floor. WER predictions are
    relative to ``reference_states`` (default: the starting states).
    """
    if target_mw <= 0:
        raise ValueError("target_mw must be positive")
    if step_millions <= 0:
        raise ValueError("step_millions must be positive")
    curves = normalize_curves(curves)
    floors = {s.name: s.spec.min_params for s in states}
    floors.update(min_params or {})
    step = int(round(step_millions * 1e6))
    reference = tuple(reference_states) if reference_states is not None else tuple(states)

    current = tuple(states)
    placement, breakdown = evaluate(current, profile, m, mode)
    initial = current_mw = breakdown.total_mw
    steps = []
    reason = TARGET_REACHED
    while initial - current_mw < target_mw:
        candidates = [s.name for s in current if s.live_params > floors[s.name]]
        if not candidates:
            reason = FLOOR_REACHED
            break
        report = sensitivity_report(current, curves, profile, placement, m, names=candidates)
        best = report.ranked()[0]
        idx = next(i for i, s in enumerate(current) if s.name == best.name)
        old = current[idx]
        new_live = max(floors[old.name], old.live_params - step)
        trial = current[:idx] + (old.with_live(new_live),) + current[idx + 1:]
        trial_placement, trial_breakdown = evaluate(trial, profile, m, mode)
        if not trial_breakdown.total_mw < current_mw:
            reason = NO_POWER_REDUCTION
            break
        current, placement, current_mw = trial, trial_placement, trial_breakdown.total_mw
        steps.append(PlanStep(
            index=len(steps) + 1,
            component=old.name,
            params_removed=old.live_params - new_live,
            live_params=new_live,
            ratio=best.ratio,
            total_mw=current_mw,
            predicted_wer=predicted_wer(current, curves, reference),
            placement=placement,
        ))
    return CompressionPlan(
        steps=tuple(steps),
        initial_mw=initial,
        target_mw_reduction=target_mw,
        achieved_mw_reduction=initial - current_mw,
        termination_reason=reason,
        final_states=current,
    )


def power_sweep(
    states: Sequence[ComponentState],
    name: str,
    sizes: Sequence[int],
    profile: InvocationProfile,
    m: MemoryConfig,
    mode: str = WHOLE,
) -> list:
    """Total power with one component resized, placement re-optimised per size.

    Returns ``(live_params, total_mw, fully_local)`` per size.
    """
    out = []
    idx = next(i for i, s in enumerate(states) if s.name == name)
    for size in sizes:
        trial = tuple(states[:idx]) + (states[idx].with_live(int(size)),) + tuple(states[idx + 1:])
        pl, bd = evaluate(trial, profile, m, mode)
        out.append((int(size), bd.total_mw, pl.is_fully_local(name)))
    return out
