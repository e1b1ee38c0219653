"""CSV and JSON writers for analysis, fit, plan and simulation results.

Numbers are written with fixed precision (power in mW and rates in Hz to
two decimals) so reports diff cleanly between runs.
"""

from __future__ import annotations

import csv
import io
import json
import math


def mw(x: float) -> str:
    return f"{x:.2f}"


def hz(x: float) -> str:
    return f"{x:.2f}"


def num(x: float, digits: int = 6) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.{digits}f}"


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def power_csv(breakdown) -> str:
    rows = [
        [c.name, mw(c.memory_mw), mw(c.compute_mw), f"{c.local_bps:.0f}", f"{c.offchip_bps:.0f}"]
        for c in breakdown.components
    ]
    rows.append(["TOTAL", mw(breakdown.memory_mw), mw(breakdown.compute_mw),
                 f"{breakdown.local_bps:.0f}", f"{breakdown.offchip_bps:.0f}"])
    return rows_to_csv(["component", "memory_mw", "compute_mw", "local_Bps", "offchip_Bps"], rows)


def plan_csv(plan) -> str:
    datasets = sorted({d for s in plan.steps for d in s.predicted_wer})
    header = ["step", "component", "live_params", "params_removed", "ratio", "total_mw"]
    header += [f"wer_{d}" for d in datasets]
    header += ["local_components"]
    rows = []
    for s in plan.steps:
        local = ";".join(sorted(n for n, b in s.placement.local.items() if b > 0))
        rows.append(
            [s.index, s.component, s.live_params, s.params_removed, num(s.ratio, 2), mw(s.total_mw)]
            + [num(s.predicted_wer.get(d, math.nan), 4) for d in datasets]
            + [local]
        )
    return rows_to_csv(header, rows)


def predictions_csv(rows) -> str:
    """rows: (component, dataset, size, wer, sensitivity)."""
    return rows_to_csv(
        ["component", "dataset", "size_millions", "predicted_wer", "accuracy_sensitivity"],
        [[c, d, num(s, 4), num(w, 6), num(g, 8)] for c, d, s, w, g in rows],
    )


def counts_csv(counts, analytic) -> str:
    rates = counts.rates()
    rows = []
    for role in ("encoder", "predictor", "joiner"):
        n = getattr(counts, role)
        sim = rates.for_role(role)
        ref = analytic.for_role(role)
        rel = (sim - ref) / ref if ref else 0.0
        rows.append([role, n, hz(sim), hz(ref), num(rel, 4)])
    return rows_to_csv(["component", "count", "simulated_hz", "analytic_hz", "rel_error"], rows)


def _clean(obj):
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return str(obj)
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def to_json(doc: dict) -> str:
    return json.dumps(_clean(doc), indent=2, sort_keys=False) + "\n"


def placement_doc(placement) -> dict:
    return {
        "mode": placement.mode,
        "components": {
            name: {"local_bytes": placement.local.get(name, 0.0), "offchip_bytes": placement.offchip.get(name, 0.0)}
            for name in sorted(set(placement.local) | set(placement.offchip))
        },
    }


def breakdown_doc(breakdown) -> dict:
    return {
        "components": [
            {
                "name": c.name,
                "freq_hz": c.freq_hz,
                "live_params": c.live_params,
                "memory_mw": c.memory_mw,
                "compute_mw": c.compute_mw,
                "local_Bps": c.local_bps,
                "offchip_Bps": c.offchip_bps,
            }
            for c in breakdown.components
        ],
        "memory_mw": breakdown.memory_mw,
        "compute_mw": breakdown.compute_mw,
        "total_mw": breakdown.total_mw,
        "compute_share": breakdown.compute_share,
        "compute_below_1pct": breakdown.compute_below_1pct,
    }
