"""Exponential accuracy law ``wer = exp(a * size + b) + c``.

Sizes are in millions of live parameters, WER in percent. Fitting uses a
small Levenberg-Marquardt loop (Marquardt-scaled damping) rather than a
general optimizer so the iteration limits and initialisation are fixed and
reproducible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

N_PARAMS = 3
MAX_ITER = 200
REL_TOL = 1e-10


class FitError(ValueError):
    pass


class SizeWerPoint(NamedTuple):
    size: float
    wer: float


@dataclass(frozen=True)
class AccuracyCurve:
    a: float
    b: float
    c: float
    adj_r2: float = math.nan
    n_points: int = 0
    size_unit: str = "millions of parameters"
    converged: bool = True
    iterations: int = 0

    @classmethod
    def flat(cls, wer: float = 0.0) -> "AccuracyCurve":
        """A curve with zero accuracy sensitivity everywhere."""
        return cls(a=0.0, b=-math.inf, c=wer)

    @property
    def is_flat(self) -> bool:
        return self.a == 0.0 or self.b == -math.inf


def predict_wer(curve: AccuracyCurve, size: float) -> float:
    if curve.b == -math.inf:
        return curve.c
    return math.exp(curve.a * size + curve.b) + curve.c


def accuracy_sensitivity(curve: AccuracyCurve, size: float) -> float:
    """|dWER/dsize| in WER points per million parameters."""
    if curve.b == -math.inf or curve.a == 0.0:
        return 0.0
    return abs(curve.a) * math.exp(curve.a * size + curve.b)


def _model(theta, x):
    a, b, c = theta
    return np.exp(a * x + b) + c


def _jacobian(theta, x):
    a, b, _ = theta
    e = np.exp(a * x + b)
    return np.column_stack([x * e, e, np.ones_like(x)])


def _initial_guess(x, y):
    c0 = 0.95 * float(y.min())
    # fit ln(wer - c0) = a*size + b
    a0, b0 = np.polyfit(x, np.log(y - c0), 1)
    return np.array([a0, b0, c0])


def adjusted_r2(y, fitted, p: int = N_PARAMS) -> float:
    n = len(y)
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0 or n - p - 1 <= 0:
        return math.nan
    r2 = 1.0 - ss_res / ss_tot
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)


def fit_exponential(points: Iterable) -> AccuracyCurve:
    pts = sorted(SizeWerPoint(float(s), float(w)) for s, w in points)
    if len(pts) < N_PARAMS + 1:
        raise FitError(f"insufficient points: need at least {N_PARAMS + 1}, got {len(pts)}")
    x = np.array([p.size for p in pts])
    y = np.array([p.wer for p in pts])
    if np.any(x <= 0) or np.any(y < 0) or np.any(y > 100):
        raise FitError("points need size > 0 and 0 <= wer <= 100")
    if len(np.unique(x)) < 3:
        raise FitError("degenerate data: need at least 3 distinct sizes")

    theta = _initial_guess(x, y)
    theta[2] = max(theta[2], 0.0)
    r = _model(theta, x) - y
    sse = float(r @ r)
    lam = 1e-3
    converged = False
    it = 0
    while it < MAX_ITER:
        it += 1
        J = _jacobian(theta, x)
        JtJ = J.T @ J
        g = J.T @ r
        if sse == 0.0 or not np.any(g):
            converged = True
            break
        accepted = False
        while lam < 1e16:
            A = JtJ + lam * np.diag(np.diag(JtJ))
            try:
                step = np.linalg.solve(A, -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            trial = theta + step
            trial[2] = max(trial[2], 0.0)
            r_new = _model(trial, x) - y
            sse_new = float(r_new @ r_new)
            if np.isfinite(sse_new) and sse_new < sse:
                accepted = True
                break
            lam *= 10
        if not accepted:
            # no descent direction left at any damping: a (local) minimum
            converged = True
            break
        rel_change = (sse - sse_new) / sse
        theta, r, sse = trial, r_new, sse_new
        lam = max(lam / 10, 1e-12)
        if rel_change < REL_TOL:
            converged = True
            break

    a, b, c = (float(v) for v in theta)
    return AccuracyCurve(
        a=a, b=b, c=c,
        adj_r2=adjusted_r2(y, _model(theta, x)),
        n_points=len(pts),
        converged=converged,
        iterations=it,
    )


def read_points_csv(path) -> dict:
    """Read ``component, size_millions, wer_percent[, dataset_tag]`` rows.

    Returns ``{(component, dataset): [SizeWerPoint, ...]}``. A header row is
    recognised and skipped.
    """
    groups: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if lineno == 1 and row[0].strip().lower() == "component":
                continue
            if len(row) not in (3, 4):
                raise FitError(f"line {lineno}: expected 3 or 4 columns, got {len(row)}")
            comp = row[0].strip()
            dataset = row[3].strip() if len(row) == 4 and row[3].strip() else "default"
            try:
                size, wer = float(row[1]), float(row[2])
            except ValueError:
                raise FitError(f"line {lineno}: size and wer must be numbers") from None
            if size <= 0 or not 0 <= wer <= 100:
                raise FitError(f"line {lineno}: need size > 0 and 0 <= wer <= 100")
            groups.setdefault((comp, dataset), []).append(SizeWerPoint(size, wer))
    if not groups:
        raise FitError("no data rows")
    return groups


def prediction_rows(curve: AccuracyCurve, sizes) -> list:
    return [(s, predict_wer(curve, s), accuracy_sensitivity(curve, s)) for s in sizes]
