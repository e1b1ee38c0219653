"""Invocation frequencies of transducer components.

The analytic profile follows the streaming decode structure: the encoder
runs once per chunk, the predictor once per emitted token, and the joiner
once per frame (the blank that closes it) plus ``joiner_beta`` calls per
emitted token. :func:`simulate_decode` enacts the same loop event by
event so the closed form can be checked against counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spec_model import StreamingParams, UtteranceSpec


@dataclass(frozen=True)
class InvocationProfile:
    encoder_hz: float
    predictor_hz: float
    joiner_hz: float
    frame_rate_hz: float

    def for_role(self, role: str) -> float:
        return getattr(self, f"{role}_hz")


def invocation_profile(p: StreamingParams) -> InvocationProfile:
    frame_rate = 1000.0 / p.input_stride_ms
    return InvocationProfile(
        encoder_hz=1000.0 / p.chunk_ms,
        predictor_hz=p.token_rate_hz,
        joiner_hz=frame_rate + p.joiner_beta * p.token_rate_hz,
        frame_rate_hz=frame_rate,
    )


def calibrate_joiner_beta(observed_joiner_hz: float, frame_rate_hz: float, token_rate_hz: float) -> float:
    """Extra joiner calls per token needed to reproduce an observed joiner rate."""
    if observed_joiner_hz < frame_rate_hz:
        raise ValueError("observed joiner rate is below the frame rate; no beta >= 0 reproduces it")
    if token_rate_hz <= 0:
        if observed_joiner_hz == frame_rate_hz:
            return 0.0
        raise ValueError("token rate is zero but joiner rate exceeds the frame rate: no solution")
    return (observed_joiner_hz - frame_rate_hz) / token_rate_hz


@dataclass(frozen=True)
class UtteranceProfile:
    duration_s: float
    token_times: tuple

    def __post_init__(self):
        object.__setattr__(self, "token_times", tuple(float(t) for t in self.token_times))
        prev = -math.inf
        for t in self.token_times:
            if not (0.0 <= t <= self.duration_s):
                raise ValueError(f"token time {t} outside [0, {self.duration_s}]")
            if t <= prev:
                raise ValueError("token times must be strictly increasing")
            prev = t

    @classmethod
    def regular(cls, duration_s: float, token_rate_hz: float) -> "UtteranceProfile":
        if token_rate_hz <= 0:
            return cls(duration_s, ())
        n = int(math.floor(duration_s * token_rate_hz + 1e-9))
        return cls(duration_s, tuple(min(k / token_rate_hz, duration_s) for k in range(1, n + 1)))

    @classmethod
    def poisson(cls, duration_s: float, token_rate_hz: float, seed: int) -> "UtteranceProfile":
        rng = np.random.default_rng(seed)
        n = rng.poisson(token_rate_hz * duration_s) if token_rate_hz > 0 else 0
        times = np.sort(rng.uniform(0.0, duration_s, size=n))
        return cls(duration_s, tuple(np.unique(times)))

    @classmethod
    def from_spec(cls, spec: UtteranceSpec, seed: int = 0) -> "UtteranceProfile":
        if spec.process == "poisson":
            return cls.poisson(spec.duration_s, spec.token_rate_hz, seed)
        return cls.regular(spec.duration_s, spec.token_rate_hz)


@dataclass(frozen=True)
class InvocationCounts:
    encoder: int
    predictor: int
    joiner: int
    frames: int
    duration_s: float

    def rates(self) -> InvocationProfile:
        d = self.duration_s
        return InvocationProfile(self.encoder / d, self.predictor / d, self.joiner / d, self.frames / d)


def simulate_decode(
    p: StreamingParams,
    u: UtteranceProfile,
    seed: Optional[int] = 0,
    expansion: str = "bernoulli",
) -> InvocationCounts:
    """Greedy streaming decode, counted per component.

    Each complete chunk costs one encoder call. Every frame in it gets one
    joiner call that ends on blank; every token emitted in the frame adds a
    predictor call and a random number of joiner calls (its own emission
    plus expansions) with mean ``joiner_beta``. ``expansion`` picks that
    distribution: ``bernoulli`` (floor(beta) plus a coin flip on the
    fraction, minimum variance) or ``geometric``.
    """
    if expansion not in ("bernoulli", "geometric"):
        raise ValueError(f"unknown expansion model {expansion!r}")
    rng = np.random.default_rng(seed)
    chunk_s = p.chunk_ms / 1000.0
    n_chunks = int(math.floor(u.duration_s / chunk_s + 1e-9))
    n_frames = n_chunks * p.frames_per_chunk
    horizon = n_chunks * chunk_s

    # tokens past the last complete chunk are never decoded
    times = np.asarray(u.token_times, dtype=float)
    emitted = int(np.count_nonzero(times < horizon - 1e-12)) if n_frames else 0

    beta = p.joiner_beta
    if emitted == 0 or beta == 0:
        token_calls = 0
    elif expansion == "bernoulli":
        whole = math.floor(beta)
        token_calls = whole * emitted + int(np.count_nonzero(rng.random(emitted) < beta - whole))
    elif beta >= 1:
        token_calls = int(rng.geometric(1.0 / beta, size=emitted).sum())
    else:
        # numpy's geometric has support 1..; shift to 0.. to keep the mean at beta
        token_calls = int((rng.geometric(1.0 / (1.0 + beta), size=emitted) - 1).sum())

    return InvocationCounts(
        encoder=n_chunks,
        predictor=emitted,
        joiner=n_frames + token_calls,
        frames=n_frames,
        duration_s=u.duration_s,
    )
