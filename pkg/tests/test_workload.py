import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transducer_power.spec_model import StreamingParams
from transducer_power.workload import (
    UtteranceProfile,
    calibrate_joiner_beta,
    invocation_profile,
    simulate_decode,
)

BETA = (113.5 - 25.0) / 11.53  # calibrated from the reference joiner rate


def test_beta_calibration_from_reference():
    beta = calibrate_joiner_beta(113.5, 25.0, 11.53)
    assert beta == pytest.approx(7.676, abs=5e-4)
    assert beta == pytest.approx(BETA, rel=1e-15)


def test_beta_zero_and_degenerate():
    assert calibrate_joiner_beta(25.0, 25.0, 11.53) == 0.0
    with pytest.raises(ValueError):
        calibrate_joiner_beta(113.5, 25.0, 0.0)
    with pytest.raises(ValueError):
        calibrate_joiner_beta(20.0, 25.0, 11.53)


def test_profile_reference():
    p = invocation_profile(StreamingParams(40, 160, 11.53, BETA))
    assert p.encoder_hz == 6.25
    assert p.predictor_hz == 11.53
    assert p.frame_rate_hz == 25.0
    assert p.joiner_hz == pytest.approx(113.5, rel=1e-12)


def test_profile_stride_20():
    p = invocation_profile(StreamingParams(20, 160, 11.53, 7.676))
    assert p.frame_rate_hz == 50.0
    assert p.joiner_hz == pytest.approx(50 + 7.676 * 11.53, rel=1e-12)
    assert p.joiner_hz == pytest.approx(138.5, abs=0.05)


def test_blank_only_stream():
    p = invocation_profile(StreamingParams(40, 160, 1e-300, BETA))
    assert p.joiner_hz == pytest.approx(25.0, abs=1e-12)


def test_beta_reproduces_stride_rate():
    beta = calibrate_joiner_beta(97.0, 50.0, 3.0)
    assert invocation_profile(StreamingParams(20, 80, 3.0, beta)).joiner_hz == pytest.approx(97.0)


@given(
    stride=st.sampled_from([10.0, 20.0, 40.0, 60.0]),
    mult=st.integers(1, 16),
    rate=st.floats(0.1, 40),
    beta=st.floats(0, 20),
)
def test_profile_homogeneity(stride, mult, rate, beta):
    base = invocation_profile(StreamingParams(stride, stride * mult * 2, rate, beta))
    half_stride = invocation_profile(StreamingParams(stride / 2, stride * mult * 2, rate, beta))
    assert half_stride.joiner_hz - base.joiner_hz == pytest.approx(base.frame_rate_hz, rel=1e-9)
    assert half_stride.predictor_hz == base.predictor_hz
    half_chunk = invocation_profile(StreamingParams(stride, stride * mult, rate, beta))
    assert half_chunk.encoder_hz == pytest.approx(2 * base.encoder_hz, rel=1e-12)
    assert base.encoder_hz <= base.frame_rate_hz <= base.joiner_hz


def test_simulate_160s_matches_profile():
    p = StreamingParams(40, 160, 11.53, BETA)
    counts = simulate_decode(p, UtteranceProfile.regular(160.0, 11.53), seed=0)
    ref = invocation_profile(p)
    rates = counts.rates()
    for role in ("encoder", "predictor", "joiner"):
        assert rates.for_role(role) == pytest.approx(ref.for_role(role), rel=0.02)


@pytest.mark.parametrize("seed", range(20))
def test_simulate_160s_any_seed(seed):
    p = StreamingParams(40, 160, 11.53, BETA)
    rates = simulate_decode(p, UtteranceProfile.poisson(160.0, 11.53, seed), seed=seed).rates()
    ref = invocation_profile(p)
    assert rates.encoder_hz == ref.encoder_hz
    # Poisson token count: sd ~ sqrt(1845)/1845 = 2.3%; allow 4 sd
    assert rates.predictor_hz == pytest.approx(ref.predictor_hz, rel=0.1)


def test_geometric_expansion_mean():
    p = StreamingParams(40, 160, 11.53, BETA)
    u = UtteranceProfile.regular(1600.0, 11.53)
    rates = [simulate_decode(p, u, seed=s, expansion="geometric").rates().joiner_hz for s in range(10)]
    assert sum(rates) / len(rates) == pytest.approx(113.5, rel=0.01)


def test_blank_only_utterance_counts():
    counts = simulate_decode(StreamingParams(40, 160, 11.53, BETA), UtteranceProfile(16.0, ()), seed=1)
    assert (counts.encoder, counts.predictor, counts.joiner) == (100, 0, 400)


def test_single_chunk():
    counts = simulate_decode(StreamingParams(40, 160, 11.53, BETA), UtteranceProfile(0.16, (0.05,)), seed=1)
    assert counts.encoder == 1
    assert counts.frames == 4
    assert counts.predictor == 1


def test_partial_chunk_ignored():
    counts = simulate_decode(StreamingParams(40, 160, 1.0, 0.0), UtteranceProfile(0.5, (0.1, 0.49)), seed=0)
    assert counts.encoder == 3
    assert counts.predictor == 1  # token at 0.49 s lies past the last complete chunk (0.48 s)
    assert counts.joiner == 12


def test_simulate_deterministic():
    p = StreamingParams(40, 160, 11.53, BETA)
    u = UtteranceProfile.poisson(30.0, 11.53, seed=3)
    assert simulate_decode(p, u, seed=9) == simulate_decode(p, u, seed=9)


@settings(deadline=None, max_examples=50)
@given(duration=st.floats(0.2, 60), rate=st.floats(0, 20), beta=st.floats(0, 10), seed=st.integers(0, 1000))
def test_simulate_counts_invariants(duration, rate, beta, seed):
    p = StreamingParams(40, 160, max(rate, 0.1), beta)
    counts = simulate_decode(p, UtteranceProfile.poisson(duration, rate, seed), seed=seed)
    assert counts.encoder == math.floor(duration / 0.16 + 1e-9)
    assert counts.frames == 4 * counts.encoder
    assert 0 <= counts.predictor
    assert counts.joiner >= counts.frames


def test_utterance_validation():
    with pytest.raises(ValueError):
        UtteranceProfile(1.0, (0.5, 0.4))
    with pytest.raises(ValueError):
        UtteranceProfile(1.0, (1.5,))
