import dataclasses

import pytest

import transducer_power as tp
from transducer_power.curvefit import AccuracyCurve

# published per-component table: size (M params), memory mW, compute mW, Hz
REFERENCE = {
    "Encoder": dict(size=60.70, memory=47.78, compute=0.80, hz=6.25),
    "Predictor": dict(size=8.50, memory=12.33, compute=0.03, hz=11.53),
    "Joiner": dict(size=4.00, memory=57.13, compute=0.19, hz=113.50),
}

CALIBRATION = 1.049

# synthetic accuracy curves with the published shape (same as the bundled
# reference_plan.yaml)
PAPER_CURVES = {
    "Encoder": AccuracyCurve(-0.05, 0.5, 3.48),
    "Predictor": AccuracyCurve(-0.1, -3.35, 3.545),
    "Joiner": AccuracyCurve(-0.5, -3.5, 3.556),
}


@pytest.fixture
def spec():
    return tp.reference_spec()


@pytest.fixture
def calibrated(spec):
    return dataclasses.replace(spec.memory, energy_calibration=CALIBRATION)


@pytest.fixture
def states(spec):
    return spec.initial_states()


@pytest.fixture
def profile(spec):
    return tp.invocation_profile(spec.streaming)
