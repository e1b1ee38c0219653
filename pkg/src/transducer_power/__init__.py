"""Power, memory-traffic and RTF model for on-device streaming transducer ASR,
with a sensitivity-ratio compression planner."""

from importlib import resources

from .curvefit import AccuracyCurve, SizeWerPoint, accuracy_sensitivity, fit_exponential, predict_wer
from .energy import (
    PowerBreakdown,
    compute_power,
    estimate_rtf,
    evaluate,
    memory_power,
    memory_traffic,
    total_power,
)
from .placement import Placement, allocate_local, placement_power_delta
from .planner import CompressionPlan, plan_compression, power_sensitivity, sensitivity_ratio
from .pruner import PruneState, adam_prune_step, sparsity_schedule
from .spec_model import (
    ComponentSpec,
    ComponentState,
    ConfigError,
    MemoryConfig,
    ModelSpec,
    StreamingParams,
    dump_model_spec,
    load_model_spec,
    parse_model_spec,
    validate,
)
from .workload import (
    InvocationProfile,
    UtteranceProfile,
    calibrate_joiner_beta,
    invocation_profile,
    simulate_decode,
)

__version__ = "0.1.0"


def data_text(name: str) -> str:
    return resources.files(__package__).joinpath("data", name).read_text(encoding="utf-8")


def reference_text() -> str:
    """The bundled configuration document for the reference LibriSpeech model."""
    return data_text("reference.yaml")


def reference_spec() -> ModelSpec:
    return parse_model_spec(reference_text())
