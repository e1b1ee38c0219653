"""Configuration and domain types for the transducer power model.

Everything downstream consumes the frozen dataclasses defined here. The
dataclasses do not validate themselves; :func:`validate` collects every
violated invariant so a bad document can be reported in one pass, and
:func:`parse_model_spec` refuses to return an invalid spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping, Optional

import yaml

SCHEMA_VERSION = 1

ROLES = ("encoder", "predictor", "joiner")
MIB = 1024 * 1024


class ConfigError(ValueError):
    """Raised when a configuration document cannot be turned into a ModelSpec."""


@dataclass(frozen=True)
class ComponentSpec:
    name: str
    dense_params: int
    bytes_per_param: float = 1.0
    ops_factor: float = 1.0
    min_params: Optional[int] = None
    sparse_overhead: float = 1.0
    # which invocation frequency drives this component; inferred from the
    # name for Encoder/Predictor/Joiner, required for custom components
    role: Optional[str] = None

    def __post_init__(self):
        if self.role is None and self.name.lower() in ROLES:
            object.__setattr__(self, "role", self.name.lower())
        if self.min_params is None and isinstance(self.dense_params, int):
            object.__setattr__(self, "min_params", int(round(0.1 * self.dense_params)))

    def stored_bytes(self, live_params: int) -> float:
        overhead = self.sparse_overhead if live_params < self.dense_params else 1.0
        return live_params * self.bytes_per_param * overhead


@dataclass(frozen=True)
class ComponentState:
    spec: ComponentSpec
    live_params: int

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def stored_bytes(self) -> float:
        return self.spec.stored_bytes(self.live_params)

    def with_live(self, live_params: int) -> "ComponentState":
        return replace(self, live_params=int(live_params))


@dataclass(frozen=True)
class StreamingParams:
    input_stride_ms: float
    chunk_ms: float
    token_rate_hz: float
    joiner_beta: float = 0.0

    @property
    def frame_rate_hz(self) -> float:
        return 1000.0 / self.input_stride_ms

    @property
    def frames_per_chunk(self) -> int:
        return int(round(self.chunk_ms / self.input_stride_ms))


@dataclass(frozen=True)
class MemoryConfig:
    local_weight_capacity_bytes: float = 1.5 * MIB
    local_energy_pj_per_byte: float = 1.5
    offchip_energy_pj_per_byte: float = 120.0
    energy_calibration: float = 1.0
    local_latency_ns_per_64B: float = 10.0
    offchip_latency_ns_per_64B: float = 60.0
    compute_efficiency_gops_per_mw: float = 5.0
    peak_compute_gops: float = 512.0


@dataclass(frozen=True)
class UtteranceSpec:
    """Generative description of an utterance for the decode simulator.

    ``process`` is ``regular`` (tokens evenly spaced at ``token_rate_hz``) or
    ``poisson``.
    """

    duration_s: float
    token_rate_hz: float
    process: str = "regular"


@dataclass(frozen=True)
class CurveEntry:
    """Accuracy-curve parameters attached to a component in the config document."""

    component: str
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    dataset: str = "default"
    zero_sensitivity: bool = False


@dataclass(frozen=True)
class ModelSpec:
    components: tuple
    streaming: StreamingParams
    memory: MemoryConfig = field(default_factory=MemoryConfig)
    # initial live parameter counts; components not listed start dense
    live_params: Mapping[str, int] = field(default_factory=dict)
    utterance: Optional[UtteranceSpec] = None
    curves: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "curves", tuple(self.curves))
        object.__setattr__(self, "live_params", dict(self.live_params))

    def __hash__(self):
        return hash((self.components, self.streaming, self.memory,
                     tuple(sorted(self.live_params.items())), self.utterance, self.curves))

    def component(self, name: str) -> ComponentSpec:
        for comp in self.components:
            if comp.name == name:
                return comp
        raise KeyError(name)

    def initial_states(self) -> tuple:
        return tuple(
            ComponentState(c, int(self.live_params.get(c.name, c.dense_params)))
            for c in self.components
        )


@dataclass(frozen=True)
class Violation:
    where: str
    message: str

    def __str__(self):
        return f"{self.where}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "\n".join(str(v) for v in self.violations) or "valid"


def _positive(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x) and x > 0


def validate(spec: ModelSpec) -> ValidationReport:
    out = []

    def bad(where, msg):
        out.append(Violation(where, msg))

    if not spec.components:
        bad("components", "at least one component is required")
    seen = set()
    for comp in spec.components:
        where = f"component {comp.name!r}"
        if comp.name in seen:
            bad(where, "component names must be unique")
        seen.add(comp.name)
        if not isinstance(comp.dense_params, int) or comp.dense_params <= 0:
            bad(where, "dense_params > 0")
        if not _positive(comp.bytes_per_param):
            bad(where, "bytes_per_param > 0")
        if not _positive(comp.ops_factor):
            bad(where, "ops_factor > 0")
        if comp.min_params is None or not (0 <= comp.min_params <= comp.dense_params):
            bad(where, "0 <= min_params <= dense_params")
        if not (isinstance(comp.sparse_overhead, (int, float)) and comp.sparse_overhead >= 1):
            bad(where, "sparse_overhead >= 1")
        if comp.role not in ROLES:
            bad(where, f"role must be one of {', '.join(ROLES)}")

    names = {c.name for c in spec.components}
    for name, live in spec.live_params.items():
        if name not in names:
            bad(f"live_params[{name!r}]", "unknown component")
            continue
        comp = spec.component(name)
        lo = comp.min_params if comp.min_params is not None else 0
        if not (lo <= live <= comp.dense_params):
            bad(f"component {name!r}", "min_params <= live_params <= dense_params")

    s = spec.streaming
    for attr in ("input_stride_ms", "chunk_ms", "token_rate_hz"):
        if not _positive(getattr(s, attr)):
            bad("streaming", f"{attr} > 0")
    if _positive(s.input_stride_ms) and _positive(s.chunk_ms):
        ratio = s.chunk_ms / s.input_stride_ms
        if ratio < 1 - 1e-9 or abs(ratio - round(ratio)) > 1e-9:
            bad("streaming", "chunk not a multiple of stride")
    if not (isinstance(s.joiner_beta, (int, float)) and s.joiner_beta >= 0):
        bad("streaming", "joiner_beta >= 0")

    m = spec.memory
    for f in fields(MemoryConfig):
        if not _positive(getattr(m, f.name)):
            bad("memory", f"{f.name} > 0")
    if m.local_energy_pj_per_byte >= m.offchip_energy_pj_per_byte:
        bad("memory", "local energy < off-chip energy")
    if m.local_latency_ns_per_64B >= m.offchip_latency_ns_per_64B:
        bad("memory", "local latency < off-chip latency")

    if spec.utterance is not None:
        u = spec.utterance
        if not _positive(u.duration_s):
            bad("utterance", "duration_s > 0")
        if not (isinstance(u.token_rate_hz, (int, float)) and u.token_rate_hz >= 0):
            bad("utterance", "token_rate_hz >= 0")
        if u.process not in ("regular", "poisson"):
            bad("utterance", "process must be 'regular' or 'poisson'")

    for entry in spec.curves:
        if entry.component not in names:
            bad(f"curve for {entry.component!r}", "unknown component")
        if not entry.zero_sensitivity and entry.c < 0:
            bad(f"curve for {entry.component!r}", "c >= 0")
    return ValidationReport(tuple(out))


# --- document <-> ModelSpec ------------------------------------------------

_COMPONENT_FIELDS = {f.name for f in fields(ComponentSpec)} | {"live_params"}
_STREAMING_FIELDS = {f.name for f in fields(StreamingParams)}
_MEMORY_FIELDS = {f.name for f in fields(MemoryConfig)}
_UTTERANCE_FIELDS = {f.name for f in fields(UtteranceSpec)}
_CURVE_FIELDS = {f.name for f in fields(CurveEntry)}
_TOP_FIELDS = {"schema_version", "components", "streaming", "memory", "utterance", "curves"}

_INT_FIELDS = {"dense_params", "min_params", "live_params"}


def _check_keys(section: str, data: Any, allowed: set, required: set = frozenset()):
    if not isinstance(data, dict):
        raise ConfigError(f"{section}: expected a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{section}: unknown field {unknown[0]!r}")
    missing = sorted(required - set(data))
    if missing:
        raise ConfigError(f"{section}: missing required field {missing[0]!r}")


def _coerce(section: str, data: dict, kinds: Mapping[str, type]) -> dict:
    out = {}
    for key, value in data.items():
        kind = kinds.get(key, float)
        if kind is str:
            if not isinstance(value, str):
                raise ConfigError(f"{section}: field {key!r} must be a string")
        elif kind is bool:
            if not isinstance(value, bool):
                raise ConfigError(f"{section}: field {key!r} must be true/false")
        elif kind is int:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
                raise ConfigError(f"{section}: field {key!r} must be an integer")
            value = int(value)
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{section}: field {key!r} must be a number")
            value = float(value)
        out[key] = value
    return out


def spec_from_dict(doc: Any) -> ModelSpec:
    """Build (and validate) a ModelSpec from an already-loaded document."""
    if not isinstance(doc, dict):
        raise ConfigError("document: expected a mapping at top level")
    _check_keys("document", doc, _TOP_FIELDS, {"schema_version", "components", "streaming"})
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported value {doc['schema_version']!r}")

    if not isinstance(doc["components"], list):
        raise ConfigError("components: expected a list")
    components, live = [], {}
    for i, raw in enumerate(doc["components"]):
        section = f"components[{i}]"
        _check_keys(section, raw, _COMPONENT_FIELDS, {"name", "dense_params"})
        kinds = {k: int for k in _INT_FIELDS} | {"name": str, "role": str}
        vals = _coerce(section, raw, kinds)
        if "live_params" in vals:
            live[vals["name"]] = vals.pop("live_params")
        components.append(ComponentSpec(**vals))

    _check_keys("streaming", doc["streaming"], _STREAMING_FIELDS,
                {"input_stride_ms", "chunk_ms", "token_rate_hz"})
    streaming = StreamingParams(**_coerce("streaming", doc["streaming"], {}))

    memory = MemoryConfig()
    if doc.get("memory") is not None:
        _check_keys("memory", doc["memory"], _MEMORY_FIELDS)
        memory = MemoryConfig(**_coerce("memory", doc["memory"], {}))

    utterance = None
    if doc.get("utterance") is not None:
        _check_keys("utterance", doc["utterance"], _UTTERANCE_FIELDS, {"duration_s", "token_rate_hz"})
        utterance = UtteranceSpec(**_coerce("utterance", doc["utterance"], {"process": str}))

    curves = []
    raw_curves = doc.get("curves") or []
    if not isinstance(raw_curves, list):
        raise ConfigError("curves: expected a list")
    for i, raw in enumerate(raw_curves):
        section = f"curves[{i}]"
        _check_keys(section, raw, _CURVE_FIELDS, {"component"})
        vals = _coerce(section, raw, {"component": str, "dataset": str, "zero_sensitivity": bool})
        if not vals.get("zero_sensitivity") and not {"a", "b", "c"} <= set(vals):
            raise ConfigError(f"{section}: missing required field 'a', 'b' or 'c'")
        curves.append(CurveEntry(**vals))

    spec = ModelSpec(tuple(components), streaming, memory, live, utterance, tuple(curves))
    report = validate(spec)
    if not report.ok:
        raise ConfigError("invariant violation: " + "; ".join(str(v) for v in report.violations))
    return spec


def parse_model_spec(text: str) -> ModelSpec:
    """Parse a YAML configuration document into a validated ModelSpec."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"syntax error{where}: {getattr(exc, 'problem', exc)}") from exc
    return spec_from_dict(doc)


def load_model_spec(path) -> ModelSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_model_spec(fh.read())


def spec_to_dict(spec: ModelSpec) -> dict:
    comps = []
    for c in spec.components:
        d = {
            "name": c.name,
            "dense_params": c.dense_params,
            "bytes_per_param": c.bytes_per_param,
            "ops_factor": c.ops_factor,
            "min_params": c.min_params,
            "sparse_overhead": c.sparse_overhead,
            "role": c.role,
        }
        if c.name in spec.live_params:
            d["live_params"] = spec.live_params[c.name]
        comps.append(d)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "components": comps,
        "streaming": {f.name: getattr(spec.streaming, f.name) for f in fields(StreamingParams)},
        "memory": {f.name: getattr(spec.memory, f.name) for f in fields(MemoryConfig)},
    }
    if spec.utterance is not None:
        doc["utterance"] = {f.name: getattr(spec.utterance, f.name) for f in fields(UtteranceSpec)}
    if spec.curves:
        doc["curves"] = [{f.name: getattr(e, f.name) for f in fields(CurveEntry)} for e in spec.curves]
    return doc


def dump_model_spec(spec: ModelSpec) -> str:
    return yaml.safe_dump(spec_to_dict(spec), sort_keys=False)
