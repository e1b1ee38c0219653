import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transducer_power import reference_text
from transducer_power.spec_model import (
    ComponentSpec,
    ConfigError,
    MemoryConfig,
    ModelSpec,
    StreamingParams,
    dump_model_spec,
    parse_model_spec,
    validate,
)

MINIMAL = """
schema_version: 1
components:
  - {name: Encoder, dense_params: 60700000}
  - {name: Predictor, dense_params: 8500000}
  - {name: Joiner, dense_params: 4000000}
streaming: {input_stride_ms: 40, chunk_ms: 160, token_rate_hz: 11.53}
"""


def test_reference_document_parses(spec):
    sizes = {c.name: c.dense_params for c in spec.components}
    assert sizes == {"Encoder": 60_700_000, "Predictor": 8_500_000, "Joiner": 4_000_000}
    assert spec.streaming.input_stride_ms == 40
    assert spec.streaming.chunk_ms == 160
    assert validate(spec).ok


def test_memory_defaults_applied():
    spec = parse_model_spec(MINIMAL)
    assert spec.memory == MemoryConfig()
    assert spec.memory.local_energy_pj_per_byte == 1.5
    assert spec.memory.offchip_energy_pj_per_byte == 120.0
    assert spec.memory.local_weight_capacity_bytes == 1.5 * 1024 * 1024
    enc = spec.component("Encoder")
    assert enc.bytes_per_param == 1.0
    assert enc.sparse_overhead == 1.0
    assert enc.min_params == 6_070_000
    assert enc.role == "encoder"


def test_chunk_not_multiple_of_stride():
    with pytest.raises(ConfigError, match="chunk not a multiple of stride"):
        parse_model_spec(MINIMAL.replace("chunk_ms: 160", "chunk_ms: 100"))


def test_syntax_error_reports_position():
    with pytest.raises(ConfigError, match=r"syntax error at line \d+, column \d+"):
        parse_model_spec("schema_version: 1\ncomponents: [\n  - a: b\n")


@pytest.mark.parametrize(
    "text, field",
    [
        (MINIMAL.replace("token_rate_hz: 11.53", "token_rate_hz: fast"), "token_rate_hz"),
        (MINIMAL.replace("dense_params: 4000000", "dense_params: 4000000, colour: red"), "colour"),
        (MINIMAL.replace("schema_version: 1", "schema_version: 2"), "schema_version"),
        (MINIMAL.replace("streaming: {input_stride_ms: 40, ", "streaming: {"), "input_stride_ms"),
    ],
)
def test_schema_violations_name_the_field(text, field):
    with pytest.raises(ConfigError, match=field):
        parse_model_spec(text)


def test_invariant_violation_names_component():
    text = MINIMAL.replace("{name: Joiner, dense_params: 4000000}",
                           "{name: Joiner, dense_params: 4000000, min_params: 5000000}")
    with pytest.raises(ConfigError, match="Joiner"):
        parse_model_spec(text)


def test_validate_valid_reference_is_empty(spec):
    assert validate(spec).violations == ()


def test_validate_min_params_above_dense(spec):
    comps = list(spec.components)
    comps[2] = dataclasses.replace(comps[2], min_params=comps[2].dense_params + 1)
    report = validate(dataclasses.replace(spec, components=tuple(comps)))
    assert len(report.violations) == 1
    assert "Joiner" in report.violations[0].where


def test_validate_negative_beta(spec):
    bad = dataclasses.replace(spec, streaming=dataclasses.replace(spec.streaming, joiner_beta=-1.0))
    report = validate(bad)
    assert [v.message for v in report.violations] == ["joiner_beta >= 0"]


def test_validate_collects_everything():
    spec = ModelSpec(
        components=(ComponentSpec("Encoder", 10, ops_factor=0.0), ComponentSpec("Encoder", 10)),
        streaming=StreamingParams(40, 100, -1),
        memory=MemoryConfig(local_energy_pj_per_byte=200.0),
    )
    messages = {v.message for v in validate(spec).violations}
    assert {"ops_factor > 0", "component names must be unique", "chunk not a multiple of stride",
            "token_rate_hz > 0", "local energy < off-chip energy"} <= messages


def test_empty_components_rejected():
    with pytest.raises(ConfigError, match="at least one component"):
        parse_model_spec(MINIMAL.split("components:")[0] + "components: []\n"
                         "streaming: {input_stride_ms: 40, chunk_ms: 160, token_rate_hz: 11.53}\n")


def test_custom_component_needs_role():
    text = MINIMAL.replace("{name: Joiner, dense_params: 4000000}", "{name: Adapter, dense_params: 1000}")
    with pytest.raises(ConfigError, match="role"):
        parse_model_spec(text)
    spec = parse_model_spec(text.replace("dense_params: 1000}", "dense_params: 1000, role: joiner}"))
    assert spec.component("Adapter").role == "joiner"


def test_round_trip_reference(spec):
    assert parse_model_spec(dump_model_spec(spec)) == spec


def test_parse_is_deterministic():
    assert parse_model_spec(reference_text()) == parse_model_spec(reference_text())


@st.composite
def model_specs(draw):
    n = draw(st.integers(1, 4))
    comps = []
    for i in range(n):
        dense = draw(st.integers(1, 10**9))
        comps.append(ComponentSpec(
            name=f"C{i}",
            dense_params=dense,
            bytes_per_param=draw(st.sampled_from([0.5, 1.0, 2.0, 4.0])),
            ops_factor=draw(st.floats(0.01, 100)),
            min_params=draw(st.integers(0, dense)),
            sparse_overhead=draw(st.floats(1.0, 3.0)),
            role=draw(st.sampled_from(["encoder", "predictor", "joiner"])),
        ))
    stride = draw(st.sampled_from([10.0, 20.0, 40.0, 60.0]))
    streaming = StreamingParams(stride, stride * draw(st.integers(1, 16)),
                                draw(st.floats(0.01, 50)), draw(st.floats(0, 20)))
    return ModelSpec(tuple(comps), streaming, MemoryConfig(energy_calibration=draw(st.floats(0.5, 2.0))))


@settings(max_examples=60, deadline=None)
@given(model_specs())
def test_round_trip_property(spec):
    assert validate(spec).ok
    assert parse_model_spec(dump_model_spec(spec)) == spec
