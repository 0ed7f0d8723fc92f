import io
import json
from dataclasses import replace

import numpy as np
import pytest

from homeostat import engine
from homeostat.agc import LlcParams
from homeostat.builtin import load_builtin
from homeostat.errors import ConfigError
from homeostat.scenario import (
    CSV_COLUMNS, Scenario, load_scenario, scenario_from_dict, trace_from_csv, trace_to_csv,
    trace_to_csv_text, with_param,
)


@pytest.fixture(scope="module")
def fig4():
    return load_builtin("fig4")


def test_json_round_trip(fig4):
    again = scenario_from_dict(json.loads(fig4.to_json()))
    assert again == fig4
    assert again.digest() == fig4.digest()


def test_load_from_file(tmp_path, fig4):
    p = tmp_path / "s.json"
    p.write_text(fig4.to_json(indent=1))
    assert load_scenario(p) == fig4


def test_minimal_document_uses_defaults():
    sc = scenario_from_dict({"duration": 2.0})
    assert sc == Scenario(duration=2.0)


@pytest.mark.parametrize("doc, field", [
    ({"duration": 1.0, "bogus": 1}, "<root>"),
    ({"duration": 1.0, "llc": {"vg": 1.0}}, "llc"),
    ({"duration": -1.0}, "duration"),
    ({"duration": 1.0, "mode": "slow"}, "mode"),
    ({"duration": 1.0, "neuron": {"c_mem": 0}}, "neuron.c_mem"),
    ({"duration": 1.0, "drive": {"dc_inputs": [{"label": "a", "steps": [[0, -1e-9]]}]}},
     "drive.dc_inputs.0.steps.0.1"),
    ({"duration": 1.0, "drive": {"dc_inputs": [{"label": "a", "steps": [[1, 0], [0, 0]]}]}},
     "drive.dc_inputs"),
    ({"duration": 1.0, "llc": {"v_ref_h": 2.5}}, "llc"),
    ({"duration": 1.0, "initial": {"reset_at_start": False}}, "initial.v_thr"),
    ({"duration": 1.0, "sample_interval": 1e-6}, "sample_interval"),
])
def test_invalid_documents_name_the_field(doc, field):
    with pytest.raises(ConfigError) as info:
        scenario_from_dict(doc)
    assert info.value.field == field


def test_spike_input_needs_one_source():
    doc = {"duration": 1.0, "drive": {"spike_inputs": [{"label": "s", "weight": 1e-9}]}}
    with pytest.raises(ConfigError, match="exactly one"):
        scenario_from_dict(doc)


def test_poisson_train_statistics():
    doc = {"duration": 1.0, "seed": 3,
           "drive": {"spike_inputs": [{"label": "p", "weight": 1e-9,
                                       "poisson": {"rate": 200.0, "start": 10.0, "stop": 60.0}}]}}
    times = np.array(scenario_from_dict(doc).drive.spike_inputs[0].times)
    assert times.min() >= 10.0 and times.max() < 60.0
    assert np.all(np.diff(times) > 0)
    # count is Poisson(10000): 5 sigma is 500
    assert abs(times.size - 10000) < 500


def test_with_param(fig4):
    sc = with_param(fig4, "llc.v_g", 1.4)
    assert sc.llc.v_g == 1.4 and sc.llc.c_f == fig4.llc.c_f
    assert with_param(fig4, "duration", 5.0).duration == 5.0
    with pytest.raises(ConfigError):
        with_param(fig4, "llc.nope", 1.0)
    with pytest.raises(ConfigError):
        with_param(fig4, "nope", 1.0)
    with pytest.raises(ConfigError) as info:
        with_param(fig4, "neuron.c_mem", -1.0)
    assert info.value.field == "neuron.c_mem"


def test_csv_header_and_events(fig4):
    tr = engine.run(replace(fig4, duration=30.0))
    text = trace_to_csv_text(tr)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert "# event,20,input,i_w=6e-10\n" in text
    assert text.count("\n# event,") == len(tr.events)


def test_csv_round_trip_is_bit_exact(fig4):
    tr = engine.run(replace(fig4, duration=30.0))
    back = trace_from_csv(io.StringIO(trace_to_csv_text(tr)))
    for a, b in zip(tr.channels(), back.channels()):
        np.testing.assert_array_equal(a, b)
    assert back.events == tr.events


def test_csv_round_trip_keeps_nan():
    # zero synaptic current has no defined gate voltage
    tr = engine.run(Scenario(duration=1.0, llc=LlcParams(mode="fixed-slope")))
    assert np.isnan(tr.v_syn).all()
    buf = io.StringIO()
    trace_to_csv(tr, buf)
    back = trace_from_csv(io.StringIO(buf.getvalue()))
    np.testing.assert_array_equal(back.v_syn, tr.v_syn)


def test_csv_rejects_foreign_header():
    with pytest.raises(ValueError, match="header"):
        trace_from_csv(io.StringIO("a,b\n1,2\n"))


def test_trace_helpers(fig4):
    tr = engine.run(replace(fig4, duration=30.0))
    assert tr.window(10, 20).sum() == 1001
    assert [e.t for e in tr.events_of("input")] == [0.0, 20.0]
