import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homeostat.errors import CalibrationError
from homeostat.neuron import (
    NeuronParams,
    NeuronState,
    calibrate_rate_points,
    instantaneous_rate,
    integrate,
    rate_model,
    rates_at,
)

# solution of 1/f = t_ref + Q/i through (100 Hz, 20 nA) and (180 Hz, 40 nA)
T_REF = 1.0 / 900.0
Q = 1.6e-9 / 9.0


def simulate(i_in, p, dt, t_end):
    s = NeuronState()
    spikes = []
    for _ in range(int(round(t_end / dt))):
        s, new = integrate(s, i_in, p, dt)
        spikes.extend(new)
    return s, np.array(spikes)


def test_calibration_two_point_solution():
    t_ref, q = calibrate_rate_points(100.0, 20e-9, 180.0, 40e-9)
    assert t_ref == pytest.approx(T_REF, rel=1e-12)
    assert q == pytest.approx(Q, rel=1e-12)
    p = NeuronParams.from_rate_points(100.0, 20e-9, 180.0, 40e-9)
    assert rate_model(20e-9, p) == pytest.approx(100.0, rel=1e-9)
    assert rate_model(40e-9, p) == pytest.approx(180.0, rel=1e-9)


def test_calibration_round_trip():
    p = NeuronParams(c_mem=2e-10, delta_v=0.5, t_ref=2e-3)
    f1, f2 = rate_model(5e-9, p), rate_model(50e-9, p)
    t_ref, q = calibrate_rate_points(f1, 5e-9, f2, 50e-9)
    assert t_ref == pytest.approx(2e-3, rel=1e-12)
    assert q == pytest.approx(1e-10, rel=1e-12)


def test_calibration_infeasible():
    # two rates whose implied ceiling is below the faster one
    with pytest.raises(CalibrationError):
        calibrate_rate_points(100.0, 20e-9, 1000.0, 21e-9)
    with pytest.raises(CalibrationError):
        calibrate_rate_points(180.0, 20e-9, 100.0, 40e-9)


def test_defaults_are_calibrated():
    p = NeuronParams()
    assert p.t_ref == pytest.approx(T_REF, rel=1e-12)
    assert p.charge == pytest.approx(Q, rel=1e-12)
    assert p.delta_v == 0.3


def test_rate_model_limits():
    p = NeuronParams(i_leak=1e-9)
    assert rate_model(0.5e-9, p) == 0.0
    assert rate_model(1e-9, p) == 0.0
    assert rate_model(1e3, p) == pytest.approx(1.0 / p.t_ref, rel=1e-6)


@given(st.floats(0, 1e-6), st.floats(0, 1e-6))
def test_rate_model_monotone(a, b):
    p = NeuronParams()
    lo, hi = sorted((a, b))
    assert rate_model(lo, p) <= rate_model(hi, p) <= 1.0 / p.t_ref


def test_balanced_drive_holds_membrane():
    p = NeuronParams(i_leak=2e-9)
    s, spikes = integrate(NeuronState(v_mem=0.1), 2e-9, p, 1e-3)
    assert s.v_mem == 0.1 and spikes == []


def test_leak_clamps_at_zero():
    p = NeuronParams(i_leak=5e-9)
    s, _ = integrate(NeuronState(v_mem=0.01), 0.0, p, 1.0)
    assert s.v_mem == 0.0


def test_calibrated_rate_at_20nA():
    _, spikes = simulate(20e-9, NeuronParams(), 1e-5, 1.0)
    assert len(spikes) == pytest.approx(100, abs=0.5)


def test_spike_times_independent_of_step():
    p = NeuronParams()
    _, fine = simulate(20e-9, p, 1e-6, 0.1)
    _, coarse = simulate(20e-9, p, 2e-4, 0.1)
    assert len(fine) == len(coarse)
    assert np.max(np.abs(fine - coarse)) < 1e-4 / 2


@pytest.mark.parametrize("target", [10.0, 50.0, 100.0, 250.0, 500.0])
def test_empirical_rate_matches_model(target):
    p = NeuronParams()
    i_in = p.charge / (1.0 / target - p.t_ref)
    _, spikes = simulate(i_in, p, 5e-5, 2.0)
    emp = (len(spikes) - 1) / (spikes[-1] - spikes[0])
    assert emp == pytest.approx(rate_model(i_in, p), rel=0.01)


def test_refractory_gaps_and_monotone_rate():
    p = NeuronParams()
    _, s20 = simulate(20e-9, p, 1e-4, 0.5)
    _, s40 = simulate(40e-9, p, 1e-4, 0.5)
    assert np.all(np.diff(s40) >= p.t_ref * (1 - 1e-12))
    assert len(s40) > len(s20)


def test_multiple_spikes_in_one_step():
    p = NeuronParams(t_ref=0.0)
    s, spikes = integrate(NeuronState(), 1e-6, p, 1e-3)
    assert len(spikes) > 1
    assert np.all(np.diff(spikes) > 0)
    assert 0 <= s.v_mem <= p.delta_v


def test_instantaneous_rate_isi():
    train = np.arange(0, 1.0, 0.01)
    assert instantaneous_rate(train, 0.5) == pytest.approx(100.0, rel=1e-9)
    assert instantaneous_rate([], 0.5) == 0.0
    assert instantaneous_rate([0.1], 0.5) == 0.0


def test_windowed_rate_on_jittered_train():
    rng = np.random.default_rng(7)
    train = np.sort(np.arange(0.005, 3.0, 0.01) + rng.uniform(-3e-3, 3e-3, 300))
    est = instantaneous_rate(train, 2.0, window=0.5, estimator="window")
    assert est == pytest.approx(100.0, rel=0.10)


def test_rates_at_vectorised_matches_scalar():
    train = np.cumsum(np.full(50, 0.013))
    ts = np.linspace(0, 0.8, 17)
    vec = rates_at(train, ts, estimator="isi")
    assert vec.tolist() == [instantaneous_rate(train, t) for t in ts]
