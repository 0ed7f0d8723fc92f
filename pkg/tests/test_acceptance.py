"""End-to-end acceptance checks, one test per criterion.

Each test appends a PASS/FAIL line to the session report printed after the
run, then asserts.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from homeostat import engine
from homeostat.agc import slopes
from homeostat.builtin import load_builtin
from homeostat.device import DeviceParams, calibrate_vg_for_slope, igain_from_vthr
from homeostat.dpi import DpiParams, DpiState, step_exact, tau_s
from homeostat.scenario import with_param

TARGET_HZ = 100.0


class Runs:
    """Lazily computed acceptance runs, shared across criteria."""

    def __init__(self):
        self._cache = {}
        self.wall = {}

    def get(self, key, fn):
        if key not in self._cache:
            t0 = time.perf_counter()
            self._cache[key] = fn()
            self.wall[key] = time.perf_counter() - t0
        return self._cache[key]

    def fig4(self):
        return self.get("fig4", lambda: engine.run(load_builtin("fig4")))

    def fig4_double_slope(self):
        def go():
            sc = load_builtin("fig4")
            ll, d = sc.llc, sc.device
            up, _ = slopes(ll, d)
            v_g = calibrate_vg_for_slope(2 * up, ll.c_f, ll.v_ref_l, ll.v_ref_m, d)
            return engine.run(replace(sc, llc=replace(ll, v_g=v_g)))
        return self.get("fig4_2s", go)

    def fig4_spiking(self, dt):
        return self.get(("fig4_spiking", dt),
                        lambda: engine.run(replace(load_builtin("fig4"), mode="spiking", dt_neuron=dt)))

    def table1(self):
        return self.get("table1", lambda: engine.run(load_builtin("table1")))

    def long25k(self):
        return self.get("long25k", lambda: engine.run(load_builtin("long25k")))

    def fig5(self):
        def go():
            spec = load_builtin("fig5")
            return engine.sweep(spec.base, spec.path, spec.values, keep_traces=True)
        return self.get("fig5", go)


@pytest.fixture(scope="module")
def runs():
    return Runs()


def record(report, n, ok, detail):
    report.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def settle_time(tr, t_step, t_end, tol=5.0):
    """Seconds after ``t_step`` until the rate stays within ``tol`` of target through ``t_end``."""
    m = (tr.t > t_step) & (tr.t < t_end)
    t, off = tr.t[m], np.abs(tr.rate[m] - TARGET_HZ) >= tol
    if not off.any() or off[-1]:
        return None
    return float(t[np.flatnonzero(off)[-1] + 1] - t_step)


def test_criterion_1_step_response(runs, acceptance_report):
    tr = runs.fig4()
    wall = runs.wall["fig4"]
    locked = tr.rate[tr.window(10.0, 20.0)]
    peak = float(tr.rate[tr.window(20.0, 120.0)].max())
    dip = float(tr.rate[tr.window(120.0, 200.0)].min())
    up_settle = settle_time(tr, 20.0, 120.0)
    down_settle = settle_time(tr, 120.0, 200.0)
    checks = [
        wall < 30.0,
        np.all(np.abs(locked - TARGET_HZ) <= 5.0),
        abs(peak - 180.0) <= 18.0,
        up_settle is not None and abs(up_settle - 60.0) <= 20.0,
        dip < TARGET_HZ - 5.0,
        down_settle is not None and abs(down_settle - 60.0) <= 20.0,
    ]
    ok = record(acceptance_report, 1, all(checks),
                f"locked {locked.min():.2f}-{locked.max():.2f} Hz, peak {peak:.2f} Hz, "
                f"settle {up_settle:.2f} s, dip {dip:.2f} Hz, settle {down_settle:.2f} s, wall {wall:.2f} s")
    assert ok, checks


def test_criterion_2_table1_ramp(runs, acceptance_report):
    tr = runs.table1()
    sc = load_builtin("table1")
    leak = slopes(sc.llc, sc.device)[1] * sc.llc.c_f
    ramp = -np.polyfit(tr.t, tr.v_thr, 1)[0]
    end_to_end = (tr.v_thr[0] - tr.v_thr[-1]) / (tr.t[-1] - tr.t[0])
    rel = max(abs(ramp / 1.2e-6 - 1), abs(end_to_end / 1.2e-6 - 1))
    ok = record(acceptance_report, 2, rel < 1e-3 and abs(leak / 1.2e-18 - 1) < 1e-9,
                f"leak {leak:.4g} A, ramp {ramp:.10g} V/s, rel err {rel:.2g}")
    assert ok


def test_criterion_3_long_time_scale(runs, acceptance_report):
    tr = runs.long25k()
    wall = runs.wall["long25k"]
    rec = engine.recovery_time(tr)
    ok = record(acceptance_report, 3, rec is not None and abs(rec / 25000.0 - 1) <= 0.10 and wall < 300,
                f"recovery {rec:.1f} s, wall {wall:.2f} s")
    assert ok


def test_criterion_4_fig5_monotonic(runs, acceptance_report):
    res = runs.fig5()
    spec = load_builtin("fig5")
    rising = [slopes(with_param(spec.base, spec.path, v).llc, spec.base.device)[0] for v in spec.values]
    order = np.argsort(rising)
    rec = [res[i].recovery_time for i in order]
    rates = [res[i].final_rate for i in order]
    strictly = all(r is not None for r in rec) and all(b < a for a, b in zip(rec, rec[1:]))
    relocked = all(abs(r - TARGET_HZ) <= 5.0 for r in rates)
    span = max(rising) / min(rising)
    ok = record(acceptance_report, 4, strictly and relocked and span >= 10 * (1 - 1e-9),
                f"slope span x{span:.3g}, recovery {[round(r) for r in rec]} s, "
                f"final {[round(r, 2) for r in rates]} Hz")
    assert ok


def rk4(i0, i_w, i_gain, p, d, t_end, n):
    tau = tau_s(p, d)
    ss = i_w * i_gain / p.I_tau
    f = lambda y: (ss - y) / tau
    h = t_end / n
    out = [i0]
    y = i0
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + h / 2 * k1)
        k3 = f(y + h / 2 * k2)
        k4 = f(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y)
    return np.array(out)


def test_criterion_5_dpi_oracle(acceptance_report):
    d, p = DeviceParams(), DpiParams()
    tau = tau_s(p, d)
    i_gain, i_w = igain_from_vthr(1.46, d), 0.45e-9
    n_per_tau = 1000
    ref = rk4(2e-9, i_w, i_gain, p, d, 10 * tau, 10 * n_per_tau)
    s, got = DpiState(2e-9), [2e-9]
    for _ in range(10):
        s = step_exact(s, i_w, i_gain, p, d, tau)
        got.append(s.i_syn)
    rk_err = float(np.max(np.abs(np.array(got) / ref[::n_per_tau] - 1)))

    semi = 0.0
    for dt1, dt2 in [(1e-4, 3e-3), (tau, 2 * tau), (0.37e-3, 5.1e-2)]:
        whole = step_exact(DpiState(7e-9), i_w, i_gain, p, d, dt1 + dt2).i_syn
        split = step_exact(step_exact(DpiState(7e-9), i_w, i_gain, p, d, dt1), i_w, i_gain, p, d, dt2).i_syn
        semi = max(semi, abs(split / whole - 1))
    ok = record(acceptance_report, 5, rk_err < 1e-6 and semi < 1e-12,
                f"RK4 rel err {rk_err:.2g}, semigroup rel err {semi:.2g}")
    assert ok


def test_criterion_6_weight_ratio(acceptance_report):
    d, p = DeviceParams(), DpiParams()
    worst = 0.0
    for v_thr in np.linspace(1.41, 1.51, 20):
        g = igain_from_vthr(v_thr, d)
        a = step_exact(DpiState(0.0), 0.3e-9, g, p, d, 50 * tau_s(p, d)).i_syn
        b = step_exact(DpiState(0.0), 0.1e-9, g, p, d, 50 * tau_s(p, d)).i_syn
        worst = max(worst, abs(a / b / 3.0 - 1))
    ok = record(acceptance_report, 6, worst < 1e-12, f"worst ratio error {worst:.2g} over 20 points, 100 mV")
    assert ok


def test_criterion_7_feedback_sign(runs, acceptance_report):
    traces = {
        "fig4": runs.fig4(), "fig4_2s": runs.fig4_double_slope(),
        "fig4_spiking": runs.fig4_spiking(1e-5), "fig4_spiking_half": runs.fig4_spiking(5e-6),
        "table1": runs.table1(), "long25k": runs.long25k(),
    }
    for i, r in enumerate(runs.fig5()):
        traces[f"fig5_{i}"] = r.trace
    violations = {k: tr.feedback_violations for k, tr in traces.items()}
    d = DeviceParams()
    grid = np.linspace(0.0, d.V_dd, 10001)
    g = np.array([igain_from_vthr(v, d) for v in grid])
    monotone = bool(np.all(np.diff(g) < 0))
    for tr in traces.values():
        order = np.argsort(tr.v_thr, kind="stable")
        v, ig = tr.v_thr[order], tr.i_gain[order]
        distinct = np.diff(v) > 0
        monotone &= bool(np.all(np.diff(ig)[distinct] < 0))
    total = sum(violations.values())
    ok = record(acceptance_report, 7, total == 0 and monotone,
                f"{total} sign violations over {len(traces)} runs, i_gain decreasing: {monotone}")
    assert ok, violations


def test_criterion_8_ripple_scaling(runs, acceptance_report):
    # fig4's locked stretches sit at the same step-lattice phase at s and 2s,
    # so their bands compare like with like
    a, b = runs.fig4(), runs.fig4_double_slope()
    pairs = [(engine.lock_band(a, 10.0, 20.0), engine.lock_band(b, 10.0, 20.0)),
             (engine.lock_band(a), engine.lock_band(b))]
    ratios = [hi / lo for lo, hi in pairs]
    ok = record(acceptance_report, 8, all(abs(r / 2 - 1) <= 0.2 for r in ratios),
                f"band ratios {[round(r, 4) for r in ratios]} "
                f"(bands {[f'{lo:.3g}/{hi:.3g}' for lo, hi in pairs]})")
    assert ok


def test_criterion_9_determinism_and_convergence(runs, acceptance_report):
    sc = load_builtin("fig4")
    same_fast = engine.run(sc).digest() == runs.fig4().digest()
    coarse = runs.fig4_spiking(1e-5)
    same_spiking = engine.run(replace(sc, mode="spiking", dt_neuron=1e-5)).digest() == coarse.digest()
    fine = runs.fig4_spiking(5e-6)
    last_second = lambda tr: float(tr.rate[tr.t >= tr.t[-1] - 1.0].mean())
    delta = abs(last_second(coarse) - last_second(fine))
    ok = record(acceptance_report, 9, same_fast and same_spiking and delta < 0.5,
                f"bit-identical fast {same_fast}, spiking {same_spiking}; "
                f"final rate shift on halving dt_neuron {delta:.3g} Hz")
    assert ok
