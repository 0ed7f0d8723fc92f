"""Multi-rate simulation engine.

Time is cut at every drive change, reset pulse and sample instant. Each piece
is split into equal steps no longer than the mode's base step, and the compiled
kernel advances all state through them in a fixed order: gain current from
``V_THR``, exact synapse update, neuron, comparator, leakage cell. ``V_THR`` is
frozen within a step; it moves by at most a few nanovolts per step at the
slopes of interest.

The fast mode drops spike generation (the rate channel comes from the closed
form) and lengthens the base step to ``min(tau_s / 10, dt_fast_max)``, which
keeps kilosecond homeostatic runs cheap.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import kernel as K
from .agc import comparator, slopes
from .dpi import steady_state, tau_s, total_weight_current
from .errors import HomeostatError, NonPhysicalError
from .neuron import rates_at
from .scenario import FAST, SPIKING, Event, Trace, with_param


LOCK_TOLERANCE = 0.01
LOCK_SAMPLES = 5

# boundaries closer than this fraction of the base step are merged
_MERGE_FRACTION = 1e-6


def base_step(sc):
    """Largest engine step for the scenario's mode (s)."""
    if sc.mode == SPIKING:
        return sc.dt_neuron
    return min(tau_s(sc.dpi, sc.device) / 10.0, sc.dt_fast_max)


def _boundaries(sc, h_base):
    """Sorted boundary times with their roles.

    Returns ``(times, is_sample, is_input, is_reset)``. Drive and reset times
    are kept exact; sample instants that fall within a hair of one are folded
    into it.
    """
    n_samples = int(math.floor(sc.duration / sc.sample_interval * (1 + 1e-12))) + 1
    pts = {}
    for k in range(n_samples):
        pts.setdefault(k * sc.sample_interval, set()).add("sample")
    for t in sc.drive.event_times():
        if 0.0 <= t < sc.duration:
            pts.setdefault(t, set()).add("input")
    pts.setdefault(0.0, set()).add("input")
    for t in sc.resets:
        if t < sc.duration:
            pts.setdefault(t, set()).add("reset")
    pts.setdefault(sc.duration, set())

    tol = _MERGE_FRACTION * min(h_base, sc.sample_interval)
    merged = []
    for t in sorted(pts):
        roles = pts[t]
        if merged and t - merged[-1][0] <= tol:
            prev_t, prev_roles = merged[-1]
            # exact drive and reset times win over nominal sample instants
            exact = roles & {"input", "reset"} and not prev_roles & {"input", "reset"}
            merged[-1] = (t if exact else prev_t, prev_roles | roles)
        else:
            merged.append((t, set(roles)))
    times = np.array([t for t, _ in merged])
    return (times,
            np.array(["sample" in r for _, r in merged]),
            np.array(["input" in r for _, r in merged]),
            np.array(["reset" in r for _, r in merged]))


def _fresh_stats(i_syn):
    st = np.zeros(K.STATS_SIZE)
    st[K.S_MIN] = i_syn
    st[K.S_MAX] = i_syn
    st[K.S_BAD_T] = math.nan
    return st


def run(sc, backend=None):
    """Simulate ``sc`` and return its sampled :class:`Trace`.

    Identical scenarios produce bit-identical traces on a given backend.

    Raises:
        NonPhysicalError: if an exponent exceeds ``device.exp_cap``; the
            message carries the simulation time.
    """
    advance = K.get_advance(backend)
    d, ll, cmp = sc.device, sc.llc, sc.comparator
    spiking = sc.mode == SPIKING
    h_base = base_step(sc)
    tau = tau_s(sc.dpi, d)
    try:
        up, down = slopes(ll, d)
    except NonPhysicalError as exc:
        raise NonPhysicalError(str(exc), t=0.0) from exc
    drift = ll.i_parasitic / ll.c_f
    if sc.dpi.v_thr_link:
        i0_gain, gain_slope = d.I_0_gain, d.kappa / d.U_T
    else:
        i0_gain, gain_slope = sc.dpi.fixed_i_gain, 0.0
    nrn = sc.neuron

    times, is_sample, is_input, is_reset = _boundaries(sc, h_base)

    v_thr0 = ll.v_ref_m if sc.initial.reset_at_start else sc.initial.v_thr
    i_w = total_weight_current(sc.drive, 0.0)
    if sc.initial.i_syn is None:
        i_gain0 = i0_gain * math.exp(gain_slope * (d.V_dd - v_thr0))
        i_syn0 = steady_state(i_w, i_gain0, sc.dpi.I_tau)
    else:
        i_syn0 = sc.initial.i_syn
    state = np.zeros(K.STATE_SIZE)
    state[K.I_SYN] = i_syn0
    state[K.V_THR] = v_thr0
    state[K.SW] = float(comparator(i_syn0, False, cmp))
    state[K.REFR] = -math.inf

    n_rows = int(is_sample.sum())
    rows = np.empty((n_rows, 4))  # t, i_syn, v_thr, sw
    lo = np.empty(n_rows)
    hi = np.empty(n_rows)
    sat = np.zeros(n_rows, dtype=bool)
    spikes = np.empty(1024 if spiking else 1)
    n_spk = 0
    events = []
    if sc.initial.reset_at_start:
        events.append(Event(0.0, "reset", "start"))
    stats = _fresh_stats(i_syn0)
    violations = 0
    steps = 0
    row = 0

    for j, t in enumerate(times):
        t = float(t)
        if is_reset[j]:
            state[K.V_THR] = ll.v_ref_m
            events.append(Event(t, "reset", ""))
        if is_input[j]:
            i_w = total_weight_current(sc.drive, t)
            events.append(Event(t, "input", f"i_w={i_w!r}"))
        if is_sample[j]:
            rows[row] = (t, state[K.I_SYN], state[K.V_THR], state[K.SW])
            lo[row] = stats[K.S_MIN]
            hi[row] = stats[K.S_MAX]
            sat[row] = stats[K.S_SAT] != 0.0
            violations += int(stats[K.S_VIOL])
            stats = _fresh_stats(state[K.I_SYN])
            row += 1
        if j + 1 == len(times):
            break
        span = float(times[j + 1]) - t
        n = max(1, math.ceil(span / h_base * (1 - 1e-12)))
        h = span / n
        t0 = t
        while n:
            status, done, n_spk = advance(
                state, n, h, t0, i_w, spiking, spikes, n_spk, stats,
                i0_gain, gain_slope, d.V_dd, d.exp_cap, sc.dpi.I_tau, tau,
                cmp.i_ref, cmp.hysteresis, up, down, drift,
                nrn.c_mem, nrn.delta_v, nrn.t_ref, nrn.i_leak)
            steps += done
            if status == K.OVERFLOW:
                raise NonPhysicalError("gain exponent exceeds cap", t=float(stats[K.S_BAD_T]))
            n -= done
            t0 += done * h
            if status == K.SPIKES_FULL:
                spikes = np.concatenate([spikes, np.empty(spikes.size)])
    violations += int(stats[K.S_VIOL])

    t_s, i_syn, v_thr, sw = rows.T.copy()
    if sc.dpi.v_thr_link:
        i_gain = d.I_0_gain * np.exp(gain_slope * (d.V_dd - v_thr))
    else:
        i_gain = np.full(n_rows, sc.dpi.fixed_i_gain)
    spike_times = spikes[:n_spk].copy() if spiking else None
    if spiking:
        rate = rates_at(spike_times, t_s, window=sc.rate_window, estimator=sc.rate_estimator)
    else:
        net = i_syn - nrn.i_leak
        with np.errstate(divide="ignore"):
            rate = np.where(net > 0, 1.0 / (nrn.t_ref + nrn.charge / np.where(net > 0, net, 1.0)), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        v_syn = np.where(i_syn > 0, d.V_dd - (d.U_T / d.kappa) * np.log(i_syn / d.I_0_gain), np.nan)

    events.extend(_lock_events(t_s, i_syn, cmp.i_ref))
    events.sort(key=lambda e: e.t)
    return Trace(t=t_s, i_syn=i_syn, v_thr=v_thr, i_gain=i_gain, sw=sw.astype(np.int8), rate=rate,
                 v_syn=v_syn, i_syn_lo=lo, i_syn_hi=hi, saturated=sat, spike_times=spike_times,
                 events=tuple(events), feedback_violations=violations, steps=steps,
                 backend=K.BACKEND if backend is None else backend)


def _lock_events(t, i_syn, i_ref):
    """Lock entries (first of ``LOCK_SAMPLES`` consecutive in-band samples) and exits."""
    inside = np.abs(i_syn - i_ref) / i_ref < LOCK_TOLERANCE
    out = []
    locked = False
    run_start = None
    run_len = 0
    for k, ok in enumerate(inside):
        if ok:
            if run_len == 0:
                run_start = k
            run_len += 1
            if not locked and run_len >= LOCK_SAMPLES:
                locked = True
                out.append(Event(float(t[run_start]), "lock", ""))
        else:
            run_len = 0
            if locked:
                locked = False
                out.append(Event(float(t[k]), "unlock", ""))
    return out


@dataclass(frozen=True)
class Summary:
    """Condensed outcome of one run in a sweep."""

    value: object
    recovery_time: float | None = None
    lock_band: float | None = None
    final_rate: float | None = None
    feedback_violations: int = 0
    error: str | None = None
    trace: Trace | None = None


def recovery_time(trace, after=None):
    """Seconds from the last input change (or ``after``) to the next lock entry.

    Returns None if the loop never re-locks.
    """
    if after is None:
        inputs = [e.t for e in trace.events_of("input") if e.t > 0]
        if not inputs:
            return None
        after = inputs[-1]
    locks = [e.t for e in trace.events_of("lock") if e.t >= after]
    return locks[0] - after if locks else None


def lock_band(trace, t0=None, t1=None, relative=True):
    """Peak-to-peak ``I_syn`` ripple over ``[t0, t1]``, seen at every engine step.

    Defaults to the second half of the last locked stretch.
    """
    if t0 is None:
        locks = trace.events_of("lock")
        if not locks:
            return None
        start = locks[-1].t
        unlocks = [e.t for e in trace.events_of("unlock") if e.t > start]
        end = unlocks[0] if unlocks else float(trace.t[-1])
        t0, t1 = 0.5 * (start + end), end
    # a sample's extremes cover the interval ending at it, so skip the first
    m = (trace.t > t0) & (trace.t <= t1)
    if not m.any():
        return None
    band = float(trace.i_syn_hi[m].max() - trace.i_syn_lo[m].min())
    if relative:
        band /= float(np.median(trace.i_syn[m]))
    return band


def final_rate(trace, fraction=0.05):
    """Mean rate channel over the last ``fraction`` of the run."""
    t_end = float(trace.t[-1])
    m = trace.t >= t_end - fraction * t_end
    return float(trace.rate[m].mean())


def summarize(trace, value=None, keep_trace=False):
    return Summary(value=value, recovery_time=recovery_time(trace), lock_band=lock_band(trace),
                   final_rate=final_rate(trace), feedback_violations=trace.feedback_violations,
                   trace=trace if keep_trace else None)


def _sweep_one(args):
    base, path, value, keep, backend = args
    try:
        tr = run(with_param(base, path, value), backend=backend)
    except HomeostatError as exc:
        return Summary(value=value, error=f"{type(exc).__name__}: {exc}")
    return summarize(tr, value, keep)


def sweep_workers():
    env = os.environ.get("HOMEOSTAT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep(base, path, values, keep_traces=False, workers=None, backend=None):
    """Run ``base`` once per value of the dotted parameter ``path``.

    A failing value yields a :class:`Summary` with ``error`` set; the rest of
    the sweep carries on. Results are returned in the order of ``values``.
    """
    jobs = [(base, path, v, keep_traces, backend) for v in values]
    workers = min(workers or sweep_workers(), len(jobs)) or 1
    if workers == 1:
        return [_sweep_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_one, jobs))


@dataclass(frozen=True)
class EquivalenceReport:
    max_rel_i_syn: float
    rate_rms_hz: float
    rate_max_abs_hz: float
    spiking: Trace
    fast: Trace


def run_fast_equivalence(sc, backend=None):
    """Run ``sc`` in both modes and compare them on the common sample grid.

    The spiking run is the reference. Rate samples are compared only once the
    spiking estimator has two spikes to work with.
    """
    if sc.duration > 300:
        raise HomeostatError("equivalence runs are limited to 300 s of simulated time")
    ts = run(replace(sc, mode=SPIKING), backend=backend)
    tf = run(replace(sc, mode=FAST), backend=backend)
    rel = np.abs(tf.i_syn - ts.i_syn) / np.maximum(np.abs(ts.i_syn), np.finfo(float).tiny)
    first = ts.spike_times[1] if ts.spike_times.size > 1 else math.inf
    m = ts.t >= first
    diff = tf.rate[m] - ts.rate[m]
    rms = float(np.sqrt(np.mean(diff ** 2))) if diff.size else 0.0
    mx = float(np.abs(diff).max()) if diff.size else 0.0
    return EquivalenceReport(max_rel_i_syn=float(rel.max()), rate_rms_hz=rms, rate_max_abs_hz=mx,
                             spiking=ts, fast=tf)
