"""Refractory integrate-and-fire neuron driven by a copy of the synaptic current.

The membrane integrates ``(i_in - i_leak) / c_mem`` from zero up to ``delta_v``,
emits a spike, resets and stays silent for ``t_ref``. Under a constant input
the firing rate has the closed form

    f = 1 / (t_ref + c_mem * delta_v / (i_in - i_leak)),

which is what the quasi-static simulation mode uses in place of spikes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CalibrationError, DomainError

DEFAULT_DELTA_V = 0.3


def calibrate_rate_points(f1, i1, f2, i2):
    """Solve ``1/f = t_ref + Q/i`` through two (rate, current) points.

    Returns:
        ``(t_ref, Q)`` with ``Q = c_mem * delta_v`` in coulombs.

    Raises:
        CalibrationError: if the points do not admit positive ``t_ref`` and ``Q``.
    """
    if not (0 < f1 < f2 and 0 < i1 < i2):
        raise CalibrationError("need 0 < f1 < f2 and 0 < i1 < i2")
    q = (1.0 / f1 - 1.0 / f2) / (1.0 / i1 - 1.0 / i2)
    t_ref = 1.0 / f1 - q / i1
    if not (q > 0 and t_ref > 0):
        raise CalibrationError(
            f"points imply t_ref={t_ref!r} s, Q={q!r} C; both must be > 0 "
            f"(f2={f2!r} Hz may exceed the refractory ceiling)"
        )
    return t_ref, q


_T_REF, _Q = calibrate_rate_points(100.0, 20e-9, 180.0, 40e-9)


@dataclass(frozen=True)
class NeuronParams:
    """Membrane parameters; defaults fire at 100 Hz for 20 nA and 180 Hz for 40 nA."""

    c_mem: float = _Q / DEFAULT_DELTA_V
    delta_v: float = DEFAULT_DELTA_V
    t_ref: float = _T_REF
    i_leak: float = 0.0

    def __post_init__(self):
        if not self.c_mem > 0:
            raise DomainError(f"c_mem must be > 0, got {self.c_mem}")
        if not self.delta_v > 0:
            raise DomainError(f"delta_v must be > 0, got {self.delta_v}")
        if not self.t_ref >= 0:
            raise DomainError(f"t_ref must be >= 0, got {self.t_ref}")
        if not self.i_leak >= 0:
            raise DomainError(f"i_leak must be >= 0, got {self.i_leak}")

    @classmethod
    def from_rate_points(cls, f1, i1, f2, i2, delta_v=DEFAULT_DELTA_V, i_leak=0.0):
        t_ref, q = calibrate_rate_points(f1, i1, f2, i2)
        return cls(c_mem=q / delta_v, delta_v=delta_v, t_ref=t_ref, i_leak=i_leak)

    @property
    def charge(self):
        """Charge needed to go from reset to threshold, ``c_mem * delta_v``."""
        return self.c_mem * self.delta_v


@dataclass(frozen=True)
class NeuronState:
    v_mem: float = 0.0
    refractory_until: float = float("-inf")
    t: float = 0.0
    spike_times: tuple[float, ...] = field(default_factory=tuple)


def integrate(s, i_in, p, dt):
    """Advance the membrane by ``dt`` under the constant current ``i_in``.

    Spike times inside the step are located by linear interpolation, which is
    exact for a constant input. Several spikes may fall in one step.

    Returns:
        ``(new_state, spikes)`` where ``spikes`` lists the spike times emitted
        in ``(s.t, s.t + dt]``.
    """
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt!r}")
    if i_in < 0:
        raise DomainError(f"i_in must be >= 0, got {i_in!r}")
    t_end = s.t + dt
    v = s.v_mem
    refr = s.refractory_until
    spikes = []
    net = i_in - p.i_leak
    t_cur = max(s.t, refr)
    while t_cur < t_end:
        if net <= 0.0:
            v = max(0.0, v + net * (t_end - t_cur) / p.c_mem)
            break
        t_hit = t_cur + (p.delta_v - v) * p.c_mem / net
        if t_hit > t_end:
            v = v + net * (t_end - t_cur) / p.c_mem
            break
        spikes.append(t_hit)
        v = 0.0
        refr = t_hit + p.t_ref
        t_cur = refr
    new = replace(s, v_mem=v, refractory_until=refr, t=t_end, spike_times=s.spike_times + tuple(spikes))
    return new, spikes


def rate_model(i_in, p):
    """Closed-form steady firing rate (Hz) for a constant input current."""
    net = i_in - p.i_leak
    if net <= 0:
        return 0.0
    return 1.0 / (p.t_ref + p.charge / net)


def instantaneous_rate(spike_times, t, window=0.5, estimator="isi"):
    """Firing-rate estimate at time ``t``.

    ``"isi"`` inverts the last inter-spike interval ending at or before ``t``;
    ``"window"`` counts spikes in ``(t - window, t]``. Both return 0 until two
    spikes exist.
    """
    if not window > 0:
        raise DomainError(f"window must be > 0, got {window!r}")
    return float(rates_at(np.asarray(spike_times, dtype=float), np.array([t], dtype=float),
                          window=window, estimator=estimator)[0])


def rates_at(spike_times, sample_times, window=0.5, estimator="isi"):
    """Vectorised :func:`instantaneous_rate` over an array of sample times."""
    spikes = np.asarray(spike_times, dtype=float)
    ts = np.asarray(sample_times, dtype=float)
    out = np.zeros(ts.shape)
    if spikes.size < 2:
        return out
    n_before = np.searchsorted(spikes, ts, side="right")
    if estimator == "isi":
        ok = n_before >= 2
        last = n_before[ok] - 1
        out[ok] = 1.0 / (spikes[last] - spikes[last - 1])
    elif estimator == "window":
        n_start = np.searchsorted(spikes, ts - window, side="right")
        out = np.where(n_before >= 2, (n_before - n_start) / window, 0.0)
    else:
        raise DomainError(f"unknown rate estimator {estimator!r}")
    return out
