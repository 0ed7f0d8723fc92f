"""Log-domain DPI synapse integrator.

The synapse output obeys a first-order linear ODE,

    tau_s * dI_syn/dt + I_syn = I_w * I_gain / I_tau,    tau_s = C_DPI * U_T / (kappa * I_tau),

where ``I_w`` is the superposition of all weight currents afferent to the
neuron. For inputs held constant over a step the update is the exact
exponential solution, so the step size only matters at input discontinuities.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace

from .errors import DomainError


@dataclass(frozen=True)
class DpiParams:
    """Integrator parameters.

    Attributes:
        C_DPI: Integration capacitance (F).
        I_tau: Time-constant bias current (A).
        v_thr_link: If False, the gain current is held at ``fixed_i_gain``
            instead of following the control voltage.
        fixed_i_gain: Gain current used when ``v_thr_link`` is False (A).
    """

    C_DPI: float = 1e-12
    I_tau: float = 1e-11
    v_thr_link: bool = True
    fixed_i_gain: float | None = None

    def __post_init__(self):
        if not self.C_DPI > 0:
            raise DomainError(f"C_DPI must be > 0, got {self.C_DPI}")
        if not self.I_tau > 0:
            raise DomainError(f"I_tau must be > 0, got {self.I_tau}")
        if not self.v_thr_link and not (self.fixed_i_gain is not None and self.fixed_i_gain > 0):
            raise DomainError("fixed_i_gain must be > 0 when v_thr_link is False")


@dataclass(frozen=True)
class DpiState:
    i_syn: float = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class DcInput:
    """Piecewise-constant weight current.

    ``steps`` holds ``(t_start, current)`` pairs with strictly increasing
    start times; the current is zero before the first start time.
    """

    label: str
    steps: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple((float(t), float(i)) for t, i in self.steps))
        starts = [t for t, _ in self.steps]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise DomainError(f"{self.label}: step times must be strictly increasing")
        if any(i < 0 for _, i in self.steps):
            raise DomainError(f"{self.label}: currents must be >= 0")

    def value_at(self, t):
        k = bisect.bisect_right([s for s, _ in self.steps], t)
        return self.steps[k - 1][1] if k else 0.0


@dataclass(frozen=True)
class SpikeInput:
    """Train of rectangular weight-current pulses, each active on ``[t_k, t_k + pulse)``."""

    label: str
    weight: float
    times: tuple[float, ...]
    pulse: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if self.weight < 0:
            raise DomainError(f"{self.label}: weight must be >= 0")
        if not self.pulse > 0:
            raise DomainError(f"{self.label}: pulse duration must be > 0")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise DomainError(f"{self.label}: spike times must be strictly increasing")
        # pulse ends computed once so activity and event times round identically
        object.__setattr__(self, "_ends", tuple(t + self.pulse for t in self.times))

    def active_count(self, t):
        # pulses may overlap when the inter-spike gap is shorter than the pulse
        hi = bisect.bisect_right(self.times, t)
        lo = bisect.bisect_right(self._ends, t)
        return hi - lo


@dataclass(frozen=True)
class WeightDrive:
    dc_inputs: tuple[DcInput, ...] = field(default_factory=tuple)
    spike_inputs: tuple[SpikeInput, ...] = field(default_factory=tuple)

    def event_times(self):
        """Sorted, de-duplicated times at which the summed current may change."""
        ts = set()
        for dc in self.dc_inputs:
            ts.update(t for t, _ in dc.steps)
        for sp in self.spike_inputs:
            ts.update(sp.times)
            ts.update(sp._ends)
        return sorted(ts)


def tau_s(p, d):
    """Integrator time constant ``C_DPI * U_T / (kappa * I_tau)`` in seconds."""
    return p.C_DPI * d.U_T / (d.kappa * p.I_tau)


def steady_state(i_w, i_gain, i_tau):
    if not i_tau > 0:
        raise DomainError(f"i_tau must be > 0, got {i_tau!r}")
    if i_w < 0 or i_gain < 0:
        raise DomainError("i_w and i_gain must be >= 0")
    return i_w * i_gain / i_tau


def total_weight_current(w, t):
    """Sum of every weight current active at time ``t``."""
    total = 0.0
    for dc in w.dc_inputs:
        total += dc.value_at(t)
    for sp in w.spike_inputs:
        total += sp.weight * sp.active_count(t)
    return total


def step_exact(s, i_w, i_gain, p, d, dt):
    """Advance the integrator by ``dt`` with ``i_w`` and ``i_gain`` held constant."""
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt!r}")
    i_ss = steady_state(i_w, i_gain, p.I_tau)
    i_syn = i_ss + (s.i_syn - i_ss) * math.exp(-dt / tau_s(p, d))
    return replace(s, i_syn=i_syn, t=s.t + dt)


def v_syn_diagnostic(i_syn, d):
    """Node voltage reported alongside ``I_syn`` for trace comparison only.

    Uses the gain-law mapping, so it falls as the current grows. Returns NaN
    for a zero current.
    """
    if i_syn <= 0:
        return math.nan
    return d.V_dd - (d.U_T / d.kappa) * math.log(i_syn / d.I_0_gain)
