"""Subthreshold device equations.

Two exponential laws feed the rest of the simulator:

* the virtual p-type gain current that scales the synapse,
  ``I_gain = I_0_gain * exp(kappa * (V_dd - V_THR) / U_T)``, which falls as the
  control voltage rises;
* the channel current of the leakage-cell p-FET, in the bulk-referenced
  subthreshold form
  ``I_SD = I_0_llc * exp(kappa * (V_dd - V_G) / U_T)
  * (exp(-(V_dd - V_S) / U_T) - exp(-(V_dd - V_D) / U_T))``.

All functions are pure and operate on plain floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import CalibrationError, DomainError, NonPhysicalError

# Operating point used to pin the default gain-law scale: the loop locks with
# V_THR = 1.46 V while 0.3 nA of weight current yields I_syn = 20 nA through the
# default 10 pA time-constant bias.
_LOCK_V_THR = 1.46
_LOCK_I_W = 0.3e-9
_LOCK_I_SYN = 20e-9
_DEFAULT_I_TAU = 1e-11


def _default_i0_gain(u_t=0.02585, kappa=0.7, v_dd=1.8):
    i_gain = _LOCK_I_SYN * _DEFAULT_I_TAU / _LOCK_I_W
    return i_gain / math.exp(kappa * (v_dd - _LOCK_V_THR) / u_t)


@dataclass(frozen=True)
class DeviceParams:
    """Physical constants and per-device calibration scales.

    Attributes:
        U_T: Thermal voltage (V).
        kappa: Subthreshold slope coefficient, in (0, 1].
        V_dd: Supply voltage (V).
        I_0_gain: Scale current of the virtual gain transistor (A).
        I_0_llc: Scale current of the leakage-cell p-FET (A).
        exp_cap: Largest admissible magnitude of any exponent argument.
    """

    U_T: float = 0.02585
    kappa: float = 0.7
    V_dd: float = 1.8
    I_0_gain: float = _default_i0_gain()
    I_0_llc: float = 1e-15
    exp_cap: float = 200.0

    def __post_init__(self):
        if not self.U_T > 0:
            raise DomainError(f"U_T must be > 0, got {self.U_T}")
        if not 0 < self.kappa <= 1:
            raise DomainError(f"kappa must lie in (0, 1], got {self.kappa}")
        if not self.V_dd > 0:
            raise DomainError(f"V_dd must be > 0, got {self.V_dd}")
        if not self.I_0_gain > 0:
            raise DomainError(f"I_0_gain must be > 0, got {self.I_0_gain}")
        if not self.I_0_llc > 0:
            raise DomainError(f"I_0_llc must be > 0, got {self.I_0_llc}")
        if not self.exp_cap > 0:
            raise DomainError(f"exp_cap must be > 0, got {self.exp_cap}")

    @property
    def gain_slope(self):
        """Slope of ln(I_gain) versus V_THR magnitude, kappa / U_T (1/V)."""
        return self.kappa / self.U_T


def capped_exp(x, cap):
    """``exp(x)`` that refuses arguments beyond ``cap`` in magnitude."""
    if not -cap <= x <= cap:
        raise NonPhysicalError(f"exponent {x!r} exceeds cap {cap!r}")
    return math.exp(x)


def _check_voltage(name, v, p):
    if not 0.0 <= v <= p.V_dd:
        raise DomainError(f"{name}={v!r} V outside [0, {p.V_dd}] V")


def igain_from_vthr(v_thr, p):
    """Gain current set by the control voltage ``v_thr``.

    Strictly decreasing in ``v_thr``; equals ``p.I_0_gain`` at ``v_thr == V_dd``.
    """
    _check_voltage("v_thr", v_thr, p)
    return p.I_0_gain * capped_exp(p.kappa * (p.V_dd - v_thr) / p.U_T, p.exp_cap)


def vthr_from_igain(i_gain, p):
    """Inverse of :func:`igain_from_vthr`.

    Raises:
        DomainError: if ``i_gain`` is not positive or the implied voltage falls
            outside ``[0, V_dd]``.
    """
    if not i_gain > 0:
        raise DomainError(f"i_gain must be > 0, got {i_gain!r}")
    v = p.V_dd - (p.U_T / p.kappa) * math.log(i_gain / p.I_0_gain)
    if not 0.0 <= v <= p.V_dd:
        raise DomainError(f"i_gain={i_gain!r} A implies V_THR={v!r} V outside [0, {p.V_dd}] V")
    return v


def calibrate_i0_gain(v_thr, i_w, i_syn, i_tau, p):
    """Gain-law scale that makes ``i_w`` produce ``i_syn`` at ``v_thr``.

    Returns the ``I_0_gain`` value to place in a :class:`DeviceParams`.
    """
    if not (i_w > 0 and i_syn > 0 and i_tau > 0):
        raise DomainError("i_w, i_syn and i_tau must all be > 0")
    _check_voltage("v_thr", v_thr, p)
    i_gain = i_syn * i_tau / i_w
    return i_gain / capped_exp(p.kappa * (p.V_dd - v_thr) / p.U_T, p.exp_cap)


def llc_channel_current(v_g, v_s, v_d, p):
    """Signed source-to-drain current of the leakage-cell p-FET (A).

    Positive when ``v_s > v_d``. Exactly antisymmetric under exchange of
    ``v_s`` and ``v_d``.
    """
    for name, v in (("v_g", v_g), ("v_s", v_s), ("v_d", v_d)):
        _check_voltage(name, v, p)
    if v_s == v_d:
        return 0.0
    cap = p.exp_cap
    scale = p.I_0_llc * capped_exp(p.kappa * (p.V_dd - v_g) / p.U_T, cap)
    fwd = capped_exp(-(p.V_dd - v_s) / p.U_T, cap)
    rev = capped_exp(-(p.V_dd - v_d) / p.U_T, cap)
    return scale * (fwd - rev)


def balanced_ref_h(v_ref_m, v_ref_l, p):
    """Upper reference giving the same channel current magnitude as ``v_ref_l``.

    With the drain held at ``v_ref_m``, equal up and down currents need
    ``exp((v_h - v_m)/U_T) - 1 == 1 - exp((v_l - v_m)/U_T)``. Equal voltage
    drops on either side do *not* balance the currents.
    """
    if not v_ref_l < v_ref_m:
        raise DomainError("v_ref_l must be below v_ref_m")
    a = math.exp((v_ref_l - v_ref_m) / p.U_T)
    v_h = v_ref_m + p.U_T * math.log(2.0 - a)
    _check_voltage("v_ref_h", v_h, p)
    return v_h


def calibrate_vg_for_slope(target_slope, c_f, v_s, v_d, p):
    """Gate bias giving ``|I_SD| / c_f == target_slope``.

    Solved by bracketed root finding on the log-current, which is affine and
    decreasing in ``v_g``.

    Raises:
        CalibrationError: if no gate voltage in ``[0, V_dd]`` reaches the slope.
    """
    if not target_slope > 0:
        raise DomainError(f"target_slope must be > 0, got {target_slope!r}")
    if not c_f > 0:
        raise DomainError(f"c_f must be > 0, got {c_f!r}")
    if v_s == v_d:
        raise DomainError("v_s and v_d must differ")
    target = target_slope * c_f
    log_target = math.log(target)

    def residual(v_g):
        return math.log(abs(llc_channel_current(v_g, v_s, v_d, p))) - log_target

    lo, hi = residual(0.0), residual(p.V_dd)
    if lo == 0.0:
        return 0.0
    if hi == 0.0:
        return p.V_dd
    if lo < 0.0 or hi > 0.0:
        i_max = abs(llc_channel_current(0.0, v_s, v_d, p))
        i_min = abs(llc_channel_current(p.V_dd, v_s, v_d, p))
        raise CalibrationError(
            f"slope {target_slope!r} V/s needs {target!r} A, reachable range is "
            f"[{i_min!r}, {i_max!r}] A"
        )
    return brentq(residual, 0.0, p.V_dd, xtol=1e-15, rtol=4 * 2.220446049250313e-16, maxiter=200)
