"""Automatic gain control: comparator plus ultra-low-leakage cell.

The comparator turns ``I_syn`` versus ``I_REF`` into the binary ``SW`` line.
The leakage cell then pushes a tiny current onto ``C_F``: with ``SW`` high the
p-FET sees ``V_REF_L`` at its source and ``V_THR`` rises, with ``SW`` low it
sees ``V_REF_H`` and ``V_THR`` falls. Both OTAs are treated as ideal, so the
cell reduces to a switched current source on the capacitor.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .device import DeviceParams, balanced_ref_h, calibrate_vg_for_slope, llc_channel_current
from .errors import DomainError

CHANNEL = "channel"
FIXED_SLOPE = "fixed-slope"

_D0 = DeviceParams()
_DEFAULT_REF_L = 0.8
_DEFAULT_REF_M = 0.9
_DEFAULT_REF_H = balanced_ref_h(_DEFAULT_REF_M, _DEFAULT_REF_L, _D0)
# default leak: 1.2 aA onto 1 pF, a 1.2 uV/s ramp
_DEFAULT_V_G = calibrate_vg_for_slope(1.2e-6, 1e-12, _DEFAULT_REF_L, _DEFAULT_REF_M, _D0)


@dataclass(frozen=True)
class LlcParams:
    """Leakage-cell configuration.

    In ``"channel"`` mode the slopes follow from the p-FET model at gate bias
    ``v_g``; in ``"fixed-slope"`` mode ``slope_up``/``slope_down`` (V/s) are used
    directly. ``i_parasitic`` is a constant extra current onto ``C_F`` (A,
    positive raises ``V_THR``).
    """

    c_f: float = 1e-12
    v_ref_l: float = _DEFAULT_REF_L
    v_ref_m: float = _DEFAULT_REF_M
    v_ref_h: float = _DEFAULT_REF_H
    v_g: float = _DEFAULT_V_G
    mode: str = CHANNEL
    slope_up: float = 0.0
    slope_down: float = 0.0
    i_parasitic: float = 0.0

    def __post_init__(self):
        if not self.c_f > 0:
            raise DomainError(f"c_f must be > 0, got {self.c_f}")
        if not self.v_ref_l < self.v_ref_m < self.v_ref_h:
            raise DomainError(
                f"need v_ref_l < v_ref_m < v_ref_h, got {self.v_ref_l}, {self.v_ref_m}, {self.v_ref_h}"
            )
        if self.mode not in (CHANNEL, FIXED_SLOPE):
            raise DomainError(f"mode must be {CHANNEL!r} or {FIXED_SLOPE!r}, got {self.mode!r}")
        if self.slope_up < 0 or self.slope_down < 0:
            raise DomainError("fixed slopes must be >= 0")

    def check_against(self, d):
        """Check the voltages that depend on the supply rail."""
        for name in ("v_ref_l", "v_ref_m", "v_ref_h", "v_g"):
            v = getattr(self, name)
            if not 0.0 <= v <= d.V_dd:
                raise DomainError(f"{name}={v} V outside [0, {d.V_dd}] V")

    @classmethod
    def balanced(cls, v_ref_m, drop, d, **kw):
        """References around ``v_ref_m`` with equal up and down channel currents."""
        v_ref_l = v_ref_m - drop
        return cls(v_ref_l=v_ref_l, v_ref_m=v_ref_m, v_ref_h=balanced_ref_h(v_ref_m, v_ref_l, d), **kw)


@dataclass(frozen=True)
class ComparatorParams:
    i_ref: float = 20e-9
    hysteresis: float = 0.0

    def __post_init__(self):
        if not self.i_ref > 0:
            raise DomainError(f"i_ref must be > 0, got {self.i_ref}")
        if not self.hysteresis >= 0:
            raise DomainError(f"hysteresis must be >= 0, got {self.hysteresis}")


@dataclass(frozen=True)
class AgcState:
    v_thr: float
    sw: bool = False
    rst: bool = False
    saturated: bool = False


def comparator(i_syn, prev_sw, c):
    """Binary comparator with a relative deadband; ties keep ``prev_sw``."""
    if i_syn > c.i_ref * (1.0 + c.hysteresis):
        return True
    if i_syn < c.i_ref * (1.0 - c.hysteresis):
        return False
    return prev_sw


def slopes(p, d):
    """``(up, down)`` ramp-rate magnitudes of ``V_THR`` in V/s, excluding parasitics."""
    if p.mode == FIXED_SLOPE:
        return p.slope_up, p.slope_down
    up = abs(llc_channel_current(p.v_g, p.v_ref_l, p.v_ref_m, d)) / p.c_f
    down = abs(llc_channel_current(p.v_g, p.v_ref_h, p.v_ref_m, d)) / p.c_f
    return up, down


def llc_update(s, sw, p, d, dt):
    """Integrate the leakage current onto ``C_F`` for ``dt`` seconds.

    The result is clamped to ``[0, V_dd]``; ``saturated`` records whether the
    clamp was active.
    """
    if dt < 0:
        raise DomainError(f"dt must be >= 0, got {dt!r}")
    if s.rst:
        return replace(s, v_thr=p.v_ref_m, sw=sw, saturated=False)
    up, down = slopes(p, d)
    rate = (up if sw else -down) + p.i_parasitic / p.c_f
    v = s.v_thr + rate * dt
    clamped = min(max(v, 0.0), d.V_dd)
    return replace(s, v_thr=clamped, sw=sw, saturated=clamped != v)


def reset(s, p):
    """Pulse ``RST``: the control voltage returns to ``V_REF_M``."""
    return replace(s, v_thr=p.v_ref_m, rst=False, saturated=False)
