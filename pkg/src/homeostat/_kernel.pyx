# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop of the engine.

Mirrors ``_kernel_py.advance`` operation for operation; the two must stay in
lockstep so that both backends produce the same bits.
"""

from libc.math cimport exp

cdef enum:
    I_SYN = 0
    V_THR = 1
    SW = 2
    V_MEM = 3
    REFR = 4

cdef enum:
    S_MIN = 0
    S_MAX = 1
    S_SAT = 2
    S_VIOL = 3
    S_BAD_T = 4


def advance(double[::1] state, long n, double h, double t0, double i_w, bint spiking,
            double[::1] spikes, long n_spk, double[::1] stats,
            double i0_gain, double gain_slope, double v_dd, double exp_cap,
            double i_tau, double tau, double i_ref, double hyst,
            double slope_up, double slope_down, double drift,
            double c_mem, double delta_v, double t_ref, double i_leak):
    cdef double i_syn = state[I_SYN]
    cdef double v_thr = state[V_THR]
    cdef bint sw = state[SW] != 0.0
    cdef double v_mem = state[V_MEM]
    cdef double refr = state[REFR]
    cdef double decay = exp(-h / tau)
    cdef double hi_band = i_ref * (1.0 + hyst)
    cdef double lo_band = i_ref * (1.0 - hyst)
    cdef long cap = spikes.shape[0]
    cdef long k = 0, m
    cdef double ta, tb, x, i_gain, i_ss, i_prev, t_cur, t_hit, net, v, refr_k, dv, v_new
    cdef int status = 0

    for k in range(n):
        ta = t0 + k * h
        tb = t0 + (k + 1) * h
        x = gain_slope * (v_dd - v_thr)
        if x > exp_cap or x < -exp_cap:
            stats[S_BAD_T] = ta
            status = 2
            break
        i_gain = i0_gain * exp(x)
        i_ss = i_w * i_gain / i_tau
        i_prev = i_syn
        i_syn = i_ss + (i_syn - i_ss) * decay

        if spiking:
            m = n_spk
            v = v_mem
            refr_k = refr
            net = i_syn - i_leak
            t_cur = ta if ta > refr_k else refr_k
            while t_cur < tb:
                if net <= 0.0:
                    v = v + net * (tb - t_cur) / c_mem
                    if v < 0.0:
                        v = 0.0
                    break
                t_hit = t_cur + (delta_v - v) * c_mem / net
                if t_hit > tb:
                    v = v + net * (tb - t_cur) / c_mem
                    break
                if m >= cap:
                    status = 1
                    break
                spikes[m] = t_hit
                m += 1
                v = 0.0
                refr_k = t_hit + t_ref
                t_cur = refr_k
            if status == 1:
                i_syn = i_prev
                break
            n_spk = m
            v_mem = v
            refr = refr_k

        if i_syn > hi_band:
            sw = True
        elif i_syn < lo_band:
            sw = False

        if sw:
            dv = slope_up * h
        else:
            dv = -slope_down * h
        dv = dv + drift * h
        v_new = v_thr + dv
        if v_new < 0.0:
            v_new = 0.0
            stats[S_SAT] = 1.0
        elif v_new > v_dd:
            v_new = v_dd
            stats[S_SAT] = 1.0
        else:
            if (i_syn > hi_band and dv < 0.0) or (i_syn < lo_band and dv > 0.0):
                stats[S_VIOL] += 1.0
        v_thr = v_new

        if i_syn < stats[S_MIN]:
            stats[S_MIN] = i_syn
        if i_syn > stats[S_MAX]:
            stats[S_MAX] = i_syn

    state[I_SYN] = i_syn
    state[V_THR] = v_thr
    state[SW] = 1.0 if sw else 0.0
    state[V_MEM] = v_mem
    state[REFR] = refr
    return status, k if status else n, n_spk
