"""Pure-Python twin of the compiled ``_kernel`` extension.

Selected automatically when the extension is not built, or when
``HOMEOSTAT_PURE_PYTHON=1``. Keep it operation-for-operation identical to
``_kernel.pyx``.
"""

from math import exp

I_SYN, V_THR, SW, V_MEM, REFR = range(5)
S_MIN, S_MAX, S_SAT, S_VIOL, S_BAD_T = range(5)


def advance(state, n, h, t0, i_w, spiking, spikes, n_spk, stats,
            i0_gain, gain_slope, v_dd, exp_cap, i_tau, tau, i_ref, hyst,
            slope_up, slope_down, drift, c_mem, delta_v, t_ref, i_leak):
    """Run ``n`` engine steps of length ``h`` starting at ``t0``.

    Returns ``(status, steps_done, n_spk)``; status 0 is success, 1 means the
    spike buffer filled up (the offending step is rolled back), 2 means an
    exponent exceeded ``exp_cap`` (its time is left in ``stats``).
    """
    i_syn = float(state[I_SYN])
    v_thr = float(state[V_THR])
    sw = state[SW] != 0.0
    v_mem = float(state[V_MEM])
    refr = float(state[REFR])
    decay = exp(-h / tau)
    hi_band = i_ref * (1.0 + hyst)
    lo_band = i_ref * (1.0 - hyst)
    cap = spikes.shape[0]
    s_min = float(stats[S_MIN])
    s_max = float(stats[S_MAX])
    sat = float(stats[S_SAT])
    viol = float(stats[S_VIOL])
    status = 0
    k = 0

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
            sat = 1.0
        elif v_new > v_dd:
            v_new = v_dd
            sat = 1.0
        elif (i_syn > hi_band and dv < 0.0) or (i_syn < lo_band and dv > 0.0):
            viol += 1.0
        v_thr = v_new

        if i_syn < s_min:
            s_min = i_syn
        if i_syn > s_max:
            s_max = i_syn

    stats[S_MIN] = s_min
    stats[S_MAX] = s_max
    stats[S_SAT] = sat
    stats[S_VIOL] = viol
    state[I_SYN] = i_syn
    state[V_THR] = v_thr
    state[SW] = 1.0 if sw else 0.0
    state[V_MEM] = v_mem
    state[REFR] = refr
    return status, k if status else n, n_spk
