"""Regenerate the frozen builtin scenarios under src/homeostat/builtins/.

Run after changing a default that the builtins depend on, then update the
pinned digests in tests/test_builtins.py.
"""

import json
import math
from dataclasses import replace
from pathlib import Path

from homeostat.agc import LlcParams
from homeostat.device import DeviceParams, calibrate_vg_for_slope
from homeostat.dpi import DcInput, WeightDrive
from homeostat.scenario import InitialConditions, Scenario

OUT = Path(__file__).resolve().parents[1] / "src" / "homeostat" / "builtins"

D = DeviceParams()
LOCK_V_THR = 1.46
REF_DROP = 0.1
I_DC = 0.3e-9
# V_THR excursion that compensates a doubling of the weight current
DOUBLING_SWING = D.U_T * math.log(2.0) / D.kappa


def llc_for_slope(slope, pair="up"):
    ll = LlcParams.balanced(LOCK_V_THR, REF_DROP, D)
    v_s = ll.v_ref_l if pair == "up" else ll.v_ref_h
    return replace(ll, v_g=calibrate_vg_for_slope(slope, ll.c_f, v_s, ll.v_ref_m, D))


def dc(*steps):
    return WeightDrive(dc_inputs=(DcInput("I_DC", tuple(steps)),))


def fig4():
    return Scenario(
        name="fig4: step response, 60 s homeostatic time scale",
        duration=200.0,
        llc=llc_for_slope(DOUBLING_SWING / 60.0),
        drive=dc((0.0, I_DC), (20.0, 2 * I_DC), (120.0, I_DC)),
        sample_interval=0.01,
        initial=InitialConditions(i_syn=None, reset_at_start=True),
    )


FIG5_SCALES = (900.0, 1800.0, 4500.0, 9000.0)


def fig5():
    base = Scenario(
        name="fig5: recovery at several leakage rates",
        duration=100.0 + 1.5 * max(FIG5_SCALES),
        llc=llc_for_slope(DOUBLING_SWING / FIG5_SCALES[0]),
        drive=dc((0.0, I_DC), (100.0, 2 * I_DC)),
        sample_interval=1.0,
        initial=InitialConditions(i_syn=None, reset_at_start=True),
    )
    values = [llc_for_slope(DOUBLING_SWING / T).v_g for T in FIG5_SCALES]
    return {"base": base.to_dict(), "path": "llc.v_g", "values": values,
            "labels": [f"tau={T:g}s" for T in FIG5_SCALES]}


def table1():
    # open loop: no drive keeps SW low, so V_THR ramps down at the leak slope
    return Scenario(
        name="table1: 1.2 aA leak on 1 pF, open loop",
        duration=1000.0,
        llc=llc_for_slope(1.2e-6, pair="down"),
        sample_interval=1.0,
        initial=InitialConditions(i_syn=0.0, reset_at_start=True),
    )


LONG_SWING = 0.030


def long25k():
    factor = math.exp(D.kappa * LONG_SWING / D.U_T)
    return Scenario(
        name="long25k: 30 mV excursion at 1.2 uV/s",
        duration=100.0 + 30000.0,
        llc=llc_for_slope(1.2e-6),
        drive=dc((0.0, I_DC), (100.0, I_DC * factor)),
        sample_interval=1.0,
        initial=InitialConditions(i_syn=None, reset_at_start=True),
    )


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    docs = {"fig4": fig4().to_dict(), "fig5": fig5(), "table1": table1().to_dict(),
            "long25k": long25k().to_dict()}
    for name, doc in docs.items():
        (OUT / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")
        print("wrote", OUT / f"{name}.json")


if __name__ == "__main__":
    main()
