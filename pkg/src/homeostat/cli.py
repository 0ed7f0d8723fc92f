"""Command-line front end.

Exit codes: 0 success, 1 configuration or calibration error, 2 numeric
abort during a run, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import __version__, engine
from .agc import LlcParams
from .builtin import NAMES, SweepSpec, load_builtin, sweep_from_dict
from .device import DeviceParams, calibrate_vg_for_slope
from .errors import CalibrationError, ConfigError, DomainError, NonPhysicalError
from .neuron import DEFAULT_DELTA_V, calibrate_rate_points
from .scenario import load_schema, scenario_from_dict, trace_to_csv

log = logging.getLogger("homeostat")

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 1, 2, 3


def _load(args):
    if args.builtin:
        return load_builtin(args.builtin)
    try:
        with open(args.scenario, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}", args.scenario) from exc
    if isinstance(doc, dict) and "base" in doc:
        return sweep_from_dict(doc)
    return scenario_from_dict(doc)


def _write_atomic(outputs):
    """Write every ``(path, trace, extra_comment_lines)`` or none of them."""
    staged = []
    try:
        for path, trace, extra in outputs:
            path = Path(path)
            fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
            staged.append((tmp, path))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                trace_to_csv(trace, fh)
                for line in extra:
                    fh.write(f"# {line}\n")
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def _numbered(out, i):
    p = Path(out)
    return p.with_name(f"{p.stem}_{i:03d}{p.suffix or '.csv'}")


def _run_sweep(spec, out, mode, backend):
    base = replace(spec.base, mode=mode) if mode else spec.base
    results = engine.sweep(base, spec.path, spec.values, keep_traces=True, backend=backend)
    outputs = []
    for i, res in enumerate(results):
        label = spec.labels[i] if i < len(spec.labels) else ""
        print(json.dumps({"index": i, "label": label, "value": res.value,
                          "recovery_time_s": res.recovery_time, "lock_band": res.lock_band,
                          "final_rate_hz": res.final_rate, "error": res.error}))
        if res.trace is not None:
            outputs.append((_numbered(out, i), res.trace, [f"sweep,{spec.path},{res.value!r},{label}"]))
    _write_atomic(outputs)
    return 0 if all(r.error is None for r in results) else EXIT_NUMERIC


def cmd_run(args):
    obj = _load(args)
    if isinstance(obj, SweepSpec):
        return _run_sweep(obj, args.out, args.mode, args.backend)
    sc = replace(obj, mode=args.mode) if args.mode else obj
    trace = engine.run(sc, backend=args.backend)
    _write_atomic([(args.out, trace, [])])
    log.info("wrote %d samples to %s (%s backend, %d steps)", len(trace.t), args.out, trace.backend, trace.steps)
    return 0


def cmd_sweep(args):
    obj = _load(args)
    base = obj.base if isinstance(obj, SweepSpec) else obj
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc), "--values") from exc
    if not values:
        raise ConfigError("need at least one value", "--values")
    return _run_sweep(SweepSpec(base=base, path=args.path, values=tuple(values)), args.out, args.mode, args.backend)


def _parse_points(text):
    pts = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            f, i = item.split("@")
            pts.append((float(f), float(i)))
        except ValueError as exc:
            raise ConfigError(f"cannot parse {item!r}; expected RATE@CURRENT", "--rate-points") from exc
    if len(pts) != 2:
        raise ConfigError(f"need exactly two RATE@CURRENT points, got {len(pts)}", "--rate-points")
    return sorted(pts)


def cmd_calibrate(args):
    if args.rate_points:
        (f1, i1), (f2, i2) = _parse_points(args.rate_points)
        t_ref, q = calibrate_rate_points(f1, i1, f2, i2)
        frag = {"neuron": {"c_mem": q / args.delta_v, "delta_v": args.delta_v, "t_ref": t_ref},
                "charge_C": q}
    else:
        d = DeviceParams()
        ll = LlcParams()
        v_s = ll.v_ref_l if args.v_s is None else args.v_s
        v_d = ll.v_ref_m if args.v_d is None else args.v_d
        v_g = calibrate_vg_for_slope(args.slope, args.c_f, v_s, v_d, d)
        frag = {"llc": {"v_g": v_g}, "leak_current_A": args.slope * args.c_f}
    print(json.dumps(frag, indent=2))
    return 0


def cmd_schema(args):
    print(json.dumps(load_schema(), indent=2))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="homeostat", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_source(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--scenario", help="scenario JSON file")
        src.add_argument("--builtin", choices=NAMES)
        p.add_argument("--mode", choices=("spiking", "fast"), help="override the scenario's mode")
        p.add_argument("--out", required=True, help="CSV output path (numbered per value for sweeps)")
        p.add_argument("--backend", choices=("cython", "python"), help="force a kernel backend")

    p = sub.add_parser("run", help="simulate a scenario and write its trace")
    add_source(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a scenario over several values of one parameter")
    add_source(p)
    p.add_argument("--path", required=True, help="dotted parameter, e.g. llc.v_g")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("calibrate", help="derive neuron or leakage-cell parameters")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rate-points", help='two points "RATE@CURRENT,RATE@CURRENT", e.g. "100@20e-9,180@40e-9"')
    g.add_argument("--slope", type=float, help="target V_THR slope in V/s")
    p.add_argument("--delta-v", type=float, default=DEFAULT_DELTA_V, help="membrane span used to split Q")
    p.add_argument("--c-f", type=float, default=1e-12, help="feedback capacitance (F)")
    p.add_argument("--v-s", type=float, help="p-FET source voltage (default: v_ref_l)")
    p.add_argument("--v-d", type=float, help="p-FET drain voltage (default: v_ref_m)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("schema", help="print the scenario JSON schema")
    p.set_defaults(func=cmd_schema)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CalibrationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonPhysicalError as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
