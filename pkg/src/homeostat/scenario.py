"""Declarative experiment description, sampled traces, and their file formats.

Scenarios travel as JSON documents validated against
``scenario_schema.json``; traces are written as CSV with a fixed header and
the event log appended as ``#`` comment lines.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
from dataclasses import dataclass, field, replace
from importlib import resources

import jsonschema
import numpy as np

from .agc import ComparatorParams, LlcParams
from .device import DeviceParams
from .dpi import DcInput, DpiParams, SpikeInput, WeightDrive
from .errors import ConfigError, HomeostatError
from .neuron import NeuronParams

SPIKING = "spiking"
FAST = "fast"

CSV_COLUMNS = ("t_s", "i_syn_A", "v_thr_V", "i_gain_A", "sw", "rate_Hz", "v_syn_V")


def load_schema():
    return json.loads(resources.files("homeostat").joinpath("scenario_schema.json").read_text())


@dataclass(frozen=True)
class InitialConditions:
    """Start state. ``i_syn=None`` starts the synapse at its steady state."""

    i_syn: float | None = 0.0
    v_thr: float | None = None
    reset_at_start: bool = True


@dataclass(frozen=True)
class Scenario:
    duration: float
    device: DeviceParams = field(default_factory=DeviceParams)
    dpi: DpiParams = field(default_factory=DpiParams)
    neuron: NeuronParams = field(default_factory=NeuronParams)
    llc: LlcParams = field(default_factory=LlcParams)
    comparator: ComparatorParams = field(default_factory=ComparatorParams)
    drive: WeightDrive = field(default_factory=WeightDrive)
    mode: str = FAST
    dt_neuron: float = 1e-5
    dt_fast_max: float = 1e-2
    sample_interval: float = 1e-2
    initial: InitialConditions = field(default_factory=InitialConditions)
    resets: tuple[float, ...] = ()
    seed: int = 0
    rate_estimator: str = "isi"
    rate_window: float = 0.5
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "resets", tuple(sorted(float(t) for t in self.resets)))
        if not self.duration > 0:
            raise ConfigError("must be > 0", "duration")
        if self.mode not in (SPIKING, FAST):
            raise ConfigError(f"must be {SPIKING!r} or {FAST!r}, got {self.mode!r}", "mode")
        if not self.dt_neuron > 0:
            raise ConfigError("must be > 0", "dt_neuron")
        if not self.dt_fast_max > 0:
            raise ConfigError("must be > 0", "dt_fast_max")
        if not self.sample_interval >= self.dt_neuron:
            raise ConfigError("must be >= dt_neuron", "sample_interval")
        if self.rate_estimator not in ("isi", "window"):
            raise ConfigError(f"unknown estimator {self.rate_estimator!r}", "rate_estimator")
        if not self.rate_window > 0:
            raise ConfigError("must be > 0", "rate_window")
        try:
            self.llc.check_against(self.device)
        except HomeostatError as exc:
            raise ConfigError(str(exc), "llc") from exc
        ini = self.initial
        if not ini.reset_at_start:
            if ini.v_thr is None:
                raise ConfigError("required unless reset_at_start", "initial.v_thr")
            if not 0.0 <= ini.v_thr <= self.device.V_dd:
                raise ConfigError(f"{ini.v_thr} V outside [0, V_dd]", "initial.v_thr")
        if ini.i_syn is not None and ini.i_syn < 0:
            raise ConfigError("must be >= 0", "initial.i_syn")
        if any(t < 0 for t in self.resets):
            raise ConfigError("reset times must be >= 0", "resets")

    def to_dict(self):
        return _to_jsonable(dataclasses.asdict(self))

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def digest(self):
        """SHA-256 of the canonical JSON form."""
        return hashlib.sha256(self.to_json(sort_keys=True).encode()).hexdigest()


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    return obj


def _block(cls, data, name):
    try:
        return cls(**data)
    except HomeostatError as exc:
        raise ConfigError(str(exc), name) from exc


def _spike_input(spec, rng, idx):
    where = f"drive.spike_inputs[{idx}]"
    if ("times" in spec) == ("poisson" in spec):
        raise ConfigError("give exactly one of 'times' or 'poisson'", where)
    if "times" in spec:
        times = spec["times"]
    else:
        p = spec["poisson"]
        start = p.get("start", 0.0)
        stop = p.get("stop")
        if stop is None or stop <= start:
            raise ConfigError("poisson.stop must exceed poisson.start", where)
        n = rng.poisson(p["rate"] * (stop - start))
        times = np.sort(rng.uniform(start, stop, size=n)).tolist()
    try:
        return SpikeInput(label=spec["label"], weight=spec["weight"], times=times,
                          pulse=spec.get("pulse", 1e-3))
    except HomeostatError as exc:
        raise ConfigError(str(exc), where) from exc


def scenario_from_dict(data):
    """Build a :class:`Scenario` from a JSON-shaped mapping.

    Raises:
        ConfigError: naming the offending field on any schema or invariant
            violation. Unknown keys are rejected.
    """
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(err.message, path)

    seed = data.get("seed", 0)
    rng = np.random.default_rng(seed)
    drive_data = data.get("drive", {})
    try:
        dc = tuple(DcInput(label=d["label"], steps=tuple(tuple(s) for s in d["steps"]))
                   for d in drive_data.get("dc_inputs", []))
    except HomeostatError as exc:
        raise ConfigError(str(exc), "drive.dc_inputs") from exc
    spikes = tuple(_spike_input(s, rng, i) for i, s in enumerate(drive_data.get("spike_inputs", [])))

    kw = {k: data[k] for k in ("duration", "mode", "dt_neuron", "dt_fast_max", "sample_interval",
                               "seed", "rate_estimator", "rate_window", "name") if k in data}
    return Scenario(
        device=_block(DeviceParams, data.get("device", {}), "device"),
        dpi=_block(DpiParams, data.get("dpi", {}), "dpi"),
        neuron=_block(NeuronParams, data.get("neuron", {}), "neuron"),
        llc=_block(LlcParams, data.get("llc", {}), "llc"),
        comparator=_block(ComparatorParams, data.get("comparator", {}), "comparator"),
        drive=WeightDrive(dc_inputs=dc, spike_inputs=spikes),
        initial=InitialConditions(**data.get("initial", {})),
        resets=tuple(data.get("resets", ())),
        **kw,
    )


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}", str(path)) from exc
    return scenario_from_dict(data)


def with_param(sc, path, value):
    """Copy of ``sc`` with the dotted parameter ``path`` set to ``value``."""
    head, _, tail = path.partition(".")
    if not hasattr(sc, head):
        raise ConfigError("unknown parameter", path)
    try:
        if not tail:
            return replace(sc, **{head: value})
        block = getattr(sc, head)
        if not dataclasses.is_dataclass(block) or tail not in {f.name for f in dataclasses.fields(block)}:
            raise ConfigError("unknown parameter", path)
        return replace(sc, **{head: replace(block, **{tail: value})})
    except HomeostatError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), path) from exc


@dataclass(frozen=True)
class Event:
    t: float
    kind: str
    detail: str = ""


@dataclass(frozen=True, eq=False)
class Trace:
    """Sampled output of one run.

    The seven CSV channels are uniformly sampled arrays. ``i_syn_lo`` and
    ``i_syn_hi`` hold the extremes of ``I_syn`` over every engine step since
    the previous sample, and ``saturated`` flags samples whose interval hit the
    ``[0, V_dd]`` clamp on ``V_THR``.
    """

    t: np.ndarray
    i_syn: np.ndarray
    v_thr: np.ndarray
    i_gain: np.ndarray
    sw: np.ndarray
    rate: np.ndarray
    v_syn: np.ndarray
    i_syn_lo: np.ndarray | None = None
    i_syn_hi: np.ndarray | None = None
    saturated: np.ndarray | None = None
    spike_times: np.ndarray | None = None
    events: tuple[Event, ...] = ()
    feedback_violations: int = 0
    steps: int = 0
    backend: str = ""

    def channels(self):
        return (self.t, self.i_syn, self.v_thr, self.i_gain, self.sw, self.rate, self.v_syn)

    def digest(self):
        """SHA-256 over every sampled channel and the spike record."""
        h = hashlib.sha256()
        for arr in self.channels() + (self.i_syn_lo, self.i_syn_hi, self.spike_times):
            if arr is not None:
                h.update(np.ascontiguousarray(arr, dtype=float).tobytes())
        for ev in self.events:
            h.update(f"{ev.t!r}|{ev.kind}|{ev.detail}".encode())
        return h.hexdigest()

    def events_of(self, kind):
        return [e for e in self.events if e.kind == kind]

    def window(self, t0, t1):
        """Boolean mask of samples with ``t0 <= t <= t1``."""
        return (self.t >= t0) & (self.t <= t1)


def _fmt(x):
    return format(float(x), ".17g")


def trace_to_csv(trace, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in zip(*trace.channels()):
        w.writerow([_fmt(row[0]), _fmt(row[1]), _fmt(row[2]), _fmt(row[3]), str(int(row[4])),
                    _fmt(row[5]), _fmt(row[6])])
    for ev in trace.events:
        fh.write(f"# event,{_fmt(ev.t)},{ev.kind},{ev.detail}\n")


def trace_to_csv_text(trace):
    buf = io.StringIO()
    trace_to_csv(trace, buf)
    return buf.getvalue()


def trace_from_csv(fh):
    """Read back a trace written by :func:`trace_to_csv` (sampled channels and events only)."""
    rows = []
    events = []
    header = None
    for line in fh:
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("event,"):
                _, t, kind, detail = body.split(",", 3)
                events.append(Event(float(t), kind, detail))
            continue
        if header is None:
            header = tuple(line.split(","))
            if header != CSV_COLUMNS:
                raise ValueError(f"unexpected CSV header {header!r}")
            continue
        rows.append([float(x) for x in line.split(",")])
    data = np.array(rows, dtype=float).reshape(-1, len(CSV_COLUMNS))
    cols = [data[:, i].copy() for i in range(len(CSV_COLUMNS))]
    cols[4] = cols[4].astype(np.int8)
    return Trace(*cols, events=tuple(events))
