"""Frozen replication scenarios shipped with the package.

``fig4``
    Step response: I_DC 0.3 -> 0.6 -> 0.3 nA with a 60 s homeostatic time scale.
``fig5``
    Sweep of the leakage-cell gate bias giving 0.9 to 9 ks recovery times.
``table1``
    Open-loop ramp of V_THR driven by a 1.2 aA leak on 1 pF.
``long25k``
    A disturbance needing 30 mV of V_THR excursion at 1.2 uV/s.

The JSON files are generated by ``tools/make_builtins.py`` and then frozen.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError
from .scenario import scenario_from_dict

NAMES = ("fig4", "fig5", "table1", "long25k")


@dataclass(frozen=True)
class SweepSpec:
    base: object
    path: str
    values: tuple
    labels: tuple = ()

    def digest(self):
        h = hashlib.sha256(self.base.digest().encode())
        h.update(json.dumps([self.path, list(self.values)]).encode())
        return h.hexdigest()


def _read(name):
    if name not in NAMES:
        raise ConfigError(f"unknown builtin {name!r}; choose from {', '.join(NAMES)}", "builtin")
    return json.loads(resources.files("homeostat").joinpath("builtins", f"{name}.json").read_text())


def sweep_from_dict(doc):
    unknown = set(doc) - {"base", "path", "values", "labels"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "sweep")
    for key in ("base", "path", "values"):
        if key not in doc:
            raise ConfigError("required", key)
    return SweepSpec(base=scenario_from_dict(doc["base"]), path=doc["path"],
                     values=tuple(doc["values"]), labels=tuple(doc.get("labels", ())))


def load_builtin(name):
    """Return the builtin as a :class:`~homeostat.scenario.Scenario` or :class:`SweepSpec`."""
    doc = _read(name)
    if "base" in doc:
        return sweep_from_dict(doc)
    return scenario_from_dict(doc)
