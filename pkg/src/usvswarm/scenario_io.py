"""JSON scenario files, presets, and ``key=value`` overrides.

Schema (``schema_version`` 1). Angles are degrees in files, radians inside
the library::

    {
      "schema_version": 1,
      "name": "surround-baseline",
      "protocol": "approach2",            # approach1-centralized | approach1-decentralized | approach2
      "regulator": "backstepping",        # backstepping | pid
      "duration": 200.0, "dt_phys": 0.01, "dt_ctrl": 0.2, "seed": 0,
      "area": [0, 0, 40, 40],             # xmin, ymin, xmax, ymax for random placement
      "vessels": null,                    # or [{"x", "y", "psi_deg", "w", "v", "r_deg_s"}, ...]
      "target": {"kind": "static", "position": [20, 20],
                 "velocity": [0, 0], "waypoints": [], "speeds": []},
      "swarm": {"N": 3, "mu": 12, "gamma1": ..., "gamma2": ..., "gamma3": ...,
                "beta1": 0.13, "beta2": 0.06, "rho_o": 10,
                "comm_graph": null, "leaders": null},
      "gains": {"kappa1": 0.02, "kappa2": 0.001, "kappa3": 0.076, "kappa4": 0.418},
      "params": {"k1": -0.098, ..., "k5": 0.019, "k5_units": "per_deg",
                 "tau1_range": [0, 196], "tau2_range_deg": [-20, 20]}
    }
"""
from __future__ import annotations

import copy
import json
import math
from importlib import resources
from pathlib import Path
from typing import Any

from .dynamics import DynamicsParams, VesselState
from .engine import Scenario, TargetSpec
from .protocols import SwarmConfig
from .regulation import RegGains

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Scenario file or override could not be turned into a valid Scenario."""


TOP_KEYS = {"schema_version", "name", "description", "protocol", "regulator", "duration",
            "dt_phys", "dt_ctrl", "seed", "area", "vessels", "target", "swarm", "gains", "params"}
SECTION_KEYS = {
    "target": {"kind", "position", "velocity", "waypoints", "speeds"},
    "swarm": {"N", "mu", "gamma1", "gamma2", "gamma3", "beta1", "beta2", "rho_o",
              "comm_graph", "leaders"},
    "gains": {"kappa1", "kappa2", "kappa3", "kappa4"},
    "params": {"k1", "k2", "k3", "k4", "k5", "k6", "k7", "k5_units", "tau1_range",
               "tau2_range_deg"},
}
VESSEL_KEYS = {"x", "y", "psi_deg", "w", "v", "r_deg_s"}


def _check_keys(d: dict, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise ScenarioError(f"{where}: expected an object")
    for key in d:
        if key not in allowed:
            raise ScenarioError(f"{where}.{key}: unknown field" if where else f"{key}: unknown field")


def _wrap(where: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def scenario_from_dict(doc: dict[str, Any]) -> Scenario:
    _check_keys(doc, TOP_KEYS, "")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    for section, keys in SECTION_KEYS.items():
        if section in doc:
            _check_keys(doc[section], keys, section)

    sw = dict(doc.get("swarm", {}))
    if sw.get("comm_graph") is not None:
        sw["comm_graph"] = tuple(tuple(n) for n in sw["comm_graph"])
    if sw.get("leaders") is not None:
        sw["leaders"] = frozenset(sw["leaders"])
    swarm = _wrap("swarm", SwarmConfig, **sw)

    tg = dict(doc.get("target", {}))
    for key in ("position", "velocity"):
        if key in tg:
            tg[key] = tuple(float(v) for v in tg[key])
    if "waypoints" in tg:
        tg["waypoints"] = tuple(tuple(float(v) for v in wp) for wp in tg["waypoints"])
    if "speeds" in tg:
        tg["speeds"] = tuple(float(v) for v in tg["speeds"])
    target = _wrap("target", TargetSpec, **tg)

    gains = _wrap("gains", RegGains, **doc.get("gains", {}))

    pr = dict(doc.get("params", {}))
    units = pr.pop("k5_units", "per_deg")
    if units not in ("per_deg", "per_rad"):
        raise ScenarioError(f"params.k5_units: expected 'per_deg' or 'per_rad', got {units!r}")
    if "k5" in pr and units == "per_deg":
        pr["k5"] = float(pr["k5"]) * 180.0 / math.pi
    if "tau1_range" in pr:
        pr["tau1_range"] = tuple(pr["tau1_range"])
    if "tau2_range_deg" in pr:
        lo, hi = pr.pop("tau2_range_deg")
        pr["tau2_range"] = (math.radians(lo), math.radians(hi))
    base = DynamicsParams.identified("deg" if units == "per_deg" else "rad")
    params = _wrap("params", lambda: DynamicsParams(**{**base.__dict__, **pr}))

    vessels = None
    if doc.get("vessels") is not None:
        vessels = []
        for i, v in enumerate(doc["vessels"]):
            _check_keys(v, VESSEL_KEYS, f"vessels[{i}]")
            vessels.append(VesselState(float(v.get("x", 0.0)), float(v.get("y", 0.0)),
                                       math.radians(v.get("psi_deg", 0.0)), float(v.get("w", 0.0)),
                                       float(v.get("v", 0.0)), math.radians(v.get("r_deg_s", 0.0))))
        vessels = tuple(vessels)

    kwargs = {k: doc[k] for k in ("protocol", "regulator", "duration", "dt_phys", "dt_ctrl", "seed")
              if k in doc}
    if "area" in doc:
        kwargs["area"] = tuple(float(v) for v in doc["area"])
    return _wrap("scenario", Scenario, swarm=swarm, target=target, gains=gains, params=params,
                 vessels=vessels, **kwargs)


def load_document(path: str | Path) -> dict[str, Any]:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def preset_names() -> list[str]:
    root = resources.files("usvswarm") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset_document(name: str) -> dict[str, Any]:
    root = resources.files("usvswarm") / "presets"
    f = root / f"{name}.json"
    if not f.is_file():
        raise ScenarioError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return json.loads(f.read_text())


def load_preset(name: str) -> Scenario:
    return scenario_from_dict(load_preset_document(name))


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Return a copy of ``doc`` with dotted ``key=value`` assignments applied."""
    out = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ScenarioError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node, allowed = out, TOP_KEYS
        for depth, part in enumerate(parts):
            if part not in allowed:
                raise ScenarioError(f"unknown override key {key!r}")
            if depth == len(parts) - 1:
                node[part] = _parse_value(raw)
            else:
                if part not in SECTION_KEYS:
                    raise ScenarioError(f"unknown override key {key!r}")
                node = node.setdefault(part, {})
                allowed = SECTION_KEYS[part]
    return out
