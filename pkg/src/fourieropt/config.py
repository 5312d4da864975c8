"""JSON run configuration: parsing, validation and defaults.

A config document has up to five sections, all optional::

    {
      "plant":      {"mu": 0.3, "rho": 2.5, "nu": 1.0, "gamma": 10.0},
      "bounds":     {"control_min": -4, "control_max": 4, "omega_max": 10,
                     "p": [1e-6, 1], "q": [1e-6, 1]},
      "integrator": {"abs_tol": 1e-9, "rel_tol": 1e-12, ...},
      "de":         {"population_size": 60, "max_generations": 200, ...},
      "campaign":   {"k_min": 2, "k_max": 10, "trials": 5, "t0": 0, "tf": 100,
                     "mode": "iterative", "base_seed": 0, ...},
      "control":    {"harmonics": 2, "vector": [...]}
                    or {"a0": ..., "a": [...], "b": [...], "omega": ...}
    }

Missing keys take the library defaults.  ``validate`` reports every problem
it finds instead of stopping at the first.
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

from .campaign import CampaignConfig, SearchLimits
from .capsule_plant import CapsuleParams
from .evolution import STRATEGIES, DeConfig
from .fourier_control import ControlBounds, FourierControl
from .hybrid_integrator import IntegratorConfig

__all__ = ["ConfigError", "build_config", "control_from_spec", "default_document",
           "load_document", "validate"]

SECTIONS = ("plant", "bounds", "integrator", "de", "campaign", "control")
CAMPAIGN_KEYS = ("k_min", "k_max", "trials", "t0", "tf", "mode", "base_seed",
                 "improvement_threshold", "seed_top_n")


class ConfigError(ValueError):
    pass


def load_document(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return doc


def default_document() -> dict:
    cfg = CampaignConfig()
    return {
        "plant": cfg.plant.to_dict(),
        "bounds": {"control_min": cfg.bounds.lower, "control_max": cfg.bounds.upper,
                   **cfg.limits.to_dict()},
        "integrator": cfg.integrator.to_dict(),
        "de": cfg.de.to_dict(),
        "campaign": {k: getattr(cfg, k) for k in CAMPAIGN_KEYS},
    }


def _num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _unknown(section: str, d: dict, allowed) -> list[str]:
    return [f"{section}: unknown key {k!r}" for k in d if k not in allowed]


def _check_plant(d: dict) -> list[str]:
    out = _unknown("plant", d, ("mu", "rho", "nu", "gamma"))
    for k in ("mu", "rho", "nu"):
        if k in d and not (_num(d[k]) and d[k] >= 0):
            out.append(f"plant.{k} must be a non-negative number")
    if "gamma" in d and not (_num(d["gamma"]) and d["gamma"] > 0):
        out.append("plant.gamma must be positive")
    return out


def _pair(x) -> bool:
    return isinstance(x, (list, tuple)) and len(x) == 2 and all(_num(v) for v in x)


def _check_bounds(d: dict) -> list[str]:
    out = _unknown("bounds", d, ("control_min", "control_max", "omega_max", "p", "q"))
    m, M = d.get("control_min", -4.0), d.get("control_max", 4.0)
    if not (_num(m) and _num(M)):
        out.append("bounds.control_min and control_max must be numbers")
    elif m >= M:
        out.append(f"bounds: control_min ({m}) must be below control_max ({M})")
    if "omega_max" in d and not (_num(d["omega_max"]) and d["omega_max"] > 0):
        out.append("bounds.omega_max must be positive")
    for name in ("p", "q"):
        if name not in d:
            continue
        if not _pair(d[name]):
            out.append(f"bounds.{name} must be a [min, max] pair")
            continue
        lo, hi = d[name]
        if not 0 < lo <= hi:
            out.append(f"bounds.{name} must satisfy 0 < min <= max")
        if hi > 1:
            out.append(f"bounds.{name} upper bound {hi} exceeds 1")
    return out


def _check_integrator(d: dict) -> list[str]:
    fields = [f.name for f in dataclasses.fields(IntegratorConfig)]
    out = _unknown("integrator", d, fields)
    for k in ("abs_tol", "rel_tol", "initial_step", "max_step", "event_tol_time"):
        if k in d and not (_num(d[k]) and d[k] > 0):
            out.append(f"integrator.{k} must be positive")
    for k in ("max_event_bisections", "max_events"):
        if k in d and not (isinstance(d[k], int) and d[k] >= 1):
            out.append(f"integrator.{k} must be an integer >= 1")
    return out


def _check_de(d: dict) -> list[str]:
    fields = [f.name for f in dataclasses.fields(DeConfig)]
    out = _unknown("de", d, fields)
    ps = d.get("population_size")
    if ps is not None and not (isinstance(ps, int) and ps >= 4):
        out.append("de.population_size must be an integer >= 4")
    mg = d.get("max_generations", 1)
    if not (isinstance(mg, int) and mg >= 0):
        out.append("de.max_generations must be a non-negative integer")
    f = d.get("mutation", 0.5)
    lo, hi = (f, f) if _num(f) else (tuple(f) if _pair(f) else (None, None))
    if lo is None or not 0 <= lo <= hi <= 2:
        out.append("de.mutation must be a number or [lo, hi] pair within [0, 2]")
    cr = d.get("crossover", 0.7)
    if not (_num(cr) and 0 <= cr <= 1):
        out.append("de.crossover must lie in [0, 1]")
    if d.get("strategy", STRATEGIES[0]) not in STRATEGIES:
        out.append(f"de.strategy must be one of {', '.join(STRATEGIES)}")
    if "jobs" in d and not (isinstance(d["jobs"], int) and d["jobs"] >= 1):
        out.append("de.jobs must be an integer >= 1")
    return out


def _check_campaign(d: dict) -> list[str]:
    out = _unknown("campaign", d, CAMPAIGN_KEYS)
    kmin, kmax = d.get("k_min", 2), d.get("k_max", 10)
    if not (isinstance(kmin, int) and isinstance(kmax, int) and 1 <= kmin <= kmax):
        out.append(f"campaign: need integers 1 <= k_min <= k_max, got {kmin}, {kmax}")
    trials = d.get("trials", 1)
    if not (isinstance(trials, int) and trials >= 1):
        out.append("campaign.trials must be an integer >= 1")
    t0, tf = d.get("t0", 0.0), d.get("tf", 100.0)
    if not (_num(t0) and _num(tf) and tf > t0):
        out.append("campaign: need tf > t0")
    if d.get("mode", "iterative") not in ("iterative", "noniterative"):
        out.append("campaign.mode must be 'iterative' or 'noniterative'")
    thr = d.get("improvement_threshold", 0.0)
    if thr is not None and not _num(thr):
        out.append("campaign.improvement_threshold must be a number or null")
    return out


def _check_control(d: dict) -> list[str]:
    if "vector" in d:
        k = d.get("harmonics")
        if not (isinstance(k, int) and k >= 1):
            return ["control.harmonics must be an integer >= 1 alongside control.vector"]
        v = d["vector"]
        if not (isinstance(v, list) and all(_num(x) for x in v)):
            return ["control.vector must be a list of numbers"]
        if len(v) != 2 * k + 2:
            return [f"control.vector needs {2 * k + 2} entries for {k} harmonics"]
        return []
    need = ("a0", "a", "b", "omega")
    if not all(k in d for k in need):
        return ["control needs either harmonics + vector or a0, a, b, omega"]
    if not (isinstance(d["a"], list) and isinstance(d["b"], list) and len(d["a"]) == len(d["b"])
            and all(_num(x) for x in d["a"] + d["b"]) and _num(d["a0"])):
        return ["control.a and control.b must be equal-length numeric lists"]
    if not (_num(d["omega"]) and d["omega"] > 0):
        return ["control.omega must be positive"]
    return []


def validate(doc: dict) -> list[str]:
    """Every schema violation in ``doc``; an empty list means the config is usable."""
    if not isinstance(doc, dict):
        return ["config must be a JSON object"]
    out = [f"unknown section {k!r}" for k in doc if k not in SECTIONS]
    checks = {"plant": _check_plant, "bounds": _check_bounds, "integrator": _check_integrator,
              "de": _check_de, "campaign": _check_campaign, "control": _check_control}
    for name, check in checks.items():
        section = doc.get(name, {})
        if not isinstance(section, dict):
            out.append(f"section {name!r} must be an object")
            continue
        if name == "control" and not section:
            continue
        out.extend(check(section))
    if not out:
        # cross-section constraints the per-section checks cannot see
        try:
            build_config(doc)
        except (TypeError, ValueError) as exc:
            out.append(str(exc))
    return out


def build_config(doc: dict, **overrides) -> CampaignConfig:
    """CampaignConfig from a validated document plus CLI-style overrides
    (``seed``, ``trials``, ``k_min``, ``k_max``, ``mode``, ``jobs``; ``None`` = keep).
    """
    b = doc.get("bounds", {})
    p, q = b.get("p", [SearchLimits.p_min, SearchLimits.p_max]), b.get(
        "q", [SearchLimits.q_min, SearchLimits.q_max])
    limits = SearchLimits(b.get("omega_max", SearchLimits.omega_max), p[0], p[1], q[0], q[1])
    de = DeConfig.from_dict(doc.get("de", {}))
    if overrides.get("jobs") is not None:
        de = dataclasses.replace(de, jobs=overrides["jobs"])
    camp = dict(doc.get("campaign", {}))
    mapping = {"seed": "base_seed", "trials": "trials", "k_min": "k_min", "k_max": "k_max",
               "mode": "mode"}
    for src, dst in mapping.items():
        if overrides.get(src) is not None:
            camp[dst] = overrides[src]
    return CampaignConfig(
        plant=CapsuleParams.from_dict(doc.get("plant", {})),
        bounds=ControlBounds(b.get("control_min", -4.0), b.get("control_max", 4.0)),
        limits=limits,
        integrator=IntegratorConfig.from_dict(doc.get("integrator", {})),
        de=de,
        **camp,
    )


def control_from_spec(spec: dict, config: CampaignConfig) -> FourierControl:
    """FourierControl from a ``control`` section (decision vector or raw coefficients)."""
    from .campaign import vector_to_control

    bad = _check_control(spec)
    if bad:
        raise ConfigError("; ".join(bad))
    if "vector" in spec:
        return vector_to_control(spec["vector"], spec["harmonics"], config)
    return FourierControl.from_dict(spec)
