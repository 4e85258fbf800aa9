"""Experiment configuration: TOML loading and strict schema validation.

Unknown keys are rejected and every violation names the offending dotted
path, so typos fail before any compute starts.
"""

from __future__ import annotations

import math
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import ConfigError

_NUMBER = (int, float)

# schema entries: (type check, human description)
_DICTIONARY_KEYS = {
    "kind": (str, "dictionary kind"),
    "m": (int, "monomial degree"),
    "n": (int, "state dimension"),
    "gamma": (_NUMBER, "RBF width"),
    "centers": ((str, list), "'samples' or explicit center rows"),
    "ks": (list, "Hill state indices"),
    "ls": (list, "Hill exponents"),
    "target": (int, "sine-difference target state"),
    "parts": (list, "composite sub-dictionaries"),
}

_SCHEMA = {
    "system": {
        "name": (str, "benchmark name"),
        "n": (int, "network size"),
        "n_inter": (int, "interactions per state"),
        "seed": (int, "network draw seed"),
        "sigma_proc": (_NUMBER, "process-noise strength"),
        "coupling": (_NUMBER, "Kuramoto coupling"),
        "p_link": (_NUMBER, "link probability"),
    },
    "sampling": {
        "ts": (_NUMBER, "sampling period"),
        "pairs_per_trajectory": (int, "pairs per trajectory"),
        "trajectories": (int, "trajectory count"),
        "box": (list, "per-dimension [lo, hi] initial-condition box"),
        "seed": (int, "sampling seed"),
        "em_dt": (_NUMBER, "Euler-Maruyama substep"),
        "pair_layout": (str, "chained or disjoint"),
    },
    "noise": {
        "sigma_meas": (_NUMBER, "measurement-noise std"),
    },
    "method": {
        "kind": (str, "main or dual"),
        "m": (int, "lift degree"),
        "m_f": (int, "field degree"),
        "branch": (str, "logm branch policy: error or modulus"),
        "rcond": (_NUMBER, "pseudoinverse cutoff"),
        "rescale": ((str, int, float), "'auto', a positive factor, or 'none'"),
        "extra": (dict, "extra library dictionary (augmented main)"),
        "dictionary": (dict, "dual lifting dictionary"),
        "library": (dict, "dual regression library"),
        "regression": {
            "mode": (str, "auto/ols/lasso/l1l2"),
            "lam": (_NUMBER, "overdetermined weight"),
            "rho": (_NUMBER, "underdetermined weight"),
            "max_iter": (int, "sweep budget"),
            "tol": (_NUMBER, "coefficient-update tolerance"),
            "standardize": (bool, "standardize columns"),
        },
    },
    "evaluate": {
        "predict": (bool, "emit predicted trajectories"),
        "predict_horizon": (_NUMBER, "prediction horizon in ts units"),
        "predict_points": (int, "prediction output points"),
    },
    "sweep": {
        "ts": (list, "sampling periods"),
        "sigma_meas": (list, "measurement-noise levels"),
        "sigma_proc": (list, "process-noise levels"),
        "repeats": (int, "seeds per grid point"),
        "metric": (str, "coefficients or field"),
    },
    "network": {
        "threshold": (_NUMBER, "operating-point threshold"),
    },
    "output": {
        "dir": (str, "output directory"),
    },
}


def _check_section(section: str, schema: dict, value, path: str):
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected a table")
    for key, sub in value.items():
        if key not in schema:
            known = ", ".join(sorted(schema))
            raise ConfigError(f"{path}.{key}: unknown key (known: {known})")
        spec = schema[key]
        if isinstance(spec, dict):
            _check_section(key, spec, sub, f"{path}.{key}")
            continue
        typ, desc = spec
        if typ is int:
            ok = isinstance(sub, int) and not isinstance(sub, bool)
        elif typ is bool:
            ok = isinstance(sub, bool)
        elif typ is _NUMBER:
            ok = isinstance(sub, _NUMBER) and not isinstance(sub, bool) \
                and math.isfinite(float(sub))
        else:
            ok = isinstance(sub, typ)
        if not ok:
            raise ConfigError(f"{path}.{key}: expected {desc}, got {sub!r}")
        if key in ("extra", "dictionary", "library"):
            _check_dictionary_spec(sub, f"{path}.{key}")


def _check_dictionary_spec(d: dict, path: str):
    if "kind" not in d:
        raise ConfigError(f"{path}: dictionary spec needs a 'kind'")
    for key, sub in d.items():
        if key not in _DICTIONARY_KEYS:
            known = ", ".join(sorted(_DICTIONARY_KEYS))
            raise ConfigError(f"{path}.{key}: unknown key (known: {known})")
        if key == "parts":
            for i, part in enumerate(sub):
                _check_dictionary_spec(part, f"{path}.parts[{i}]")


def validate_config(cfg: dict) -> dict:
    """Reject unknown sections/keys and wrongly typed values."""
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a table")
    for section, value in cfg.items():
        if section not in _SCHEMA:
            known = ", ".join(sorted(_SCHEMA))
            raise ConfigError(f"unknown section [{section}] (known: {known})")
        _check_section(section, _SCHEMA[section], value, section)
    return cfg


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with path.open("rb") as fh:
            cfg = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    return validate_config(cfg)
