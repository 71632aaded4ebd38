"""YAML run configuration with explicit units and line-numbered diagnostics.

Rates take a unit suffix, ``"2.5 Gamma"`` or ``"1.6 MHz"`` (meaning 2pi x 1.6
MHz). Times take ``"ns"``, ``"us"``, ``"ms"``, ``"s"`` or ``"tau"`` (1/Gamma). Resolved values are
stored in units of Gamma and 1/Gamma.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .units import GAMMA_MHZ_RB85_D1

_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]+)\s*$")
RATE_UNITS = ("Gamma", "MHz")
TIME_UNITS = ("ns", "us", "ms", "s", "tau")
_NS = {"ns": 1.0, "us": 1e3, "ms": 1e6, "s": 1e9}

# kind, default
SCHEMA = {
    "atom": {
        "F_g": ("int", 2),
        "F_s": ("int", 3),
        "F_e": ("int", 3),
        "gamma_MHz": ("float", GAMMA_MHZ_RB85_D1),
        "branch_to_g": ("float", 5.0 / 9.0),
        "normalization": (("stretched", "average"), "stretched"),
    },
    "medium": {
        "od": ("float", 19.0),
        "gamma_ge": ("rate", "0.5 Gamma"),
        "gamma_gs": ("rate_or_calibrate", "calibrate"),
        "target_T_fw": ("float", 0.929),
    },
    "coupling": {
        "rabi_c": ("rate", "2.5 Gamma"),
        "delta_c": ("rate", "0 MHz"),
    },
    "probe": {
        "direction": (("forward", "backward", "both"), "both"),
        "detuning_min": ("rate", "-18 MHz"),
        "detuning_max": ("rate", "22 MHz"),
        "points": ("int", 401),
    },
    "odscan": {
        "od_min": ("float", 0.0),
        "od_max": ("float", 30.0),
        "od_step": ("float", 2.0),
        "pulse_integrated": ("bool", True),
    },
    "pulse": {
        "bandwidth": ("rate", "1.6 MHz"),
        "shape": (("gaussian", "exp-decay"), "gaussian"),
        "dt": ("time", "0.004 tau"),
    },
    "storage": {
        "od": ("float", 54.0),
        "ramp": ("time", "500 ns"),
        "hold": ("time", "200 ns"),
        "z_points": ("int", 256),
        "direction": (("forward", "backward", "both"), "both"),
        "store": ("bool", True),
    },
    "qubit": {
        "states": ("str_list", ["H", "V", "R", "D"]),
        "phase_LR": ("float", 0.0),
        "rail_loss": ("float_pair", [1.0, 1.0]),
    },
    "tomography": {
        "state": ("str", "H"),
        "direction": (("forward", "backward"), "forward"),
        "n_total": ("int", 10000),
        "trials": ("int", 1000),
        "poisson": ("bool", True),
        "counts": ("counts", None),
    },
    "coincidence": {
        "tags": ("str", None),
        "pairs": ("int", 100000),
        "duration": ("time", "100 s"),
        "offset": ("time", "1000 ns"),
        "bin_width": ("time", "1.6 ns"),
        "window": ("time", "2000 ns"),
        "jitter": ("time", "0.3 ns"),
        "gate_min": ("time", None),
        "gate_max": ("time", None),
    },
}


@dataclass
class Config:
    sections: dict
    lines: dict = field(default_factory=dict)
    source: str = "<defaults>"

    def __getitem__(self, section):
        return self.sections[section]

    def line(self, section, key=None):
        return self.lines.get((section, key))


def parse_quantity(text, allowed, line=None):
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        raise ConfigError(f"value {text!r} needs an explicit unit, one of {allowed}", line)
    m = _QTY.match(str(text))
    if not m:
        raise ConfigError(f"cannot parse quantity {text!r}; expected '<number> <unit>'", line)
    value, unit = float(m.group(1)), m.group(2)
    if unit not in allowed:
        raise ConfigError(f"unit {unit!r} not allowed here; use one of {allowed}", line)
    return value, unit


def to_gamma(text, gamma_mhz, line=None):
    v, u = parse_quantity(text, RATE_UNITS, line)
    return v if u == "Gamma" else v / gamma_mhz


def to_tau(text, gamma_mhz, line=None):
    v, u = parse_quantity(text, TIME_UNITS, line)
    if u == "tau":
        return v
    ns = v * _NS[u]
    return ns * 1e-3 * 2.0 * math.pi * gamma_mhz


def _convert(kind, raw, gamma_mhz, line):
    if raw is None:
        return None
    if isinstance(kind, tuple):
        if raw not in kind:
            raise ConfigError(f"value {raw!r} not one of {kind}", line)
        return raw
    if kind == "int":
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"expected an integer, got {raw!r}", line)
        return raw
    if kind == "float":
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"expected a number, got {raw!r}", line)
        return float(raw)
    if kind == "bool":
        if not isinstance(raw, bool):
            raise ConfigError(f"expected true/false, got {raw!r}", line)
        return raw
    if kind == "str":
        if not isinstance(raw, str):
            raise ConfigError(f"expected a string, got {raw!r}", line)
        return raw
    if kind == "str_list":
        if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
            raise ConfigError("expected a list of strings", line)
        return list(raw)
    if kind == "float_pair":
        ok = isinstance(raw, list) and len(raw) == 2
        if not ok or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw):
            raise ConfigError("expected a list of two numbers", line)
        return [float(x) for x in raw]
    if kind == "counts":
        if not isinstance(raw, dict) or set(raw) != {"H", "V", "D", "R"}:
            raise ConfigError("counts must map exactly H, V, D, R to integers", line)
        for k, v in raw.items():
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ConfigError(f"count {k} must be a non-negative integer", line)
        return dict(raw)
    if kind == "rate":
        return to_gamma(raw, gamma_mhz, line)
    if kind == "rate_or_calibrate":
        return "calibrate" if raw == "calibrate" else to_gamma(raw, gamma_mhz, line)
    if kind == "time":
        return to_tau(raw, gamma_mhz, line)
    raise AssertionError(kind)


def _line_map(text):
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {exc}", mark.line + 1 if mark else None) from None
    lines = {}
    if root is None:
        return lines, None
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError("top level must be a mapping of sections", root.start_mark.line + 1)
    for knode, vnode in root.value:
        sec = knode.value
        lines[(sec, None)] = knode.start_mark.line + 1
        if isinstance(vnode, yaml.MappingNode):
            for k2, v2 in vnode.value:
                lines[(sec, k2.value)] = k2.start_mark.line + 1
    return lines, root


def loads(text, source="<string>") -> Config:
    lines, root = _line_map(text)
    data = yaml.safe_load(text) if root is not None else {}
    data = data or {}
    raw = {}
    for sec, body in data.items():
        ln = lines.get((sec, None))
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section {sec!r}; known: {sorted(SCHEMA)}", ln)
        if body is None:
            body = {}
        if not isinstance(body, dict):
            raise ConfigError(f"section {sec!r} must be a mapping", ln)
        for key in body:
            if key not in SCHEMA[sec]:
                raise ConfigError(
                    f"unknown key {sec}.{key}; known: {sorted(SCHEMA[sec])}", lines.get((sec, key))
                )
        raw[sec] = body
    gm_raw = raw.get("atom", {}).get("gamma_MHz", GAMMA_MHZ_RB85_D1)
    gamma_mhz = _convert("float", gm_raw, None, lines.get(("atom", "gamma_MHz")))
    if not gamma_mhz > 0:
        raise ConfigError("gamma_MHz must be positive", lines.get(("atom", "gamma_MHz")))
    out = {}
    for sec, keys in SCHEMA.items():
        out[sec] = {}
        for key, (kind, default) in keys.items():
            given = raw.get(sec, {})
            value = given[key] if key in given else default
            out[sec][key] = _convert(kind, value, gamma_mhz, lines.get((sec, key)))
    _check_ranges(out, lines)
    return Config(out, lines, source)


def _check_ranges(c, lines):
    def need(ok, sec, key, msg):
        if not ok:
            raise ConfigError(f"{sec}.{key}: {msg}", lines.get((sec, key)))

    need(c["medium"]["od"] >= 0, "medium", "od", "must be non-negative")
    need(c["medium"]["gamma_ge"] > 0, "medium", "gamma_ge", "must be positive")
    g = c["medium"]["gamma_gs"]
    need(g == "calibrate" or g >= 0, "medium", "gamma_gs", "must be non-negative")
    need(0 < c["medium"]["target_T_fw"] <= 1, "medium", "target_T_fw", "must lie in (0, 1]")
    need(c["coupling"]["rabi_c"] >= 0, "coupling", "rabi_c", "must be non-negative")
    p = c["probe"]
    need(p["points"] >= 2, "probe", "points", "need at least 2 points")
    need(p["detuning_max"] > p["detuning_min"], "probe", "detuning_max", "must exceed detuning_min")
    s = c["odscan"]
    need(s["od_step"] > 0, "odscan", "od_step", "must be positive")
    need(0 <= s["od_min"] <= s["od_max"], "odscan", "od_max", "need 0 <= od_min <= od_max")
    need(c["pulse"]["bandwidth"] > 0, "pulse", "bandwidth", "must be positive")
    need(c["pulse"]["dt"] > 0, "pulse", "dt", "must be positive")
    st = c["storage"]
    need(st["od"] >= 0, "storage", "od", "must be non-negative")
    need(st["ramp"] > 0, "storage", "ramp", "must be positive")
    need(st["hold"] >= 0, "storage", "hold", "must be non-negative")
    need(st["z_points"] >= 64, "storage", "z_points", "must be at least 64")
    t = c["tomography"]
    need(t["n_total"] > 0, "tomography", "n_total", "must be positive")
    need(t["trials"] >= 1, "tomography", "trials", "must be at least 1")
    co = c["coincidence"]
    need(co["bin_width"] > 0, "coincidence", "bin_width", "must be positive")
    need(co["window"] > co["bin_width"], "coincidence", "window", "must exceed bin_width")
    need(co["pairs"] >= 0, "coincidence", "pairs", "must be non-negative")
    need(co["duration"] > 0, "coincidence", "duration", "must be positive")
    for k in ("rail_loss",):
        need(all(0 <= x <= 1 for x in c["qubit"][k]), "qubit", k, "entries must lie in [0, 1]")


def load(path) -> Config:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return loads(text, str(path))


def defaults() -> Config:
    return loads("", "<defaults>")
