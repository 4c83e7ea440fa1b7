"""Key=value scenario descriptions and CSV output."""

from __future__ import annotations

import csv
import io
import math
import shlex

import numpy as np

from .bounds import BoundResult
from .harness import Scenario, SweepResult

# config key -> (Scenario field, converter)
KEYS = {
    "scheme": ("scheme", str),
    "nt": ("nt", int),
    "nr": ("nr", int),
    "na": ("na", int),
    "mod": ("modulation", str),
    "detector": ("detector", str.lower),
    "tmld_c": ("tmld_c", float),
    "snr": ("snr_db", None),
    "seed": ("seed", int),
    "errors": ("target_errors", int),
    "max_bits": ("max_bits", lambda v: int(float(v))),
    "batch": ("batch", int),
}

DEFAULTS = {"nr": "4", "mod": "psk4", "snr": "0:2:20"}


class ConfigError(ValueError):
    pass


def parse_snr(text: str) -> tuple[float, ...]:
    """``start:step:stop`` (stop inclusive) or a comma-separated list, in dB."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"snr: expected start:step:stop, got {text!r}")
        start, step, stop = map(float, parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"snr: bad range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(np.round(start + i * step, 10)) for i in range(count))
    return tuple(float(v) for v in text.split(",") if v.strip())


def tokenize(text: str) -> dict[str, str]:
    items: dict[str, str] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        for tok in shlex.split(line):
            if "=" not in tok:
                raise ConfigError(f"expected key=value, got {tok!r}")
            key, value = tok.split("=", 1)
            key = key.strip().lower().replace("-", "_")
            if key not in KEYS:
                raise ConfigError(f"unknown key {key!r}; known keys: {', '.join(KEYS)}")
            items[key] = value.strip()
    return items


def parse_config(text: str, **overrides) -> Scenario:
    """Build a validated :class:`Scenario` from ``key=value`` text.

    ``overrides`` use config key names and win over the text.
    """
    items = dict(DEFAULTS)
    items.update(tokenize(text))
    items.update({k: str(v) for k, v in overrides.items() if v is not None})
    for required in ("scheme", "nt"):
        if required not in items:
            raise ConfigError(f"missing required key {required!r}")
    if items["scheme"].lower() == "gsm" and "na" not in items:
        raise ConfigError("key 'na' is required when scheme=gsm")
    kwargs = {}
    for key, value in items.items():
        name, conv = KEYS[key]
        try:
            kwargs[name] = parse_snr(value) if key == "snr" else conv(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from None
    try:
        return Scenario(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


SWEEP_COLUMNS = ["snr_db", "bits", "bit_errors", "spatial_errors", "symbol_errors", "ber",
                 "mults_per_detection", "converged", "classic_ub", "improved_ub"]
BOUND_COLUMNS = ["snr_db", "classic_ub", "improved_ub", "p_signal", "p_spatial", "p_joint", "method"]
MAP_COLUMNS = ["input_bits", "active_TAs", "symbol_re", "symbol_im"]
COMPLEXITY_COLUMNS = ["nt", "n", "detector", "mults"]


def _write(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def emit_csv(result) -> str:
    """Render a sweep, a bound curve, a mapping table or complexity rows as CSV."""
    if isinstance(result, SweepResult):
        bounds = {b.snr_db: b for b in (result.bounds or [])}
        rows = []
        for p in result.points:
            b = bounds.get(p.snr_db)
            rows.append([p.snr_db, p.bits, p.bit_errors, p.spatial_errors, p.symbol_errors, p.ber,
                         p.mults, p.converged, b and min(b.classic_ub, 1.0),
                         b and min(b.improved_ub, 1.0)])
        return _write(SWEEP_COLUMNS, rows)
    result = list(result)
    if result and isinstance(result[0], BoundResult):
        # bounds are reported clipped to 1
        return _write(BOUND_COLUMNS, [[b.snr_db, min(b.classic_ub, 1.0), min(b.improved_ub, 1.0),
                                       min(b.p_signal, 1.0), min(b.p_spatial, 1.0),
                                       min(b.p_joint, 1.0), b.method] for b in result])
    if result and len(result[0]) == 3 and isinstance(result[0][2], complex):
        # round away float noise such as 6e-17 left by the rotation
        return _write(MAP_COLUMNS, [[bits, pat, round(s.real, 12) + 0.0, round(s.imag, 12) + 0.0]
                                    for bits, pat, s in result])
    if result and len(result[0]) == 4:
        return _write(COMPLEXITY_COLUMNS, result)
    return ""
