"""Declarative parameter scans over the analytic quantities.

A scan file is INI-style::

    [scan]
    quantity = r_factor

    [axis.g]
    min = 1e-4
    max = 1
    points = 50
    spacing = log

    [fixed]
    theta = 1.49pi
    sigma = 1

Axes are expanded in file order, first axis outermost. Angles accept a
``pi`` suffix (``1.49pi``, ``pi/4``). The meter is fixed by ``sigma`` and
either ``d`` or ``g``.
"""

from __future__ import annotations

import configparser
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .analytics import snr_report
from .fisher import crb_report
from .meter import MeterConfig
from .noise import p_basis_p0_moments
from .quantum import OrthogonalSelection, state_from_angles

QUANTITIES = ("gamma", "eta", "lambda", "lambda_tilde", "eta_sigma", "r_factor",
              "fisher_ratio", "tradeoff", "crb_slack", "snr_p_basis")
VARIABLES = ("theta", "phi", "pre_theta", "pre_phi", "g", "d", "sigma", "J", "Jp")
DEFAULTS = {"theta": math.pi, "phi": 0.0, "pre_theta": math.pi / 2, "pre_phi": 0.0,
            "sigma": 1.0, "J": 0.0, "Jp": 0.0}


class SpecParseError(ValueError):
    """Malformed scan or validation config; the message names the location."""


def parse_number(text: str) -> float:
    """Float literal, optionally a multiple of pi (``1.3pi``, ``pi/4``, ``-0.5*pi``)."""
    t = text.strip().replace(" ", "")
    if "pi" in t:
        head, _, tail = t.partition("pi")
        head = head.rstrip("*")
        coef = {"": 1.0, "+": 1.0, "-": -1.0}.get(head)
        if coef is None:
            coef = float(head)
        den = 1.0
        if tail:
            if not tail.startswith("/"):
                raise ValueError(f"cannot parse {text!r}")
            den = float(tail[1:])
        val = coef * math.pi / den
    else:
        val = float(t)
    if not math.isfinite(val):
        raise ValueError(f"not finite: {text!r}")
    return val


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    points: int
    spacing: str = "linear"

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class ScanSpec:
    quantity: str
    axes: tuple[Axis, ...]
    fixed: dict = field(default_factory=dict)

    def points(self):
        """Parameter dicts in row-major order (first axis slowest)."""
        names = [a.name for a in self.axes]
        for combo in product(*(a.values() for a in self.axes)):
            yield {**DEFAULTS, **self.fixed, **dict(zip(names, map(float, combo)))}


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    in_section = False
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("["):
            if in_section and key is not None:
                return None
            in_section = s == f"[{section}]"
            if in_section and key is None:
                return n
        elif in_section and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return n
    return None


def _fail(text: str, section: str, key: str | None, msg: str):
    line = _line_of(text, section, key)
    where = f"line {line}: " if line else ""
    loc = f"[{section}]" + (f" {key}" if key else "")
    raise SpecParseError(f"{where}{loc}: {msg}")


def check_parameter(name: str, value: float) -> str | None:
    """Reason ``value`` is invalid for ``name``, or None."""
    if name not in VARIABLES:
        return f"unknown parameter (expected one of {', '.join(VARIABLES)})"
    if not math.isfinite(value):
        return "must be finite"
    if name in ("g", "d", "sigma") and value <= 0:
        return "must be > 0"
    if name in ("J", "Jp") and value < 0:
        return "must be >= 0"
    return None


def read_config(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep J / Jp case
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise SpecParseError(str(exc).replace("\n", " ")) from exc
    return cp


def parse_scan_spec(text: str, overrides: dict | None = None) -> ScanSpec:
    """Parse a scan file; ``overrides`` maps ``"section.key"`` to replacement strings."""
    cp = read_config(text)
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.rpartition(".")
        if not section:
            raise SpecParseError(f"override {dotted!r}: expected SECTION.KEY=VALUE")
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value)

    if not cp.has_section("scan"):
        raise SpecParseError("missing [scan] section")
    quantity = cp.get("scan", "quantity", fallback=None)
    if quantity not in QUANTITIES:
        _fail(text, "scan", "quantity", f"expected one of {', '.join(QUANTITIES)}, got {quantity!r}")

    axes = []
    for section in cp.sections():
        if not section.startswith("axis."):
            continue
        name = section[len("axis."):]
        if name not in VARIABLES:
            _fail(text, section, None, f"unknown axis variable {name!r}")
        sec = cp[section]
        try:
            lo, hi = parse_number(sec["min"]), parse_number(sec["max"])
        except KeyError as exc:
            _fail(text, section, None, f"missing {exc.args[0]}")
        except ValueError as exc:
            _fail(text, section, None, str(exc))
        try:
            points = int(sec.get("points", "0"))
        except ValueError:
            _fail(text, section, "points", "must be an integer")
        spacing = sec.get("spacing", "linear")
        if points < 2:
            _fail(text, section, "points", "must be >= 2")
        if not lo < hi:
            _fail(text, section, "max", "min must be < max")
        if spacing not in ("linear", "log"):
            _fail(text, section, "spacing", "must be 'linear' or 'log'")
        if spacing == "log" and lo <= 0:
            _fail(text, section, "min", "log spacing needs min > 0")
        for bound in (lo, hi):
            reason = check_parameter(name, bound)
            if reason:
                _fail(text, section, None, reason)
        axes.append(Axis(name, lo, hi, points, spacing))
    if not axes:
        raise SpecParseError("no [axis.<variable>] section")

    fixed = {}
    if cp.has_section("fixed"):
        for key, raw in cp["fixed"].items():
            try:
                val = parse_number(raw)
            except ValueError:
                _fail(text, "fixed", key, f"not a number: {raw!r}")
            reason = check_parameter(key, val)
            if reason:
                _fail(text, "fixed", key, reason)
            fixed[key] = val
    names = {a.name for a in axes}
    if {"g", "d"} <= names | set(fixed):
        raise SpecParseError("give the meter by either g or d, not both")
    if not ({"g", "d"} & (names | set(fixed))):
        raise SpecParseError("meter needs g or d (in [fixed] or as an axis)")
    return ScanSpec(quantity, tuple(axes), fixed)


def point_meter(params: dict) -> MeterConfig:
    if "g" in params:
        return MeterConfig.from_strength(params["g"], params["sigma"])
    return MeterConfig(params["d"], params["sigma"])


def evaluate(quantity: str, params: dict) -> tuple[float, str]:
    """Value of ``quantity`` at one parameter point and a status tag."""
    try:
        i = state_from_angles(params["pre_theta"], params["pre_phi"])
        f = state_from_angles(params["theta"], params["phi"])
        m = point_meter(params)
        if quantity == "snr_p_basis":
            return p_basis_p0_moments(i, f, m, params["Jp"]).snr, "ok"
        if quantity in ("fisher_ratio", "tradeoff", "crb_slack"):
            r = crb_report(i, f, m)
            return {"fisher_ratio": r.rhs, "tradeoff": r.tradeoff, "crb_slack": r.slack}[quantity], "ok"
        rep = snr_report(i, f, m)
        attr = "lambda_" if quantity == "lambda" else quantity
        return getattr(rep, attr), "ok"
    except OrthogonalSelection:
        return math.nan, "orthogonal_selection"
    except (ValueError, ArithmeticError) as exc:
        return math.nan, f"error:{type(exc).__name__}"


def _eval_star(args):
    return evaluate(*args)


def run_scan(spec: ScanSpec, workers: int = 1) -> tuple[list[str], list[list]]:
    """Header and rows (axis values, value, status) for every grid point."""
    pts = list(spec.points())
    jobs = [(spec.quantity, p) for p in pts]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_eval_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [evaluate(*job) for job in jobs]
    names = [a.name for a in spec.axes]
    header = names + [spec.quantity, "status"]
    rows = [[p[n] for n in names] + [v, s] for p, (v, s) in zip(pts, results)]
    return header, rows
