"""Line-oriented bench description format.

Example document::

    # four eraser blocks
    source intensity=1.0
    ports M=8
    polarizer theta_deg=45
    grid points=4096
    block A xi_deg=90
    block B xi_deg=0
    block C xi_deg=45
    block D xi_deg=45

Angles are degrees at this boundary and radians everywhere else.  ``xi_rad``
and ``theta_rad`` are accepted too; ``serialize`` falls back to them when no
degree literal converts back to the exact same radian float.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bench import TWO_PI, BenchConfig, BlockSpec, SourceSpec, port_phase_table, wrap_phase
from .exceptions import ConfigError

ERROR = "error"
WARNING = "warning"

_REAL = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?\Z")
_INT = re.compile(r"[+-]?\d+\Z")
_LABEL = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_TOKEN = re.compile(r"\S+")

DEFAULT_THETA_DEG = 45.0
DEFAULT_GRID = 4096

# directive -> (allowed keys, required keys)
_DIRECTIVES = {
    "source": ({"intensity"}, {"intensity"}),
    "ports": ({"M"}, {"M"}),
    "polarizer": ({"theta_deg", "theta_rad"}, None),
    "grid": ({"points"}, {"points"}),
    "block": ({"xi_deg", "xi_rad"}, None),
}


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    severity: str
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass
class ConfigDocument:
    text: str
    config: Optional[BenchConfig]
    diagnostics: list[Diagnostic]
    positions: dict[str, tuple[int, int]] = field(default_factory=dict)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == ERROR]

    @property
    def ok(self) -> bool:
        return self.config is not None and not self.errors

    def validate(self, requested_order: int) -> list[Diagnostic]:
        if self.config is None:
            return list(self.errors)
        return validate(self.config, requested_order, self.positions)


class _Line:
    def __init__(self, lineno: int, raw: str):
        self.lineno = lineno
        body = raw.split("#", 1)[0]
        self.tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]


def _parse_number(text: str, integer: bool):
    if integer:
        return int(text) if _INT.match(text) else None
    return float(text) if _REAL.match(text) else None


def parse(text: str) -> ConfigDocument:
    diags: list[Diagnostic] = []
    positions: dict[str, tuple[int, int]] = {}
    values: dict[str, float] = {}
    blocks: list[tuple[str, float, int, int]] = []

    def err(line, col, msg):
        diags.append(Diagnostic(line, col, ERROR, msg))

    if text.startswith("\ufeff"):
        text = text[1:]
    lines = text.replace("\r\n", "\n").split("\n")
    for lineno, raw in enumerate(lines, start=1):
        line = _Line(lineno, raw)
        if not line.tokens:
            continue
        (word, col), rest = line.tokens[0], line.tokens[1:]
        if word not in _DIRECTIVES:
            err(lineno, col, f"unknown directive {word!r}")
            continue
        label = None
        if word == "block":
            if not rest or "=" in rest[0][0]:
                err(lineno, col + len(word), "block needs a label")
                continue
            label, label_col = rest[0]
            rest = rest[1:]
            if not _LABEL.match(label):
                err(lineno, label_col, f"invalid block label {label!r}")
                continue
            key = f"block:{label}"
        else:
            key = word
        if key in positions:
            what = f"block label {label!r}" if label else f"directive {word!r}"
            err(lineno, label_col if label else col, f"duplicate {what}")
            continue

        allowed, required = _DIRECTIVES[word]
        fields: dict[str, tuple[float, int]] = {}
        bad = False
        for tok, tcol in rest:
            name, eq, val = tok.partition("=")
            if not eq:
                err(lineno, tcol, f"expected key=value, got {tok!r}")
                bad = True
                continue
            if name not in allowed:
                err(lineno, tcol, f"unknown key {name!r} for {word}")
                bad = True
                continue
            if name in fields:
                err(lineno, tcol, f"duplicate key {name!r}")
                bad = True
                continue
            vcol = tcol + len(name) + 1
            integer = name in ("M", "points")
            num = _parse_number(val, integer)
            if num is None:
                kind = "integer" if integer else "real number"
                err(lineno, vcol, f"expected {kind} for {name}, got {val!r}")
                bad = True
                continue
            fields[name] = (num, vcol)
        if bad:
            continue
        if required is None:
            if len(fields) != 1:
                err(lineno, col, f"{word} needs exactly one of {', '.join(sorted(allowed))}")
                continue
        else:
            missing = required - fields.keys()
            if missing:
                err(lineno, col, f"{word} is missing {', '.join(sorted(missing))}")
                continue

        positions[key] = (lineno, col)
        if word == "source":
            v, vcol = fields["intensity"]
            if not math.isfinite(v) or v < 0:
                err(lineno, vcol, "source intensity must be finite and >= 0")
            values["intensity"] = v
        elif word == "ports":
            v, vcol = fields["M"]
            if v < 1:
                err(lineno, vcol, "M must be >= 1")
            values["M"] = v
        elif word == "grid":
            v, vcol = fields["points"]
            if v < 16:
                err(lineno, vcol, "grid points must be >= 16")
            values["points"] = v
        elif word == "polarizer":
            (name, (v, vcol)), = fields.items()
            theta = math.radians(v) if name == "theta_deg" else v
            if not math.isfinite(theta):
                err(lineno, vcol, "polarizer angle must be finite")
            values["theta"] = theta
        else:
            (name, (v, vcol)), = fields.items()
            xi = math.radians(v) if name == "xi_deg" else v
            if not (0.0 <= xi < TWO_PI):
                rng = "[0, 360) degrees" if name == "xi_deg" else "[0, 2pi) radians"
                err(lineno, vcol, f"xi must lie in {rng}")
            blocks.append((label, xi, lineno, col))

    last = max(len(lines), 1)
    for need in ("source", "ports"):
        if need not in positions:
            err(last, 1, f"missing {need}")
    if "M" in values and values["M"] < 2 * len(blocks):
        line, col = positions["ports"]
        err(line, col, f"M = {values['M']} cannot feed {len(blocks)} blocks of two ports")

    config = None
    if not any(d.severity == ERROR for d in diags):
        try:
            config = BenchConfig(
                source=SourceSpec(values["intensity"]),
                m=int(values["M"]),
                blocks=tuple(BlockSpec(lab, xi) for lab, xi, _, _ in blocks),
                theta=values.get("theta", math.radians(DEFAULT_THETA_DEG)),
                grid_points=int(values.get("points", DEFAULT_GRID)),
            )
        except ConfigError as exc:  # pragma: no cover - all cases are pre-checked
            err(1, 1, str(exc))
    diags.sort(key=lambda d: (d.line, d.column))
    return ConfigDocument(text, config, diags, positions)


def _angle_field(prefix: str, rad: float) -> str:
    deg = math.degrees(rad)
    candidates = [deg]
    up = down = deg
    for _ in range(4):
        up, down = math.nextafter(up, math.inf), math.nextafter(down, -math.inf)
        candidates += [up, down]
    for c in candidates:
        if math.radians(float(repr(c))) == rad:
            return f"{prefix}_deg={c!r}"
    return f"{prefix}_rad={rad!r}"


def serialize(config: BenchConfig) -> str:
    lines = [
        f"source intensity={config.source.i0!r}",
        f"ports M={config.m}",
        f"polarizer {_angle_field('theta', config.theta)}",
        f"grid points={config.grid_points}",
    ]
    lines += [f"block {b.label} {_angle_field('xi', b.xi)}" for b in config.blocks]
    return "\n".join(lines) + "\n"


def equally_spaced(chis, tol: float = 1e-9) -> bool:
    """True when the phases form a rotated copy of ``{2 pi k / N}``."""
    chis = np.sort(wrap_phase(np.asarray(chis, dtype=float)))
    n = len(chis)
    gaps = np.diff(np.concatenate((chis, [chis[0] + TWO_PI])))
    return bool(np.all(np.abs(gaps - TWO_PI / n) < tol))


def validate(config: BenchConfig, requested_order: int,
             positions: Optional[dict[str, tuple[int, int]]] = None) -> list[Diagnostic]:
    positions = positions or {}

    def at(key):
        return positions.get(key, (1, 1))

    n = requested_order
    out: list[Diagnostic] = []
    if n < 1:
        out.append(Diagnostic(1, 1, ERROR, f"order N must be >= 1, got {n}"))
        return out
    if config.m < n:
        out.append(Diagnostic(*at("ports"), ERROR,
                              f"M < N: M = {config.m} cannot support order N = {n} (M >= N is required)"))
    if config.grid_points < 16 * n:
        out.append(Diagnostic(*at("grid"), ERROR,
                              f"grid points {config.grid_points} < 16*N = {16 * n}; peaks would be unresolved"))
    if not (0.0 <= config.theta <= math.pi / 2):
        out.append(Diagnostic(*at("polarizer"), ERROR,
                              f"polarizer angle {math.degrees(config.theta)!r} deg outside [0, 90]"))
    if config.blocks:
        ports = port_phase_table(config)
        first = at(f"block:{config.blocks[0].label}")
        if len(ports) < n:
            out.append(Diagnostic(*first, WARNING,
                                  f"blocks provide {len(ports)} ports; literal mode cannot reach order {n}"))
        elif not equally_spaced([p.chi for p in ports[:n]]):
            out.append(Diagnostic(*first, WARNING,
                                  "non-canonical xi: product will not match sin^2(N phi/2)"))
    out.sort(key=lambda d: (d.line, d.column))
    return out


def four_block_document(xi1_deg: float = 45.0, xi2_deg: float = 45.0) -> str:
    return (
        "# Michelson bench, four eraser blocks\n"
        "source intensity=1.0\n"
        "ports M=8\n"
        "polarizer theta_deg=45\n"
        "grid points=4096\n"
        "block A xi_deg=90\n"
        "block B xi_deg=0\n"
        f"block C xi_deg={xi1_deg!r}\n"
        f"block D xi_deg={xi2_deg!r}\n"
    )

