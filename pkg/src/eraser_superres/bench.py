"""Michelson interferometer feeding M polarizer-projected detector ports.

Each detector port is described by a projection phase ``chi``; at a 45 degree
polarizer its mean intensity is ``(I0 / 2M) * (1 + cos(phi - chi))``.  The
four-block layout groups the ports in blocks of two complementary
outputs whose ``chi`` values differ by pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import ConfigError
from .polarization import JonesVector, intensity, polarizer_project, retarder_phase

TWO_PI = 2.0 * math.pi
QUARTER_PI = math.pi / 4.0

# Blocks whose port numbering is inverted relative to the others: port 1 sees
# the dark fringe at phi == xi (1 - cos(phi - xi)).
_INVERTED_BLOCKS = frozenset({"C"})


def wrap_phase(x):
    """Map angles onto [0, 2pi)."""
    y = np.mod(x, TWO_PI)
    if np.ndim(y) == 0:
        y = float(y)
        return 0.0 if y >= TWO_PI else y
    return np.where(y >= TWO_PI, 0.0, y)


@dataclass(frozen=True)
class SourceSpec:
    """CW source; stores the intensity ``i0`` and derives the field amplitude."""

    i0: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.i0) or self.i0 < 0:
            raise ConfigError(f"source intensity must be finite and >= 0, got {self.i0!r}")

    @property
    def e0(self) -> float:
        return math.sqrt(self.i0)

    @classmethod
    def from_amplitude(cls, e0: float) -> "SourceSpec":
        return cls(i0=e0 * e0)


@dataclass(frozen=True)
class BlockSpec:
    label: str
    xi: float = 0.0

    def __post_init__(self):
        if not self.label:
            raise ConfigError("block label must be nonempty")
        if not (0.0 <= self.xi < TWO_PI):
            raise ConfigError(f"block {self.label}: xi must lie in [0, 2pi), got {self.xi!r}")


@dataclass(frozen=True)
class PortSpec:
    block: str
    index: int
    chi: float
    theta: float = QUARTER_PI

    @property
    def name(self) -> str:
        if len(self.block) == 1:
            return f"{self.block}{self.index}"
        return f"{self.block}:{self.index}"


@dataclass(frozen=True)
class BenchConfig:
    source: SourceSpec = field(default_factory=SourceSpec)
    m: int = 8
    blocks: tuple[BlockSpec, ...] = ()
    theta: float = QUARTER_PI
    grid_points: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ConfigError(f"port count M must be a positive integer, got {self.m!r}")
        if self.grid_points < 16:
            raise ConfigError(f"grid_points must be >= 16, got {self.grid_points}")
        if not math.isfinite(self.theta):
            raise ConfigError("polarizer angle must be finite")
        seen = set()
        for b in self.blocks:
            if b.label in seen:
                raise ConfigError(f"duplicate block label {b.label!r}")
            seen.add(b.label)
        if self.m < 2 * len(self.blocks):
            raise ConfigError(
                f"M = {self.m} cannot feed {len(self.blocks)} blocks of two ports"
            )

    @property
    def phis(self) -> np.ndarray:
        return phase_grid(self.grid_points)


def phase_grid(n: int) -> np.ndarray:
    """``n`` equally spaced phases on [0, 2pi), endpoint excluded."""
    return TWO_PI * np.arange(n) / n


def four_block_config(xi1: float = QUARTER_PI, xi2: float = QUARTER_PI, *,
                i0: float = 1.0, m: int = 8, theta: float = QUARTER_PI,
                grid_points: int = 4096) -> BenchConfig:
    """The four-block A/B/C/D layout; block A is the +pi/2 shifted reference."""
    blocks = (
        BlockSpec("A", math.pi / 2),
        BlockSpec("B", 0.0),
        BlockSpec("C", xi1),
        BlockSpec("D", xi2),
    )
    return BenchConfig(SourceSpec(i0), m, blocks, theta, grid_points)


def michelson_output(source: SourceSpec, phi) -> JonesVector:
    amp = 1j * source.e0 / math.sqrt(2.0)
    return JonesVector(amp * np.ones_like(np.asarray(phi, dtype=float)), amp * np.exp(1j * np.asarray(phi)))


def block_ports(block: BlockSpec, theta: float = QUARTER_PI) -> tuple[PortSpec, PortSpec]:
    bright, dark = wrap_phase(block.xi), wrap_phase(block.xi + math.pi)
    if block.label in _INVERTED_BLOCKS:
        bright, dark = dark, bright
    return (PortSpec(block.label, 1, bright, theta), PortSpec(block.label, 2, dark, theta))


def port_phase_table(config: BenchConfig) -> list[PortSpec]:
    if not config.blocks:
        raise ConfigError("port table needs at least one block")
    ports: list[PortSpec] = []
    for b in config.blocks:
        ports.extend(block_ports(b, config.theta))
    return ports


def _check_m(m) -> None:
    if m < 1:
        raise ConfigError(f"port count M must be >= 1, got {m}")


def port_amplitude(port: PortSpec, source: SourceSpec, m: int, phi):
    """Field amplitude at one detector, up to a global phase factor.

    The M-way division leaves ``E0 / sqrt(2M)`` per basis component; the
    interferometer phase rides on the horizontal part and the block's wave
    plate puts ``chi`` on the vertical part before projection.
    """
    _check_m(m)
    phi = np.asarray(phi, dtype=float)
    amp = 1j * source.e0 / math.sqrt(2.0 * m)
    local = JonesVector(amp * np.exp(1j * phi), amp * np.ones_like(phi))
    return polarizer_project(retarder_phase(local, port.chi), port.theta)


def port_intensity(port: PortSpec, source: SourceSpec, m: int, phi):
    _check_m(m)
    s = math.sin(2.0 * port.theta)
    half = 0.5 * (np.asarray(phi, dtype=float) - port.chi)
    # (1 - s) + 2s cos^2 stays accurate near the dark fringe, unlike 1 + s*cos
    out = source.i0 / (2.0 * m) * ((1.0 - s) + 2.0 * s * np.cos(half) ** 2)
    return float(out) if np.ndim(out) == 0 else out


def port_traces(config: BenchConfig, phis=None) -> dict[str, np.ndarray]:
    phis = config.phis if phis is None else phis
    return {
        p.name: port_intensity(p, config.source, config.m, phis)
        for p in port_phase_table(config)
    }


def total_detected_power(config: BenchConfig, phi):
    ports: Sequence[PortSpec] = port_phase_table(config)
    total = sum(port_intensity(p, config.source, config.m, phi) for p in ports)
    return total


def field_intensity(port: PortSpec, source: SourceSpec, m: int, phi):
    """``|port_amplitude|^2``; independent of the closed-form intensity path."""
    return intensity(port_amplitude(port, source, m, phi))
