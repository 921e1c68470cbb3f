"""Nth-order intensity products over eraser ports and their closed form."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import fringes
from .bench import (
    QUARTER_PI,
    TWO_PI,
    BlockSpec,
    PortSpec,
    SourceSpec,
    block_ports,
    phase_grid,
    port_intensity,
    wrap_phase,
)
from .exceptions import DomainError, RequestError
from .fringes import FringeReport, Trace

EQUIVALENCE_TOL = 1e-12


@dataclass(frozen=True)
class CorrelationRequest:
    ports: tuple[PortSpec, ...]
    grid_points: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "ports", tuple(self.ports))
        if not self.ports:
            raise RequestError("correlation request needs at least one port")
        if self.grid_points < 1:
            raise RequestError("grid_points must be positive")

    @property
    def order_n(self) -> int:
        return len(self.ports)

    @property
    def phis(self) -> np.ndarray:
        return phase_grid(self.grid_points)


@dataclass(frozen=True)
class CorrelationReport:
    order_n: int
    trace: Trace
    normalized_trace: Trace
    closed_form_residual: float
    fringe: FringeReport

    def to_dict(self) -> dict:
        return {
            "order_n": self.order_n,
            "grid_points": len(self.trace),
            "peak_value": self.trace.peak,
            "closed_form_residual": self.closed_form_residual,
            "fringe": self.fringe.to_dict(),
        }


def _check_order(request: CorrelationRequest, m: int) -> None:
    if request.order_n > m:
        raise RequestError(f"M = {m} < N = {request.order_n}: M >= N is required")


def pair_correlation(block: BlockSpec, source: SourceSpec, m: int, phi, theta: float = QUARTER_PI):
    p1, p2 = block_ports(block, theta)
    return port_intensity(p1, source, m, phi) * port_intensity(p2, source, m, phi)


def _unit_product(ports: Sequence[PortSpec], phis: np.ndarray) -> np.ndarray:
    # per-port intensities at unit I0/M scale, each factor in [0, 1]
    unit = SourceSpec(1.0)
    out = np.ones_like(phis)
    for p in ports:
        out = out * port_intensity(p, unit, 1, phis)
    return out


def product_correlation(request: CorrelationRequest, source: SourceSpec, m: int) -> Trace:
    _check_order(request, m)
    phis = request.phis
    scale = (source.i0 / m) ** request.order_n
    return Trace(phis, scale * _unit_product(request.ports, phis))


def normalized_product(request: CorrelationRequest) -> Trace:
    """Peak-normalized product; the I0 and M prefactors cancel, so none underflow."""
    phis = request.phis
    return Trace(phis, _unit_product(request.ports, phis)).normalized()


def printed_eighth_order(xi1: float, xi2: float, source: SourceSpec, m: int, phi):
    phi = np.asarray(phi, dtype=float)
    pref = source.i0 ** 8 / (2.0 ** 12 * float(m) ** 8)
    out = pref * np.sin(2 * phi) ** 2 * np.sin(phi - xi1) ** 2 * np.sin(phi - xi2) ** 2
    return float(out) if out.ndim == 0 else out


def printed_general_product(xis: Sequence[float], source: SourceSpec, m: int, phi):
    """Printed generalized product with an explicit wave-plate phase list.

    Exploration only: the printed form carries two sine factors per listed
    phase, so it is not an order-``len(xis)`` intensity product.
    """
    phi = np.asarray(phi, dtype=float)
    n = len(xis)
    out = np.full_like(phi, source.i0 ** n / (2.0 ** n * float(m) ** n))
    for xi in xis:
        out = out * np.sin(phi) ** 2 * np.sin(phi - xi) ** 2
    return float(out) if out.ndim == 0 else out


def closed_form(order_n: int, source: SourceSpec, m: int, phi):
    """``I0^N / (2^N M^N) * sin^2(N phi / 2)`` with the printed prefactor."""
    if order_n < 1:
        raise DomainError(f"order must be >= 1, got {order_n}")
    phi = np.asarray(phi, dtype=float)
    pref = (source.i0 / (2.0 * m)) ** order_n
    out = pref * np.sin(0.5 * order_n * phi) ** 2
    return float(out) if out.ndim == 0 else out


def canonical_layout(order_n: int) -> np.ndarray:
    """Projection phases ``pi + 2 pi k / N`` whose product is ``prop. sin^2(N phi / 2)``."""
    if order_n < 1:
        raise DomainError(f"order must be >= 1, got {order_n}")
    k = np.arange(order_n)
    return wrap_phase(math.pi + TWO_PI * k / order_n)


def canonical_ports(order_n: int, theta: float = QUARTER_PI) -> list[PortSpec]:
    return [PortSpec("K", k + 1, float(chi), theta) for k, chi in enumerate(canonical_layout(order_n))]


def canonical_request(order_n: int, grid_points: int | None = None) -> CorrelationRequest:
    if grid_points is None:
        grid_points = default_grid(order_n)
    return CorrelationRequest(tuple(canonical_ports(order_n)), grid_points)


def default_grid(order_n: int) -> int:
    return max(4096, 64 * order_n)


def verify_equivalence(order_n: int, grid_points: int | None = None) -> float:
    """Max pointwise gap between the normalized canonical product and sin^2(N phi/2)."""
    if grid_points is None:
        grid_points = default_grid(order_n)
    if grid_points < 512:
        raise DomainError(f"equivalence check needs >= 512 grid points, got {grid_points}")
    request = canonical_request(order_n, grid_points)
    product = normalized_product(request)
    unit = SourceSpec(1.0)
    shape = Trace(request.phis, closed_form(order_n, unit, 1, request.phis)).normalized()
    return float(np.max(np.abs(product.values - shape.values)))


def correlation_report(request: CorrelationRequest, source: SourceSpec, m: int,
                       threshold: float = fringes.DEFAULT_THRESHOLD) -> CorrelationReport:
    trace = product_correlation(request, source, m)
    norm = normalized_product(request)
    shape = Trace(norm.phis, closed_form(request.order_n, SourceSpec(1.0), 1, norm.phis)).normalized()
    residual = float(np.max(np.abs(norm.values - shape.values)))
    return CorrelationReport(
        order_n=request.order_n,
        trace=trace,
        normalized_trace=norm,
        closed_form_residual=residual,
        fringe=fringes.analyze(norm, threshold),
    )


def _check_exposure(exposure: float) -> None:
    if not math.isfinite(exposure) or exposure < 0:
        raise DomainError(f"exposure must be finite and >= 0, got {exposure}")


def sample_counts(mean_intensity: float, exposure: float, seed: int) -> int:
    """One Poisson photodetection count with mean ``mean_intensity * exposure``."""
    if not mean_intensity >= 0:
        raise DomainError(f"mean intensity must be >= 0, got {mean_intensity}")
    _check_exposure(exposure)
    rng = np.random.default_rng(seed)
    return int(rng.poisson(mean_intensity * exposure))


def sample_port_counts(request: CorrelationRequest, source: SourceSpec, m: int,
                       exposure: float, seed: int) -> np.ndarray:
    """Counts of shape ``(N, grid_points)``; one generator per call, seeded explicitly."""
    _check_order(request, m)
    _check_exposure(exposure)
    phis = request.phis
    means = np.stack([port_intensity(p, source, m, phis) for p in request.ports])
    if (means < 0).any():
        raise DomainError("negative port intensity")
    rng = np.random.default_rng(seed)
    return rng.poisson(means * exposure)


def estimate_trace(request: CorrelationRequest, source: SourceSpec, m: int,
                   exposure: float, seed: int, counts: np.ndarray | None = None) -> Trace:
    """Peak-normalized product of measured count rates."""
    if counts is None:
        counts = sample_port_counts(request, source, m, exposure, seed)
    phis = request.phis
    if exposure == 0 or source.i0 == 0:
        return Trace(phis, np.zeros_like(phis))
    rates = counts / (exposure * source.i0 / m)
    return Trace(phis, np.prod(rates, axis=0)).normalized()
