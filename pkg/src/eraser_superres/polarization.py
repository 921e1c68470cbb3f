"""Two-component polarization arithmetic in the H/V basis.

Amplitudes are plain Python ``complex`` values or complex numpy arrays, so
every transform here can be evaluated on a whole phase grid at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

Amplitude = Union[complex, np.ndarray]

_SQRT_HALF = 1.0 / np.sqrt(2.0)


def intensity(a: Amplitude):
    """Born-rule intensity |a|^2."""
    return np.real(a) ** 2 + np.imag(a) ** 2


@dataclass(frozen=True)
class JonesVector:
    h: Amplitude
    v: Amplitude

    @property
    def power(self):
        return intensity(self.h) + intensity(self.v)

    def scaled(self, c: complex) -> "JonesVector":
        return JonesVector(c * self.h, c * self.v)


VACUUM = JonesVector(0j, 0j)


def bs_transform(in1: JonesVector, in2: JonesVector) -> tuple[JonesVector, JonesVector]:
    """Lossless 50/50 nonpolarizing beam splitter, symmetric convention.

    Transmission carries 1/sqrt(2), reflection i/sqrt(2), applied to each
    polarization component independently.
    """
    t, r = _SQRT_HALF, 1j * _SQRT_HALF
    out1 = JonesVector(t * in1.h + r * in2.h, t * in1.v + r * in2.v)
    out2 = JonesVector(r * in1.h + t * in2.h, r * in1.v + t * in2.v)
    return out1, out2


def mirror_reflect(v: JonesVector) -> JonesVector:
    # reflection reverses the horizontal basis direction
    return JonesVector(-v.h, v.v)


def retarder_phase(v: JonesVector, xi: float) -> JonesVector:
    """Effective wave-plate model: phase gain ``exp(i*xi)`` on the vertical component."""
    return JonesVector(v.h, v.v * np.exp(1j * xi))


def polarizer_project(v: JonesVector, theta: float) -> Amplitude:
    """Scalar amplitude along a polarizer axis at ``theta`` from horizontal."""
    return np.cos(theta) * v.h + np.sin(theta) * v.v
