"""Oscillatory states as complex amplitudes: merge, comultiply, iterate.

Merging multiplies amplitudes and adds phases. A merged element remembers
its two constituents so :func:`comultiply` can hand them back; an atomic
element has nothing to decompose.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NoDecompositionError
from .signals import circular_distance, wrap_phase

__all__ = ["HopfElement", "hopf_merge", "comultiply", "iterate_merge", "UNIT"]


@dataclass(frozen=True)
class HopfElement:
    amplitude: float
    phase: float = 0.0
    bands: tuple["HopfElement", "HopfElement"] | None = None

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        object.__setattr__(self, "phase", wrap_phase(self.phase))
        if self.bands is not None:
            a, b = self.bands
            if not math.isclose(self.amplitude, a.amplitude * b.amplitude,
                                rel_tol=1e-12, abs_tol=1e-300):
                raise ValueError("amplitude is not the product of its band amplitudes")
            if circular_distance(self.phase, a.phase + b.phase) > 1e-12:
                raise ValueError("phase is not the sum of its band phases")

    @property
    def value(self) -> complex:
        return self.amplitude * complex(math.cos(self.phase), math.sin(self.phase))

    @property
    def is_atomic(self) -> bool:
        return self.bands is None

    def to_json_obj(self) -> dict:
        obj = {"amplitude": self.amplitude, "phase": self.phase}
        if self.bands is not None:
            obj["bands"] = [b.to_json_obj() for b in self.bands]
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "HopfElement":
        bands = obj.get("bands")
        if bands is not None:
            bands = tuple(cls.from_json_obj(b) for b in bands)
        return cls(obj["amplitude"], obj["phase"], bands)


UNIT = HopfElement(1.0, 0.0)


def hopf_merge(x: HopfElement, y: HopfElement) -> HopfElement:
    return HopfElement(x.amplitude * y.amplitude, wrap_phase(x.phase + y.phase), (x, y))


def comultiply(x: HopfElement) -> tuple[HopfElement, HopfElement]:
    if x.bands is None:
        raise NoDecompositionError("atomic element has no recorded constituents")
    return x.bands


def iterate_merge(x_0: HopfElement, z: HopfElement, n: int) -> HopfElement:
    """Feed the product back ``n`` times: ``x_{k+1} = M(x_k, z)``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    x = x_0
    for _ in range(n):
        x = hopf_merge(x, z)
    return x
