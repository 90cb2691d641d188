"""Parameter sets of the two figure families."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .classical import CurveConstants, curve_constants, initial_point
from .model import PhasePoint, SystemParams


@dataclass(frozen=True)
class Preset:
    name: str
    params: SystemParams
    E: float
    A: float
    delta1: float
    delta2: float

    def constants(self) -> CurveConstants:
        return curve_constants(self.params, self.E, self.A, self.delta1, self.delta2)

    def initial(self) -> PhasePoint:
        return initial_point(self.params, self.constants())

    @property
    def radial_period(self) -> float:
        return math.pi / (2 * self.params.omega)

    @property
    def closure_time(self) -> float:
        return self.params.k.q * self.radial_period


def _fig1(k: str, delta2: float) -> Preset:
    return Preset(f"fig1-k{k}", SystemParams(k, -2.0, 6.0, 3.0), 20.0, -1.0, 0.0, delta2)


def _fig2(name: str, k: str, delta2: float) -> Preset:
    return Preset(name, SystemParams(k, -1.0, 3.0, 4.0), 20.0, -1.5, 0.0, delta2)


PRESETS = {p.name: p for p in (
    _fig1("1", math.pi / 32),
    _fig1("2", math.pi / 32),
    _fig1("3", math.pi / 32),
    _fig2("fig2-k13", "1/3", math.pi / 4),
    _fig2("fig2-k12", "1/2", math.pi / 6),
    _fig2("fig2-k32", "3/2", math.pi / 12),
)}
