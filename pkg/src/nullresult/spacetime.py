"""Event geometry of the detour layout and frame-invariance of its ordering.

One spatial dimension (the optical axis, ν1 toward +x), c = 1, meters for
both ct and x.  Detectors sit at their polarizers; detours are coiled
fiber, i.e. pure time delay without displacement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

NULL_TOL = 1e-12


@dataclass(frozen=True)
class SpacetimeEvent:
    ct: float
    x: float
    label: str = ""

    def to_dict(self) -> dict:
        return {"label": self.label, "ct": self.ct, "x": self.x}


def gamma(v: float) -> float:
    if not abs(v) < 1.0:
        raise ValidationError(f"|v| must be < 1, got {v!r}", "v")
    return 1.0 / math.sqrt(1.0 - v * v)


def boost(event: SpacetimeEvent, v: float) -> SpacetimeEvent:
    """Coordinates of ``event`` in a frame moving with velocity v along +x."""
    g = gamma(v)
    return SpacetimeEvent(g * (event.ct - v * event.x), g * (event.x - v * event.ct), event.label)


def interval(e1: SpacetimeEvent, e2: SpacetimeEvent) -> float:
    """(Δct)² − (Δx)²: positive timelike, zero null, negative spacelike."""
    dct = e2.ct - e1.ct
    dx = e2.x - e1.x
    return dct * dct - dx * dx


def classify_separation(e1: SpacetimeEvent, e2: SpacetimeEvent, tol: float = NULL_TOL) -> tuple[str, float]:
    s = interval(e1, e2)
    scale = max(1.0, (e2.ct - e1.ct) ** 2 + (e2.x - e1.x) ** 2)
    if abs(s) <= tol * scale:
        return "null", s
    return ("timelike" if s > 0 else "spacelike"), s


@dataclass(frozen=True)
class ExperimentGeometry:
    """Source-to-polarizer arms and fiber detours, in meters."""

    d_pol1: float = 1.0
    d_pol2: float = 1.0
    detour1: float = 5.0
    detour2: float = 2.5

    def __post_init__(self):
        for name in ("d_pol1", "d_pol2", "detour1", "detour2"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
                raise ValidationError(f"length must be a finite non-negative number, got {value!r}", name)
            object.__setattr__(self, name, float(value))
        if self.d_pol1 <= 0 or self.d_pol2 <= 0:
            raise ValidationError("source-to-polarizer distances must be > 0", "d_pol1")

    def to_dict(self) -> dict:
        return {"d_pol1": self.d_pol1, "d_pol2": self.d_pol2, "detour1": self.detour1, "detour2": self.detour2}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentGeometry":
        unknown = set(d) - {"d_pol1", "d_pol2", "detour1", "detour2"}
        if unknown:
            raise ValidationError(f"unknown field(s) {sorted(unknown)}", "geometry")
        return cls(**d)


# 1 m arms with the ~2 m / ~4 m detours: both ordered pairs come out exactly light-like.
LIGHTLIKE_GEOMETRY = ExperimentGeometry(1.0, 1.0, 4.0, 2.0)
DEFAULT_GEOMETRY = ExperimentGeometry(1.0, 1.0, 5.0, 2.5)
GEOMETRY_PRESETS = {"lightlike": LIGHTLIKE_GEOMETRY, "default": DEFAULT_GEOMETRY}


def build_events(g: ExperimentGeometry) -> list[SpacetimeEvent]:
    """Emission, D1' (reflected ν1), D2/D2' and D1 (transmitted ν1 after detour)."""
    return [
        SpacetimeEvent(0.0, 0.0, "emission"),
        SpacetimeEvent(g.d_pol1, g.d_pol1, "D1'"),
        SpacetimeEvent(g.d_pol2 + g.detour2, -g.d_pol2, "D2"),
        SpacetimeEvent(g.d_pol1 + g.detour1, g.d_pol1, "D1"),
    ]


def velocity_grid(n: int = 1999, vmax: float = 0.999) -> np.ndarray:
    if not 0 < vmax < 1:
        raise ValidationError("vmax must lie in (0, 1)", "vmax")
    return np.linspace(-vmax, vmax, n)


@dataclass
class PairOrdering:
    first: str
    second: str
    separation: str
    interval: float
    margin: float  # Δct − |Δx| in the rest frame
    preserved: bool
    min_dct_prime: float
    flip_velocity: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class OrderingReport:
    pairs: list[PairOrdering]
    n_velocities: int
    v_min: float
    v_max: float
    warnings: list[str] = field(default_factory=list)

    @property
    def preserved(self) -> bool:
        return all(p.preserved for p in self.pairs)

    def to_dict(self) -> dict:
        return {
            "preserved": self.preserved,
            "n_velocities": self.n_velocities,
            "v_range": [self.v_min, self.v_max],
            "pairs": [p.to_dict() for p in self.pairs],
            "warnings": list(self.warnings),
        }


def _flip_velocity(dct: float, dx: float) -> float | None:
    """Frame velocity at which γ(Δct − vΔx) changes sign, if subluminal."""
    if dx == 0.0:
        return None
    v = dct / dx
    return v if abs(v) < 1.0 else None


def ordering_invariance(
    events: list[SpacetimeEvent],
    v_grid=None,
    claims: list[tuple[str, str]] | None = None,
) -> OrderingReport:
    """Check that each claimed 'first before second' pair keeps its order in every frame of the grid.

    Default claims: D1' before D2, and D2 before D1.
    """
    v = velocity_grid() if v_grid is None else np.asarray(v_grid, dtype=np.float64)
    if v.size and not np.all(np.abs(v) < 1.0):
        raise ValidationError("all grid velocities must satisfy |v| < 1", "v_grid")
    by_label = {e.label: e for e in events}
    claims = claims or [("D1'", "D2"), ("D2", "D1")]
    report = OrderingReport([], int(v.size), float(v.min()) if v.size else 0.0, float(v.max()) if v.size else 0.0)
    for a, b in claims:
        e1, e2 = by_label[a], by_label[b]
        dct, dx = e2.ct - e1.ct, e2.x - e1.x
        sep, s = classify_separation(e1, e2)
        gam = 1.0 / np.sqrt(1.0 - v * v)
        dct_prime = gam * (dct - v * dx)
        min_dct = float(dct_prime.min()) if v.size else dct
        preserved = bool(dct > 0 and np.all(dct_prime > 0))
        pair = PairOrdering(a, b, sep, s, dct - abs(dx), preserved, min_dct, _flip_velocity(dct, dx))
        report.pairs.append(pair)
        if sep == "null":
            report.warnings.append(f"{a} -> {b} is light-like: order holds in every subluminal frame but with zero margin")
        elif sep == "spacelike":
            if pair.flip_velocity is not None:
                report.warnings.append(
                    f"{a} -> {b} is space-like: order reverses for frame velocity beyond v = {pair.flip_velocity:.6g}"
                )
            else:
                report.warnings.append(f"{a} -> {b} is space-like")
        if dct <= 0:
            report.warnings.append(f"{a} does not precede {b} in the laboratory frame")
    return report
