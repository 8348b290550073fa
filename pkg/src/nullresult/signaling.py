"""Superluminal round-trip signaling and the causal-paradox test.

A signal of speed ū > 1 leaves the common origin of S and S' at t = 0 and
reaches x1 > 0.  An observer at rest in S' at that point answers with a
return signal toward the S' origin.  The round trip is paradoxical when the
answer arrives there before t' = 0.

Two return-leg laws are supported:

``special-relativity``
    S and S' are equivalent, the return signal has speed ū in S'.
``preferred-frame``
    S is the preferred frame.  The return signal has speed ū in S, whose
    S' speed follows from velocity composition.

Units: c = 1, times and lengths in meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularityError, ValidationError

SR = "special-relativity"
PREFERRED = "preferred-frame"
_MODE_ALIASES = {
    "sr": SR,
    "special-relativity": SR,
    "aether": PREFERRED,
    "preferred": PREFERRED,
    "preferred-frame": PREFERRED,
}


def parse_mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode.lower()]
    except KeyError:
        raise ValidationError(f"unknown mode {mode!r}; use sr or aether", "mode") from None


def _gamma(v: float) -> float:
    return 1.0 / math.sqrt(1.0 - v * v)


def compose_velocity(u: float, v: float) -> float:
    """Speed in S' of a body moving at u in S, S' moving at v: (u − v)/(1 − uv)."""
    den = 1.0 - u * v
    if den == 0.0:
        raise SingularityError(f"velocity composition pole at u·v = 1 (u={u!r}, v={v!r})")
    return (u - v) / den


def compose_velocity_inverse(u_prime: float, v: float) -> float:
    """Speed in S from the S' speed: (u' + v)/(1 + u'v)."""
    den = 1.0 + u_prime * v
    if den == 0.0:
        raise SingularityError(f"velocity composition pole at u'·v = -1 (u'={u_prime!r}, v={v!r})")
    return (u_prime + v) / den


def paradox_threshold(u_bar: float) -> float:
    """Smallest frame velocity 2ū/(1 + ū²) giving a special-relativity paradox."""
    if not u_bar > 1.0:
        raise ValidationError(f"signal speed must exceed c, got {u_bar!r}", "u_bar")
    if math.isinf(u_bar):
        return 0.0
    return 2.0 * u_bar / (1.0 + u_bar * u_bar)


@dataclass(frozen=True)
class SignalScenario:
    u_bar: float
    v: float
    x1: float = 1.0
    mode: str = SR

    def __post_init__(self):
        if not self.u_bar > 1.0 or not math.isfinite(self.u_bar):
            raise ValidationError(f"signal speed must be finite and exceed c, got {self.u_bar!r}", "u_bar")
        if not abs(self.v) < 1.0:
            raise ValidationError(f"|v| must be < 1, got {self.v!r}", "v")
        if not self.x1 > 0.0:
            raise ValidationError(f"x1 must be > 0, got {self.x1!r}", "x1")
        object.__setattr__(self, "mode", parse_mode(self.mode))


@dataclass(frozen=True)
class RoundTripReport:
    t1: float
    t1_prime: float
    x1_prime: float
    delta_t_prime: float
    u_prime_return: float
    total: float
    paradox: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def round_trip(s: SignalScenario) -> RoundTripReport:
    g = _gamma(s.v)
    t1 = s.x1 / s.u_bar
    t1_prime = g * (1.0 - s.v * s.u_bar) * s.x1 / s.u_bar
    x1_prime = g * (1.0 - s.v / s.u_bar) * s.x1
    if s.mode == SR:
        u_ret = -s.u_bar
        dt = x1_prime / s.u_bar
    else:
        # return leg moves at −ū in S
        den = 1.0 + s.v * s.u_bar
        if den == 0.0:
            raise SingularityError(f"return-speed pole at v = -1/ū (ū={s.u_bar!r})")
        u_ret = (-s.u_bar - s.v) / den
        dt = -x1_prime / u_ret
    total = t1_prime + dt
    return RoundTripReport(t1, t1_prime, x1_prime, dt, u_ret, total, total < 0.0)


def paradox_region_scan(u_grid, v_grid, mode: str = SR, x1: float = 1.0) -> np.ndarray:
    """Boolean matrix, rows over ū and columns over v, of paradox flags."""
    mode = parse_mode(mode)
    u_grid = list(np.asarray(u_grid, dtype=np.float64).ravel())
    v_grid = list(np.asarray(v_grid, dtype=np.float64).ravel())
    flags = np.zeros((len(u_grid), len(v_grid)), dtype=bool)
    for i, u in enumerate(u_grid):
        for j, v in enumerate(v_grid):
            try:
                flags[i, j] = round_trip(SignalScenario(u, v, x1, mode)).paradox
            except SingularityError:
                # at v = -1/ū the return leg is instantaneous in S'; total = t1' > 0
                flags[i, j] = False
    return flags
