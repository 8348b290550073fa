"""Analytic four-channel probability tables for the collapse hypotheses.

Channel naming follows the detector layout: ν1 transmitted by polarizer ``a``
reaches D1 (after a detour), ν1 reflected reaches D1'.  ν2 transmitted
(reflected) by polarizer ``b`` reaches D2 (D2').  ``p_ab`` is the joint
probability of a D1/D2 coincidence, ``p_ab_perp`` of D1/D2', and so on.

Angles are radians internally.  Polarization is axis-like, so every formula
depends only on the relative angle folded into [0, π/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DegenerateInputError, ValidationError

HALF_PI = 0.5 * math.pi


# ---------------------------------------------------------------------------
# Angles
# ---------------------------------------------------------------------------


def normalize_orientation(angle: float) -> float:
    """Map an analyzer orientation into [0, π)."""
    return float(angle) % math.pi


def fold_relative(theta: float) -> float:
    """Fold a relative angle into [0, π/2] using axis periodicity."""
    d = float(theta) % math.pi
    if d > HALF_PI:
        d = math.pi - d
    return d


def relative_angle(x: float, y: float) -> float:
    return fold_relative(y - x)


@dataclass(frozen=True)
class AnalyzerConfig:
    """Orientations of the four analyzer settings, in radians."""

    a: float
    a_prime: float
    b: float
    b_prime: float

    def __post_init__(self):
        for name in ("a", "a_prime", "b", "b_prime"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError("orientation must be finite", name)
            object.__setattr__(self, name, normalize_orientation(value))

    @classmethod
    def from_degrees(cls, a, a_prime, b, b_prime) -> "AnalyzerConfig":
        return cls(*(math.radians(x) for x in (a, a_prime, b, b_prime)))

    @classmethod
    def canonical(cls) -> "AnalyzerConfig":
        """a=0°, a'=45°, b=22.5°, b'=67.5°: three pairs at 22.5°, (a,b') at 67.5°."""
        return cls.from_degrees(0.0, 45.0, 22.5, 67.5)

    def degrees(self) -> list[float]:
        return [math.degrees(x) for x in (self.a, self.a_prime, self.b, self.b_prime)]

    def pairs(self) -> dict[str, float]:
        """Folded relative angle for each CHSH pair, keyed ab, ab', a'b, a'b'."""
        return {
            "ab": relative_angle(self.a, self.b),
            "ab'": relative_angle(self.a, self.b_prime),
            "a'b": relative_angle(self.a_prime, self.b),
            "a'b'": relative_angle(self.a_prime, self.b_prime),
        }


CHSH_PAIRS = ("ab", "ab'", "a'b", "a'b'")


# ---------------------------------------------------------------------------
# Apparatus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApparatusSpec:
    """Detector, collection and polarizer parameters.

    eta: detector efficiency; f: collection probability of ν1; g: collection
    probability of ν2 given ν1 collected; t_par / t_perp: polarizer
    transmission for light parallel / perpendicular to its axis; big_f:
    source correlation (1 = perfect, 0 = none).
    """

    eta: float = 1.0
    f: float = 1.0
    g: float = 1.0
    t_par: float = 1.0
    t_perp: float = 0.0
    big_f: float = 1.0

    def __post_init__(self):
        for name in ("eta", "f", "g", "t_par", "t_perp", "big_f"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
                raise ValidationError(f"must be in [0, 1], got {value!r}", name)
            object.__setattr__(self, name, float(value))
        if self.t_par + self.t_perp > 1.0 + 1e-15:
            raise ValidationError("t_par + t_perp must not exceed 1", "t_perp")
        if self.t_perp > self.t_par:
            raise ValidationError("t_perp must not exceed t_par", "t_perp")

    @property
    def t_plus(self) -> float:
        return self.t_par + self.t_perp

    @property
    def t_minus(self) -> float:
        return self.t_par - self.t_perp

    @property
    def coincidence_scale(self) -> float:
        """η²fg, the overall coincidence efficiency."""
        return self.eta**2 * self.f * self.g

    @property
    def contrast(self) -> float:
        """T−²/T+², the polarizer contrast factor; 0 for a fully absorbing polarizer."""
        tp2 = self.t_plus**2
        return self.t_minus**2 / tp2 if tp2 > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "f": self.f,
            "g": self.g,
            "t_par": self.t_par,
            "t_perp": self.t_perp,
            "big_f": self.big_f,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ApparatusSpec":
        unknown = set(d) - {"eta", "f", "g", "t_par", "t_perp", "big_f"}
        if unknown:
            raise ValidationError(f"unknown field(s) {sorted(unknown)}", "apparatus")
        return cls(**d)


IDEAL = ApparatusSpec()
# Polarizer and source figures of the 1982 Aspect-Grangier-Roger two-channel run.
ASPECT = ApparatusSpec(t_par=0.950, t_perp=0.007, big_f=0.984)

# Figure printed alongside the conditional-difference formula for the
# Aspect parameters.  Direct evaluation gives F·(T−²/T+²)·cos45° ≈ 0.6756;
# the printed 0.696 matches F·cos45° with the polarizer factor left out.
PUBLISHED_ASPECT_RATIO = 0.696

APPARATUS_PRESETS = {"ideal": IDEAL, "aspect": ASPECT}


# ---------------------------------------------------------------------------
# α models
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class ConstantAlpha:
    c: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.c <= 1.0:
            raise ValidationError(f"constant α must be in [0, 1], got {self.c!r}", "alpha")
        object.__setattr__(self, "c", float(self.c))

    def __call__(self, theta: float) -> float:
        return self.c

    @property
    def label(self) -> str:
        return f"const:{_fmt(self.c)}"


@dataclass(frozen=True)
class CosineSquaredAlpha:
    """α = cos²θ; reproduces the collapse correlations."""

    def __call__(self, theta: float) -> float:
        return math.cos(theta) ** 2

    @property
    def label(self) -> str:
        return "cos2"


@dataclass(frozen=True)
class SawtoothAlpha:
    """α = 1 − θ/(π/2); α(22.5°) = 3/4 sits exactly on the local bound."""

    def __call__(self, theta: float) -> float:
        return 1.0 - theta / HALF_PI

    @property
    def label(self) -> str:
        return "sawtooth"


@dataclass(frozen=True)
class TableAlpha:
    """Piecewise-linear α through (angle, value) samples covering [0°, 90°]."""

    angles_deg: tuple[float, ...]
    values: tuple[float, ...]
    _x: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles_deg)
        values = tuple(float(v) for v in self.values)
        if len(angles) != len(values) or len(angles) < 2:
            raise ValidationError("need at least two (angle, value) samples", "alpha")
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise ValidationError("sample angles must be strictly increasing", "alpha")
        if angles[0] > 0.0 or angles[-1] < 90.0:
            raise ValidationError("samples must cover [0, 90] degrees", "alpha")
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValidationError("sample values must lie in [0, 1]", "alpha")
        object.__setattr__(self, "angles_deg", angles)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_x", np.radians(np.asarray(angles)))

    def __call__(self, theta: float) -> float:
        return float(np.interp(theta, self._x, self.values))

    @property
    def label(self) -> str:
        body = ";".join(f"{_fmt(a)}={_fmt(v)}" for a, v in zip(self.angles_deg, self.values))
        return f"table:{body}"


AlphaModel = Union[ConstantAlpha, CosineSquaredAlpha, SawtoothAlpha, TableAlpha]


def parse_alpha(text: str) -> AlphaModel:
    """Parse ``const:<c>``, ``cos2``, ``sawtooth`` or ``table:<deg>=<v>;...``."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    kind = kind.lower()
    try:
        if kind in ("const", "constant"):
            return ConstantAlpha(float(rest) if rest else 0.5)
        if kind in ("cos2", "cosine-squared") and not rest:
            return CosineSquaredAlpha()
        if kind in ("sawtooth", "sawtooth-local") and not rest:
            return SawtoothAlpha()
        if kind == "table":
            pairs = [item.split("=") for item in rest.split(";") if item]
            return TableAlpha(tuple(float(p[0]) for p in pairs), tuple(float(p[1]) for p in pairs))
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"cannot parse α model {text!r}", "alpha") from exc
    raise ValidationError(f"unknown α model {text!r}", "alpha")


def alpha_eval(model: AlphaModel, theta: float) -> float:
    """Evaluate α at a relative angle in [0, π/2], checking the range."""
    if not -1e-12 <= theta <= HALF_PI + 1e-12:
        raise ValidationError(f"θ={theta!r} outside [0, π/2]", "theta")
    value = model(theta)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"α={value!r} outside [0, 1] at θ={theta!r}", "alpha")
    return value


def complement_defect(model: AlphaModel, n: int = 1001) -> float:
    """max |α(θ) + α(π/2 − θ) − 1| over an n-point grid of [0, π/2]."""
    grid = np.linspace(0.0, HALF_PI, n)
    return max(abs(model(t) + model(HALF_PI - t) - 1.0) for t in grid)


ALPHA_PRESETS: dict[str, AlphaModel] = {
    "const:0.5": ConstantAlpha(0.5),
    "cos2": CosineSquaredAlpha(),
    "sawtooth": SawtoothAlpha(),
}


# ---------------------------------------------------------------------------
# Hypotheses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QmCollapse:
    """Both ordinary and null-result detections collapse the pair."""

    @property
    def label(self) -> str:
        return "qm"


@dataclass(frozen=True)
class NoNrCollapse:
    """Only ordinary detections collapse; after a null result at D1' the
    D2/D2' split follows α instead of cos²θ."""

    alpha: AlphaModel

    @property
    def label(self) -> str:
        return f"no-nr:{self.alpha.label}"


@dataclass(frozen=True)
class Uncorrelated:
    """No-NR-collapse with α = 1/2."""

    @property
    def label(self) -> str:
        return "uncorrelated"


@dataclass(frozen=True)
class LocalModel:
    """Symmetric local model: both rows governed by α."""

    alpha: AlphaModel

    @property
    def label(self) -> str:
        return f"local:{self.alpha.label}"


Hypothesis = Union[QmCollapse, NoNrCollapse, Uncorrelated, LocalModel]


def resolve(h: Hypothesis) -> Hypothesis:
    """Replace aliases by their canonical form."""
    if isinstance(h, Uncorrelated):
        return NoNrCollapse(ConstantAlpha(0.5))
    return h


def parse_hypothesis(label: str, alpha: str | None = None) -> Hypothesis:
    """Build a hypothesis from a label such as ``qm`` or ``no-nr:sawtooth``.

    ``alpha`` overrides the α part of the label when given.
    """
    model, _, rest = label.strip().partition(":")
    model = model.lower()
    if alpha is not None:
        rest = alpha
    if model in ("qm", "qm-collapse", "collapse"):
        return QmCollapse()
    if model == "uncorrelated":
        return Uncorrelated()
    if model in ("no-nr", "no-nr-collapse", "nonr"):
        return NoNrCollapse(parse_alpha(rest or "const:0.5"))
    if model == "local":
        return LocalModel(parse_alpha(rest or "sawtooth"))
    raise ValidationError(f"unknown hypothesis {label!r}", "hypothesis")


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JointTable:
    p_ab: float
    p_ab_perp: float
    p_aperp_b: float
    p_aperp_bperp: float

    def __post_init__(self):
        for name in ("p_ab", "p_ab_perp", "p_aperp_b", "p_aperp_bperp"):
            value = getattr(self, name)
            if not -1e-15 <= value <= 1.0 + 1e-15:
                raise ValidationError(f"probability {value!r} outside [0, 1]", name)

    @property
    def total(self) -> float:
        return self.p_ab + self.p_ab_perp + self.p_aperp_b + self.p_aperp_bperp

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_ab, self.p_ab_perp, self.p_aperp_b, self.p_aperp_bperp)

    def to_dict(self) -> dict:
        return dict(zip(("p_ab", "p_ab_perp", "p_aperp_b", "p_aperp_bperp"), self.as_tuple()))


def check_theta(theta: float) -> float:
    if not -1e-12 <= theta <= HALF_PI + 1e-12:
        raise ValidationError(f"θ={theta!r} must be folded into [0, π/2]", "theta")
    return min(max(theta, 0.0), HALF_PI)


def ideal_joint_table(h: Hypothesis, theta: float) -> JointTable:
    """Joint probabilities for perfect detectors, polarizers and source."""
    theta = check_theta(theta)
    h = resolve(h)
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    if isinstance(h, QmCollapse):
        return JointTable(0.5 * c2, 0.5 * s2, 0.5 * s2, 0.5 * c2)
    alpha = alpha_eval(h.alpha, theta)
    if isinstance(h, NoNrCollapse):
        return JointTable(0.5 * alpha, 0.5 * (1.0 - alpha), 0.5 * s2, 0.5 * c2)
    if isinstance(h, LocalModel):
        return JointTable(0.5 * alpha, 0.5 * (1.0 - alpha), 0.5 * (1.0 - alpha), 0.5 * alpha)
    raise ValidationError(f"unsupported hypothesis {h!r}", "hypothesis")


def ideal_singles(h: Hypothesis, theta: float) -> tuple[float, float]:
    """ν2-side marginals (p(b), p(b⊥)) of the ideal table."""
    t = ideal_joint_table(h, theta)
    return t.p_ab + t.p_aperp_b, t.p_ab_perp + t.p_aperp_bperp


def beta(alpha: AlphaModel, theta: float, app: ApparatusSpec) -> float:
    """Real-apparatus correlation term F·T−²·(2α − 1).

    Reduces to the collapse term F·T−²·cos2θ when α = cos²θ and to the
    ideal 2α − 1 when T± → 1, F → 1.
    """
    return app.big_f * app.t_minus**2 * (2.0 * alpha_eval(alpha, theta) - 1.0)


def real_joint_table(h: Hypothesis, theta: float, app: ApparatusSpec) -> JointTable:
    """Joint probabilities including detector, collection and polarizer losses.

    The D1' row of the no-NR-collapse table uses the collapse law (an
    ordinary detection took place there).  The local model uses the
    α-driven term on both rows, so its normalized table is symmetric.
    """
    theta = check_theta(theta)
    h = resolve(h)
    scale = 0.25 * app.coincidence_scale
    tp2 = app.t_plus**2
    qm_term = app.big_f * app.t_minus**2 * math.cos(2.0 * theta)
    lo = scale * (tp2 - qm_term)
    hi = scale * (tp2 + qm_term)
    if isinstance(h, QmCollapse):
        return JointTable(hi, lo, lo, hi)
    b = beta(h.alpha, theta, app)
    if abs(b) > tp2 + 1e-15:
        raise ValidationError(f"|β|={abs(b)!r} exceeds T+²={tp2!r}", "alpha")
    if isinstance(h, NoNrCollapse):
        return JointTable(scale * (tp2 + b), scale * (tp2 - b), lo, hi)
    if isinstance(h, LocalModel):
        return JointTable(scale * (tp2 + b), scale * (tp2 - b), scale * (tp2 - b), scale * (tp2 + b))
    raise ValidationError(f"unsupported hypothesis {h!r}", "hypothesis")


def conditional_given_d1(table: JointTable) -> tuple[float, float]:
    """(p(b|a), p(b⊥|a)): ν2 outcome probabilities given a D1 click."""
    pc = table.p_ab + table.p_ab_perp
    if pc <= 0.0:
        raise DegenerateInputError("zero D1 coincidence probability; conditional undefined")
    return table.p_ab / pc, table.p_ab_perp / pc
