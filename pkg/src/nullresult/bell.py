"""Correlation functions, CHSH statistics, local bounds and count estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

from scipy import stats

from .errors import ConfigurationError, DegenerateInputError, MergeError, ValidationError
from .model import (
    CHSH_PAIRS,
    AlphaModel,
    AnalyzerConfig,
    ApparatusSpec,
    Hypothesis,
    JointTable,
    alpha_eval,
    beta,
    ideal_joint_table,
    real_joint_table,
)

LOCAL_BOUND_ANGLE = math.radians(22.5)
DEFAULT_K_SIGMA = 3.0

COUNT_FIELDS = ("n_ab", "n_ab_perp", "n_aperp_b", "n_aperp_bperp")
EXTRA_FIELDS = ("n_d1", "n_d1_perp", "n_d2", "n_d2_perp", "n_lost1", "n_lost2")


@dataclass(frozen=True)
class CoincidenceCounts:
    """Joint-outcome counters for one analyzer setting.

    The four coincidence channels are the observables of the count-ratio
    estimator.  Singles (``n_d1`` ... ``n_d2_perp``: detector clicks
    irrespective of the partner) and loss counters are optional and may be
    absent (None) for counts read from the compact CSV form.
    """

    n_ab: int
    n_ab_perp: int
    n_aperp_b: int
    n_aperp_bperp: int
    n_pairs: int
    hypothesis: str = ""
    angle_deg: float | None = None
    apparatus: dict | None = None
    seed: int | None = None
    setting: str | None = None
    chunk_size: int | None = None
    n_d1: int | None = None
    n_d1_perp: int | None = None
    n_d2: int | None = None
    n_d2_perp: int | None = None
    n_lost1: int | None = None
    n_lost2: int | None = None

    def __post_init__(self):
        for name in COUNT_FIELDS + ("n_pairs",) + EXTRA_FIELDS:
            value = getattr(self, name)
            if value is None and name in EXTRA_FIELDS:
                continue
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ValidationError(f"count must be a non-negative integer, got {value!r}", name)
        if self.coincidences > self.n_pairs:
            raise ValidationError("coincidences exceed emitted pairs", "n_pairs")

    @property
    def channels(self) -> tuple[int, int, int, int]:
        return (self.n_ab, self.n_ab_perp, self.n_aperp_b, self.n_aperp_bperp)

    @property
    def coincidences(self) -> int:
        return sum(self.channels)

    def metadata_key(self) -> tuple:
        app = tuple(sorted(self.apparatus.items())) if self.apparatus else None
        return (self.hypothesis, self.angle_deg, app, self.setting)

    @classmethod
    def zero_like(cls, other: "CoincidenceCounts") -> "CoincidenceCounts":
        zeros = {name: 0 for name in COUNT_FIELDS + ("n_pairs",)}
        extras = {name: (0 if getattr(other, name) is not None else None) for name in EXTRA_FIELDS}
        return replace(other, **zeros, **extras)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: Mapping) -> "CoincidenceCounts":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown field(s) {sorted(unknown)}", "counts")
        return cls(**d)


def merge_counts(c1: CoincidenceCounts, c2: CoincidenceCounts) -> CoincidenceCounts:
    """Componentwise sum of two counts taken at the same setting."""
    if c1.metadata_key() != c2.metadata_key():
        raise MergeError(
            f"cannot merge counts with different settings: {c1.metadata_key()} vs {c2.metadata_key()}"
        )
    summed = {name: getattr(c1, name) + getattr(c2, name) for name in COUNT_FIELDS + ("n_pairs",)}
    for name in EXTRA_FIELDS:
        x, y = getattr(c1, name), getattr(c2, name)
        summed[name] = None if x is None or y is None else x + y
    seed = c1.seed if c1.seed == c2.seed else None
    chunk = c1.chunk_size if c1.chunk_size == c2.chunk_size else None
    return replace(c1, seed=seed, chunk_size=chunk, **summed)


# ---------------------------------------------------------------------------
# Correlations and CHSH
# ---------------------------------------------------------------------------


def correlation_from_table(t: JointTable) -> float:
    """E = [p(a,b) − p(a,b⊥) − p(a⊥,b) + p(a⊥,b⊥)] / Σp."""
    total = t.total
    if total <= 0.0:
        raise DegenerateInputError("table sums to zero; correlation undefined")
    e = (t.p_ab - t.p_ab_perp - t.p_aperp_b + t.p_aperp_bperp) / total
    return max(-1.0, min(1.0, e))


def correlation_from_counts(c: CoincidenceCounts) -> tuple[float, float]:
    """Correlation estimate and its binomial standard error."""
    n = c.coincidences
    if n == 0:
        raise DegenerateInputError("no coincidences; correlation undefined")
    e = (c.n_ab - c.n_ab_perp - c.n_aperp_b + c.n_aperp_bperp) / n
    return e, math.sqrt(max(0.0, 1.0 - e * e) / n)


@dataclass(frozen=True)
class ChshResult:
    e_values: dict[str, float]
    s: float
    stderr: float = 0.0
    k_sigma: float = DEFAULT_K_SIGMA
    violates_local: bool = field(init=False)

    def __post_init__(self):
        tol = max(self.k_sigma * self.stderr, 1e-12)
        object.__setattr__(self, "violates_local", self.s - 2.0 > tol)

    def to_dict(self) -> dict:
        return {
            "e_values": dict(self.e_values),
            "s": self.s,
            "stderr": self.stderr,
            "k_sigma": self.k_sigma,
            "violates_local": self.violates_local,
        }


def chsh_statistic(
    cfg: AnalyzerConfig | None,
    e_of: Mapping[str, float],
    stderr_of: Mapping[str, float] | None = None,
    k_sigma: float = DEFAULT_K_SIGMA,
) -> ChshResult:
    """s = |E(a,b) − E(a,b') + E(a',b) + E(a',b')|.

    ``e_of`` maps the pair keys ``ab``, ``ab'``, ``a'b``, ``a'b'`` to
    correlation values.  ``cfg`` is carried only for validation of the
    pair set and may be None when the correlations come from counts.
    """
    missing = [p for p in CHSH_PAIRS if p not in e_of]
    if missing:
        raise ConfigurationError(f"missing correlation(s) for pair(s) {missing}")
    e = {p: float(e_of[p]) for p in CHSH_PAIRS}
    for p, v in e.items():
        if not -1.0 - 1e-12 <= v <= 1.0 + 1e-12:
            raise ValidationError(f"correlation {v!r} outside [-1, 1]", p)
    s = abs(e["ab"] - e["ab'"] + e["a'b"] + e["a'b'"])
    err = 0.0
    if stderr_of is not None:
        err = math.sqrt(sum(float(stderr_of[p]) ** 2 for p in CHSH_PAIRS))
    return ChshResult(e, s, err, k_sigma)


def model_correlations(
    h: Hypothesis, cfg: AnalyzerConfig, app: ApparatusSpec | None = None
) -> dict[str, float]:
    table: Callable[[float], JointTable]
    if app is None:
        table = lambda th: ideal_joint_table(h, th)  # noqa: E731
    else:
        table = lambda th: real_joint_table(h, th, app)  # noqa: E731
    return {p: correlation_from_table(table(th)) for p, th in cfg.pairs().items()}


def chsh_from_model(
    h: Hypothesis, cfg: AnalyzerConfig | None = None, app: ApparatusSpec | None = None
) -> ChshResult:
    cfg = cfg or AnalyzerConfig.canonical()
    return chsh_statistic(cfg, model_correlations(h, cfg, app))


def chsh_from_counts(
    counts: Mapping[str, CoincidenceCounts], k_sigma: float = DEFAULT_K_SIGMA
) -> ChshResult:
    e, err = {}, {}
    for p in CHSH_PAIRS:
        if p not in counts:
            raise ConfigurationError(f"missing counts for pair {p!r}")
        e[p], err[p] = correlation_from_counts(counts[p])
    return chsh_statistic(None, e, err, k_sigma)


# ---------------------------------------------------------------------------
# Local bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundVerdict:
    """Outcome of the local-bound check at 22.5°.

    ``margin`` is bound − value: non-negative when the bound holds.
    """

    name: str
    value: float
    bound: float
    margin: float
    satisfied: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "bound": self.bound,
            "margin": self.margin,
            "satisfied": self.satisfied,
        }


def local_bound_check(
    alpha: AlphaModel, app: ApparatusSpec | None = None, tol: float = 1e-12
) -> dict[str, BoundVerdict]:
    """Check α(22.5°) ≤ 3/4 and, given an apparatus, β(22.5°)/T+² ≤ 1/2."""
    a = alpha_eval(alpha, LOCAL_BOUND_ANGLE)
    margin = 0.75 - a
    if abs(margin) < tol:
        margin = 0.0
    out = {"ideal": BoundVerdict("alpha(22.5deg) <= 3/4", a, 0.75, margin, margin >= 0.0)}
    if app is not None:
        tp2 = app.t_plus**2
        if tp2 <= 0.0:
            raise DegenerateInputError("T+ = 0; real-apparatus bound undefined")
        r = beta(alpha, LOCAL_BOUND_ANGLE, app) / tp2
        rm = 0.5 - r
        if abs(rm) < tol:
            rm = 0.0
        out["real"] = BoundVerdict("beta(22.5deg)/T+^2 <= 1/2", r, 0.5, rm, rm >= 0.0)
    return out


# ---------------------------------------------------------------------------
# Count estimators
# ---------------------------------------------------------------------------


def binomial_difference(x: float, y: float) -> tuple[float, float]:
    """(x − y)/(x + y) and its binomial standard error sqrt((1 − d²)/(x + y))."""
    n = x + y
    d = (x - y) / n
    return d, math.sqrt(max(0.0, 1.0 - d * d) / n)


def ratio_estimator(c: CoincidenceCounts) -> tuple[float, float]:
    """(N(a,b) − N(a,b⊥)) / (N(a,b) + N(a,b⊥)) with binomial standard error."""
    if c.n_ab + c.n_ab_perp == 0:
        raise DegenerateInputError("no D1 coincidences; ratio undefined")
    return binomial_difference(c.n_ab, c.n_ab_perp)


def singles_asymmetry_estimator(c: CoincidenceCounts) -> tuple[float, float]:
    """p(b⊥) − p(b) from the ν2-side marginals of the coincidence channels."""
    n_b = c.n_ab + c.n_aperp_b
    n_bperp = c.n_ab_perp + c.n_aperp_bperp
    if n_b + n_bperp == 0:
        raise DegenerateInputError("no ν2 detections; asymmetry undefined")
    return binomial_difference(n_bperp, n_b)


def chi_square_gof(c: CoincidenceCounts, table: JointTable) -> tuple[float, int, float]:
    """Pearson χ² of the four channels plus the no-coincidence remainder.

    Categories with zero expected probability are dropped; any observation
    in one of them makes the fit fail outright (p = 0).
    Returns (statistic, degrees of freedom, p-value).
    """
    n = c.n_pairs
    if n == 0:
        raise DegenerateInputError("no trials")
    probs = list(table.as_tuple()) + [max(0.0, 1.0 - table.total)]
    observed = list(c.channels) + [n - c.coincidences]
    stat, k = 0.0, 0
    for p, o in zip(probs, observed):
        expected = p * n
        if expected <= 1e-12 * n:
            if o:
                return math.inf, 0, 0.0
            continue
        stat += (o - expected) ** 2 / expected
        k += 1
    dof = k - 1
    if dof <= 0:
        return stat, 0, 1.0
    return stat, dof, float(stats.chi2.sf(stat, dof))


def expected_counts(table: JointTable, n: int) -> tuple[float, float, float, float]:
    return tuple(p * n for p in table.as_tuple())

