"""Assembly of predict / simulate / analyze / geometry reports as plain dicts."""

from __future__ import annotations

import math
from datetime import datetime, timezone

from . import __version__
from .bell import (
    CoincidenceCounts,
    chsh_from_counts,
    chsh_from_model,
    correlation_from_counts,
    correlation_from_table,
    local_bound_check,
    ratio_estimator,
    singles_asymmetry_estimator,
)
from .errors import DegenerateInputError
from .model import (
    ASPECT,
    PUBLISHED_ASPECT_RATIO,
    AnalyzerConfig,
    ApparatusSpec,
    ConstantAlpha,
    Hypothesis,
    LocalModel,
    NoNrCollapse,
    QmCollapse,
    conditional_given_d1,
    fold_relative,
    ideal_joint_table,
    ideal_singles,
    parse_hypothesis,
    real_joint_table,
    resolve,
)
from .montecarlo import run_trials
from .scenario import Scenario
from .spacetime import build_events, ordering_invariance, velocity_grid

_CANON = math.radians(22.5)
_SQRT2 = math.sqrt(2.0)


def _header(kind: str) -> dict:
    return {
        "kind": kind,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _is_canonical(theta: float) -> bool:
    return abs(theta - _CANON) < 1e-9


def _published(quantity: str, h: Hypothesis, theta: float, app: ApparatusSpec) -> dict | None:
    """Figures printed in the original proposal for this exact setting, if any."""
    h = resolve(h)
    if not _is_canonical(theta):
        return None
    if quantity == "conditional_difference":
        if isinstance(h, QmCollapse) and app == ASPECT:
            return {
                "value": PUBLISHED_ASPECT_RATIO,
                "note": (
                    "published figure; direct evaluation of F*(T-^2/T+^2)*cos45 gives the derived value. "
                    "0.696 matches F*cos45 with the polarizer factor T-^2/T+^2 omitted"
                ),
            }
        if isinstance(h, (NoNrCollapse, LocalModel)):
            return {"bound": 0.5, "note": "published local-model upper bound"}
    if quantity == "singles_asymmetry" and isinstance(h, NoNrCollapse):
        if h.alpha == ConstantAlpha(0.5):
            return {"value": 0.35, "note": "published approximate value for alpha = 1/2"}
        return {"bound": (_SQRT2 - 1.0) / 4.0, "approx": 0.1, "note": "published lower bound for alpha(22.5) <= 3/4"}
    return None


def _alpha_of(h: Hypothesis):
    h = resolve(h)
    return getattr(h, "alpha", None)


def predict_setting(h: Hypothesis, theta: float, app: ApparatusSpec, setting: str | None = None) -> dict:
    theta = fold_relative(theta)
    ideal = ideal_joint_table(h, theta)
    real = real_joint_table(h, theta, app)
    out = {
        "setting": setting,
        "angle_deg": math.degrees(theta),
        "ideal_table": ideal.to_dict(),
        "real_table": real.to_dict(),
        "correlation": {"ideal": correlation_from_table(ideal), "real": _safe(correlation_from_table, real)},
    }
    pb, pbp = ideal_singles(h, theta)
    singles = {"p_b": pb, "p_b_perp": pbp, "asymmetry": pbp - pb}
    pub = _published("singles_asymmetry", h, theta, app)
    if pub:
        singles["published"] = pub
    out["ideal_singles"] = singles
    try:
        cb, cbp = conditional_given_d1(real)
        cond = {"p_b_given_a": cb, "p_bperp_given_a": cbp, "difference": cb - cbp}
    except DegenerateInputError as exc:
        cond = {"error": str(exc)}
    pub = _published("conditional_difference", h, theta, app)
    if pub:
        cond["published"] = pub
    out["conditional_given_d1"] = cond
    return out


def _safe(fn, *args):
    try:
        return fn(*args)
    except DegenerateInputError:
        return None


def predict_report(s: Scenario) -> dict:
    h = s.hypothesis_obj
    app = s.apparatus
    rep = _header("predict")
    rep["scenario"] = s.to_dict()
    settings = []
    if s.angle_deg is not None:
        settings.append(predict_setting(h, math.radians(s.angle_deg), app))
    cfg = s.config
    if cfg is not None:
        settings.extend(predict_setting(h, th, app, p) for p, th in cfg.pairs().items())
    rep["settings"] = settings
    chsh_cfg = cfg
    ideal = chsh_from_model(h, chsh_cfg)
    chsh = {"angles_deg": (cfg or AnalyzerConfig.canonical()).degrees(), "ideal": ideal.to_dict()}
    real = _safe(lambda: chsh_from_model(h, chsh_cfg, app))
    chsh["real"] = real.to_dict() if real else None
    chsh["published_bound"] = 2.0
    rep["chsh"] = chsh
    alpha = _alpha_of(h)
    if alpha is not None:
        rep["local_bound"] = {k: v.to_dict() for k, v in local_bound_check(alpha, app).items()}
        rep["local_bound"]["published"] = {"alpha_bound": 0.75, "beta_ratio_bound": 0.5}
    return rep


# ---------------------------------------------------------------------------
# Counts-only estimates
# ---------------------------------------------------------------------------


def _with_err(pair):
    return {"value": pair[0], "stderr": pair[1]}


def estimate_setting(c: CoincidenceCounts) -> dict:
    n = c.coincidences
    fractions = {}
    if n:
        for name, k in zip(("ab", "ab_perp", "aperp_b", "aperp_bperp"), c.channels):
            p = k / n
            fractions[name] = {"value": p, "stderr": math.sqrt(p * (1.0 - p) / n)}
    return {
        "setting": c.setting,
        "angle_deg": c.angle_deg,
        "hypothesis": c.hypothesis,
        "n_pairs": c.n_pairs,
        "coincidences": n,
        "ratio": _with_err(ratio_estimator(c)),
        "singles_asymmetry": _with_err(singles_asymmetry_estimator(c)),
        "correlation": _with_err(correlation_from_counts(c)),
        "joint_fractions": fractions,
    }


def estimate_report(counts: list[CoincidenceCounts]) -> dict:
    """Estimators computed from the counts alone.

    Raises DegenerateInputError when a setting has no usable coincidences.
    """
    out = {"settings": [estimate_setting(c) for c in counts]}
    by_pair = {c.setting: c for c in counts if c.setting}
    if {"ab", "ab'", "a'b", "a'b'"} <= set(by_pair):
        out["chsh"] = chsh_from_counts(by_pair).to_dict()
    return out


def compare_report(counts: list[CoincidenceCounts], h: Hypothesis, app: ApparatusSpec) -> dict:
    """Analytic references and z-scores for each estimator."""
    est = estimate_report(counts)
    rows = []
    for c, e in zip(counts, est["settings"]):
        theta = math.radians(c.angle_deg)
        table = real_joint_table(h, theta, app)
        total = table.total
        cb, cbp = conditional_given_d1(table)
        refs = {
            "ratio": cb - cbp,
            "singles_asymmetry": (table.p_ab_perp + table.p_aperp_bperp - table.p_ab - table.p_aperp_b) / total,
            "correlation": correlation_from_table(table),
        }
        row = {"setting": c.setting, "angle_deg": c.angle_deg}
        for key, ref in refs.items():
            val, err = e[key]["value"], e[key]["stderr"]
            row[key] = {"estimate": val, "stderr": err, "analytic": ref, "z": _z(val, ref, err)}
        pub = _published("conditional_difference", h, theta, app)
        if pub:
            row["ratio"]["published"] = pub
        pub = _published("singles_asymmetry", h, theta, app)
        if pub and app.coincidence_scale == 1.0:
            row["singles_asymmetry"]["published"] = pub
        rows.append(row)
    out = {"hypothesis": h.label, "apparatus": app.to_dict(), "settings": rows}
    if "chsh" in est:
        ref = _safe(
            lambda: chsh_from_model_pairs(h, {c.setting: math.radians(c.angle_deg) for c in counts}, app)
        )
        ch = est["chsh"]
        out["chsh"] = {"estimate": ch["s"], "stderr": ch["stderr"], "analytic": ref, "z": _z(ch["s"], ref, ch["stderr"])}
    return out


def chsh_from_model_pairs(h, pair_angles: dict[str, float], app) -> float:
    e = {p: correlation_from_table(real_joint_table(h, th, app)) for p, th in pair_angles.items()}
    return abs(e["ab"] - e["ab'"] + e["a'b"] + e["a'b'"])


def _z(val, ref, err):
    if ref is None:
        return None
    if err == 0.0:
        return 0.0 if val == ref else math.copysign(math.inf, val - ref)
    return (val - ref) / err


def simulate(s: Scenario):
    """Run the Monte Carlo for a scenario; returns (counts list, report)."""
    h = s.hypothesis_obj
    setting = s.config if s.config is not None else math.radians(s.angle_deg)
    res = run_trials(
        h,
        setting,
        s.apparatus,
        s.trials,
        s.seed,
        chunk_size=s.chunk_size,
        workers=s.workers,
        absorption_is_ordinary=s.absorption_is_ordinary,
    )
    counts = list(res.values()) if isinstance(res, dict) else [res]
    rep = _header("simulate")
    rep["scenario"] = s.to_dict()
    rep["counts"] = [c.to_dict() for c in counts]
    rep["estimates"] = estimate_report(counts)
    rep["comparison"] = compare_report(counts, h, s.apparatus)
    return counts, rep


def analyze_report(counts: list[CoincidenceCounts]) -> dict:
    rep = _header("analyze")
    rep["counts"] = [c.to_dict() for c in counts]
    rep["estimates"] = estimate_report(counts)
    # references are possible only when the file carries the full setting
    first = counts[0]
    if first.hypothesis and first.apparatus and all(
        c.hypothesis == first.hypothesis and c.apparatus == first.apparatus and c.angle_deg is not None
        for c in counts
    ):
        rep["comparison"] = compare_report(
            counts, parse_hypothesis(first.hypothesis), ApparatusSpec.from_dict(first.apparatus)
        )
    return rep


def geometry_report(s: Scenario, v_grid=None) -> dict:
    events = build_events(s.geometry)
    grid = velocity_grid() if v_grid is None else v_grid
    rep = _header("geometry")
    rep["geometry"] = s.geometry.to_dict()
    rep["events"] = [e.to_dict() for e in events]
    rep["ordering"] = ordering_invariance(events, grid).to_dict()
    return rep
