"""Per-pair Monte Carlo sampling of the two-channel experiment.

Each trial consumes a fixed block of uniforms, so a chunk's outcome is a
pure function of its RNG substream.  Substreams are Philox generators keyed
by ``(seed, setting_index, chunk_index)``; chunk results are reduced in
chunk order, which makes the counts independent of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import islice

import numpy as np

from .bell import CoincidenceCounts, merge_counts
from .errors import ValidationError
from .model import (
    AnalyzerConfig,
    ApparatusSpec,
    Hypothesis,
    LocalModel,
    NoNrCollapse,
    QmCollapse,
    check_theta,
    alpha_eval,
    fold_relative,
    resolve,
)

DEFAULT_CHUNK_SIZE = 2**16
MAX_SEED = 2**64

# Channel codes.  ν1: transmitted → D1, reflected → D1'.  ν2: D2, D2'.
PAR, PERP, LOST = 0, 1, 2
NU1_NAMES = ("D1", "D1'", "lost")
NU2_NAMES = ("D2", "D2'", "lost")

# Uniform columns per trial.
_COLLECT1, _COLLECT2, _CORRELATED, _SOURCE, _POL1, _SOURCE2, _POL2, _DET1, _DET2 = range(9)
N_UNIFORMS = 9


@dataclass(frozen=True)
class TrialOutcome:
    nu1_collected: bool
    nu2_collected: bool
    nu1_channel: str
    nu2_channel: str
    nu1_detected: bool
    nu2_detected: bool


@dataclass(frozen=True)
class RngStreamSpec:
    seed: int
    stream_id: int
    setting_index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.setting_index, self.stream_id))
        return np.random.Generator(np.random.Philox(ss))


def _polarizer_channel(u, p_par, p_perp, reaches):
    ch = np.where(u < p_par, PAR, np.where(u < p_par + p_perp, PERP, LOST))
    return np.where(reaches, ch, LOST)


def sample_block(
    h: Hypothesis,
    theta: float,
    app: ApparatusSpec,
    u: np.ndarray,
    absorption_is_ordinary: bool = True,
) -> dict[str, np.ndarray]:
    """Map an (n, 9) array of uniforms to per-trial outcomes.

    Sampling chain: collection (f, then g), source branch (correlated with
    probability F), ν1 source polarization |a> or |a⊥>, ν1 through the
    two-channel polarizer, ν2 polarization set by the hypothesis, ν2
    through polarizer b, detection with probability η.

    In the correlated branch ν2 carries ν1's source polarization, which is
    the same law as collapsing ν2 onto the T∥:T⊥ posterior of ν1's
    polarizer outcome.  Under the no-NR-collapse hypothesis a null result
    at D1' instead sends ν2 to D2 with probability T+·α_eff, where
    α_eff = [1 + (T−²/T+²)(2α − 1)]/2, so that the coincidence table
    carries β = F·T−²·(2α − 1).  ``absorption_is_ordinary`` decides whether
    ν1 absorbed inside its polarizer counts as an ordinary event (collapse)
    or as a null result at D1'.
    """
    h = resolve(h)
    theta = check_theta(theta)
    u = np.asarray(u, dtype=np.float64)
    t_par, t_perp, t_plus = app.t_par, app.t_perp, app.t_plus

    collected1 = u[:, _COLLECT1] < app.f
    collected2 = u[:, _COLLECT2] < app.g
    correlated = u[:, _CORRELATED] < app.big_f
    s1_perp = u[:, _SOURCE] < 0.5

    p1_par = np.where(s1_perp, t_perp, t_par)
    p1_perp = np.where(s1_perp, t_par, t_perp)
    ch1 = _polarizer_channel(u[:, _POL1], p1_par, p1_perp, collected1)

    s2_perp = np.where(correlated, s1_perp, u[:, _SOURCE2] < 0.5)
    c2 = math.cos(theta) ** 2
    cos2chi = np.where(s2_perp, 1.0 - c2, c2)
    p2_par = t_par * cos2chi + t_perp * (1.0 - cos2chi)
    p2_perp = t_par * (1.0 - cos2chi) + t_perp * cos2chi

    if not isinstance(h, QmCollapse):
        alpha = alpha_eval(h.alpha, theta)
        alpha_eff = 0.5 * (1.0 + app.contrast * (2.0 * alpha - 1.0))
        if isinstance(h, NoNrCollapse):
            absorbed = collected1 & (ch1 == LOST)
            nr = ch1 == PAR
            if not absorption_is_ordinary:
                nr = nr | absorbed
            swapped = np.zeros_like(nr)
        elif isinstance(h, LocalModel):
            nr = ch1 == PAR
            swapped = ch1 == PERP
        else:
            raise ValidationError(f"unsupported hypothesis {h!r}", "hypothesis")
        driven = correlated & (nr | swapped)
        a_eff = np.where(swapped, 1.0 - alpha_eff, alpha_eff)
        p2_par = np.where(driven, t_plus * a_eff, p2_par)
        p2_perp = np.where(driven, t_plus * (1.0 - a_eff), p2_perp)

    ch2 = _polarizer_channel(u[:, _POL2], p2_par, p2_perp, collected2)
    det1 = (ch1 != LOST) & (u[:, _DET1] < app.eta)
    det2 = (ch2 != LOST) & (u[:, _DET2] < app.eta)
    return {
        "nu1_collected": collected1,
        "nu2_collected": collected2,
        "nu1_channel": ch1,
        "nu2_channel": ch2,
        "nu1_detected": det1,
        "nu2_detected": det2,
    }


def sample_trial(
    h: Hypothesis,
    theta: float,
    app: ApparatusSpec,
    rng: np.random.Generator,
    absorption_is_ordinary: bool = True,
) -> TrialOutcome:
    out = sample_block(h, theta, app, rng.random((1, N_UNIFORMS)), absorption_is_ordinary)
    return TrialOutcome(
        nu1_collected=bool(out["nu1_collected"][0]),
        nu2_collected=bool(out["nu2_collected"][0]),
        nu1_channel=NU1_NAMES[int(out["nu1_channel"][0])],
        nu2_channel=NU2_NAMES[int(out["nu2_channel"][0])],
        nu1_detected=bool(out["nu1_detected"][0]),
        nu2_detected=bool(out["nu2_detected"][0]),
    )


def tally(out: dict[str, np.ndarray]) -> dict[str, int]:
    """Reduce per-trial outcomes to coincidence, singles and loss counters."""
    k1 = np.where(out["nu1_detected"], out["nu1_channel"], LOST)
    k2 = np.where(out["nu2_detected"], out["nu2_channel"], LOST)
    b = [int(x) for x in np.bincount(3 * k1 + k2, minlength=9)]
    return {
        "n_ab": b[0],
        "n_ab_perp": b[1],
        "n_aperp_b": b[3],
        "n_aperp_bperp": b[4],
        "n_pairs": len(k1),
        "n_d1": b[0] + b[1] + b[2],
        "n_d1_perp": b[3] + b[4] + b[5],
        "n_d2": b[0] + b[3] + b[6],
        "n_d2_perp": b[1] + b[4] + b[7],
        "n_lost1": b[6] + b[7] + b[8],
        "n_lost2": b[2] + b[5] + b[8],
    }


def _chunks(n_trials: int, chunk_size: int):
    stream_id = 0
    remaining = n_trials
    while remaining > 0:
        size = min(chunk_size, remaining)
        yield stream_id, size
        stream_id += 1
        remaining -= size


def _run_setting(h, theta, app, n_trials, seed, setting_index, setting, chunk_size, workers, absorption_is_ordinary):
    meta = dict(
        hypothesis=h.label,
        angle_deg=math.degrees(theta),
        apparatus=app.to_dict(),
        seed=seed,
        setting=setting,
        chunk_size=chunk_size,
    )

    def one(chunk):
        stream_id, size = chunk
        rng = RngStreamSpec(seed, stream_id, setting_index).generator()
        out = sample_block(h, theta, app, rng.random((size, N_UNIFORMS)), absorption_is_ordinary)
        return CoincidenceCounts(**tally(out), **meta)

    total = None
    chunks = _chunks(n_trials, chunk_size)
    if workers <= 1:
        results = map(one, chunks)
        for c in results:
            total = c if total is None else merge_counts(total, c)
        return total
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while True:
            batch = list(islice(chunks, 4 * workers))
            if not batch:
                break
            for c in pool.map(one, batch):
                total = c if total is None else merge_counts(total, c)
    return total


def run_trials(
    h: Hypothesis,
    setting: float | AnalyzerConfig,
    app: ApparatusSpec,
    n_trials: int,
    seed: int,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
    absorption_is_ordinary: bool = True,
) -> CoincidenceCounts | dict[str, CoincidenceCounts]:
    """Simulate ``n_trials`` emitted pairs.

    ``setting`` is either a relative analyzer angle in radians (returns one
    CoincidenceCounts) or an AnalyzerConfig (returns counts keyed by CHSH
    pair, ``n_trials`` pairs each).
    """
    if isinstance(n_trials, bool) or not isinstance(n_trials, int) or n_trials < 1:
        raise ValidationError(f"n_trials must be a positive integer, got {n_trials!r}", "trials")
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < MAX_SEED:
        raise ValidationError(f"seed must be an integer in [0, 2^64), got {seed!r}", "seed")
    if not isinstance(chunk_size, int) or chunk_size < 1:
        raise ValidationError("chunk_size must be a positive integer", "chunk_size")
    if isinstance(setting, AnalyzerConfig):
        return {
            pair: _run_setting(h, theta, app, n_trials, seed, i, pair, chunk_size, workers, absorption_is_ordinary)
            for i, (pair, theta) in enumerate(setting.pairs().items())
        }
    theta = fold_relative(setting)
    return _run_setting(h, theta, app, n_trials, seed, 0, None, chunk_size, workers, absorption_is_ordinary)
