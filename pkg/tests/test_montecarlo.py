import math

import numpy as np
import pytest

from nullresult.bell import chi_square_gof, merge_counts, ratio_estimator
from nullresult.errors import MergeError, ValidationError
from nullresult.model import (
    ASPECT,
    IDEAL,
    AnalyzerConfig,
    ApparatusSpec,
    ConstantAlpha,
    LocalModel,
    NoNrCollapse,
    QmCollapse,
    SawtoothAlpha,
    Uncorrelated,
    real_joint_table,
)
from nullresult.montecarlo import (
    N_UNIFORMS,
    TrialOutcome,
    RngStreamSpec,
    run_trials,
    sample_block,
    sample_trial,
    tally,
)

DEG = math.pi / 180
T22 = 22.5 * DEG
LOSSLESS = ApparatusSpec(eta=1.0, f=1.0, g=1.0, t_par=0.9, t_perp=0.1, big_f=0.95)


def test_qm_ideal_perfect_anticorrelation_channels():
    c = run_trials(QmCollapse(), 0.0, IDEAL, 50_000, seed=1)
    assert c.n_ab_perp == 0 and c.n_aperp_b == 0
    assert c.n_ab + c.n_aperp_bperp == 50_000
    c = run_trials(QmCollapse(), math.pi / 2, IDEAL, 50_000, seed=1)
    assert c.n_ab == 0 and c.n_aperp_bperp == 0


def test_no_collection_no_coincidences():
    app = ApparatusSpec(eta=1.0, f=0.0, g=1.0, t_par=1.0, t_perp=0.0, big_f=1.0)
    c = run_trials(QmCollapse(), T22, app, 10_000, seed=3)
    assert c.coincidences == 0 and c.n_lost1 == 10_000


def test_lossless_one_channel_each():
    c = run_trials(QmCollapse(), T22, IDEAL, 20_000, seed=4)
    assert c.n_d1 + c.n_d1_perp == 20_000
    assert c.n_d2 + c.n_d2_perp == 20_000
    assert c.n_lost1 == c.n_lost2 == 0


def test_uncorrelated_source_gives_zero_ratio():
    app = ApparatusSpec(eta=1.0, f=1.0, g=1.0, t_par=0.95, t_perp=0.007, big_f=0.0)
    c = run_trials(QmCollapse(), T22, app, 200_000, seed=5)
    r, se = ratio_estimator(c)
    assert abs(r) < 4 * se


def test_aspect_frequencies_within_4_sigma():
    n = 400_000
    c = run_trials(QmCollapse(), T22, ASPECT, n, seed=6)
    table = real_joint_table(QmCollapse(), T22, ASPECT)
    for obs, p in zip(c.channels, table.as_tuple()):
        assert abs(obs - n * p) < 4 * math.sqrt(n * p * (1 - p))


HYPOTHESES = [QmCollapse(), NoNrCollapse(ConstantAlpha(0.5)), NoNrCollapse(SawtoothAlpha()), LocalModel(SawtoothAlpha())]


@pytest.mark.slow
@pytest.mark.parametrize("h", HYPOTHESES, ids=lambda h: h.label)
@pytest.mark.parametrize("app", [IDEAL, ASPECT], ids=["ideal", "aspect"])
@pytest.mark.parametrize("angle", [0.0, 22.5, 45.0, 67.5, 90.0])
def test_chi_square_matches_analytic(h, app, angle):
    theta = angle * DEG
    c = run_trials(h, theta, app, 10**6, seed=11)
    _, _, p = chi_square_gof(c, real_joint_table(h, theta, app))
    assert p > 1e-3


def test_absorption_flag_changes_singles_only():
    h = NoNrCollapse(ConstantAlpha(0.5))
    app = ApparatusSpec(eta=1.0, f=1.0, g=1.0, t_par=0.8, t_perp=0.05, big_f=1.0)
    a = run_trials(h, T22, app, 100_000, seed=12, absorption_is_ordinary=True)
    b = run_trials(h, T22, app, 100_000, seed=12, absorption_is_ordinary=False)
    # coincidences need ν1 detected, and detection is never an absorption
    assert a.channels == b.channels
    assert (a.n_d2, a.n_d2_perp) != (b.n_d2, b.n_d2_perp)


def test_worker_count_does_not_change_counts():
    kw = dict(chunk_size=4096)
    a = run_trials(QmCollapse(), T22, ASPECT, 100_000, seed=7, workers=1, **kw)
    b = run_trials(QmCollapse(), T22, ASPECT, 100_000, seed=7, workers=4, **kw)
    assert a == b
    assert a != run_trials(QmCollapse(), T22, ASPECT, 100_000, seed=8, **kw)


def test_chsh_settings_use_distinct_substreams():
    out = run_trials(QmCollapse(), AnalyzerConfig.canonical(), IDEAL, 10_000, seed=9)
    assert set(out) == {"ab", "ab'", "a'b", "a'b'"}
    # ab, a'b and a'b' share |θ| = 22.5° yet must not share a stream
    assert out["ab"].channels != out["a'b"].channels
    assert out["ab'"].angle_deg == pytest.approx(67.5)


def test_angle_is_folded():
    c = run_trials(QmCollapse(), -T22, IDEAL, 5000, seed=1)
    assert c.angle_deg == pytest.approx(22.5)
    assert c == run_trials(QmCollapse(), T22 + math.pi, IDEAL, 5000, seed=1)


@pytest.mark.parametrize("bad", [0, -5, 1.5, True])
def test_rejects_bad_trial_count(bad):
    with pytest.raises(ValidationError):
        run_trials(QmCollapse(), T22, IDEAL, bad, seed=1)


@pytest.mark.parametrize("bad", [-1, 2**64, 0.5])
def test_rejects_bad_seed(bad):
    with pytest.raises(ValidationError):
        run_trials(QmCollapse(), T22, IDEAL, 10, seed=bad)


def test_sample_trial_invariants():
    rng = RngStreamSpec(0, 0).generator()
    for _ in range(500):
        t = sample_trial(Uncorrelated(), T22, ASPECT, rng)
        assert isinstance(t, TrialOutcome)
        if not t.nu1_collected:
            assert t.nu1_channel == "lost" and not t.nu1_detected
        if t.nu1_detected:
            assert t.nu1_channel in ("D1", "D1'")
        if t.nu2_detected:
            assert t.nu2_channel in ("D2", "D2'")


def test_tally_consistency():
    u = RngStreamSpec(3, 0).generator().random((20_000, N_UNIFORMS))
    t = tally(sample_block(LocalModel(SawtoothAlpha()), 0.3, ASPECT, u))
    assert t["n_d1"] + t["n_d1_perp"] + t["n_lost1"] == 20_000
    assert t["n_d2"] + t["n_d2_perp"] + t["n_lost2"] == 20_000
    assert t["n_ab"] + t["n_ab_perp"] <= t["n_d1"]


def test_merge_of_independent_runs():
    a = run_trials(QmCollapse(), T22, ASPECT, 100_000, seed=21)
    b = run_trials(QmCollapse(), T22, ASPECT, 100_000, seed=22)
    m = merge_counts(a, b)
    assert m.n_pairs == 200_000
    r, se = ratio_estimator(m)
    expected = ASPECT.big_f * ASPECT.contrast * math.cos(2 * T22)
    assert abs(r - expected) < 4 * se
    with pytest.raises(MergeError):
        merge_counts(a, run_trials(QmCollapse(), 0.3, ASPECT, 10, seed=21))


@pytest.mark.slow
def test_estimator_consistency_across_sizes():
    expected = ASPECT.big_f * ASPECT.contrast * math.cos(2 * T22)
    mean_err = []
    for n in (10**4, 10**5, 10**6):
        errs = []
        for seed in range(30):
            r, se = ratio_estimator(run_trials(QmCollapse(), T22, ASPECT, n, seed=1000 + seed))
            assert abs(r - expected) < 4 * se
            errs.append(abs(r - expected))
        mean_err.append(np.mean(errs))
    assert mean_err[0] > mean_err[1] > mean_err[2]
