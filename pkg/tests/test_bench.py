"""Bench tests: TTC/MR, smoothing, summaries, correlations (including the
frozen published-column fixture), grid orchestration, report rendering."""

import os

import numpy as np
import pytest

from qrl_lake import bench, ppo, qmetrics

from reference_values import FROZEN_CORRELATIONS, PQC_TABLE


def series(values, start=1000, step=1000):
    return [(start + i * step, v) for i, v in enumerate(values)]


# =============================================================================
# TTC and MR
# =============================================================================

def test_ttc_worked_example():
    s = series([0.0, 0.5, 0.6, 0.7, 0.65])
    assert bench.time_to_convergence(s) == 2000


def test_ttc_constant_series():
    assert bench.time_to_convergence(series([0.4] * 6)) == 1000


def test_ttc_strictly_increasing():
    """0.0..1.0 in steps of 0.1: first point with remaining rise <= 0.2 is 0.8."""
    vals = [round(0.1 * i, 1) for i in range(11)]
    s = series(vals)
    assert bench.time_to_convergence(s) == s[vals.index(0.8)][0]


def test_ttc_only_final_point_qualifies():
    s = series([0.0, 0.9, 0.0, 0.9, 0.0])
    assert bench.time_to_convergence(s) == s[-1][0]


def test_mr_uses_raw_series():
    """A single spike sets MR even though smoothing would flatten it."""
    vals = [0.1] * 10 + [0.9] + [0.1] * 10
    assert bench.max_reward(series(vals)) == 0.9
    assert max(bench.smooth(vals)) < 0.9


# =============================================================================
# Smoothing
# =============================================================================

def test_smooth_constant_unchanged():
    assert bench.smooth([0.3] * 12) == pytest.approx([0.3] * 12)


def test_smooth_impulse_decay():
    vals = [1.0] + [0.0] * 14
    out = bench.smooth(vals)
    expected = [1 / (i + 1) for i in range(10)] + [0.0] * 5
    assert out == pytest.approx(expected)


def test_smooth_window_one_is_identity():
    vals = [0.2, 0.9, 0.1]
    assert bench.smooth(vals, window=1) == pytest.approx(vals)


def test_smooth_window_validation():
    with pytest.raises(ValueError):
        bench.smooth([1.0], window=0)


# =============================================================================
# Summaries and correlations
# =============================================================================

def _record(solution, seed, values, weight=41):
    return ppo.RunRecord(solution, seed, series(values), weight)


def test_summarize_groups_and_se():
    records = [_record("PQC-1", s, [0.1 * s, 0.2 * s]) for s in (1, 2, 3)]
    rows = bench.summarize(records)
    assert len(rows) == 1
    mrs = np.array([0.2, 0.4, 0.6])
    assert rows[0].mr_mean == pytest.approx(mrs.mean())
    assert rows[0].mr_se == pytest.approx(mrs.std(ddof=1) / np.sqrt(3))


def test_summarize_permutation_invariant():
    records = [_record("PQC-2", s, [0.1, 0.5 + 0.1 * s]) for s in (1, 2, 3)]
    a = bench.summarize(records)
    b = bench.summarize(records[::-1])
    assert a == b


def test_summarize_identical_series_zero_se():
    records = [_record("NN-4", s, [0.3, 0.5], weight=201) for s in (1, 2, 3)]
    row = bench.summarize(records)[0]
    assert row.mr_se == 0.0 and row.ttc_k_se == 0.0


def _pub_rows():
    return [bench.SummaryRow(solution=f"PQC-{cid}", weight_count=w, mr_mean=mr,
                             mr_se=0.0, ttc_k_mean=ttc, ttc_k_se=0.0,
                             ent=ent, exp=exp, ed=ed)
            for cid, (w, mr, ttc, ent, exp, ed) in PQC_TABLE.items()]


def test_correlate_perfect_linear():
    rows = [bench.SummaryRow(f"PQC-{i}", 41, mr_mean=0.1 * i, mr_se=0,
                             ttc_k_mean=30 - i, ttc_k_se=0, ent=0.05 * i,
                             exp=0.3, ed=float(i)) for i in range(1, 6)]
    entries = {(e.metric, e.target): e for e in bench.correlate(rows)}
    assert entries[("ent", "mr")].pearson == pytest.approx(1.0)
    assert entries[("ed", "ttc")].spearman == pytest.approx(-1.0)
    # exp has zero variance -> undefined
    assert entries[("exp", "mr")].pearson is None


def test_correlate_requires_three_rows():
    with pytest.raises(ValueError):
        bench.correlate(_pub_rows()[:2])


def test_published_columns_reproduce_frozen_coefficients():
    """Regression fixture: the published table pushed through correlate()
    must reproduce the frozen coefficients bit-for-bit."""
    entries = {(e.metric, e.target): e for e in bench.correlate(_pub_rows())}
    for key, (pearson, spearman) in FROZEN_CORRELATIONS.items():
        assert entries[key].pearson == pearson
        assert entries[key].spearman == spearman
        assert entries[key].n == 19


def test_published_ent_vs_mr_shows_no_strong_correlation():
    spearman = FROZEN_CORRELATIONS[("ent", "mr")][1]
    assert abs(spearman) < 0.5


# =============================================================================
# Grid orchestration
# =============================================================================

def desk_cfg():
    return ppo.PpoConfig(total_timesteps=2000, rollout_length=512,
                         eval_interval=1000)


def test_grid_specs_and_filter():
    assert len(bench.grid_run_specs()) == 23 * 3
    assert len(bench.grid_run_specs(only=["pqc2", "pqc6", "nn4"])) == 9
    with pytest.raises(ValueError):
        bench.grid_run_specs(only=["pqc99"])


def test_grid_runs_resume_and_idempotence(tmp_path):
    out = str(tmp_path / "out")
    manifest = bench.run_grid(desk_cfg(), out, only=["pqc1", "nn2"],
                              seeds=(1, 2))
    assert all(v["status"] == "done" for v in manifest["runs"].values())
    assert len(manifest["runs"]) == 4

    stamps = {}
    for spec in bench.grid_run_specs(["pqc1", "nn2"], (1, 2)):
        path = os.path.join(bench.run_dir(out, spec), "rewards.csv")
        stamps[path] = (os.path.getmtime(path),
                        open(path, "rb").read())
    manifest2 = bench.run_grid(desk_cfg(), out, only=["pqc1", "nn2"],
                               seeds=(1, 2))
    assert manifest2["runs"] == manifest["runs"]
    for path, (mtime, payload) in stamps.items():
        assert os.path.getmtime(path) == mtime
        assert open(path, "rb").read() == payload


def test_grid_records_failures_without_aborting(tmp_path):
    out = str(tmp_path / "out")
    bad = ppo.PpoConfig(total_timesteps=1000, rollout_length=512)
    bad.rollout_length = 100  # post-init bypass: breaks divisibility downstream
    manifest = bench.run_grid(bad, out, only=["pqc1"], seeds=(1,))
    entry = manifest["runs"]["PQC-1/seed1"]
    assert entry["status"] == "failed"
    assert "divisible" in entry["error"]


def test_grid_parallel_jobs(tmp_path):
    out = str(tmp_path / "out")
    manifest = bench.run_grid(desk_cfg(), out, only=["pqc1", "pqc9"],
                              seeds=(1,), jobs=2)
    assert sum(v["status"] == "done" for v in manifest["runs"].values()) == 2


# =============================================================================
# Report rendering
# =============================================================================

def _tiny_grid(tmp_path, with_metrics=True):
    out = str(tmp_path / "out")
    bench.run_grid(desk_cfg(), out, only=["pqc1", "pqc2", "pqc9", "nn2"],
                   seeds=(1, 2))
    if with_metrics:
        cfg = qmetrics.MetricsConfig(ent_samples=40, exp_pairs=40, exp_bins=20,
                                     ed_theta_samples=3, ed_k=10)
        bench.write_metrics_csv(qmetrics.compute_metrics([1, 2, 9], cfg),
                                os.path.join(out, "metrics.csv"))
    return out


def test_render_report_outputs(tmp_path):
    out = _tiny_grid(tmp_path)
    written = bench.render_report(out, only=["pqc1", "pqc2", "pqc9", "nn2"],
                                  seeds=(1, 2))
    summary = os.path.join(out, "summary.csv")
    assert summary in written
    with open(summary) as fh:
        header = fh.readline().strip()
        rows = fh.readlines()
    assert header == "solution,W,MR,MR_se,TTC_k,TTC_k_se,Ent,Exp,ED"
    assert len(rows) == 4
    svgs = [p for p in written if p.endswith(".svg")]
    assert len(svgs) == 5 + 6  # five curve groups + six scatters
    for path in svgs:
        content = open(path).read()
        assert content.startswith("<svg") and content.rstrip().endswith("</svg>")
    curves = open(os.path.join(out, "report", "rewards_pqc_1_to_4.svg")).read()
    assert "threshold" in curves
    corr = os.path.join(out, "correlations.csv")
    with open(corr) as fh:
        assert fh.readline().strip() == "metric,target,pearson,spearman,n"
        assert len(fh.readlines()) == 6
    notes = open(os.path.join(out, "report_notes.txt")).read()
    assert "published" in notes


def test_render_report_missing_runs_listed(tmp_path):
    out = _tiny_grid(tmp_path, with_metrics=False)
    with pytest.raises(FileNotFoundError) as err:
        bench.render_report(out, only=["pqc1", "pqc3"], seeds=(1, 2))
    assert "PQC-3/seed1" in str(err.value)


def test_load_run_records_roundtrip(tmp_path):
    out = _tiny_grid(tmp_path, with_metrics=False)
    records = bench.load_run_records(out, only=["pqc1", "pqc2", "pqc9", "nn2"],
                                     seeds=(1, 2))
    assert len(records) == 8
    pqc1 = [r for r in records if r.solution_id == "PQC-1"]
    assert all(len(r.reward_series) == 2 for r in pqc1)
    assert pqc1[0].weight_count == 41
