import dataclasses
import json

import numpy as np
import pytest

from hybrid_ra.access import ihra_mmtc_counts, tara_success_mask
from hybrid_ra.exceptions import InvalidConfigError
from hybrid_ra.experiments import (
    CSV_HEADER,
    ExperimentSpec,
    Fig2Spec,
    load_spec,
    mean_ci95,
    preset_fig2,
    preset_fig4,
    preset_fig5,
    read_results_csv,
    run_experiment,
    run_fig2,
    write_results_csv,
)
from hybrid_ra.experiments.fig2 import split_series
from hybrid_ra.experiments.io import build_id, read_results_json, write_metadata, write_results_json
from hybrid_ra.experiments.runner import TrialStreams, UrllcPlan, point_key, run_point, trial_rng
from hybrid_ra.geometry import GeometryConfig


def small(**kw):
    base = dict(R=(800.0,), num_preambles=(20,), Na=(30,), trials=50, seed=3)
    base.update(kw)
    return ExperimentSpec(**base)


# presets


def test_fig4_preset():
    s = preset_fig4()
    assert s.Na == (80,) and s.L == 4 and s.R == (800.0, 1200.0)
    assert s.num_preambles == (10, 20, 30, 40, 50, 60)
    assert set(s.scheme) == {"ihra", "ihra-random", "tara"}


def test_fig5_preset():
    s = preset_fig5()
    assert s.num_preambles == (40,) and s.urllc_count == 3 and s.urllc_mode == "fixed"
    assert s.Na == (20, 40, 60, 80, 100, 120, 140) and s.R == (800.0, 1200.0)


def test_fig2_preset():
    s = preset_fig2()
    assert s.horizon == 5 and s.urllc_lambda == 5 and s.slots == 10_000 and len(s.seeds) >= 5
    assert s.learning_rate == 1e-3


# validation


@pytest.mark.parametrize("field, value", [
    ("trials", 0),
    ("Na", ()),
    ("num_preambles", (0,)),
    ("scheme", ("aloha",)),
    ("R", (5000.0,)),
    ("L", 0),
    ("urllc_mode", "bursty"),
    ("seed", -1),
    ("trials", 2.5),
    ("Na", (20, 20)),
    ("unmatched_top_level", "yes"),
])
def test_invalid_spec_names_field(field, value):
    with pytest.raises(InvalidConfigError) as err:
        ExperimentSpec(**{field: value})
    assert err.value.field == field


def test_scalar_sweeps_are_promoted():
    s = ExperimentSpec(R=1200, num_preambles=40, Na=80, scheme="tara")
    assert s.R == (1200.0,) and s.num_preambles == (40,) and s.Na == (80,) and s.scheme == ("tara",)


def test_load_spec(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"scheme": ["tara"], "R": 800, "num_preambles": [10, 20], "trials": 5}))
    s = load_spec(p)
    assert s.num_preambles == (10, 20) and s.trials == 5


@pytest.mark.parametrize("doc", [{"trails": 5}, {"R": {"a": 1}}, [1, 2]])
def test_load_spec_rejects(tmp_path, doc):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(InvalidConfigError):
        load_spec(p)


def test_load_spec_rejects_malformed_json(tmp_path):
    p = tmp_path / "s.json"
    p.write_text("{not json")
    with pytest.raises(InvalidConfigError):
        load_spec(p)


def test_spec_round_trips_through_dict():
    s = preset_fig5()
    assert ExperimentSpec(**s.to_dict()) == s


# seeding


def test_trial_streams_match_fresh_generators():
    key = point_key(7, 1200.0, 156.0, 40, 80, 4)
    streams = TrialStreams(key)
    for t in (5, 0, 2**33, 5):
        assert np.array_equal(streams.rng(t).random(6), trial_rng(key, t).random(6))


def test_point_key_depends_on_grid_values():
    keys = {point_key(0, R, 156.0, tp, na, 4) for R in (800.0, 1200.0) for tp in (10, 20) for na in (20, 40)}
    assert len(keys) == 8
    assert point_key(0, 800.0, 156.0, 10, 20, 4) != point_key(1, 800.0, 156.0, 10, 20, 4)


def test_single_trial_is_rerunnable():
    key = point_key(3, 800.0, 156.0, 20, 30, 4)
    g = GeometryConfig(800.0)
    totals, _ = run_point("ihra", g, 20, 30, 4, 40, key, UrllcPlan.fixed(0, 40))
    for t in (0, 17, 39):
        assert totals[t] == ihra_mmtc_counts(g, 20, 4, 30, "ihra", trial_rng(key, t))[0]


def test_schemes_share_random_numbers():
    # trial 0 of TARA sees the same stream as trial 0 of IHRA at the same point
    key = point_key(3, 800.0, 156.0, 20, 30, 4)
    tara = int(tara_success_mask(30, 20, trial_rng(key, 0)).sum())
    row = run_experiment(small(scheme=("tara",), trials=1))[0]
    assert row.mean_success == tara


# runner


def test_rows_sorted_and_complete():
    rows = run_experiment(small(R=(1200.0, 800.0), num_preambles=(20, 10), Na=(40, 20), trials=5))
    keys = [(r.scheme, r.R, r.num_preambles, r.Na) for r in rows]
    assert keys == sorted(keys) and len(keys) == 3 * 2 * 2 * 2


def test_run_is_deterministic():
    assert run_experiment(small()) == run_experiment(small())


def test_seed_changes_results():
    assert run_experiment(small(seed=1)) != run_experiment(small(seed=2))


def test_result_bounds():
    for r in run_experiment(small(Na=(0, 30), urllc_count=3, trials=30)):
        assert 0 <= r.mean_success <= r.Na + 3
        assert r.ci95 >= 0
        if r.scheme != "tara":
            assert r.mean_urllc_success == 3


def test_tara_counts_urllc_as_contenders():
    rows = run_experiment(small(scheme=("tara",), Na=(0,), urllc_count=4, num_preambles=(1,), trials=20))
    # four devices on one preamble always collide
    assert rows[0].mean_success == 0 and rows[0].mean_urllc_success == 0


def test_unmatched_top_level_option_changes_ihra_only():
    a = {r.scheme: r.mean_success for r in run_experiment(small(trials=200))}
    b = {r.scheme: r.mean_success for r in run_experiment(small(trials=200, unmatched_top_level=True))}
    assert a["tara"] == b["tara"] and a["ihra-random"] == b["ihra-random"]
    assert a["ihra"] > b["ihra"]


def test_ci_halves_when_trials_quadruple():
    spec = small(scheme=("ihra",), Na=(80,), num_preambles=(40,))
    ci = [run_experiment(dataclasses.replace(spec, trials=n))[0].ci95 for n in (1000, 4000)]
    assert ci[1] / ci[0] == pytest.approx(0.5, rel=0.2)


def test_mean_ci95():
    m, h = mean_ci95([1, 2, 3, 4])
    assert m == 2.5 and h == pytest.approx(3.182446305284263 * np.std([1, 2, 3, 4], ddof=1) / 2)
    assert mean_ci95([7]) == (7.0, 0.0)


def test_fixed_urllc_plan():
    plan = UrllcPlan.fixed(3, 5)
    assert plan.actual.tolist() == [3] * 5 and plan.predicted.tolist() == [3] * 5


def test_poisson_urllc_plan_uses_forecasts():
    spec = small(urllc_mode="poisson", trials=40, predictor_epochs=2, predictor_hidden=3,
                 predictor_train_slots=200, predictor_window=4, predictor_horizon=2)
    plan = UrllcPlan.for_spec(spec)
    assert len(plan.actual) == len(plan.predicted) == 40
    assert plan.predicted.min() >= 0
    rows = run_experiment(spec)
    ihra = next(r for r in rows if r.scheme == "ihra")
    assert ihra.mean_urllc_success == pytest.approx(np.minimum(plan.actual, plan.predicted).mean())


# files


def test_csv_round_trip(tmp_path):
    rows = run_experiment(small(trials=17))
    path = tmp_path / "r.csv"
    write_results_csv(rows, path)
    assert path.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert CSV_HEADER == ["scheme", "R", "num_preambles", "Na", "trials", "mean_success", "ci95",
                          "mean_urllc_success"]
    assert read_results_csv(path) == rows


def test_json_round_trip(tmp_path):
    rows = run_experiment(small(trials=9))
    path = tmp_path / "r.json"
    write_results_json(rows, path)
    assert read_results_json(path) == rows


def test_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n")
    with pytest.raises(ValueError):
        read_results_csv(path)


def test_metadata(tmp_path):
    path = tmp_path / "run.json"
    write_metadata(path, small().to_dict(), {"note": 1})
    doc = json.loads(path.read_text())
    assert doc["build"] == build_id() and len(doc["build"]) == 12
    assert doc["spec"]["trials"] == 50 and doc["note"] == 1


# forecaster comparison


def test_split_series_keeps_test_context():
    train, test = split_series(np.arange(100), 10, 0.2)
    assert len(train) == 80 and test[0] == 70 and test[-1] == 99


def test_fig2_small_run():
    spec = Fig2Spec(slots=400, epochs=2, hidden_size=3, window=5, seeds=(0,))
    run = run_fig2(spec)
    assert [(r.seed, r.model) for r in run.rows] == [(0, "attention"), (0, "lstm")]
    assert all(r.test_rmse > 0 and 0 <= r.coverage <= 1 for r in run.rows)
    pred = run.predictions[0]
    assert len(pred["actual"]) == len(pred["attention"]) == len(pred["lstm"])
    again = run_fig2(spec)
    assert again.rows == run.rows
