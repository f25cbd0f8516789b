import io
import math
import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from provkit.classifier import Label
from provkit.evaluation import (
    ConfusionMatrix,
    EvaluationError,
    aggregate,
    build_report,
    metrics,
    pct,
    read_metrics_csv,
    score_run,
    write_metrics_csv,
    write_report_json,
)

from .paper_tables import FIG20, TABLE3, verdict_records


def test_score_run_simple():
    assert score_run([(Label.CHATGPT, "ChatGPT")] * 10) == ConfusionMatrix(tp=10)
    assert score_run([(Label.OTHER, "ChatGPT")]) == ConfusionMatrix(fn=1)
    assert score_run([(Label.NEAR_COPY, "Other")]) == ConfusionMatrix(fp=1)


def test_score_run_rejects_bad_input():
    with pytest.raises(EvaluationError):
        score_run([])
    with pytest.raises(EvaluationError):
        score_run([(Label.INCONCLUSIVE, "Other")])
    with pytest.raises(EvaluationError):
        score_run([("maybe", "Other")])


def test_score_run_business_counts():
    records = verdict_records(FIG20["Business"])
    random.Random(3).shuffle(records)
    assert score_run(records) == ConfusionMatrix(503, 5, 20, 488)


@pytest.mark.parametrize("category", list(FIG20))
def test_table3_per_category(category):
    assert metrics(FIG20[category]).as_percent() == TABLE3[category]


def test_overall_from_summed_matrix():
    overall = aggregate(FIG20)
    assert metrics(ConfusionMatrix(2083, 82, 81, 2084)) == overall
    assert overall.as_percent() == {
        "accuracy": "96.24", "precision": "96.26", "sensitivity": "96.21", "specificity": "96.26", "f1": "96.23",
    }
    # The published Overall column equals these values cut (not rounded) at two decimals.
    truncated = {k: f"{math.floor(getattr(overall, k) * 10000) / 100:.2f}" for k in TABLE3["Overall"]}
    assert truncated == TABLE3["Overall"]


def test_perfect_classifier():
    assert set(metrics(ConfusionMatrix(7, 0, 0, 7)).as_percent().values()) == {"100.00"}


def test_undefined_metrics_are_none():
    m = metrics(ConfusionMatrix(tp=0, fn=0, fp=0, tn=5))
    assert m.precision is None and m.sensitivity is None and m.f1 is None
    assert m.specificity == 1.0 and m.accuracy == 1.0
    assert pct(m.precision) == "n/a"
    with pytest.raises(EvaluationError):
        metrics(ConfusionMatrix())


def test_aggregate_single_and_doubled():
    cm = FIG20["Tech"]
    assert aggregate([cm]) == metrics(cm)
    assert aggregate([cm, cm]) == metrics(cm)
    with pytest.raises(EvaluationError):
        aggregate([])


def test_pct_rounds_half_up():
    assert pct(0.123450) == "12.35"
    assert pct(0.5) == "50.00"


counts = st.integers(0, 500)


@given(counts, counts, counts, counts, st.integers(2, 5), st.randoms())
def test_metric_invariances(tp, fn, fp, tn, k, rnd):
    if tp + fn + fp + tn == 0:
        return
    cm = ConfusionMatrix(tp, fn, fp, tn)
    scaled = ConfusionMatrix(k * tp, k * fn, k * fp, k * tn)
    m, ms = metrics(cm), metrics(scaled)
    for name in ("accuracy", "precision", "sensitivity", "specificity", "f1"):
        a, b = getattr(m, name), getattr(ms, name)
        assert (a is None and b is None) or a == pytest.approx(b)
        assert a is None or 0.0 <= a <= 1.0
    records = verdict_records(cm)
    rnd.shuffle(records)
    assert score_run(records) == cm


def test_report_json_schema():
    report = build_report("run1", {"min_len": 3}, FIG20)
    buf = io.StringIO()
    write_report_json(report, buf)
    data = json.loads(buf.getvalue())
    assert set(data) == {"run_id", "config", "per_category", "overall"}
    first = data["per_category"][0]
    assert first["category"] == "Business"
    assert first["confusion"] == {"tp": 503, "fn": 5, "fp": 20, "tn": 488}
    assert set(first["metrics"]) == {"accuracy", "precision", "sensitivity", "specificity", "f1"}


def test_metrics_csv_mirrors_table3():
    buf = io.StringIO()
    write_metrics_csv(FIG20, buf)
    assert buf.getvalue().splitlines()[0] == "metric,Business,Entertainment,Politics,Sport,Tech,Overall"
    table = read_metrics_csv(io.StringIO(buf.getvalue()))
    assert {k: v for k, v in table.items() if k != "Overall"} == {k: v for k, v in TABLE3.items() if k != "Overall"}
    assert table["Overall"] == aggregate(FIG20).as_percent()
