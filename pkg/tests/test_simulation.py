import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mzip.errors import InvalidArgument
from mzip.sampler import SamplerConfig
from mzip.simulation import (ScenarioSpec, block_correlation, default_hyper, evaluate_selection,
                             generate_dataset, run_study)


def test_block_correlation_identity():
    assert np.array_equal(block_correlation(4, 0, 0, 0), np.eye(4))


def test_block_correlation_layout():
    r = block_correlation(6, 0.7, 0.3, 0.2)
    assert r[0, 1] == 0.7 and r[3, 5] == 0.3 and r[0, 5] == 0.2 and r[2, 3] == 0.2
    assert np.allclose(r, r.T) and np.all(np.diag(r) == 1)


def test_block_correlation_not_pd():
    with pytest.raises(InvalidArgument, match="eigenvalue"):
        block_correlation(4, 0.5, 0.5, 0.9)


def test_default_scenarios():
    s = ScenarioSpec("I")
    assert (s.n, s.q) == (300, 20)
    assert s.b_true.shape == (1, 20) and s.a_true.shape == (1, 20)
    assert s.b_true[0, 3] == pytest.approx(0.2) and s.b_true[0, 10] == 0.0
    assert int(s.tau["count"][0]) == 10 and int(s.tau["binary"][0]) == 10
    assert (s.c1, s.c2, s.c3) == (0.7, 0.3, 0.2)
    assert not ScenarioSpec("VI").overdispersed
    assert int(ScenarioSpec("V").tau["count"][0]) == 0
    with pytest.raises(InvalidArgument):
        ScenarioSpec("VII")
    with pytest.raises(InvalidArgument):
        ScenarioSpec("I", q=30)


def test_generate_is_deterministic_and_replicates_differ():
    spec = ScenarioSpec("I", n=50, seed=9)
    a, b = generate_dataset(spec, 0), generate_dataset(spec, 0)
    assert np.array_equal(a.data.y, b.data.y)
    assert not np.array_equal(a.data.y, generate_dataset(spec, 1).data.y)


def test_generated_counts_baseline_mean():
    # Scenario VI, no covariate effect: positive counts ~ Poisson(e^5) truncated at 0 (negligible)
    spec = ScenarioSpec("VI", n=300, q=5, b_true=np.zeros((1, 5)), a_true=np.zeros((1, 5)), seed=3)
    y = generate_dataset(spec, 0).data.y
    pos = y[y > 0]
    assert abs(pos.mean() - np.exp(5)) < 0.1 * np.exp(5)
    assert np.all(y >= 0) and y.dtype.kind == "i"


def test_generated_zero_structure():
    spec = ScenarioSpec("I", n=300, seed=1)
    sim = generate_dataset(spec, 0)
    assert np.all(sim.data.y[sim.w < 0] == 0)
    assert sim.truth_count.shape == (20, 1)
    # Scenario VI: independent probit margins
    sim6 = generate_dataset(ScenarioSpec("VI", n=2000, q=4, seed=1), 0)
    c = np.corrcoef((sim6.w - sim6.data.z @ ScenarioSpec("VI", q=4).a_true).T)
    assert np.max(np.abs(c[np.triu_indices(4, 1)])) < 0.1


def test_evaluate_perfect_selection():
    truth = np.r_[np.ones(10, bool), np.zeros(10, bool)]
    oc = evaluate_selection(truth, truth)
    assert (oc.tpr, oc.fpr, oc.ppv, oc.npv) == (1.0, 0.0, 1.0, 1.0)
    assert oc.q_sel == 10


def test_evaluate_counts_example():
    truth = np.array([1, 1, 1, 0, 0], bool)
    sel = np.array([1, 0, 0, 1, 0], bool)
    oc = evaluate_selection(sel, truth)
    assert (oc.tp, oc.fp, oc.fn, oc.tn) == (1, 1, 2, 1)
    assert oc.tpr == pytest.approx(1 / 3) and oc.fpr == 0.5 and oc.ppv == 0.5 and oc.npv == pytest.approx(1 / 3)


def test_evaluate_undefined_rates():
    oc = evaluate_selection(np.zeros(4, bool), np.ones(4, bool))
    assert oc.fpr is None and oc.ppv is None and oc.tpr == 0.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=40))
def test_evaluate_identities(pairs):
    sel, truth = map(np.array, zip(*pairs))
    oc = evaluate_selection(sel, truth)
    assert oc.tp + oc.fn == oc.tau
    assert oc.tp + oc.fp + oc.fn + oc.tn == oc.q
    for r in (oc.tpr, oc.fpr, oc.ppv, oc.npv):
        assert r is None or 0.0 <= r <= 1.0


def test_smoke_study(tmp_path):
    spec = ScenarioSpec("VI", n=60, q=6, n_replicates=2, seed=5)
    rep = run_study(spec, default_hyper(spec), SamplerConfig(n_scans=200, burn_in=100))
    assert len(rep.completed) == 2
    for r in rep.completed:
        for m in ("mzip", "uzip"):
            for oc in getattr(r, m).values():
                assert all(v is None or 0 <= v <= 1 for v in (oc.tpr, oc.fpr, oc.ppv, oc.npv))
    out = rep.write(tmp_path)
    for f in ("operating.tsv", "estimates.tsv", "replicates.tsv", "summary.json"):
        assert (out / f).stat().st_size > 0
    assert len(rep.operating_table().splitlines()) == 5
