import csv
import json

import pytest

from gcx import bound as bounds
from gcx import search
from gcx.core import is_generic, nsc
from gcx.search import (
    SearchConfig,
    Witness,
    curve_score,
    load_library,
    maximize_nsc,
    save_witness,
    verify_witness,
    wronskian_coefficients,
)
from gcx.curve import leading_minor_poly, UnipotentMatrix, all_ones
from gcx.poly import integer_coefficients
from fractions import Fraction


@pytest.mark.parametrize("strategy", ["greedy", "anneal"])
@pytest.mark.parametrize("k,n", [(1, 3), (2, 4)])
def test_small_targets(strategy, k, n):
    result = maximize_nsc(SearchConfig(k, n, budget=200_000, restarts=32, seed=42, strategy=strategy, target=k * (n - k)))
    w = result.witness
    assert w.nsc == k * (n - k) == nsc(w.seq)
    assert all(is_generic(M) for M in w.seq.matrices)


def test_deterministic_and_thread_independent():
    cfg = SearchConfig(2, 5, budget=40_000, restarts=4, seed=9)
    a, b = maximize_nsc(cfg), maximize_nsc(cfg)
    c = maximize_nsc(SearchConfig(2, 5, budget=40_000, restarts=4, seed=9, threads=2))
    assert a.witness == b.witness
    assert (a.witness.seq, a.witness.nsc) == (c.witness.seq, c.witness.nsc)
    assert a.proposals == c.proposals


def test_progress_is_monotone(tmp_path):
    path = tmp_path / "progress.csv"
    maximize_nsc(SearchConfig(2, 4, budget=2_000, restarts=5, seed=1, strategy="greedy"), progress_path=path)
    rows = list(csv.DictReader(open(path)))
    assert [int(r["restart"]) for r in rows] == list(range(5))
    best = [int(r["best_nsc"]) for r in rows]
    assert best == sorted(best)


def test_zero_budget_gives_no_witness():
    assert maximize_nsc(SearchConfig(2, 4, budget=0, restarts=2)).witness is None


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(3, 3)
    with pytest.raises(ValueError):
        SearchConfig(1, 3, strategy="exhaustive")


def test_wronskian_matches_exact_curve_minor():
    k, n = 2, 5
    x = [Fraction(i - 3, i % 3 + 1) for i in range(search._param_count(k, n))]
    rows = [[Fraction(int(r == c)) for c in range(n)] for r in range(n - k)] + search._bottom_rows(k, n, x)
    L0 = UnipotentMatrix(tuple(tuple(r) for r in rows))
    exact = leading_minor_poly(L0, all_ones(n), k)
    assert wronskian_coefficients(k, n, x) == integer_coefficients(exact)
    assert curve_score(k, n, x) >= 0


def _witness():
    return maximize_nsc(SearchConfig(2, 4, budget=20_000, restarts=2, seed=5, target=4)).witness


def test_verify_round_trip():
    w = _witness()
    data = json.loads(json.dumps(w.to_dict()))
    report = verify_witness(data)
    assert report.ok and report.nsc == w.nsc == report.stored_nsc
    assert Witness.from_dict(data).seq == w.seq


def test_verify_catches_negated_parameter():
    data = _witness().to_dict()
    data["sequence"]["moves"][0]["t"] = "-" + data["sequence"]["moves"][0]["t"]
    report = verify_witness(data)
    assert not report.ok and report.problems[0].startswith("convexity")


def test_verify_catches_wrong_stored_value():
    data = _witness().to_dict()
    data["nsc"] += 1
    report = verify_witness(data)
    assert not report.ok and "mismatch" in report.problems[0]


def test_conjecture_counterexample_is_flagged_certified_and_archived(monkeypatch, tmp_path):
    monkeypatch.setattr(bounds, "conjecture_bound", lambda k, n: 0)
    monkeypatch.setenv(search.WITNESS_DIR_ENV, str(tmp_path))
    report = verify_witness(_witness())
    assert "conjecture counterexample candidate" in report.flags
    assert report.certificate is not None and report.archived
    assert len(load_library(tmp_path)) == 1


def test_red_alert_flag(monkeypatch):
    monkeypatch.setattr(bounds, "max_nsc_allowed", lambda kind, k, n: 0)
    result = maximize_nsc(SearchConfig(2, 4, budget=5_000, restarts=1, seed=5))
    assert result.witness.red_alert
    assert any(f.startswith("RED ALERT") for f in verify_witness(result.witness).flags)


def test_library_is_content_addressed(tmp_path):
    w = _witness()
    p1, p2 = save_witness(w, tmp_path), save_witness(w, tmp_path)
    assert p1 == p2 and len(list(tmp_path.iterdir())) == 1
    assert load_library(tmp_path)[0].seq == w.seq
