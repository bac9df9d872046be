import math
from collections import Counter

import pytest

from cyclation import exact
from cyclation.exact import CycleType, cyc_class_size, exact_distributions
from cyclation.harness import verify
from cyclation.harness.experiments import (
    ExperimentSpec,
    converge_longest,
    converge_shortest,
    monotone_trend,
    shortest_low_strata,
)
from cyclation.harness.oracle import all_pairings, brute_force_enumerate
from cyclation.harness.stats import ChiSquareResult, chi_square_test, statistical_gate


# -- chi-square ------------------------------------------------------------------------------


def test_chi_square_proportional_is_perfect():
    r = chi_square_test({"a": 250, "b": 500, "c": 250}, {"a": 0.25, "b": 0.5, "c": 0.25})
    assert r.statistic == 0.0 and r.pvalue == pytest.approx(1.0)
    assert r.dof == 2


def test_chi_square_detects_a_bias():
    r = chi_square_test({"a": 700, "b": 300}, {"a": 0.5, "b": 0.5})
    assert r.pvalue < 1e-20


def test_chi_square_pools_small_bins():
    expected = {1: 0.96, 2: 0.01, 3: 0.01, 4: 0.01, 5: 0.01}
    r = chi_square_test({1: 960, 2: 10, 3: 10, 4: 10, 5: 10}, expected)
    # 10 expected per tail bin: nothing pooled
    assert r.bins == 5
    r = chi_square_test({1: 384, 2: 4, 3: 4, 4: 4, 5: 4}, expected)
    assert r.bins == 2


def test_chi_square_rejects_degenerate_input():
    with pytest.raises(ValueError):
        chi_square_test({"a": 10}, {"a": 1.0})
    with pytest.raises(ValueError):
        chi_square_test({}, {"a": 0.5, "b": 0.5})
    with pytest.raises(ValueError):
        chi_square_test({"a": 3}, {"a": 0.0})


def test_chi_square_stray_observation():
    r = chi_square_test({"a": 50, "b": 50, "z": 1}, {"a": 0.5, "b": 0.5})
    assert math.isinf(r.statistic) and r.pvalue == 0.0


def test_gate_retries_once():
    calls = []

    def run(seed):
        calls.append(seed)
        return ChiSquareResult(1.0, 1, 1e-4 if seed == 7 else 0.5, 2)

    g = statistical_gate(run, 7)
    assert g.passed and calls == [7, 8]
    g = statistical_gate(lambda s: ChiSquareResult(50.0, 1, 1e-9, 2), 1)
    assert not g.passed and len(g.attempts) == 2


# -- oracle ----------------------------------------------------------------------------------


def test_oracle_small_cases():
    assert brute_force_enumerate(2) == Counter({CycleType((2,)): 1, CycleType((0, 1)): 2})
    assert brute_force_enumerate(3) == Counter({CycleType((3,)): 1, CycleType((1, 1)): 6, CycleType((0, 0, 1)): 8})
    assert sum(brute_force_enumerate(5).values()) == 945


def test_all_pairings_distinct_and_ordered():
    keys = [tuple(p.edges()) for p in all_pairings(4)]
    assert len(keys) == 105 and keys == sorted(keys) and len(set(keys)) == 105


@pytest.mark.parametrize("n", range(1, 7))
def test_oracle_equals_class_sizes(n):
    brute = brute_force_enumerate(n)
    assert dict(brute) == {t: cyc_class_size(t) for t in exact.enumerate_cycle_types(n)}


@pytest.mark.oracle_n7
def test_oracle_n7():
    brute = brute_force_enumerate(7)
    assert sum(brute.values()) == 135135
    assert dict(brute) == {t: cyc_class_size(t) for t in exact.enumerate_cycle_types(7)}


def test_oracle_range():
    with pytest.raises(ValueError):
        brute_force_enumerate(8)
    with pytest.raises(ValueError):
        brute_force_enumerate(0)


# -- experiments -----------------------------------------------------------------------------


def test_experiment_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec("converge", grid=())
    with pytest.raises(ValueError):
        ExperimentSpec("zsample", z=1.0)
    with pytest.raises(ValueError):
        ExperimentSpec("sample", reps=0)
    with pytest.raises(ValueError):
        ExperimentSpec("fit")
    assert "out" not in ExperimentSpec("constants", out="x.json").echo()


@pytest.mark.parametrize("n", range(1, 16))
def test_low_strata_match_exact(n):
    d = exact_distributions(n)
    got = shortest_low_strata(n)
    for k in (1, 2, 3):
        want = sum(t.shortest * c for t, c in d.type_counts.items() if t.parts == k) / d.K.denominator
        assert got[k - 1] == pytest.approx(want, rel=1e-13, abs=1e-15)


def test_converge_longest_small_grid():
    res = converge_longest(ExperimentSpec("converge", grid=(1, 10, 40), reps=400, seed=3, which="longest"))
    first, ten, forty = res.records
    assert first["mean"] == 1.0 and first["stderr"] == 0.0
    assert ten["exact"] == pytest.approx(float(exact_distributions(10).ExM) / 10)
    assert ten["exact_source"] == "partition" and forty["exact_source"] == "coefficient"
    for r in res.records:
        assert r["exact"] is not None


def test_converge_shortest_columns():
    res = converge_shortest(ExperimentSpec("converge", grid=(3, 1000), reps=200, seed=1, which="shortest"))
    small, big = res.records
    assert small["exact"] == pytest.approx(31 / 15 / math.sqrt(3))
    assert big["exact_source"] == "coefficient"
    assert [c["l"] for c in big["conjecture"]] == [1, 2, 3, 4, 5]
    assert big["conjecture"][0]["t_analog_z1"] == pytest.approx(1 - math.exp(-0.5))
    assert "no correctness claim" in res.extra["conjecture_note"]


def test_converge_marks_asymptote_only():
    res = converge_longest(ExperimentSpec("converge", grid=(5000,), reps=5, seed=1, which="longest"))
    assert res.records[0]["exact"] is None and res.records[0]["exact_source"] == "asymptote-only"


def test_monotone_trend():
    rec = [{"n": n, "mean": m, "stderr": 0.01, "asymptote": 1.0} for n, m in ((1, 0.5), (2, 0.7), (3, 0.69))]
    assert monotone_trend(rec)[0]
    rec[2]["mean"] = 0.5
    ok, problems = monotone_trend(rec)
    assert not ok and "n=2->3" in problems[0]


def test_grid_must_ascend():
    with pytest.raises(ValueError):
        converge_longest(ExperimentSpec("converge", grid=(100, 10), reps=1, which="longest"))


# -- verify ----------------------------------------------------------------------------------


def test_verify_fast_suites_report_data():
    report = verify.verify_all(cap_n=4, samplers=False)
    names = {c.name: c for c in report.checks}
    assert names["cyclation_count = 2^(n-k) stirling_first"].passed
    assert names["oracle n=4: brute force = class sizes"].passed
    d = report.as_dict()
    assert d["n_checks"] == len(report.checks)
    assert d["n_failed"] == len(report.failures())


def test_mutation_in_counts_is_caught(monkeypatch):
    real = exact.cyclation_count

    def off_by_one(n, k):
        # exponent n - k + 1 instead of n - k
        return real(n, k) * 2 if 0 < k <= n else real(n, k)

    monkeypatch.setattr(verify, "cyclation_count", off_by_one)
    checks = {c.name: c for c in verify.check_identities(10)}
    assert not checks["cyclation_count = 2^(n-k) stirling_first"].passed
    assert not checks["sum_k cyclation_count = (2n-1)!!"].passed
    assert checks["cyclation_count = 2^(n-k) stirling_first"].context["mismatches"]


def test_mutation_in_class_sizes_is_caught(monkeypatch):
    real = verify.class_sizes

    def bent(n, kind="cyclation"):
        out = real(n, kind)
        if n == 3 and kind == "cyclation":
            out[CycleType((0, 0, 1))] += 1
        return out

    monkeypatch.setattr(verify, "class_sizes", bent)
    assert not [c for c in verify.check_oracle(3) if c.name.startswith("oracle n=3")][0].passed
