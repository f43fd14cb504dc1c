from __future__ import annotations

import json
import math

import numpy as np
import pytest

from heavyball.lemmas import (LEMMA_CONSTANT, SUITES, CheckReport, check_aux_inequalities,
                              check_combined_bound, check_power_norm_bound, check_product_monotonicity,
                              check_spectral_radius, check_stage_contraction, check_theorem1, check_theorem2,
                              combined_bound_suite, power_norm_suite, run_suites)
from heavyball.schedules import constant_schedule, min_feasible_T, step_decay_schedule


def test_power_norm_limit_example():
    rep = check_power_norm_bound(0.25, 0.0, 50)
    assert rep.passed
    w = rep.worst_witness
    assert w["lhs"] == pytest.approx(1.944, abs=5e-4)
    assert w["rhs"] == pytest.approx(8 / 0.75, rel=1e-12)


def test_power_norm_boundary_uses_linear_branch():
    rep = check_power_norm_bound(0.25, 0.25, 10)
    assert rep.passed
    assert rep.worst_witness["disc"] == 0.0
    assert rep.worst_witness["rhs"] == pytest.approx(80 * 0.5**10, rel=1e-12)


@pytest.mark.parametrize("args", [(0.2, 0.1, 3), (0.5, 0.5, 3), (0.5, 0.01, 0)])
def test_power_norm_outside_domain(args):
    assert check_power_norm_bound(*args).status == "not-applicable"


def test_power_norm_suite_and_perturbed_constant():
    assert power_norm_suite(2000, seed=3).passed
    bad = power_norm_suite(2000, seed=3, constant=0.5)
    assert bad.status == "fail" and bad.failures > 0
    assert bad.worst_witness["lhs"] > bad.worst_witness["rhs"]


def test_product_monotonicity_examples():
    rep = check_product_monotonicity(0.25, 0.2, [0.05, 0.1])
    assert rep.passed
    # explicit arithmetic for the same pair
    T = np.array([[1.05, -0.25], [1.0, 0.0]])
    lhs = np.linalg.norm((T + np.diag([0.05, 0])) @ (T + np.diag([0.1, 0])))
    rhs = np.linalg.norm(np.linalg.matrix_power(T + np.diag([0.1, 0]), 2))
    assert rep.worst_witness["lhs"] == pytest.approx(lhs, rel=1e-14)
    assert rep.worst_witness["rhs"] == pytest.approx(rhs, rel=1e-14)
    assert lhs <= rhs


def test_product_monotonicity_equal_deltas_is_equality():
    rep = check_product_monotonicity(0.3, 0.1, [0.02] * 5)
    assert rep.passed and rep.worst_witness["ratio"] == pytest.approx(1.0, rel=1e-14)


def test_product_monotonicity_domain():
    assert check_product_monotonicity(0.25, 0.75, [0.1]).status == "not-applicable"
    assert check_product_monotonicity(0.25, 0.1, [-0.1]).status == "not-applicable"


def test_combined_bound_single_matrix_matches_power_bound():
    rep = check_combined_bound([(0.1, 1.0)], 0.3)
    assert rep.passed and rep.worst_witness["k"] == 1


def test_combined_bound_two_stage_segment():
    beta = 0.25
    segment = [(0.2, 1.0)] * 20 + [(0.1, 1.0)] * 20
    rep = check_combined_bound(segment, beta)
    assert rep.passed and rep.worst_witness["k"] == 40


def test_combined_bound_domain():
    assert check_combined_bound([], 0.5).status == "not-applicable"
    assert check_combined_bound([(0.1, 1.0), (0.2, 1.0)], 0.5).status == "not-applicable"
    assert check_combined_bound([(0.9, 1.0)], 0.5).status == "not-applicable"


def test_combined_bound_suite_passes():
    assert combined_bound_suite(300, seed=5).passed


def test_stage_contraction_example():
    kappa, T = 4, 100
    beta = 0.25
    K = math.ceil(2 * math.log(800))
    assert K == 14
    rep = check_stage_contraction(beta, 0.5, K, T, kappa)
    assert rep.passed and rep.worst_witness["norm"] <= 1
    # the scalar shortcut points the same way
    assert 8 * K * beta ** (K / 2) <= 1


def test_stage_contraction_gates():
    assert check_stage_contraction(0.25, 0.5, 5, 100, 4).status == "not-applicable"
    assert check_stage_contraction(0.3, 0.5, 50, 100, 4).status == "not-applicable"
    assert check_stage_contraction(0.25, 0.1, 50, 100, 4).status == "not-applicable"


def test_aux_inequalities():
    rep = check_aux_inequalities(10_000)
    assert rep.passed and rep.trials == 20_000
    assert rep.worst_witness["ratio"] <= 1.0


def test_spectral_radius_check():
    rng = np.random.default_rng(0)
    b, e = rng.uniform(0, 1, 500), rng.uniform(0, 1, 500)
    assert check_spectral_radius(b, e).passed
    assert check_spectral_radius([0.25], [0.75]).worst_witness["closed_form"] == 0.5


def test_theorem1_examples():
    sched = [constant_schedule(2.0, 64), constant_schedule(1.0, 64), step_decay_schedule(1.0, 0.1, 4, 64)]
    rep = check_theorem1(8, 1.0, 1.0, sched)
    assert rep.passed and rep.trials == 3


def test_theorem1_huge_horizon_compares_in_log_space():
    rep = check_theorem1(8, 1.0, 1.0, [constant_schedule(1.0, 1000)])
    assert rep.passed
    assert rep.worst_witness["bound"] == 0.0 and math.isfinite(rep.worst_witness["log_bound"])


def test_theorem1_rejects_large_rates():
    with pytest.raises(ValueError):
        check_theorem1(8, 1.0, 1.0, [constant_schedule(2.5, 8)])


def test_theorem2_variants():
    T = min_feasible_T(4, 2)
    base = check_theorem2(4, 2, T, 2, 1.0, 1, 1.0)
    batched = check_theorem2(4, 2, T, 2, 1.0, 16, 1.0)
    noiseless = check_theorem2(4, 2, T, 2, 0.0, 1, 1.0)
    assert base.passed and batched.passed and noiseless.passed
    assert batched.worst_witness["variance_bound"] == pytest.approx(base.worst_witness["variance_bound"] / 16,
                                                                    rel=1e-14)
    assert noiseless.worst_witness["variance_risk"] == 0.0 == noiseless.worst_witness["variance_bound"]
    assert base.worst_witness["log_bias_risk"] <= base.worst_witness["log_bias_bound"]


def test_theorem2_infeasible_is_not_applicable():
    rep = check_theorem2(4, 2, 1000, 2, 1.0, 1, 1.0)
    assert rep.status == "not-applicable"
    assert "req_var_T" in rep.worst_witness["violated"]


def test_suites_are_deterministic():
    a = [r.to_json() for r in run_suites(["power_norm", "combined_bound"], seed=11, trials=200)]
    b = [r.to_json() for r in run_suites(["power_norm", "combined_bound"], seed=11, trials=200, threads=2)]
    assert a == b
    json.loads(a[0])


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suites(["nope"])


def test_report_status_rules():
    assert CheckReport("x", 3, 0).status == "pass"
    assert CheckReport("x", 3, 1).status == "fail"
    na = CheckReport.not_applicable("x", "why")
    assert na.status == "not-applicable" and not na.passed


def test_registry_names():
    assert set(SUITES) == {"power_norm", "product_monotonicity", "combined_bound", "stage_contraction",
                           "aux_inequalities", "spectral_radius", "theorem1", "theorem2"}
    assert LEMMA_CONSTANT == 8.0
