"""Rate constants, feasibility conditions, horizons, and budgets,
cross-checked against the independent formula evaluations in
``_theory_reference`` and against hand arithmetic.

Frozen literals were computed with the reference implementation first
and pasted here; the package must reproduce them bit for bit.
"""

import random

import numpy as np
import pytest

import _theory_reference as ref
from cheapsvrg import (
    EpochConfig,
    InfeasibleStepError,
    LEAST_SQUARES,
    NoConvergenceError,
    TheoryParams,
    contraction_report,
    empirical_xi,
    empirical_zeta,
    epochs_needed,
    feasibility_check,
    gradient_budget,
    kappa_basic,
    kappa_coordinate,
    kappa_minibatch,
    rho_basic,
    rho_coordinate,
    rho_minibatch,
    run_cheap_svrg,
)
from cheapsvrg.theory import epochs_needed_formula


def test_rho_basic_frozen():
    # 1/(0.025 * 0.9 * 4000 * 0.1) + 0.1 * 1.1 / 0.9 = 1/9 + 0.11/0.9
    assert rho_basic(0.025, 1.0, 0.1, 4000, 10) == 0.23333333333333334


def test_rho_minibatch_frozen():
    # 2/(0.05 * 1.8 * 4000 * 0.1) + 0.2 * 12 / (1.8 * 10) = 2/36 + 2.4/18
    assert rho_minibatch(0.05, 1.0, 0.1, 4000, 10, 2) == 0.18888888888888888


def test_rho_coordinate_frozen():
    # ratio p/b = 2: 1/(0.0125 * 0.9 * 8000 * 0.1) + 0.05 * 2.1 / 0.9
    assert rho_coordinate(0.0125, 1.0, 0.1, 8000, 10, 2, 1) == 0.22777777777777775


def test_kappa_basic_frozen():
    rho = rho_basic(0.025, 1.0, 0.1, 4000, 10)
    got = kappa_basic(0.025, 1.0, 10, 4000, zeta=1.0, xi=0.5, rho=rho)
    # (1/0.9) * (0.005 + 0.00025) * 0.5 / (1 - 7/30)
    assert got == 0.003804347826086957


def test_kappa_zero_without_gradient_bound():
    rho = rho_basic(0.025, 1.0, 0.1, 4000, 10)
    assert kappa_basic(0.025, 1.0, 10, 4000, zeta=5.0, xi=0.0, rho=rho) == 0.0


def test_rho_first_term_scales_inversely_with_K():
    eta, L, gamma, s = 0.02, 1.0, 0.2, 4
    tail = 4.0 * L * eta * (1.0 + 1.0 / s) / (1.0 - 4.0 * L * eta)
    first_k = rho_basic(eta, L, gamma, 100, s) - tail
    first_2k = rho_basic(eta, L, gamma, 200, s) - tail
    assert first_2k == pytest.approx(first_k / 2.0, rel=1e-12)
    # and for enormous K only the tail remains
    assert rho_basic(eta, L, gamma, 10**14, s) == pytest.approx(tail, rel=1e-9)


def test_rho_monotone_in_K_and_s():
    eta, L, gamma = 0.02, 1.0, 0.2
    assert rho_basic(eta, L, gamma, 200, 4) < rho_basic(eta, L, gamma, 100, 4)
    assert rho_basic(eta, L, gamma, 100, 8) < rho_basic(eta, L, gamma, 100, 4)


def test_variant_reductions_are_bitwise():
    rng = random.Random(7)
    for _ in range(200):
        L = rng.uniform(0.5, 5.0)
        eta = rng.uniform(0.01, 0.9) / (4.0 * L)
        gamma = rng.uniform(0.05, 1.0) * L
        K = rng.randint(2, 5000)
        s = rng.randint(1, 50)
        p = rng.randint(1, 30)
        assert rho_minibatch(eta, L, gamma, K, s, 1) == rho_basic(eta, L, gamma, K, s)
        assert rho_coordinate(eta, L, gamma, K, s, p, p) == rho_basic(eta, L, gamma, K, s)
        rho = rho_basic(eta, L, gamma, K, s)
        if 0.0 < rho < 1.0:
            base = kappa_basic(eta, L, s, K, 1.3, 0.7, rho)
            assert kappa_minibatch(eta, L, s, K, 1.3, 0.7, rho, 1) == base
            assert kappa_coordinate(eta, L, s, K, 1.3, 0.7, rho, p, p) == base


def test_formulas_match_reference_on_sampled_tuples():
    rng = random.Random(12345)
    worst = 0.0
    for _ in range(1000):
        L = rng.uniform(0.5, 5.0)
        gamma = rng.uniform(0.05, 1.0) * L
        q = rng.randint(1, 6)
        p = rng.randint(2, 40)
        b = rng.randint(1, p)
        K = rng.randint(2, 10000)
        s = rng.randint(1, 100)
        eta = rng.uniform(0.01, 0.9) * q / (4.0 * L)
        got = rho_minibatch(eta, L, gamma, K, s, q)
        want = ref.rho_batch(eta, L, gamma, K, s, q)
        worst = max(worst, abs(got - want) / abs(want))
        if eta < 1.0 / (4.0 * L * (p / b)):
            got_c = rho_coordinate(eta, L, gamma, K, s, p, b)
            want_c = ref.rho_block(eta, L, gamma, K, s, p, b)
            worst = max(worst, abs(got_c - want_c) / abs(want_c))
        if 0.0 < want < 1.0:
            xi, zeta = rng.uniform(0.0, 2.0), rng.uniform(0.0, 3.0)
            got_k = kappa_minibatch(eta, L, s, K, zeta, xi, want, q)
            want_k = ref.kappa_batch(eta, L, s, K, zeta, xi, want, q)
            if want_k != 0.0:
                worst = max(worst, abs(got_k - want_k) / abs(want_k))
    assert worst < 1e-12


def test_stability_violation_raises():
    with pytest.raises(InfeasibleStepError) as exc_info:
        rho_basic(0.3, 1.0, 0.1, 100, 5)  # eta >= 1/(4L) = 0.25
    assert "4 L" in exc_info.value.inequality
    with pytest.raises(InfeasibleStepError):
        rho_minibatch(0.51, 1.0, 0.1, 100, 5, 2)  # eta >= q/(4L) = 0.5
    with pytest.raises(InfeasibleStepError):
        rho_coordinate(0.13, 1.0, 0.1, 100, 5, 2, 1)  # eta >= 1/(4L*2)


def test_epochs_needed_frozen_and_edge():
    assert epochs_needed(0.5, 1.0, 0.01) == 8  # 0.5**8 = 0.0039 <= 0.005
    assert epochs_needed(0.9, 1.0, 0.2) == 22
    assert epochs_needed(0.5, 0.004, 0.01) == 0  # already inside the target
    with pytest.raises(NoConvergenceError):
        epochs_needed(1.0, 1.0, 0.01)
    with pytest.raises(NoConvergenceError):
        epochs_needed(1.7, 1.0, 0.01)


def test_epochs_needed_is_minimal():
    rng = random.Random(3)
    for _ in range(300):
        rho = rng.uniform(0.02, 0.999)
        phi0 = rng.uniform(0.0, 10.0)
        eps = rng.uniform(1e-6, 1.0)
        t = epochs_needed(rho, phi0, eps)
        assert t == ref.epochs_by_powers(rho, phi0, eps)
        assert rho**t * phi0 <= eps / 2.0
        if t >= 1:
            assert rho ** (t - 1) * phi0 > eps / 2.0
        # the closed form may round across the boundary, never by more
        # than one epoch, and the search result is authoritative
        assert abs(epochs_needed_formula(rho, phi0, eps) - t) <= 1


def test_gradient_budget_frozen():
    got = gradient_budget(100, 10, 1, 8)
    assert got.exact == 1664  # 8 * (10 + 2 * 99)
    assert got.asymptotic == 1680  # 8 * (200 + 10)
    assert gradient_budget(1, 7, 3, 5).exact == 35  # K = 1: only snapshots
    one = gradient_budget(50, 10, 1, 4)
    two = gradient_budget(50, 10, 2, 4)
    assert two.exact - 4 * 10 == 2 * (one.exact - 4 * 10)
    with pytest.raises(ValueError):
        gradient_budget(-1, 10, 1, 4)


def _params(**kw):
    base = dict(L=1.0, gamma=0.1)
    base.update(kw)
    return TheoryParams(**base)


def _cfg(eta, K, s, q=1, b=None):
    return EpochConfig(eta=eta, K=K, T=1, seed=0, s=s, q=q, b=b)


def test_feasibility_relaxed_eta_bound():
    # theta = 0.5, s = 1: 1 / (4 (1.5 + 1)) = 0.1
    report = feasibility_check(_params(theta=0.5), _cfg(0.01, 5000, 1))
    assert report.eta_max == pytest.approx(0.1, rel=1e-15)


def test_feasibility_c1_violation():
    report = feasibility_check(_params(), _cfg(0.3, 100, 5))
    assert not report.feasible
    assert report.reason.startswith("C1")
    assert "0.25" in report.reason


def test_feasibility_c2_violation_and_k_min_boundary():
    params = _params()
    eta, s = 0.025, 10
    probe = feasibility_check(params, _cfg(eta, 10**6, s))
    k_min = probe.K_min
    # 2 / (0.1 * 0.025 * 0.9) = 888.9, so K_min = 889
    assert k_min == 889
    at = feasibility_check(params, _cfg(eta, k_min, s))
    below = feasibility_check(params, _cfg(eta, k_min - 1, s))
    assert at.feasible
    assert not below.feasible
    assert below.reason.startswith("C2: K")


def test_feasibility_c3_violation():
    report = feasibility_check(_params(xi=50.0, zeta=10.0, eps=1e-6), _cfg(0.025, 4000, 10))
    assert not report.feasible
    assert report.reason.startswith("C3")


def test_feasibility_requires_subset():
    report = feasibility_check(_params(), _cfg(0.025, 4000, None))
    assert not report.feasible
    assert report.reason == "C1: surrogate subset size s must be >= 1 for the bounds"


def test_feasibility_coordinate_ratio():
    report = feasibility_check(_params(), _cfg(0.0125, 8000, 10, b=1), p=2)
    assert report.rho == rho_coordinate(0.0125, 1.0, 0.1, 8000, 10, 2, 1)
    with pytest.raises(ValueError):
        feasibility_check(_params(), _cfg(0.0125, 8000, 10, b=5), p=2)


def test_feasible_reports_contracting_rho():
    report = feasibility_check(_params(), _cfg(0.025, 4000, 10))
    assert report.feasible
    assert report.reason == ""
    assert 0.0 < report.rho < 1.0
    assert report.grads_per_epoch == 10 + 2 * 3999
    assert report.total_grads == report.T_min * report.grads_per_epoch


def test_feasible_implies_contraction_on_sampled_tuples():
    rng = random.Random(99)
    seen_feasible = 0
    for _ in range(1000):
        L = rng.uniform(0.5, 5.0)
        gamma = rng.uniform(0.05, 1.0) * L
        s = rng.randint(1, 60)
        q = rng.randint(1, 4)
        eta = rng.uniform(0.05, 1.2) * q / (4.0 * L)
        K = rng.randint(2, 200000)
        report = feasibility_check(TheoryParams(L=L, gamma=gamma), _cfg(eta, K, s, q=q))
        c1, c2 = ref.conditions(eta, L, gamma, K, s, q)
        if report.feasible:
            seen_feasible += 1
            assert c1 and c2
            assert 0.0 < report.rho < 1.0
        elif report.reason.startswith(("C1", "C2")):
            assert not (c1 and c2)
    assert seen_feasible > 50  # the sample actually exercises both branches


def test_empirical_constants_from_a_run(toy_data, toy_wstar):
    import numpy as np

    from cheapsvrg import component_gradient

    cfg = EpochConfig(eta=0.05, K=4, T=3, seed=2, s=2)
    trace = run_cheap_svrg(LEAST_SQUARES, toy_data, np.zeros(2), cfg, w_star=toy_wstar)
    xi_hat = empirical_xi(LEAST_SQUARES, toy_data, trace.anchors)
    worst = max(
        float(np.linalg.norm(component_gradient(LEAST_SQUARES, toy_data, i, trace.anchors[t])))
        for t in range(trace.rows())
        for i in range(toy_data.n)
    )
    assert xi_hat == pytest.approx(worst, rel=1e-15)
    zeta_hat = empirical_zeta(trace)
    assert zeta_hat == float(np.max(trace.zeta_sums[1:]))
    bare = run_cheap_svrg(LEAST_SQUARES, toy_data, np.zeros(2), cfg)
    with pytest.raises(ValueError):
        empirical_zeta(bare)


def test_contraction_report_counts():
    report = contraction_report(np.array([1.0, 0.4, 0.2]), rho=0.5, kappa=0.0)
    assert report.checked == 2 and report.violations == 0 and report.fraction_ok == 1.0
    assert not report.supercritical
    report = contraction_report(np.array([1.0, 0.6, 0.25]), rho=0.5, kappa=0.0)
    assert report.violations == 1 and report.fraction_ok == 0.5
    report = contraction_report(np.array([1.0, 1.1]), rho=1.2, kappa=0.0)
    assert report.supercritical and report.violations == 0
    with pytest.raises(ValueError):
        contraction_report(np.array([1.0]), rho=0.5, kappa=0.0)


def test_theory_params_validation():
    with pytest.raises(ValueError):
        TheoryParams(L=0.5, gamma=1.0)
    with pytest.raises(ValueError):
        TheoryParams(L=1.0, gamma=0.0)
    with pytest.raises(ValueError):
        TheoryParams(L=1.0, gamma=0.1, theta=1.0)
    with pytest.raises(ValueError):
        TheoryParams(L=1.0, gamma=0.1, eps=0.0)
    with pytest.raises(ValueError):
        TheoryParams(L=1.0, gamma=0.1, xi=-0.1)
