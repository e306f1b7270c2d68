"""Brute-force verification of the package's structural identities.

Each check here evaluates an exact mathematical identity (an expectation
over an enumerable sample space, a reduction between algorithm variants,
or a count) on instances small enough to enumerate completely, and
reports the worst deviation against a stated tolerance.  The CLI exposes
the battery as a self-test; the test suite additionally verifies that an
injected faulty direction makes the battery fail (mutation detection).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .directions import (
    DirectionContext,
    cheap_direction,
    coordinate_direction,
    minibatch_direction,
    surrogate_gradient,
)
from .harness import InstanceSpec, generate_regression_instance
from .objectives import (
    LEAST_SQUARES,
    Dataset,
    GradientCounter,
    component_gradient,
    full_gradient,
    batch_gradient,
    logistic_l2,
    objective_value,
)
from .optimizers import EpochConfig, run_cheap_svrg, run_cheaper_svrg, run_minibatch, run_svrg
from .rng import SeededRng, sample_subset


@dataclass
class CheckResult:
    name: str
    max_dev: float
    tol: float
    passed: bool
    detail: str = ""


def _record(name: str, max_dev: float, tol: float, detail: str = "") -> CheckResult:
    return CheckResult(name=name, max_dev=float(max_dev), tol=tol, passed=max_dev <= tol, detail=detail)


def _small_instance(seed: int, n: int, p: int, noise: float = 0.3):
    return generate_regression_instance(InstanceSpec(n=n, p=p, noise_norm=noise, seed=seed))


def check_direction_unbiasedness(seed: int = 0, fault=None) -> CheckResult:
    """Exact average of the corrected direction over all component picks
    equals grad F(current) - grad F(anchor) + surrogate."""
    data, _ = _small_instance(seed, n=10, p=4)
    rng = SeededRng(seed + 1)
    worst = 0.0
    for _ in range(5):
        anchor = rng.gaussian_vector(data.p)
        current = rng.gaussian_vector(data.p)
        subset = sample_subset(data.n, 3, rng)
        mu = surrogate_gradient(LEAST_SQUARES, data, subset, anchor)
        ctx = DirectionContext(anchor=anchor, surrogate=mu, current=current)
        acc = np.zeros(data.p)
        for i in range(data.n):
            v = cheap_direction(LEAST_SQUARES, data, ctx, i)
            if fault is not None:
                v = fault(v)
            acc += v
        acc /= data.n
        expect = (
            full_gradient(LEAST_SQUARES, data, current)
            - full_gradient(LEAST_SQUARES, data, anchor)
            + mu
        )
        worst = max(worst, float(np.max(np.abs(acc - expect))))
    return _record("direction-unbiasedness", worst, 1e-12)


def check_surrogate_unbiasedness(seed: int = 0) -> CheckResult:
    """Average of the subset snapshot over all C(n, s) subsets equals the
    full gradient, for every s."""
    data, _ = _small_instance(seed, n=8, p=3)
    rng = SeededRng(seed + 2)
    anchor = rng.gaussian_vector(data.p)
    expect = full_gradient(LEAST_SQUARES, data, anchor)
    worst = 0.0
    for s in range(1, data.n + 1):
        acc = np.zeros(data.p)
        count = 0
        for subset in combinations(range(data.n), s):
            acc += surrogate_gradient(LEAST_SQUARES, data, np.array(subset), anchor)
            count += 1
        worst = max(worst, float(np.max(np.abs(acc / count - expect))))
    return _record("surrogate-unbiasedness", worst, 1e-12)


def check_minibatch_unbiasedness(seed: int = 0) -> CheckResult:
    data, _ = _small_instance(seed, n=8, p=3)
    rng = SeededRng(seed + 3)
    anchor = rng.gaussian_vector(data.p)
    current = rng.gaussian_vector(data.p)
    subset = sample_subset(data.n, 2, rng)
    mu = surrogate_gradient(LEAST_SQUARES, data, subset, anchor)
    ctx = DirectionContext(anchor=anchor, surrogate=mu, current=current)
    expect = (
        full_gradient(LEAST_SQUARES, data, current)
        - full_gradient(LEAST_SQUARES, data, anchor)
        + mu
    )
    worst = 0.0
    for q in range(1, data.n + 1):
        acc = np.zeros(data.p)
        count = 0
        for batch in combinations(range(data.n), q):
            acc += minibatch_direction(LEAST_SQUARES, data, ctx, np.array(batch))
            count += 1
        worst = max(worst, float(np.max(np.abs(acc / count - expect))))
    return _record("minibatch-unbiasedness", worst, 1e-12)


def check_coordinate_unbiasedness(seed: int = 0) -> CheckResult:
    """Average of the p/b-weighted block direction over all C(p, b)
    blocks equals the unrestricted direction, for every b."""
    data, _ = _small_instance(seed, n=7, p=6)
    rng = SeededRng(seed + 4)
    anchor = rng.gaussian_vector(data.p)
    current = rng.gaussian_vector(data.p)
    subset = sample_subset(data.n, 3, rng)
    mu = surrogate_gradient(LEAST_SQUARES, data, subset, anchor)
    ctx = DirectionContext(anchor=anchor, surrogate=mu, current=current)
    i_k = 2
    expect = cheap_direction(LEAST_SQUARES, data, ctx, i_k)
    worst = 0.0
    for b in range(1, data.p + 1):
        acc = np.zeros(data.p)
        count = 0
        for block in combinations(range(data.p), b):
            acc += coordinate_direction(LEAST_SQUARES, data, ctx, i_k, np.array(block))
            count += 1
        worst = max(worst, float(np.max(np.abs(acc / count - expect))))
    return _record("coordinate-unbiasedness", worst, 1e-12)


def check_variance_lemma(seed: int = 0) -> CheckResult:
    """Batch-gradient variance bound at the interpolating minimizer:

        E_Q || (grad f_Q(w) - grad f_Q(w*)) - (grad F(w) - grad F(w*)) ||^2
            <= (2 L / q) (F(w) - F(w*)),

    with the component-wise L.  The expectation is over all size-q
    subsets Q drawn without replacement; centering on the full-gradient
    difference is what makes the bound scale with 1/q (the uncentered
    second moment keeps a ||grad F(w)||^2 floor for every q)."""
    data, w_star = _small_instance(seed, n=8, p=3, noise=0.0)
    rng = SeededRng(seed + 5)
    L = data.n * float(np.max(np.einsum("ij,ij->i", data.features, data.features)))
    fstar = objective_value(LEAST_SQUARES, data, w_star)
    worst = 0.0
    for _ in range(4):
        w = rng.gaussian_vector(data.p)
        fw = objective_value(LEAST_SQUARES, data, w)
        mean_dev = full_gradient(LEAST_SQUARES, data, w) - full_gradient(
            LEAST_SQUARES, data, w_star
        )
        for q in range(1, data.n + 1):
            acc = 0.0
            count = 0
            for batch in combinations(range(data.n), q):
                d = (
                    batch_gradient(LEAST_SQUARES, data, np.array(batch), w)
                    - batch_gradient(LEAST_SQUARES, data, np.array(batch), w_star)
                    - mean_dev
                )
                acc += float(np.dot(d, d))
                count += 1
            excess = acc / count - (2.0 * L / q) * (fw - fstar)
            worst = max(worst, excess)
    return _record("variance-lemma", max(worst, 0.0), 1e-9)


def check_reduction_chain(seed: int = 0) -> CheckResult:
    """Five epochs on a small instance: the mini-batch variant at q=1,
    the coordinate variant at b=p, and the full-snapshot method at s=n
    must all reproduce the subset-snapshot run coordinate for
    coordinate."""
    data, w_star = _small_instance(seed, n=12, p=3)
    w0 = np.zeros(data.p)
    base = dict(eta=0.02, K=8, T=5, seed=seed + 6)
    t_cheap = run_cheap_svrg(LEAST_SQUARES, data, w0, EpochConfig(s=data.n, **base), w_star)
    t_mini = run_minibatch(LEAST_SQUARES, data, w0, EpochConfig(s=data.n, q=1, **base), w_star)
    t_coord = run_cheaper_svrg(
        LEAST_SQUARES, data, w0, EpochConfig(s=data.n, b=data.p, **base), w_star
    )
    t_svrg = run_svrg(LEAST_SQUARES, data, w0, EpochConfig(**base), w_star)
    worst = 0.0
    for other in (t_mini, t_coord, t_svrg):
        worst = max(worst, float(np.max(np.abs(other.anchors - t_cheap.anchors))))
    return _record("reduction-chain", worst, 1e-15)


def check_accounting(seed: int = 0) -> CheckResult:
    """Cumulative gradient counts match the closed-form per-epoch costs."""
    data, _ = _small_instance(seed, n=9, p=3)
    w0 = np.zeros(data.p)
    worst = 0.0
    cfg = EpochConfig(eta=0.01, K=5, T=3, seed=seed, s=4)
    t = run_cheap_svrg(LEAST_SQUARES, data, w0, cfg)
    expect = np.arange(4) * (4 + 2 * (5 - 1))
    worst = max(worst, float(np.max(np.abs(t.grad_counts - expect))))
    cfg = EpochConfig(eta=0.01, K=5, T=3, seed=seed, s=3, q=2)
    t = run_minibatch(LEAST_SQUARES, data, w0, cfg)
    expect = np.arange(4) * (3 + 2 * 2 * (5 - 1))
    worst = max(worst, float(np.max(np.abs(t.grad_counts - expect))))
    cfg = EpochConfig(eta=0.01, K=5, T=3, seed=seed)
    t = run_svrg(LEAST_SQUARES, data, w0, cfg)
    expect = np.arange(4) * (data.n + 2 * (5 - 1))
    worst = max(worst, float(np.max(np.abs(t.grad_counts - expect))))
    return _record("gradient-accounting", worst, 0.0)


def check_finite_differences(seed: int = 0) -> CheckResult:
    """Central finite differences of component values match the analytic
    gradients on both objective families."""
    data, _ = _small_instance(seed, n=6, p=4)
    labels = np.where(data.targets >= np.median(data.targets), 1.0, -1.0)
    logit_data = Dataset(data.features, labels)
    rng = SeededRng(seed + 7)
    worst = 0.0
    from .objectives import component_value

    for kind, dset in ((LEAST_SQUARES, data), (logistic_l2(1e-3), logit_data)):
        for _ in range(8):
            w = rng.gaussian_vector(dset.p)
            i = rng.randbelow(dset.n)
            g = component_gradient(kind, dset, i, w)
            for j in range(dset.p):
                h = 1e-6 * max(1.0, abs(w[j]))
                wp = w.copy()
                wm = w.copy()
                wp[j] += h
                wm[j] -= h
                fd = (component_value(kind, dset, i, wp) - component_value(kind, dset, i, wm)) / (
                    2.0 * h
                )
                rel = abs(fd - g[j]) / max(1.0, abs(g[j]))
                worst = max(worst, rel)
    return _record("finite-differences", worst, 1e-5)


def run_all(seed: int = 0, fault=None) -> list[CheckResult]:
    """Run the whole battery; ``fault`` (test hook) wraps the direction
    used in the unbiasedness check to prove mutations are detected."""
    return [
        check_direction_unbiasedness(seed, fault=fault),
        check_surrogate_unbiasedness(seed),
        check_minibatch_unbiasedness(seed),
        check_coordinate_unbiasedness(seed),
        check_variance_lemma(seed),
        check_reduction_chain(seed),
        check_accounting(seed),
        check_finite_differences(seed),
    ]
