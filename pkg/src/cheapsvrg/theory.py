"""Closed-form rate constants and feasibility conditions.

One pair of general formulas covers all three algorithm variants.  With
mini-batch size ``q`` and coordinate ratio ``ratio = p / b``,

    rho = q / (eta (q - 4 L eta ratio) K gamma)
        + 4 L eta (ratio + q / s) / (q - 4 L eta ratio)

    kappa = q / (q - 4 L eta ratio)
          * (2 eta / s + zeta / K) * max(xi, xi**2) / (1 - rho)

The single-component variant is (q=1, ratio=1), the mini-batch variant
(q>1, ratio=1), the coordinate variant (q=1, ratio=p/b); the named
wrappers below delegate with exactly those substitutions, so the q=1 and
b=p reductions are equalities at the bit level, not approximations.

``xi`` (a uniform bound on component gradient norms) and ``zeta`` (a
bound on summed iterate distances per epoch) are not computable a priori
for unregularized least squares, so this module also ships estimators
that measure them along a finished trajectory; ``kappa`` built from
those is a post-hoc diagnostic, not an a-priori certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleStepError, NoConvergenceError
from .objectives import Dataset, ObjectiveKind, component_gradient


@dataclass(frozen=True)
class TheoryParams:
    """Problem-side constants feeding the rate formulas."""

    L: float
    gamma: float
    theta: float = 0.5
    eps: float = 1e-3
    phi0: float = 1.0
    xi: float = 0.0
    zeta: float = 0.0

    def __post_init__(self):
        if not (self.L >= self.gamma > 0.0):
            raise ValueError(f"need L >= gamma > 0, got L={self.L}, gamma={self.gamma}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if self.eps <= 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.phi0 < 0.0 or self.xi < 0.0 or self.zeta < 0.0:
            raise ValueError("phi0, xi, zeta must be nonnegative")


@dataclass(frozen=True)
class BoundReport:
    """Everything feasibility_check evaluates.

    ``eta_max`` and ``K_min_relaxed`` come from the theta-parameterized
    single-component conditions; ``eta_max_strict`` and ``K_min`` from
    the q,s-parameterized selection rules (the two families differ in
    form, so both are reported).  Entries are None when the premise they
    need fails (e.g. no kappa once the step size is unstable).
    """

    rho: float | None
    kappa: float | None
    eta_max: float
    eta_max_strict: float
    K_min: int | None
    K_min_relaxed: int | None
    T_min: int | None
    grads_per_epoch: int
    total_grads: int | None
    feasible: bool
    reason: str


def _stability(eta: float, L: float, q: int, ratio: float) -> float:
    """The common denominator q - 4 L eta ratio, checked positive."""
    denom = q - 4.0 * L * eta * ratio
    if denom <= 0.0:
        raise InfeasibleStepError(
            f"step size {eta} too large for L={L}, q={q}, ratio={ratio}",
            f"eta >= q / (4 L ratio) = {q / (4.0 * L * ratio)}",
        )
    return denom


def _check_common(eta: float, L: float, gamma: float, K: int, s: int) -> None:
    if eta <= 0.0 or L <= 0.0 or gamma <= 0.0:
        raise ValueError("eta, L, gamma must be positive")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")


def _rho(eta: float, L: float, gamma: float, K: int, s: int, q: int, ratio: float) -> float:
    denom = _stability(eta, L, q, ratio)
    term1 = q / (eta * denom * K * gamma)
    term2 = 4.0 * L * eta * (ratio + q / s) / denom
    return term1 + term2


def rho_basic(eta: float, L: float, gamma: float, K: int, s: int) -> float:
    """Contraction factor of the single-component variant."""
    _check_common(eta, L, gamma, K, s)
    return _rho(eta, L, gamma, K, s, 1, 1.0)


def rho_minibatch(eta: float, L: float, gamma: float, K: int, s: int, q: int) -> float:
    """Contraction factor with inner mini-batches of size q."""
    _check_common(eta, L, gamma, K, s)
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return _rho(eta, L, gamma, K, s, q, 1.0)


def rho_coordinate(
    eta: float, L: float, gamma: float, K: int, s: int, p: int, b: int
) -> float:
    """Contraction factor of the coordinate variant (block size b of p)."""
    _check_common(eta, L, gamma, K, s)
    if not 1 <= b <= p:
        raise ValueError(f"need 1 <= b <= p, got b={b}, p={p}")
    return _rho(eta, L, gamma, K, s, 1, p / b)


def _kappa(
    eta: float,
    L: float,
    s: int,
    K: int,
    zeta: float,
    xi: float,
    rho: float,
    q: int,
    ratio: float,
) -> float:
    if not 0.0 < rho < 1.0:
        raise NoConvergenceError(f"kappa needs 0 < rho < 1, got rho = {rho}")
    denom = _stability(eta, L, q, ratio)
    return (q / denom) * (2.0 * eta / s + zeta / K) * max(xi, xi * xi) / (1.0 - rho)


def kappa_basic(
    eta: float, L: float, s: int, K: int, zeta: float, xi: float, rho: float
) -> float:
    """Additive convergence-neighborhood constant, single-component form."""
    _check_common(eta, L, 1.0, K, s)
    return _kappa(eta, L, s, K, zeta, xi, rho, 1, 1.0)


def kappa_minibatch(
    eta: float, L: float, s: int, K: int, zeta: float, xi: float, rho: float, q: int
) -> float:
    _check_common(eta, L, 1.0, K, s)
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return _kappa(eta, L, s, K, zeta, xi, rho, q, 1.0)


def kappa_coordinate(
    eta: float,
    L: float,
    s: int,
    K: int,
    zeta: float,
    xi: float,
    rho: float,
    p: int,
    b: int,
) -> float:
    _check_common(eta, L, 1.0, K, s)
    if not 1 <= b <= p:
        raise ValueError(f"need 1 <= b <= p, got b={b}, p={p}")
    return _kappa(eta, L, s, K, zeta, xi, rho, 1, p / b)


def epochs_needed(rho: float, phi0: float, eps: float) -> int:
    """Smallest nonnegative T with rho**T * phi0 <= eps / 2.

    Found by exact search (repeated multiplication) rather than the log
    formula, to dodge off-by-one at boundary values; see
    :func:`epochs_needed_formula` for the closed form.
    """
    if not 0.0 < rho < 1.0:
        raise NoConvergenceError(f"need 0 < rho < 1, got rho = {rho}")
    if phi0 < 0.0:
        raise ValueError(f"phi0 must be nonnegative, got {phi0}")
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    target = eps / 2.0
    value = phi0
    t = 0
    while value > target:
        value *= rho
        t += 1
    return t


def epochs_needed_formula(rho: float, phi0: float, eps: float) -> int:
    """Ceiling of the closed-form horizon log(2 phi0 / eps) / log(1/rho)."""
    if not 0.0 < rho < 1.0:
        raise NoConvergenceError(f"need 0 < rho < 1, got rho = {rho}")
    if phi0 <= eps / 2.0:
        return 0
    return int(math.ceil(math.log(2.0 * phi0 / eps) / math.log(1.0 / rho)))


@dataclass(frozen=True)
class GradientBudget:
    """Total gradient evaluations for T epochs: the exact per-construction
    count and the conventional asymptotic form."""

    exact: int
    asymptotic: int


def gradient_budget(K: int, s: int, q: int, T: int) -> GradientBudget:
    if min(K, s, q, T) < 0:
        raise ValueError("counts must be nonnegative")
    return GradientBudget(
        exact=T * (s + 2 * q * (K - 1)),
        asymptotic=T * (2 * q * K + s),
    )


def feasibility_check(params: TheoryParams, cfg, p: int | None = None) -> BoundReport:
    """Evaluate the step-size, epoch-length and accuracy conditions.

    Two condition families exist and both are reported: the relaxed
    theta-parameterized bounds (``eta_max``, ``K_min_relaxed``) and the
    strict selection rules (``eta_max_strict``, ``K_min``):

        C1:  eta < q / (4 L)   and   eta <= q s / (4 L (3 s + 2 q))
        C2:  K > 2 q / (gamma eta (q - 4 L eta))
        C3:  kappa <= eps / 2

    Infeasibility is a reported outcome, never an exception; ``reason``
    names the first failed condition.  When ``cfg.b`` and ``p`` are both
    given, rho and kappa use the coordinate ratio p/b, while C1/C2 are
    stated (and evaluated) in their q,s form.
    """
    L, gamma = params.L, params.gamma
    eta, K, s, q = cfg.eta, cfg.K, cfg.s, cfg.q
    if s is None or s < 1:
        return BoundReport(
            rho=None,
            kappa=None,
            eta_max=0.0,
            eta_max_strict=0.0,
            K_min=None,
            K_min_relaxed=None,
            T_min=None,
            grads_per_epoch=0,
            total_grads=None,
            feasible=False,
            reason="C1: surrogate subset size s must be >= 1 for the bounds",
        )
    ratio = 1.0
    if cfg.b is not None and p is not None:
        if not 1 <= cfg.b <= p:
            raise ValueError(f"need 1 <= b <= p, got b={cfg.b}, p={p}")
        ratio = p / cfg.b

    eta_max = 1.0 / (4.0 * L * ((1.0 + params.theta) + 1.0 / s))
    eta_max_strict = min(q / (4.0 * L), q * s / (4.0 * L * (3.0 * s + 2.0 * q)))

    grads_per_epoch = s + 2 * q * (K - 1)

    c1_ok = eta < q / (4.0 * L) and eta <= q * s / (4.0 * L * (3.0 * s + 2.0 * q))

    K_min = None
    K_min_relaxed = None
    rho = None
    kappa = None
    if eta < q / (4.0 * L):
        K_min = int(math.floor(2.0 * q / (gamma * eta * (q - 4.0 * L * eta)))) + 1
    if eta < 1.0 / (4.0 * L):
        K_min_relaxed = (
            int(
                math.floor(
                    1.0 / ((1.0 - params.theta) * eta * (1.0 - 4.0 * L * eta) * gamma)
                )
            )
            + 1
        )
    try:
        rho = _rho(eta, L, gamma, K, s, q, ratio)
    except InfeasibleStepError:
        rho = None

    if not c1_ok:
        if eta >= q / (4.0 * L):
            why = f"C1: eta = {eta} violates eta < q / (4 L) = {q / (4.0 * L)}"
        else:
            why = f"C1: eta = {eta} exceeds eta_max_strict = {eta_max_strict}"
        return BoundReport(
            rho=rho,
            kappa=None,
            eta_max=eta_max,
            eta_max_strict=eta_max_strict,
            K_min=K_min,
            K_min_relaxed=K_min_relaxed,
            T_min=None,
            grads_per_epoch=grads_per_epoch,
            total_grads=None,
            feasible=False,
            reason=why,
        )

    c2_ok = K_min is not None and K >= K_min
    if not c2_ok:
        return BoundReport(
            rho=rho,
            kappa=None,
            eta_max=eta_max,
            eta_max_strict=eta_max_strict,
            K_min=K_min,
            K_min_relaxed=K_min_relaxed,
            T_min=None,
            grads_per_epoch=grads_per_epoch,
            total_grads=None,
            feasible=False,
            reason=f"C2: K = {K} is below K_min = {K_min}",
        )

    # C1 and C2 together pin rho inside (0, 1), so kappa is well defined.
    kappa = _kappa(eta, L, s, K, params.zeta, params.xi, rho, q, ratio)
    if kappa > params.eps / 2.0:
        return BoundReport(
            rho=rho,
            kappa=kappa,
            eta_max=eta_max,
            eta_max_strict=eta_max_strict,
            K_min=K_min,
            K_min_relaxed=K_min_relaxed,
            T_min=None,
            grads_per_epoch=grads_per_epoch,
            total_grads=None,
            feasible=False,
            reason=f"C3: kappa = {kappa} exceeds eps/2 = {params.eps / 2.0}",
        )

    T_min = epochs_needed(rho, params.phi0, params.eps)
    return BoundReport(
        rho=rho,
        kappa=kappa,
        eta_max=eta_max,
        eta_max_strict=eta_max_strict,
        K_min=K_min,
        K_min_relaxed=K_min_relaxed,
        T_min=T_min,
        grads_per_epoch=grads_per_epoch,
        total_grads=T_min * grads_per_epoch,
        feasible=True,
        reason="",
    )


def empirical_xi(kind: ObjectiveKind, data: Dataset, anchors: np.ndarray) -> float:
    """Largest component gradient norm seen at any anchor point."""
    anchors = np.atleast_2d(np.asarray(anchors, dtype=np.float64))
    worst = 0.0
    for t in range(anchors.shape[0]):
        w = anchors[t]
        for i in range(data.n):
            g = component_gradient(kind, data, i, w)
            nrm = float(np.sqrt(np.dot(g, g)))
            if nrm > worst:
                worst = nrm
    return worst


def empirical_zeta(trace) -> float:
    """Largest per-epoch sum of inner-iterate distances to the minimizer."""
    if trace.zeta_sums is None:
        raise ValueError("trace has no per-epoch distance sums (run without w_star?)")
    if trace.rows() < 2:
        raise ValueError("trace has no completed epochs")
    return float(np.max(trace.zeta_sums[1:]))


@dataclass(frozen=True)
class ContractionReport:
    """Per-epoch check of gap_t <= rho * gap_{t-1} + kappa + slack."""

    checked: int
    violations: int
    fraction_ok: float
    rho: float
    kappa: float
    supercritical: bool


def contraction_report(
    gaps: np.ndarray, rho: float, kappa: float, slack: float = 1e-9
) -> ContractionReport:
    """Count how many epochs of a measured gap sequence obey the one-step
    contraction inequality.  ``supercritical`` flags rho >= 1, where the
    inequality no longer promises progress (it can still be checked)."""
    gaps = np.asarray(gaps, dtype=np.float64)
    if gaps.ndim != 1 or gaps.shape[0] < 2:
        raise ValueError("need a 1-d gap sequence with at least two entries")
    checked = gaps.shape[0] - 1
    bad = 0
    for t in range(1, gaps.shape[0]):
        if not gaps[t] <= rho * gaps[t - 1] + kappa + slack:
            bad += 1
    return ContractionReport(
        checked=checked,
        violations=bad,
        fraction_ok=1.0 - bad / checked,
        rho=rho,
        kappa=kappa,
        supercritical=rho >= 1.0,
    )
