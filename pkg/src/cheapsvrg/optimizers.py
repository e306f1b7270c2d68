"""Optimization procedures with a shared epoch/trace protocol.

Five runners share the machinery here: decreasing-step SGD, the full
snapshot method (surrogate over all n components), the cheap surrogate
method (subset snapshot), its mini-batch variant, and the coordinate
variant.  All of them:

* draw every random quantity from purpose-separated streams derived from
  the config seed (subset draws, inner index draws and coordinate block
  draws never interleave, which is what makes the q=1, b=p and s=n
  reductions reproduce each other bit for bit);
* record one trace row at the start and one per epoch (for SGD, one per
  effective pass), carrying the objective, gap and distance when the
  minimizer is known, and exact cumulative gradient-evaluation counts;
* abort with :class:`DivergenceError` carrying the partial trace when a
  run blows up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DivergenceError
from .objectives import Dataset, ObjectiveKind, check_labels
from .rng import derive_seed, seed_state

_STREAM_SUBSET = 0x53554253
_STREAM_INNER = 0x494E4E45
_STREAM_COORD = 0x434F4F52


@dataclass(frozen=True)
class EpochConfig:
    """Parameters of an epoch-structured run.

    ``s`` is the surrogate snapshot subset size (0..n; None means "use
    the full set", which only the full-snapshot runner accepts), ``q``
    the inner mini-batch size, ``b`` the coordinate block size (None
    means all p), ``K`` the inner iterations per epoch (K - 1 updates,
    K averaged points), ``T`` the number of epochs.
    """

    eta: float
    K: int
    T: int
    seed: int
    s: int | None = None
    q: int = 1
    b: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0.0):
            raise ValueError(f"step size must be finite and positive, got {self.eta}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if self.s is not None and self.s < 0:
            raise ValueError(f"s must be >= 0, got {self.s}")
        if self.b is not None and self.b < 1:
            raise ValueError(f"b must be >= 1, got {self.b}")


@dataclass
class Trace:
    """Per-epoch record of a single run.

    Row 0 is the starting point; row t the state after epoch t (for SGD,
    after t effective passes, the last row possibly partial).  ``gap``,
    ``distance`` and ``zeta_sums`` are None when the minimizer was not
    supplied.  ``zeta_sums[t]`` is the per-epoch sum of inner iterate
    distances to the minimizer, for estimating update-boundedness
    constants after the fact.
    """

    algorithm: str
    epochs: np.ndarray
    objective: np.ndarray
    gap: np.ndarray | None
    distance: np.ndarray | None
    grad_counts: np.ndarray
    passes: np.ndarray
    anchors: np.ndarray
    zeta_sums: np.ndarray | None
    w_final: np.ndarray
    n: int
    diverged: bool = False

    def rows(self) -> int:
        return int(self.epochs.shape[0])

    def final_objective(self) -> float:
        return float(self.objective[-1])


def _as_start(w0: np.ndarray, p: int) -> np.ndarray:
    w = np.ascontiguousarray(w0, dtype=np.float64)
    if w.shape != (p,):
        raise ValueError(f"starting point has shape {w.shape}, expected ({p},)")
    if not np.all(np.isfinite(w)):
        raise ValueError("starting point contains non-finite values")
    return w.copy()


def _as_wstar(w_star, p: int) -> tuple[np.ndarray, bool]:
    if w_star is None:
        return np.zeros(p, dtype=np.float64), False
    w = np.ascontiguousarray(w_star, dtype=np.float64)
    if w.shape != (p,):
        raise ValueError(f"minimizer has shape {w.shape}, expected ({p},)")
    return w, True


def _finish_trace(
    algorithm: str,
    kind: ObjectiveKind,
    data: Dataset,
    status: int,
    rows: int,
    obj: np.ndarray,
    grads: np.ndarray,
    zsum: np.ndarray | None,
    anchors: np.ndarray,
    wstar: np.ndarray,
    use_wstar: bool,
) -> Trace:
    obj = obj[:rows].copy()
    grads = grads[:rows].copy()
    anchors = anchors[:rows].copy()
    gap = None
    distance = None
    zeta = None
    if use_wstar:
        fstar = _kernels._objective(
            data.features, data.targets, kind.code, kind.lam, wstar
        )
        gap = obj - fstar
        diff = anchors - wstar[None, :]
        distance = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        if zsum is not None:
            zeta = zsum[:rows].copy()
    trace = Trace(
        algorithm=algorithm,
        epochs=np.arange(rows, dtype=np.int64),
        objective=obj,
        gap=gap,
        distance=distance,
        grad_counts=grads,
        passes=grads / data.n,
        anchors=anchors,
        zeta_sums=zeta,
        w_final=anchors[-1].copy(),
        n=data.n,
        diverged=(status != 0),
    )
    return trace


def _run_two_stage(
    algorithm: str,
    kind: ObjectiveKind,
    data: Dataset,
    w0: np.ndarray,
    cfg: EpochConfig,
    w_star,
    s: int,
    q: int,
) -> Trace:
    n, p = data.n, data.p
    if kind.code == 1:
        check_labels(data)
    if not 0 <= s <= n:
        raise ValueError(f"s = {s} out of range [0, {n}]")
    if not 1 <= q <= n:
        raise ValueError(f"q = {q} out of range [1, {n}]")
    wt = _as_start(w0, p)
    wstar, use_wstar = _as_wstar(w_star, p)
    rows = cfg.T + 1
    obj = np.empty(rows, dtype=np.float64)
    grads = np.empty(rows, dtype=np.int64)
    zsum = np.zeros(rows, dtype=np.float64)
    anchors = np.empty((rows, p), dtype=np.float64)
    sub_state = seed_state(derive_seed(cfg.seed, _STREAM_SUBSET))
    inn_state = seed_state(derive_seed(cfg.seed, _STREAM_INNER))
    status, done = _kernels._two_stage_kernel(
        data.features,
        data.targets,
        kind.code,
        kind.lam,
        float(cfg.eta),
        s,
        q,
        cfg.K,
        cfg.T,
        wt,
        sub_state,
        inn_state,
        wstar,
        use_wstar,
        obj,
        grads,
        zsum,
        anchors,
    )
    trace = _finish_trace(
        algorithm, kind, data, status, done + 1, obj, grads, zsum, anchors, wstar, use_wstar
    )
    if trace.diverged:
        raise DivergenceError(
            f"{algorithm} run diverged after {done} completed epochs", trace
        )
    return trace


def run_cheap_svrg(
    kind: ObjectiveKind,
    data: Dataset,
    w0: np.ndarray,
    cfg: EpochConfig,
    w_star=None,
) -> Trace:
    """Subset-snapshot method: each epoch anchors at the running average,
    snapshots the mean gradient of s sampled components, then takes K - 1
    corrected single-component steps.  s = 0 degenerates to constant-step
    SGD (no snapshot, no correction, no averaging)."""
    if cfg.s is None:
        raise ValueError("cheap runner needs an explicit s in the config")
    if cfg.q != 1:
        raise ValueError("cheap runner is single-component; use run_minibatch for q > 1")
    return _run_two_stage("cheap", kind, data, w0, cfg, w_star, cfg.s, 1)


def run_minibatch(
    kind: ObjectiveKind,
    data: Dataset,
    w0: np.ndarray,
    cfg: EpochConfig,
    w_star=None,
) -> Trace:
    """Mini-batch variant: inner steps correct a batch mean of q fresh
    components, charging 2q per step.  q = 1 reproduces run_cheap_svrg
    exactly."""
    if cfg.s is None:
        raise ValueError("minibatch runner needs an explicit s in the config")
    return _run_two_stage("minibatch", kind, data, w0, cfg, w_star, cfg.s, cfg.q)


def run_svrg(
    kind: ObjectiveKind,
    data: Dataset,
    w0: np.ndarray,
    cfg: EpochConfig,
    w_star=None,
) -> Trace:
    """Full-snapshot method: the epoch surrogate is the exact full
    gradient (n charged per epoch).  Identical to run_cheap_svrg with
    s = n under the same seed."""
    if cfg.s is not None and cfg.s != data.n:
        raise ValueError(f"full-snapshot runner forces s = n, got s = {cfg.s}")
    if cfg.q != 1:
        raise ValueError("full-snapshot runner is single-component (q = 1)")
    return _run_two_stage("svrg", kind, data, w0, cfg, w_star, data.n, 1)


def run_cheaper_svrg(
    kind: ObjectiveKind,
    data: Dataset,
    w0: np.ndarray,
    cfg: EpochConfig,
    w_star=None,
) -> Trace:
    """Coordinate variant: each inner step updates a uniform block of b
    coordinates with the p/b reweighted restricted correction.  Charges
    2 component gradients per step; b = p reproduces run_cheap_svrg."""
    n, p = data.n, data.p
    if kind.code == 1:
        check_labels(data)
    if cfg.s is None or cfg.s < 1:
        raise ValueError("coordinate runner needs s >= 1")
    if cfg.q != 1:
        raise ValueError("coordinate runner is single-component (q = 1)")
    s = cfg.s
    b = p if cfg.b is None else cfg.b
    if not 1 <= b <= p:
        raise ValueError(f"b = {b} out of range [1, {p}]")
    if s > n:
        raise ValueError(f"s = {s} out of range [0, {n}]")
    wt = _as_start(w0, p)
    wstar, use_wstar = _as_wstar(w_star, p)
    rows = cfg.T + 1
    obj = np.empty(rows, dtype=np.float64)
    grads = np.empty(rows, dtype=np.int64)
    zsum = np.zeros(rows, dtype=np.float64)
    anchors = np.empty((rows, p), dtype=np.float64)
    sub_state = seed_state(derive_seed(cfg.seed, _STREAM_SUBSET))
    inn_state = seed_state(derive_seed(cfg.seed, _STREAM_INNER))
    coord_state = seed_state(derive_seed(cfg.seed, _STREAM_COORD))
    status, done = _kernels._coordinate_kernel(
        data.features,
        data.targets,
        kind.code,
        kind.lam,
        float(cfg.eta),
        s,
        b,
        cfg.K,
        cfg.T,
        wt,
        sub_state,
        inn_state,
        coord_state,
        wstar,
        use_wstar,
        obj,
        grads,
        zsum,
        anchors,
    )
    trace = _finish_trace(
        "cheaper", kind, data, status, done + 1, obj, grads, zsum, anchors, wstar, use_wstar
    )
    if trace.diverged:
        raise DivergenceError(
            f"cheaper run diverged after {done} completed epochs", trace
        )
    return trace


def run_sgd(
    kind: ObjectiveKind,
    data: Dataset,
    w0: np.ndarray,
    steps: int,
    c: float,
    L: float,
    seed: int,
    w_star=None,
) -> Trace:
    """Baseline SGD with decreasing steps eta_k = c / (L k).

    Snapshots every n steps (one effective pass) plus a final partial
    row.  c = 0 is allowed and leaves the iterate fixed."""
    n, p = data.n, data.p
    if kind.code == 1:
        check_labels(data)
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if c < 0.0 or not math.isfinite(c):
        raise ValueError(f"c must be finite and >= 0, got {c}")
    if L <= 0.0 or not math.isfinite(L):
        raise ValueError(f"L must be finite and positive, got {L}")
    w = _as_start(w0, p)
    wstar, use_wstar = _as_wstar(w_star, p)
    rows = 1 + steps // n + (1 if steps % n else 0)
    obj = np.empty(rows, dtype=np.float64)
    grads = np.empty(rows, dtype=np.int64)
    anchors = np.empty((rows, p), dtype=np.float64)
    state = seed_state(derive_seed(seed, _STREAM_INNER))
    status, done = _kernels._sgd_kernel(
        data.features,
        data.targets,
        kind.code,
        kind.lam,
        float(c),
        float(L),
        steps,
        w,
        state,
        obj,
        grads,
        anchors,
    )
    trace = _finish_trace(
        "sgd", kind, data, status, done, obj, grads, None, anchors, wstar, use_wstar
    )
    if trace.diverged:
        raise DivergenceError(
            f"sgd run diverged after {trace.rows() - 1} recorded passes", trace
        )
    return trace
