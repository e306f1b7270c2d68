"""Finite-sum objectives and their gradient oracles.

The problems solved here have the form ``F(w) = (1/n) * sum_i f_i(w)``
with two concrete families:

* least squares: ``f_i(w) = (n/2) * (y_i - x_i . w)**2``, so that
  ``F(w) = (1/2) * ||y - X w||**2``;
* l2-regularized logistic loss for labels in {-1, +1}:
  ``f_i(w) = log(1 + exp(-y_i * x_i . w)) + lam * ||w||**2``, the
  regularizer folded into every component so each ``f_i`` alone carries
  the full strong convexity.

All reductions over components accumulate in index order.  Together with
evaluating each row product as ``np.dot(x_i, w)`` this makes the oracles
reproduce, bit for bit, the arithmetic of the compiled optimizer kernels
and of the data generator, which is what lets a noiseless instance sit
exactly at objective zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficientError
from .linalg import singular_values

_KIND_LS = 0
_KIND_LOGISTIC = 1


@dataclass(frozen=True)
class ObjectiveKind:
    """Tag selecting an objective family; ``lam`` only applies to the
    logistic kind."""

    name: str
    lam: float = 0.0

    def __post_init__(self):
        if self.name not in ("least_squares", "logistic_l2"):
            raise ValueError(f"unknown objective kind {self.name!r}")
        if self.lam < 0.0 or not math.isfinite(self.lam):
            raise ValueError(f"regularization weight must be finite and >= 0, got {self.lam}")
        if self.name == "least_squares" and self.lam != 0.0:
            raise ValueError("least squares takes no regularization weight")

    @property
    def code(self) -> int:
        return _KIND_LS if self.name == "least_squares" else _KIND_LOGISTIC


LEAST_SQUARES = ObjectiveKind("least_squares")


def logistic_l2(lam: float) -> ObjectiveKind:
    return ObjectiveKind("logistic_l2", float(lam))


@dataclass
class Dataset:
    """Design matrix (n rows, p features) plus one target per row."""

    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.targets = np.ascontiguousarray(self.targets, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {self.features.shape}")
        if self.targets.shape != (self.features.shape[0],):
            raise ValueError(
                f"targets shape {self.targets.shape} does not match "
                f"{self.features.shape[0]} rows"
            )
        if self.features.shape[0] < 1 or self.features.shape[1] < 1:
            raise ValueError("dataset must have at least one row and one feature")
        if not np.all(np.isfinite(self.features)) or not np.all(np.isfinite(self.targets)):
            raise ValueError("dataset contains non-finite values")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


@dataclass
class GradientCounter:
    """Tallies component-gradient evaluations (the unit of work every
    budget in this package is denominated in)."""

    count: int = 0

    def add(self, k: int = 1) -> None:
        self.count += int(k)

    def reset(self) -> None:
        self.count = 0


@dataclass(frozen=True)
class SmoothnessConstants:
    """Component smoothness bound ``L`` and strong convexity ``gamma``
    of the averaged objective."""

    L: float
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.L) and math.isfinite(self.gamma)):
            raise ValueError("constants must be finite")
        if self.gamma <= 0.0 or self.L < self.gamma:
            raise ValueError(f"need L >= gamma > 0, got L={self.L}, gamma={self.gamma}")


def check_labels(data: Dataset) -> None:
    """Logistic targets must be exactly -1 or +1."""
    t = data.targets
    bad = ~((t == 1.0) | (t == -1.0))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(f"logistic targets must be in {{-1, +1}}; row {i} has {t[i]}")


def _sigmoid_neg(z: float) -> float:
    """sigma(-z) evaluated without overflow for any finite z."""
    if z >= 0.0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


def _log1p_exp_neg(z: float) -> float:
    """log(1 + exp(-z)) evaluated without overflow for any finite z."""
    if z >= 0.0:
        return math.log1p(math.exp(-z))
    return -z + math.log1p(math.exp(z))


def component_value(kind: ObjectiveKind, data: Dataset, i: int, w: np.ndarray) -> float:
    x = data.features[i]
    if kind.code == _KIND_LS:
        r = data.targets[i] - np.dot(x, w)
        return 0.5 * data.n * r * r
    z = data.targets[i] * np.dot(x, w)
    return _log1p_exp_neg(z) + kind.lam * float(np.dot(w, w))


def component_gradient(
    kind: ObjectiveKind,
    data: Dataset,
    i: int,
    w: np.ndarray,
    counter: GradientCounter | None = None,
) -> np.ndarray:
    """Gradient of a single component ``f_i`` at ``w``."""
    if counter is not None:
        counter.add(1)
    x = data.features[i]
    if kind.code == _KIND_LS:
        r = data.targets[i] - np.dot(x, w)
        return (-data.n * r) * x
    z = data.targets[i] * np.dot(x, w)
    coef = -data.targets[i] * _sigmoid_neg(z)
    return coef * x + (2.0 * kind.lam) * w


def component_gradient_coords(
    kind: ObjectiveKind,
    data: Dataset,
    i: int,
    w: np.ndarray,
    coords: np.ndarray,
    counter: GradientCounter | None = None,
) -> np.ndarray:
    """Component gradient restricted to a coordinate block.

    Returns a full-length vector that is zero off ``coords`` and agrees
    exactly with :func:`component_gradient` on ``coords``; summing the
    restrictions to a block and its complement recovers the unrestricted
    gradient bitwise.
    """
    coords = np.asarray(coords, dtype=np.int64)
    if coords.size == 0:
        raise ValueError("coordinate block must be nonempty")
    full = component_gradient(kind, data, i, w, counter)
    out = np.zeros_like(full)
    out[coords] = full[coords]
    return out


def full_gradient(
    kind: ObjectiveKind,
    data: Dataset,
    w: np.ndarray,
    counter: GradientCounter | None = None,
) -> np.ndarray:
    """Gradient of the averaged objective, accumulated in index order."""
    if counter is not None:
        counter.add(data.n)
    acc = np.zeros(data.p, dtype=np.float64)
    for i in range(data.n):
        acc += component_gradient(kind, data, i, w)
    return acc / data.n


def batch_gradient(
    kind: ObjectiveKind,
    data: Dataset,
    batch: np.ndarray,
    w: np.ndarray,
    counter: GradientCounter | None = None,
) -> np.ndarray:
    """Mean component gradient over an index batch, in the given order."""
    batch = np.asarray(batch, dtype=np.int64)
    if batch.size == 0:
        raise ValueError("batch must be nonempty")
    if counter is not None:
        counter.add(batch.size)
    acc = np.zeros(data.p, dtype=np.float64)
    for i in batch:
        acc += component_gradient(kind, data, int(i), w)
    return acc / batch.size


def objective_value(kind: ObjectiveKind, data: Dataset, w: np.ndarray) -> float:
    """``F(w)``, the average of the components, accumulated row by row."""
    if kind.code == _KIND_LS:
        acc = 0.0
        for i in range(data.n):
            r = data.targets[i] - np.dot(data.features[i], w)
            acc += r * r
        return 0.5 * acc
    acc = 0.0
    for i in range(data.n):
        z = data.targets[i] * np.dot(data.features[i], w)
        acc += _log1p_exp_neg(z)
    return acc / data.n + kind.lam * float(np.dot(w, w))


def estimate_constants(
    kind: ObjectiveKind, data: Dataset, mode: str = "paper"
) -> SmoothnessConstants:
    """Smoothness and strong convexity constants for a dataset.

    For least squares, ``mode="paper"`` reports ``L = sigma_max(X)**2``
    (a bound for the averaged objective, and the convention the step
    size rules here are calibrated to), while ``mode="component"``
    reports the worst single component, ``L = n * max_i ||x_i||**2``.
    Either way ``gamma = sigma_min(X)**2``, and a design matrix without
    full column rank is rejected because that gamma would be zero.

    For the logistic kind the mode is ignored: ``L`` is the component
    bound ``max_i ||x_i||**2 / 4 + 2 lam`` (exactly ``1/4 + 2 lam`` for
    unit-norm rows) and ``gamma = 2 lam`` from the regularizer.
    """
    if mode not in ("paper", "component"):
        raise ValueError(f"unknown constants mode {mode!r}")
    X = data.features
    if kind.code == _KIND_LOGISTIC:
        check_labels(data)
        if kind.lam <= 0.0:
            raise RankDeficientError(
                "logistic objective with lam = 0 has no strong convexity constant"
            )
        max_sq = float(np.max(np.einsum("ij,ij->i", X, X)))
        return SmoothnessConstants(L=0.25 * max_sq + 2.0 * kind.lam, gamma=2.0 * kind.lam)
    sv = singular_values(X)
    if data.n < data.p:
        raise RankDeficientError(
            f"{data.n} rows cannot give {data.p} features full column rank"
        )
    sigma_max = float(sv[0])
    tol = max(X.shape) * np.finfo(np.float64).eps * sigma_max
    sigma_min = float(sv[data.p - 1])
    if sigma_min <= tol:
        raise RankDeficientError(
            f"design matrix is rank deficient (sigma_min = {sigma_min:.3e})"
        )
    if mode == "paper":
        L = sigma_max**2
    else:
        L = data.n * float(np.max(np.einsum("ij,ij->i", X, X)))
    return SmoothnessConstants(L=L, gamma=sigma_min**2)
