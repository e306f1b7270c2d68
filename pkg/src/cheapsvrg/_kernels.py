"""Compiled optimizer inner loops.

Every function here is decorated with :func:`maybe_njit`, so the module
runs either as numba-compiled machine code or as plain numpy, selected by
``CHEAPSVRG_DISABLE_JIT`` at import time.  The loops are written scalar
by scalar (except row dot products, which go through ``np.dot`` exactly
like the interpreted oracle layer) so both backends execute the same
floating point operations in the same order.

Divergence handling: evaluating the full objective at every inner step
would multiply the work per step by n, so the guard is split: each inner
update is followed by a cheap magnitude check (non-finite or beyond
1e150 aborts the epoch), and the exact threshold ``1e12 * F(start)`` is
enforced against the objective at epoch boundaries.  A run that trips
either check reports the epochs that completed before the blow-up.
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import maybe_njit
from .rng import _rand_below, _sample_indices

_WLIM = 1e150


@maybe_njit
def _grad_into(X, y, kind, lam, i, w, out):
    """out := gradient of component i at w.  kind 0 = least squares,
    1 = logistic with l2 weight lam."""
    n = X.shape[0]
    p = X.shape[1]
    x = X[i]
    if kind == 0:
        r = y[i] - np.dot(x, w)
        c = -n * r
        for j in range(p):
            out[j] = c * x[j]
    else:
        z = y[i] * np.dot(x, w)
        if z >= 0.0:
            e = math.exp(-z)
            sneg = e / (1.0 + e)
        else:
            sneg = 1.0 / (1.0 + math.exp(z))
        c = -y[i] * sneg
        tl = 2.0 * lam
        for j in range(p):
            out[j] = c * x[j] + tl * w[j]


@maybe_njit
def _mean_grad_into(X, y, kind, lam, idx, at, out, tmp):
    """out := mean component gradient over idx (in idx order) at ``at``."""
    p = X.shape[1]
    m = idx.shape[0]
    for j in range(p):
        out[j] = 0.0
    for t in range(m):
        _grad_into(X, y, kind, lam, idx[t], at, tmp)
        for j in range(p):
            out[j] += tmp[j]
    for j in range(p):
        out[j] = out[j] / m


@maybe_njit
def _objective(X, y, kind, lam, w):
    n = X.shape[0]
    acc = 0.0
    if kind == 0:
        for i in range(n):
            r = y[i] - np.dot(X[i], w)
            acc += r * r
        return 0.5 * acc
    for i in range(n):
        z = y[i] * np.dot(X[i], w)
        if z >= 0.0:
            acc += math.log1p(math.exp(-z))
        else:
            acc += -z + math.log1p(math.exp(z))
    return acc / n + lam * np.dot(w, w)


@maybe_njit
def _in_range(w):
    for j in range(w.shape[0]):
        if not (-_WLIM < w[j] < _WLIM):
            return False
    return True


@maybe_njit
def _two_stage_kernel(
    X,
    y,
    kind,
    lam,
    eta,
    s,
    q,
    K,
    T,
    wt,
    sub_state,
    inn_state,
    wstar,
    use_wstar,
    obj,
    grads,
    zsum,
    anchors,
):
    """Anchored epochs with surrogate-corrected stochastic steps.

    Covers the single-component variant (q = 1), the mini-batch variant
    (q > 1) and the full-snapshot special case (s = n, which skips subset
    sampling and charges n).  With s = 0 the correction is dropped
    entirely and the loop degenerates to constant-step SGD, in which case
    the epoch "average" is simply the last iterate.

    Returns (status, epochs_done): status 0 normal, 1 diverged.
    Output arrays hold the start row at index 0 and epoch t at index t.
    """
    n = X.shape[0]
    p = X.shape[1]
    mu = np.zeros(p, dtype=np.float64)
    gc = np.empty(p, dtype=np.float64)
    ga = np.empty(p, dtype=np.float64)
    tmp = np.empty(p, dtype=np.float64)
    w = np.empty(p, dtype=np.float64)
    acc = np.empty(p, dtype=np.float64)
    idx_all = np.arange(n)

    obj[0] = _objective(X, y, kind, lam, wt)
    grads[0] = 0
    zsum[0] = 0.0
    for j in range(p):
        anchors[0, j] = wt[j]
    if not np.isfinite(obj[0]):
        return 1, 0
    guard = 1e12 * obj[0]
    if guard < 1e-12:
        guard = 1e-12

    total = 0
    for t in range(1, T + 1):
        if s == n:
            _mean_grad_into(X, y, kind, lam, idx_all, wt, mu, tmp)
            total += n
        elif s > 0:
            idx = _sample_indices(sub_state, n, s)
            _mean_grad_into(X, y, kind, lam, idx, wt, mu, tmp)
            total += s

        for j in range(p):
            w[j] = wt[j]
            acc[j] = w[j]
        zs = 0.0
        if use_wstar:
            d = 0.0
            for j in range(p):
                e = w[j] - wstar[j]
                d += e * e
            zs = math.sqrt(d)

        for k in range(1, K):
            qidx = _sample_indices(inn_state, n, q)
            _mean_grad_into(X, y, kind, lam, qidx, w, gc, tmp)
            if s > 0:
                _mean_grad_into(X, y, kind, lam, qidx, wt, ga, tmp)
                for j in range(p):
                    w[j] -= eta * (gc[j] - ga[j] + mu[j])
                total += 2 * q
            else:
                for j in range(p):
                    w[j] -= eta * gc[j]
                total += q
            if not _in_range(w):
                return 1, t - 1
            for j in range(p):
                acc[j] += w[j]
            if use_wstar:
                d = 0.0
                for j in range(p):
                    e = w[j] - wstar[j]
                    d += e * e
                zs += math.sqrt(d)

        if s == 0:
            for j in range(p):
                wt[j] = w[j]
        else:
            for j in range(p):
                wt[j] = acc[j] / K
        obj[t] = _objective(X, y, kind, lam, wt)
        grads[t] = total
        zsum[t] = zs
        for j in range(p):
            anchors[t, j] = wt[j]
        if not (obj[t] <= guard):
            return 1, t
    return 0, T


@maybe_njit
def _coordinate_kernel(
    X,
    y,
    kind,
    lam,
    eta,
    s,
    b,
    K,
    T,
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
):
    """Coordinate-restricted variant: each inner step touches only a
    uniform block of b coordinates, reweighted by p/b.  Block draws come
    from their own stream so the s, i_k streams match the unrestricted
    kernel draw for draw.  Charges 2 component gradients per step (the
    two partial evaluations)."""
    n = X.shape[0]
    p = X.shape[1]
    scale = (1.0 * p) / b
    mu = np.zeros(p, dtype=np.float64)
    gc = np.empty(p, dtype=np.float64)
    ga = np.empty(p, dtype=np.float64)
    tmp = np.empty(p, dtype=np.float64)
    w = np.empty(p, dtype=np.float64)
    acc = np.empty(p, dtype=np.float64)
    idx_all = np.arange(n)

    obj[0] = _objective(X, y, kind, lam, wt)
    grads[0] = 0
    zsum[0] = 0.0
    for j in range(p):
        anchors[0, j] = wt[j]
    if not np.isfinite(obj[0]):
        return 1, 0
    guard = 1e12 * obj[0]
    if guard < 1e-12:
        guard = 1e-12

    total = 0
    for t in range(1, T + 1):
        if s == n:
            _mean_grad_into(X, y, kind, lam, idx_all, wt, mu, tmp)
            total += n
        else:
            idx = _sample_indices(sub_state, n, s)
            _mean_grad_into(X, y, kind, lam, idx, wt, mu, tmp)
            total += s

        for j in range(p):
            w[j] = wt[j]
            acc[j] = w[j]
        zs = 0.0
        if use_wstar:
            d = 0.0
            for j in range(p):
                e = w[j] - wstar[j]
                d += e * e
            zs = math.sqrt(d)

        for k in range(1, K):
            i = _rand_below(inn_state, n)
            block = _sample_indices(coord_state, p, b)
            _grad_into(X, y, kind, lam, i, w, gc)
            _grad_into(X, y, kind, lam, i, wt, ga)
            for tb in range(b):
                j = block[tb]
                w[j] -= eta * (scale * (gc[j] - ga[j] + mu[j]))
            total += 2
            if not _in_range(w):
                return 1, t - 1
            for j in range(p):
                acc[j] += w[j]
            if use_wstar:
                d = 0.0
                for j in range(p):
                    e = w[j] - wstar[j]
                    d += e * e
                zs += math.sqrt(d)

        for j in range(p):
            wt[j] = acc[j] / K
        obj[t] = _objective(X, y, kind, lam, wt)
        grads[t] = total
        zsum[t] = zs
        for j in range(p):
            anchors[t, j] = wt[j]
        if not (obj[t] <= guard):
            return 1, t
    return 0, T


@maybe_njit
def _sgd_kernel(
    X,
    y,
    kind,
    lam,
    c,
    L,
    steps,
    w,
    state,
    obj,
    grads,
    anchors,
):
    """Decreasing-step SGD, w_k = w_{k-1} - (c / (L k)) grad f_{i_k}.

    Snapshots after every n steps plus a final partial row when steps is
    not a multiple of n.  Returns (status, rows_written)."""
    n = X.shape[0]
    p = X.shape[1]
    g = np.empty(p, dtype=np.float64)

    obj[0] = _objective(X, y, kind, lam, w)
    grads[0] = 0
    for j in range(p):
        anchors[0, j] = w[j]
    if not np.isfinite(obj[0]):
        return 1, 1
    guard = 1e12 * obj[0]
    if guard < 1e-12:
        guard = 1e-12

    row = 1
    for k in range(1, steps + 1):
        i = _rand_below(state, n)
        _grad_into(X, y, kind, lam, i, w, g)
        step = c / (L * k)
        for j in range(p):
            w[j] -= step * g[j]
        if not _in_range(w):
            return 1, row
        if k % n == 0 or k == steps:
            obj[row] = _objective(X, y, kind, lam, w)
            grads[row] = k
            for j in range(p):
                anchors[row, j] = w[j]
            row += 1
            if not (obj[row - 1] <= guard):
                return 1, row
    return 0, row
