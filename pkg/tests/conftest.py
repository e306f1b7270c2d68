"""Shared fixtures.

The session-scoped warmup below touches every jitted kernel signature
once, so tests that assert wall-clock budgets measure compute rather
than compilation.  With the on-disk kernel cache populated this costs
well under a second; on a cold cache it pays the compile bill exactly
once for the whole session.
"""

import numpy as np
import pytest

from cheapsvrg import (
    Dataset,
    EpochConfig,
    LEAST_SQUARES,
    SeededRng,
    logistic_l2,
    run_cheap_svrg,
    run_cheaper_svrg,
    run_minibatch,
    run_sgd,
    run_svrg,
)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, -0.5]])
    data = Dataset(X, np.array([1.0, 1.0, 2.0, 0.0]))
    w0 = np.zeros(2)
    base = dict(eta=0.01, K=3, T=1, seed=0)
    run_cheap_svrg(LEAST_SQUARES, data, w0, EpochConfig(s=2, **base))
    run_cheap_svrg(LEAST_SQUARES, data, w0, EpochConfig(s=0, **base))
    run_svrg(LEAST_SQUARES, data, w0, EpochConfig(**base))
    run_minibatch(LEAST_SQUARES, data, w0, EpochConfig(s=2, q=2, **base))
    run_cheaper_svrg(LEAST_SQUARES, data, w0, EpochConfig(s=2, b=1, **base))
    run_sgd(LEAST_SQUARES, data, w0, steps=5, c=0.1, L=3.0, seed=0)
    logit = logistic_l2(1e-3)
    dlog = Dataset(X, np.array([1.0, -1.0, 1.0, -1.0]))
    run_cheap_svrg(logit, dlog, w0, EpochConfig(s=2, **base))
    run_sgd(logit, dlog, w0, steps=5, c=0.1, L=1.0, seed=0)
    SeededRng(0).gaussian_vector(4)


@pytest.fixture
def toy_data():
    """Interpolating 3x2 least-squares instance: w* = (1, 1), F(w*) = 0.

    Small enough that every expected value in the tests can be done by
    hand: X rows (1,0), (0,1), (1,1) and targets 1, 1, 2.
    """
    X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    y = np.array([1.0, 1.0, 2.0])
    return Dataset(X, y)


@pytest.fixture
def toy_wstar():
    return np.array([1.0, 1.0])
