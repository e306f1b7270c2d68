"""Small dense linear algebra helpers.

Only one operation matters here: extracting the extreme singular values
that drive smoothness and strong convexity constants.  The factorization
itself is delegated to LAPACK through numpy (an implementation detail;
the contract is only about the returned extremes).
"""

from __future__ import annotations

import numpy as np


def singular_values(mat: np.ndarray) -> np.ndarray:
    """All singular values of a dense matrix, descending."""
    a = np.asarray(mat, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"expected a nonempty 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return np.linalg.svd(a, compute_uv=False)


def spectral_extremes(mat: np.ndarray) -> tuple[float, float]:
    """Largest singular value and smallest strictly positive one.

    Singular values at or below ``max(n, p) * eps * sigma_max`` are
    treated as numerically zero.  A matrix with no positive singular
    value (the zero matrix) has no well-defined smallest positive
    extreme, so that case raises.
    """
    sv = singular_values(mat)
    sigma_max = float(sv[0])
    if sigma_max == 0.0:
        raise ValueError("zero matrix has no positive singular values")
    tol = max(mat.shape) * np.finfo(np.float64).eps * sigma_max
    positive = sv[sv > tol]
    sigma_min_pos = float(positive[-1])
    return sigma_max, sigma_min_pos
