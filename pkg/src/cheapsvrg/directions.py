"""Variance-reduced update directions.

Each optimizer epoch freezes an anchor point and a surrogate snapshot
gradient (the mean component gradient over a small index subset at the
anchor), then corrects fresh stochastic gradients against them:

    v = g(current) - g(anchor) + surrogate

where ``g`` is a single component gradient, a mini-batch mean, or a
coordinate restriction.  Conditioned on the anchor and surrogate, every
variant's expectation over its fresh randomness is the full gradient at
the current point, shifted by the (fixed) surrogate error; the variants
below only trade how much each step costs against how much variance the
correction removes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .objectives import (
    Dataset,
    GradientCounter,
    ObjectiveKind,
    batch_gradient,
    component_gradient,
    component_gradient_coords,
)


@dataclass
class DirectionContext:
    """State an inner step reads: the epoch anchor, the frozen surrogate
    snapshot gradient, and the current iterate."""

    anchor: np.ndarray
    surrogate: np.ndarray
    current: np.ndarray

    def __post_init__(self):
        if not (self.anchor.shape == self.surrogate.shape == self.current.shape):
            raise ValueError(
                f"shape mismatch: anchor {self.anchor.shape}, "
                f"surrogate {self.surrogate.shape}, current {self.current.shape}"
            )


def surrogate_gradient(
    kind: ObjectiveKind,
    data: Dataset,
    subset: np.ndarray,
    anchor: np.ndarray,
    counter: GradientCounter | None = None,
) -> np.ndarray:
    """Snapshot gradient over an index subset at the anchor point."""
    return batch_gradient(kind, data, subset, anchor, counter)


def cheap_direction(
    kind: ObjectiveKind,
    data: Dataset,
    ctx: DirectionContext,
    i: int,
    counter: GradientCounter | None = None,
) -> np.ndarray:
    """Single-component corrected direction; costs two component
    gradients."""
    g_cur = component_gradient(kind, data, i, ctx.current, counter)
    g_anc = component_gradient(kind, data, i, ctx.anchor, counter)
    return g_cur - g_anc + ctx.surrogate


def minibatch_direction(
    kind: ObjectiveKind,
    data: Dataset,
    ctx: DirectionContext,
    batch: np.ndarray,
    counter: GradientCounter | None = None,
) -> np.ndarray:
    """Mini-batch corrected direction; costs ``2 * len(batch)`` component
    gradients.  A singleton batch reproduces :func:`cheap_direction`."""
    g_cur = batch_gradient(kind, data, batch, ctx.current, counter)
    g_anc = batch_gradient(kind, data, batch, ctx.anchor, counter)
    return g_cur - g_anc + ctx.surrogate


def coordinate_direction(
    kind: ObjectiveKind,
    data: Dataset,
    ctx: DirectionContext,
    i: int,
    coords: np.ndarray,
    b: int | None = None,
    counter: GradientCounter | None = None,
) -> np.ndarray:
    """Coordinate-block corrected direction.

    The correction is restricted to ``coords`` and reweighted by
    ``p / len(coords)`` so its expectation over a uniform block matches
    the unrestricted direction.  The returned vector is zero off the
    block.  Passing ``b`` asserts the intended block size.  Choosing the
    full block reproduces :func:`cheap_direction`.
    """
    coords = np.asarray(coords, dtype=np.int64)
    if coords.size == 0:
        raise ValueError("coordinate block must be nonempty")
    if b is not None and coords.size != b:
        raise ValueError(f"block has {coords.size} coordinates, expected b = {b}")
    p = data.p
    g_cur = component_gradient_coords(kind, data, i, ctx.current, coords, counter)
    g_anc = component_gradient_coords(kind, data, i, ctx.anchor, coords, counter)
    masked_surrogate = np.zeros(p, dtype=np.float64)
    masked_surrogate[coords] = ctx.surrogate[coords]
    return (p / coords.size) * (g_cur - g_anc + masked_surrogate)
