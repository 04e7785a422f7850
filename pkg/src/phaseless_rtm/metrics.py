"""Scalar figures of merit for images."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateImageError, GridMismatchError
from .geometry import distance_to_curves


def tube_halfwidth(image):
    """Half a wavelength; the mean wavelength for multi-frequency stacks."""
    ks = np.atleast_1d(np.asarray(image.k, dtype=float))
    return float(np.mean(2 * np.pi / ks)) / 2


def localization_score(image, curves, quantile=0.99, tube=None):
    """Fraction of the brightest nodes (value >= quantile) lying near the boundary.

    "Near" means within ``tube`` of some curve, half a wavelength by default.
    """
    vals = image.grid.values.ravel()
    if np.ptp(vals) == 0:
        raise DegenerateImageError("localization score of a constant image")
    tube = tube_halfwidth(image) if tube is None else tube
    cut = np.quantile(vals, quantile)
    bright = image.grid.points()[vals >= cut]
    return float(np.mean(distance_to_curves(curves, bright) <= tube))


def _check_grids(a, b):
    if not a.grid.same_shape(b.grid):
        raise GridMismatchError("images live on different grids")


def normalized_cross_correlation(a, b):
    _check_grids(a, b)
    x = a.values - a.values.mean()
    y = b.values - b.values.mean()
    return float(np.sum(x * y) / np.sqrt(np.sum(x * x) * np.sum(y * y)))


def normalized_max_difference(a, b):
    """max |a/max|a| - b/max|b||."""
    _check_grids(a, b)
    return float(np.max(np.abs(a.normalized() - b.normalized())))
