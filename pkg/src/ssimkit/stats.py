"""Windowed local statistics (means, variances, covariance) for image pairs.

Two engines produce identical grids: a direct one that slides the window and
accumulates weighted sums (any window shape), and an integral-image one that
turns rectangular-window sums into four table lookups, dropping the cost from
O(MN k^2) to O(MN). Only fully interior windows are evaluated (valid region,
no padding); the grid is sampled every ``stride`` pixels from anchor (0, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import WindowSpec, default_gaussian_size
from .errors import (
    EngineShapeMismatch,
    NonPositiveSigma,
    ValidationError,
    WindowLargerThanImage,
    WindowOutOfBounds,
)
from .frames import PlaneLike, plane_data, validate_frame_pair

TABLE_IDS = ("sum1", "sum2", "sq1", "sq2", "prod")


def gaussian_kernel(sigma: float, k: int | None = None) -> np.ndarray:
    """Separable Gaussian sampled at integer offsets from center, sum 1.

    Size defaults to 2*ceil(3*sigma) + 1.
    """
    if sigma <= 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
    if k is None:
        k = default_gaussian_size(sigma)
    if k < 1:
        raise ValidationError(f"kernel size must be >= 1, got {k}")
    coords = np.arange(k, dtype=np.float64) - (k - 1) / 2.0
    g = np.exp(-(coords * coords) / (2.0 * sigma * sigma))
    kern = np.outer(g, g)
    return kern / kern.sum()


def rect_equivalent(sigma: float, mode: str) -> int:
    """Rectangular window size equivalent to a Gaussian of the given sigma.

    ``same-size`` keeps the Gaussian's default size; ``same-variance`` matches
    second moments (half-width ceil(sigma*sqrt(3))); ``same-bandwidth``
    matches the 3 dB bandwidths (half-width ceil(1.602*sigma)). Returns the
    full window size 2K + 1.
    """
    if sigma <= 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
    if mode == "same-size":
        return default_gaussian_size(sigma)
    if mode == "same-variance":
        return 2 * math.ceil(sigma * math.sqrt(3.0)) + 1
    if mode == "same-bandwidth":
        return 2 * math.ceil(1.602 * sigma) + 1
    raise ValidationError(f"unknown equivalence mode {mode!r}")


def _sat(values: np.ndarray) -> np.ndarray:
    """Summed-area table with a zero first row/column."""
    h, w = values.shape
    out = np.zeros((h + 1, w + 1), dtype=values.dtype)
    out[1:, 1:] = values.cumsum(axis=0).cumsum(axis=1)
    return out


@dataclass(frozen=True)
class IntegralSet:
    """Five summed-area tables for a frame pair: I1, I2, I1^2, I2^2, I1*I2.

    Tables carry a zero border row/column; integer input stays in int64 so
    every window sum is exact.
    """

    sum1: np.ndarray
    sum2: np.ndarray
    sq1: np.ndarray
    sq2: np.ndarray
    prod: np.ndarray
    height: int
    width: int

    def table(self, which: str) -> np.ndarray:
        if which not in TABLE_IDS:
            raise ValidationError(f"unknown table {which!r}, expected one of {TABLE_IDS}")
        return getattr(self, which)


def build_integral_set(ref: PlaneLike, dist: PlaneLike) -> IntegralSet:
    """Build the five summed-area tables for a validated frame pair."""
    ref, dist = validate_frame_pair(ref, dist)
    a = plane_data(ref)
    b = plane_data(dist)
    if a.dtype.kind in "ui" and b.dtype.kind in "ui":
        a = a.astype(np.int64)
        b = b.astype(np.int64)
    else:
        a = a.astype(np.float64)
        b = b.astype(np.float64)
    h, w = a.shape
    return IntegralSet(
        sum1=_sat(a),
        sum2=_sat(b),
        sq1=_sat(a * a),
        sq2=_sat(b * b),
        prod=_sat(a * b),
        height=h,
        width=w,
    )


def window_sum(iset: IntegralSet, which: str, i: int, j: int, k: int):
    """Sum of one k x k window anchored at row i, column j, in O(1)."""
    t = iset.table(which)
    if k < 1 or i < 0 or j < 0 or i + k > iset.height or j + k > iset.width:
        raise WindowOutOfBounds(
            f"{k}x{k} window at ({i}, {j}) leaves the {iset.width}x{iset.height} valid region"
        )
    # The zero border shifts (i-1, j-1) of the four-corner rule to (i, j).
    return (t[i + k, j + k] + t[i, j] - t[i + k, j] - t[i, j + k]).item()


def _grid_window_sums(table: np.ndarray, k: int, stride: int) -> np.ndarray:
    """Window sums for every valid anchor on the stride grid.

    Strided basic slicing keeps the four corner grids as views, so this costs
    three elementwise passes over the output grid.
    """
    h, w = table.shape[0] - 1, table.shape[1] - 1
    top = slice(0, h - k + 1, stride)
    left = slice(0, w - k + 1, stride)
    bottom = slice(k, h + 1, stride)
    right = slice(k, w + 1, stride)
    return (table[bottom, right] + table[top, left]) - (table[bottom, left] + table[top, right])


def _sliding_raw_sums(values: np.ndarray, k: int, stride: int) -> np.ndarray:
    """Direct windowed sums: accumulate the k^2 shifted slices."""
    h, w = values.shape
    gh, gw = h - k + 1, w - k + 1
    out = np.zeros(((gh - 1) // stride + 1, (gw - 1) // stride + 1), dtype=np.float64)
    for m in range(k):
        for n in range(k):
            out += values[m : m + gh : stride, n : n + gw : stride]
    return out


def _sliding_weighted_sums(values: np.ndarray, weights: np.ndarray, stride: int) -> np.ndarray:
    """Direct weighted windowed sums for an arbitrary weight grid."""
    k = weights.shape[0]
    h, w = values.shape
    gh, gw = h - k + 1, w - k + 1
    out = np.zeros(((gh - 1) // stride + 1, (gw - 1) // stride + 1), dtype=np.float64)
    for m in range(k):
        for n in range(k):
            out += weights[m, n] * values[m : m + gh : stride, n : n + gw : stride]
    return out


@dataclass(frozen=True)
class LocalStatsMaps:
    """Co-registered grids of mu1, mu2, var1, var2, cov for a frame pair."""

    mu1: np.ndarray
    mu2: np.ndarray
    var1: np.ndarray
    var2: np.ndarray
    cov: np.ndarray
    window_size: int
    stride: int
    source_dims: tuple[int, int]  # (height, width)

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.mu1.shape


def stats_from_sums(
    s1: np.ndarray,
    s2: np.ndarray,
    q1: np.ndarray,
    q2: np.ndarray,
    p12: np.ndarray,
    area: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Means/variances/covariance from raw window sums over ``area`` samples.

    Variances use E[X^2] - E[X]^2 with negative floating residue clamped to 0.
    """
    mu1 = s1 / area
    mu2 = s2 / area
    var1 = np.maximum(q1 / area - mu1 * mu1, 0.0)
    var2 = np.maximum(q2 / area - mu2 * mu2, 0.0)
    cov = p12 / area - mu1 * mu2
    return mu1, mu2, var1, var2, cov


def local_statistics(
    ref: PlaneLike,
    dist: PlaneLike,
    window: WindowSpec,
    engine: str = "auto",
) -> LocalStatsMaps:
    """Windowed local statistics of a frame pair under a window spec.

    ``engine`` selects the computation route: ``integral`` (rectangular
    windows only), ``naive`` (any shape), or ``auto`` (integral when the
    window is rectangular). Both routes produce the same grids.
    """
    ref, dist = validate_frame_pair(ref, dist)
    a = plane_data(ref)
    h, w = a.shape
    k, stride = window.k, window.stride
    if k > h or k > w:
        raise WindowLargerThanImage(f"{k}x{k} window does not fit a {w}x{h} image")
    if engine == "auto":
        engine = "integral" if window.shape == "rect" else "naive"
    if engine not in ("naive", "integral"):
        raise ValidationError(f"unknown engine {engine!r}")
    if engine == "integral" and window.shape != "rect":
        raise EngineShapeMismatch("the integral engine supports rectangular windows only")

    if engine == "integral":
        iset = build_integral_set(ref, dist)
        sums = [_grid_window_sums(iset.table(t), k, stride).astype(np.float64) for t in TABLE_IDS]
        mu1, mu2, var1, var2, cov = stats_from_sums(*sums, area=float(k * k))
    elif window.shape == "rect":
        fa = np.asarray(a, dtype=np.float64)
        fb = np.asarray(plane_data(dist), dtype=np.float64)
        sums = [
            _sliding_raw_sums(fa, k, stride),
            _sliding_raw_sums(fb, k, stride),
            _sliding_raw_sums(fa * fa, k, stride),
            _sliding_raw_sums(fb * fb, k, stride),
            _sliding_raw_sums(fa * fb, k, stride),
        ]
        mu1, mu2, var1, var2, cov = stats_from_sums(*sums, area=float(k * k))
    else:
        kern = gaussian_kernel(window.sigma, k)
        fa = np.asarray(a, dtype=np.float64)
        fb = np.asarray(plane_data(dist), dtype=np.float64)
        sums = [
            _sliding_weighted_sums(fa, kern, stride),
            _sliding_weighted_sums(fb, kern, stride),
            _sliding_weighted_sums(fa * fa, kern, stride),
            _sliding_weighted_sums(fb * fb, kern, stride),
            _sliding_weighted_sums(fa * fb, kern, stride),
        ]
        mu1, mu2, var1, var2, cov = stats_from_sums(*sums, area=1.0)

    return LocalStatsMaps(
        mu1=mu1, mu2=mu2, var1=var1, var2=var2, cov=cov,
        window_size=k, stride=stride, source_dims=(h, w),
    )
