"""Resolution/viewing adaptation and scaled-score prediction.

Scale factors: the legacy 256-line rule, its viewing-distance generalization
(calibrated so D/H = 3.0 reproduces the legacy rule), and the viewing-geometry
transform. Scaled-score prediction estimates the rendering-resolution mean
score from compression-resolution quality maps, either by periodic-reference
histogram matching or by the learning-free product of the scaling and
compression scores.
"""

from __future__ import annotations

import math
from typing import Optional, Protocol, Union

import numpy as np

from .config import ScalePolicy
from .errors import NoReferenceYet, ValidationError
from .frames import LumaPlane, PlaneLike, QualityMap, plane_data


def round_half_away(x: float) -> int:
    """Round with halves away from zero (so 4.5 -> 5, not banker's 4)."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def legacy_scale_factor(width: int, height: int, rounding: str = "round") -> int:
    """The 256-rule: max(1, round(min(W, H) / 256))."""
    if width <= 0 or height <= 0:
        raise ValidationError("dimensions must be positive")
    ratio = min(width, height) / 256.0
    scaled = math.ceil(ratio) if rounding == "ceil" else round_half_away(ratio)
    return max(1, scaled)


def enhanced_scale_factor(width: int, height: int, d_over_h: float, rounding: str = "round") -> int:
    """Viewing-distance-aware 256-rule: max(1, round((min/256) * (3 / (D/H)))).

    Calibrated so the default TV-viewing ratio D/H = 3.0 reproduces the
    legacy factor; larger viewing distances yield smaller factors.
    """
    if width <= 0 or height <= 0 or d_over_h <= 0:
        raise ValidationError("dimensions and d/h ratio must be positive")
    ratio = (min(width, height) / 256.0) * (3.0 / d_over_h)
    scaled = math.ceil(ratio) if rounding == "ceil" else round_half_away(ratio)
    return max(1, scaled)


def viewing_geometry(display_height: float, distance: float, lines: int) -> tuple[float, float]:
    """Full-screen viewing angle (degrees) and the pixel-spacing frequency.

    alpha = 2*arctan(H / 2D); f_max = L / (2*alpha) cycles/degree for L lines.
    """
    if display_height <= 0 or distance <= 0 or lines <= 0:
        raise ValidationError("geometry inputs must be positive")
    alpha = 2.0 * math.degrees(math.atan(display_height / (2.0 * distance)))
    f_max = lines / (2.0 * alpha)
    return alpha, f_max


def sast_factor(
    display_height: float,
    display_width: float,
    distance: float,
    theta_h: float = 40.0,
    theta_w: float = 50.0,
) -> float:
    """Self-adaptive scale transform factor, clamped below at 1.

    Z = sqrt(H_I * W_I / (4 tan(theta_H/2) tan(theta_W/2) D^2)) with the
    common 40/50 degree viewing angles.
    """
    if min(display_height, display_width, distance, theta_h, theta_w) <= 0:
        raise ValidationError("geometry inputs must be positive")
    denom = 4.0 * math.tan(math.radians(theta_h) / 2.0) * math.tan(math.radians(theta_w) / 2.0)
    z = math.sqrt((display_height / distance) * (display_width / distance) / denom)
    return max(1.0, z)


def policy_factor(policy: ScalePolicy, width: int, height: int) -> int:
    """Integer downsampling factor a scale policy prescribes for a frame."""
    if policy.kind == "none":
        return 1
    if policy.kind == "legacy":
        return legacy_scale_factor(width, height, policy.rounding)
    if policy.kind == "dh":
        return enhanced_scale_factor(width, height, policy.d_over_h, policy.rounding)
    z = sast_factor(height, width, policy.distance, policy.theta_h, policy.theta_w)
    return max(1, round_half_away(z))


def box_downsample(plane: PlaneLike, factor: int) -> PlaneLike:
    """Block-average by an integer factor; trailing partial blocks average
    over their actual size. Factor 1 is the identity."""
    if not isinstance(factor, int) or factor < 1:
        raise ValidationError(f"factor must be an integer >= 1, got {factor!r}")
    if factor == 1:
        return plane
    arr = np.asarray(plane_data(plane), dtype=np.float64)
    h, w = arr.shape
    row_edges = np.arange(0, h, factor)
    col_edges = np.arange(0, w, factor)
    sums = np.add.reduceat(np.add.reduceat(arr, row_edges, axis=0), col_edges, axis=1)
    row_counts = np.minimum(row_edges + factor, h) - row_edges
    col_counts = np.minimum(col_edges + factor, w) - col_edges
    out = sums / np.outer(row_counts, col_counts)
    if isinstance(plane, LumaPlane):
        return LumaPlane(out, plane.bit_depth)
    return out


def scaled_ssim_product(f_scale: float, f_comp: float) -> float:
    """Learning-free prediction: product of the scaling and compression scores."""
    for name, v in (("f_scale", f_scale), ("f_comp", f_comp)):
        if not -1.0 <= v <= 1.0:
            raise ValidationError(f"{name} must lie in [-1, 1], got {v}")
    return f_scale * f_comp


class ScaledScorePredictor(Protocol):
    """Interface external regressors can implement to predict rendered scores."""

    def predict(
        self,
        f_scale: float,
        f_comp: float,
        alpha: Optional[float] = None,
        qp: Optional[float] = None,
    ) -> float: ...


class ProductPredictor:
    """The baseline predictor: ignores alpha/qp and multiplies the features."""

    def predict(
        self,
        f_scale: float,
        f_comp: float,
        alpha: Optional[float] = None,
        qp: Optional[float] = None,
    ) -> float:
        return scaled_ssim_product(f_scale, f_comp)


def compute_ratio(k: int, alpha: float, beta: float, gamma: float) -> float:
    """Compute-cost ratio of periodic-reference prediction vs full scoring.

    (1 - 1/k) * alpha^2 * (1 + beta + gamma) + (1/k) * (1 + beta); tends to
    alpha^2 * (1 + beta + gamma) as the refresh interval k grows.
    """
    if k < 1:
        raise ValidationError("refresh interval must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie in (0, 1)")
    return (1.0 - 1.0 / k) * alpha * alpha * (1.0 + beta + gamma) + (1.0 / k) * (1.0 + beta)


class HistogramMatcher:
    """Predicts rendering-resolution mean scores by histogram matching.

    Every ``refresh_interval``-th call must supply the true rendering-scale
    map, which becomes the reference histogram (and returns its exact mean).
    In between, each compression-scale map value is pushed through the
    monotone transform F_ref^-1(F_comp(.)) built from binned histograms, and
    the mean of the transformed values is returned. Mapping happens at each
    comp bin's mid-mass, and the transform is anchored by the exact reference
    mean so matching distributions reproduce it bit-for-bit.
    """

    def __init__(self, refresh_interval: int = 5, bins: int = 201, value_range: tuple[float, float] = (-1.0, 1.0)):
        if not isinstance(refresh_interval, int) or refresh_interval < 1:
            raise ValidationError("refresh interval must be an integer >= 1")
        if bins < 2:
            raise ValidationError("need at least 2 histogram bins")
        if value_range[1] <= value_range[0]:
            raise ValidationError("empty value range")
        self.refresh_interval = refresh_interval
        self.bins = bins
        self.lo, self.hi = float(value_range[0]), float(value_range[1])
        self._edges = np.linspace(self.lo, self.hi, bins + 1)
        self._counts: Optional[np.ndarray] = None
        self._ref_mean = 0.0
        self._ref_binned_mean = 0.0
        self._calls = 0

    @property
    def calls(self) -> int:
        return self._calls

    def _histogram(self, values: np.ndarray) -> np.ndarray:
        counts, _ = np.histogram(np.clip(values, self.lo, self.hi), bins=self._edges)
        return counts.astype(np.float64)

    def _binned_mean(self, counts: np.ndarray) -> float:
        centers = (self._edges[:-1] + self._edges[1:]) / 2.0
        return float((counts * centers).sum() / counts.sum())

    def _ref_quantile(self, mass: np.ndarray) -> np.ndarray:
        """Inverse of the piecewise-linear binned reference CDF at mass points.

        For 0 < mass < total the first bin whose cumulative count exceeds the
        mass is always occupied (empty bins share their predecessor's
        cumulative count), so interpolation within it is well defined.
        """
        cum = np.cumsum(self._counts)
        idx = np.minimum(np.searchsorted(cum, mass, side="right"), self.bins - 1)
        before = cum[idx] - self._counts[idx]
        denom = np.where(self._counts[idx] > 0, self._counts[idx], 1.0)
        frac = np.clip((mass - before) / denom, 0.0, 1.0)
        width = self._edges[1] - self._edges[0]
        return self._edges[idx] + frac * width

    def predict(
        self,
        comp_map: Union[QualityMap, np.ndarray],
        true_map: Optional[Union[QualityMap, np.ndarray]] = None,
    ) -> float:
        """Predicted mean rendering-scale score for one frame."""
        comp = comp_map.values if isinstance(comp_map, QualityMap) else np.asarray(comp_map, dtype=np.float64)
        comp = comp.reshape(-1)
        refresh_due = self._calls % self.refresh_interval == 0
        self._calls += 1
        if refresh_due:
            if true_map is None:
                raise NoReferenceYet(
                    "this call must supply the rendering-scale map to (re)build the reference"
                )
            true = true_map.values if isinstance(true_map, QualityMap) else np.asarray(true_map, dtype=np.float64)
            true = true.reshape(-1)
            self._counts = self._histogram(true)
            self._ref_mean = float(true.mean())
            self._ref_binned_mean = self._binned_mean(self._counts)
            return self._ref_mean
        if self._counts is None:
            raise NoReferenceYet("no reference map has been supplied yet")
        counts = self._histogram(comp)
        n = counts.sum()
        occupied = np.nonzero(counts)[0]
        cum = np.cumsum(counts)
        mid_mass = (cum[occupied] - counts[occupied] / 2.0) / n * self._counts.sum()
        mapped = self._ref_quantile(mid_mass)
        shift = self._ref_mean - self._ref_binned_mean
        return float(((counts[occupied] * mapped).sum() / n) + shift)

    def transform(self, comp_map: Union[QualityMap, np.ndarray]) -> np.ndarray:
        """Per-value monotone transform (diagnostic; predict() averages it)."""
        if self._counts is None:
            raise NoReferenceYet("no reference map has been supplied yet")
        comp = comp_map.values if isinstance(comp_map, QualityMap) else np.asarray(comp_map, dtype=np.float64)
        flat = comp.reshape(-1)
        counts = self._histogram(flat)
        n = counts.sum()
        cum = np.cumsum(counts)
        bin_idx = np.clip(np.searchsorted(self._edges, flat, side="right") - 1, 0, self.bins - 1)
        mid_mass = (cum[bin_idx] - counts[bin_idx] / 2.0) / n * self._counts.sum()
        shift = self._ref_mean - self._ref_binned_mean
        return (self._ref_quantile(mid_mass) + shift).reshape(comp.shape)
