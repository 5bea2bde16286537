"""Spatio-temporal SSIM over k x k x Kt neighborhoods with rolling sums.

Local statistics extend to a temporal depth of Kt frames. Keeping rolling
per-pixel sums of the last Kt frames (subtract the frame leaving the window,
add the one entering) makes the per-frame cost independent of Kt; spatial
window sums then come from integral images over the five temporal-sum planes.
With Kt = 1 everything reduces exactly to frame-wise SSIM.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator, Optional

import numpy as np

from .config import MultiscaleSpec, SsimConfig, WindowSpec
from .errors import (
    DimensionMismatch,
    GaussianNotSupported3D,
    ValidationError,
)
from .frames import PlaneLike, ScoreSeries, plane_data, validate_frame_pair
from .multiscale import combine_scale_scores, dyadic_downsample
from .ssim import SsimTermMaps, mssim, term_maps_from_stats
from .stats import LocalStatsMaps, _grid_window_sums, _sat, stats_from_sums

#: Rolling sums are rebuilt from the buffered frames this often, bounding
#: floating-point drift from the subtract/add recursion.
REFRESH_INTERVAL = 300


class RollingVolume:
    """Ring buffer of the last Kt frame pairs plus their five running sums.

    Single-owner and sequential: push frames in temporal order, then ask for
    maps. Before Kt frames arrive, statistics cover only the buffered depth.
    """

    def __init__(self, kt: int, refresh_interval: int = REFRESH_INTERVAL):
        if not isinstance(kt, int) or kt < 1:
            raise ValidationError(f"temporal window must be an integer >= 1, got {kt!r}")
        self.kt = kt
        self.refresh_interval = refresh_interval
        self._buffer: deque[tuple[np.ndarray, np.ndarray]] = deque()
        self._sums: Optional[list[np.ndarray]] = None  # I1, I2, I1^2, I2^2, I1*I2
        self._pushes = 0
        self._dims: Optional[tuple[int, int]] = None

    @property
    def depth(self) -> int:
        """Number of frame pairs currently buffered (= min(pushes, Kt))."""
        return len(self._buffer)

    @property
    def buffer_planes(self) -> tuple[int, int]:
        """(buffered frame pairs, running sum planes) for memory accounting."""
        return len(self._buffer), 0 if self._sums is None else len(self._sums)

    def push(self, ref: PlaneLike, dist: PlaneLike) -> "RollingVolume":
        """Advance the temporal window by one frame pair."""
        ref, dist = validate_frame_pair(ref, dist)
        a = np.asarray(plane_data(ref), dtype=np.float64)
        b = np.asarray(plane_data(dist), dtype=np.float64)
        if self._dims is None:
            self._dims = a.shape
        elif a.shape != self._dims:
            raise DimensionMismatch(
                f"frame {a.shape[::-1]} pushed into a {self._dims[::-1]} volume"
            )
        terms = [a, b, a * a, b * b, a * b]
        if self._sums is None or self.kt == 1:
            # Kt = 1 degenerates to the newest frame exactly; no recursion.
            self._sums = [t.copy() for t in terms]
        elif len(self._buffer) == self.kt:
            oldest = self._buffer[0]
            old_terms = [
                oldest[0],
                oldest[1],
                oldest[0] * oldest[0],
                oldest[1] * oldest[1],
                oldest[0] * oldest[1],
            ]
            # T(k) = T(k-1) - I(k-Kt) + I(k), per plane.
            for s, new, old in zip(self._sums, terms, old_terms):
                s -= old
                s += new
        else:
            for s, new in zip(self._sums, terms):
                s += new
        if len(self._buffer) == self.kt:
            self._buffer.popleft()
        self._buffer.append((a, b))
        self._pushes += 1
        if self.refresh_interval and self._pushes % self.refresh_interval == 0:
            self._refresh()
        return self

    def _refresh(self) -> None:
        """Recompute the running sums directly from the buffer."""
        self._sums = self.direct_sums()

    def direct_sums(self) -> list[np.ndarray]:
        """Sums recomputed from scratch over the buffered frames (drift oracle)."""
        if not self._buffer:
            raise ValidationError("no frames buffered")
        sums = [np.zeros(self._dims) for _ in range(5)]
        for a, b in self._buffer:
            sums[0] += a
            sums[1] += b
            sums[2] += a * a
            sums[3] += b * b
            sums[4] += a * b
        return sums

    def temporal_sums(self) -> list[np.ndarray]:
        """The five rolling sum planes (I1, I2, I1^2, I2^2, I1*I2 over the buffer)."""
        if self._sums is None:
            raise ValidationError("no frames buffered")
        return list(self._sums)

    def local_statistics(self, window: WindowSpec) -> LocalStatsMaps:
        """Spatio-temporal local statistics over k x k x depth neighborhoods."""
        if window.shape != "rect":
            raise GaussianNotSupported3D("3-D statistics support rectangular windows only")
        sums = self.temporal_sums()
        h, w = self._dims
        k, stride = window.k, window.stride
        if k > h or k > w:
            raise ValidationError(f"{k}x{k} window does not fit a {w}x{h} frame")
        tables = [_sat(s) for s in sums]
        grids = [_grid_window_sums(t, k, stride) for t in tables]
        area = float(k * k * self.depth)
        mu1, mu2, var1, var2, cov = stats_from_sums(*grids, area=area)
        return LocalStatsMaps(
            mu1=mu1, mu2=mu2, var1=var1, var2=var2, cov=cov,
            window_size=k, stride=stride, source_dims=(h, w),
        )


def push_frame(vol: RollingVolume, ref: PlaneLike, dist: PlaneLike) -> RollingVolume:
    """Functional alias for :meth:`RollingVolume.push`."""
    return vol.push(ref, dist)


def ssim3d_map(vol: RollingVolume, window: WindowSpec, config: SsimConfig = SsimConfig()) -> SsimTermMaps:
    """SSIM term maps over the volume's current temporal window."""
    stats = vol.local_statistics(window)
    return term_maps_from_stats(stats, config.c1, config.c2)


def _as_plane_pairs(
    ref_frames: Iterable[PlaneLike], dist_frames: Iterable[PlaneLike]
) -> Iterator[tuple[PlaneLike, PlaneLike]]:
    for ref, dist in zip(ref_frames, dist_frames):
        yield validate_frame_pair(ref, dist)


def ssim3d_series(
    ref_frames: Iterable[PlaneLike],
    dist_frames: Iterable[PlaneLike],
    kt: int,
    config: SsimConfig = SsimConfig(),
) -> ScoreSeries:
    """Frame-by-frame mean 3-D SSIM of two aligned luma streams."""
    vol = RollingVolume(kt)
    scores = []
    for ref, dist in _as_plane_pairs(ref_frames, dist_frames):
        vol.push(ref, dist)
        scores.append(mssim(ssim3d_map(vol, config.window, config)))
    return ScoreSeries(np.asarray(scores))


def msssim3d(
    ref_frames: Iterable[PlaneLike],
    dist_frames: Iterable[PlaneLike],
    kt: int,
    spec: MultiscaleSpec | None = None,
    config: SsimConfig = SsimConfig(),
) -> ScoreSeries:
    """Multiscale 3-D SSIM: one rolling volume per spatial scale.

    Each incoming frame is dyadically downsampled per scale before being
    pushed; per-frame scale scores (cs means, l*cs at the coarsest) combine
    per the multiscale spec.
    """
    if spec is None:
        spec = MultiscaleSpec.product()
    if not spec.enabled:
        raise ValidationError("multiscale aggregation is off; use ssim3d_series instead")
    volumes = [RollingVolume(kt) for _ in range(spec.levels)]
    scores = []
    for ref, dist in _as_plane_pairs(ref_frames, dist_frames):
        cur_ref, cur_dist = ref, dist
        per_scale = []
        for level in range(spec.levels):
            if level > 0:
                cur_ref = dyadic_downsample(cur_ref)
                cur_dist = dyadic_downsample(cur_dist)
            volumes[level].push(cur_ref, cur_dist)
            maps = ssim3d_map(volumes[level], config.window, config)
            if level == spec.levels - 1:
                per_scale.append(mssim(maps.q_map))
            else:
                per_scale.append(mssim(maps.cs_map))
        scores.append(combine_scale_scores(per_scale, spec))
    return ScoreSeries(np.asarray(scores))
