"""SSIM quality maps and the pooled mean score.

The luminance term compares local means; the combined contrast-structure term
compares local variances and covariance (the common C3 = C2/2 choice folds
contrast and structure into one ratio). The per-window quality value is their
product, and has a unique maximum of 1 at identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .config import SsimConfig
from .errors import EmptyMap
from .frames import PlaneLike, QualityMap
from .stats import LocalStatsMaps, local_statistics


@dataclass(frozen=True)
class SsimTermMaps:
    """Luminance, contrast-structure, and combined quality maps, co-registered."""

    l_map: QualityMap
    cs_map: QualityMap
    q_map: QualityMap


def term_maps_from_stats(stats: LocalStatsMaps, c1: float, c2: float) -> SsimTermMaps:
    """Build the l / cs / q maps from local statistics grids.

    l = (2 mu1 mu2 + C1) / (mu1^2 + mu2^2 + C1)
    cs = (2 cov + C2) / (var1 + var2 + C2)
    q = l * cs
    """
    mu1, mu2 = stats.mu1, stats.mu2
    l = (2.0 * mu1 * mu2 + c1) / (mu1 * mu1 + mu2 * mu2 + c1)
    cs = (2.0 * stats.cov + c2) / (stats.var1 + stats.var2 + c2)
    geometry = dict(stride=stats.stride, source_dims=stats.source_dims)
    return SsimTermMaps(
        l_map=QualityMap(l, **geometry),
        cs_map=QualityMap(cs, **geometry),
        q_map=QualityMap(l * cs, **geometry),
    )


def ssim_map(ref: PlaneLike, dist: PlaneLike, config: SsimConfig = SsimConfig()) -> SsimTermMaps:
    """SSIM term maps of a frame pair under the given configuration."""
    stats = local_statistics(ref, dist, config.window, config.engine)
    return term_maps_from_stats(stats, config.c1, config.c2)


def mssim(maps: Union[SsimTermMaps, QualityMap, np.ndarray]) -> float:
    """Mean of the quality map: the conventional single score per image."""
    if isinstance(maps, SsimTermMaps):
        values = maps.q_map.values
    elif isinstance(maps, QualityMap):
        values = maps.values
    else:
        values = np.asarray(maps, dtype=np.float64)
    if values.size == 0:
        raise EmptyMap("cannot average an empty quality map")
    return float(values.mean())


def ssim_score(ref: PlaneLike, dist: PlaneLike, config: SsimConfig = SsimConfig()) -> float:
    """Convenience wrapper: mean SSIM of a frame pair."""
    return mssim(ssim_map(ref, dist, config))


def weber_luminance_term(mu1: float, luminance_shift: float, c1_over_mu1sq: float) -> float:
    """Luminance term as a function of the relative luminance change.

    For mu2 = mu1 * (1 + shift) the luminance ratio reduces to
    (2 (1 + shift) + c) / (1 + (1 + shift)^2 + c) with c = C1 / mu1^2, which
    no longer depends on mu1 when c -> 0. Serves as the closed-form oracle
    for luminance-masking behavior.
    """
    if mu1 <= 0:
        raise ValueError(f"mu1 must be positive, got {mu1}")
    lam = luminance_shift
    c = c1_over_mu1sq
    return (2.0 * (1.0 + lam) + c) / (1.0 + (1.0 + lam) ** 2 + c)


def weber_contrast_term(contrast_shift: float, c2_over_var1: float) -> float:
    """Contrast-masking analogue: the c term under sigma2 = (1 + shift) sigma1."""
    s = contrast_shift
    c = c2_over_var1
    return (2.0 * (1.0 + s) + c) / (1.0 + (1.0 + s) ** 2 + c)
