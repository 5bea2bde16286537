"""Spatial pooling of quality maps and temporal pooling of score series.

Spatial poolers collapse one quality map to a frame score; temporal poolers
collapse a per-frame score series to a sequence score. Minkowski-style
operators work on dissimilarity (1 - Q) since local quality can be negative;
geometric/harmonic means are temporal-only and clamp their inputs at a small
positive floor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import (
    EmptyMap,
    EmptySeries,
    MissingLumaForLW,
    ValidationError,
    ZeroMeanCoV,
)
from .frames import QualityMap, ScoreSeries

#: Floor applied to geometric/harmonic mean inputs.
MEAN_EPS = 1e-6

SPATIAL_KINDS = ("am", "cov", "md", "fns", "dw", "mink", "lw", "pp")
TEMPORAL_KINDS = (
    "am", "gm", "hm", "median", "cov",
    "wam", "wgm", "whm", "wcov",
    "md", "fns", "dw", "mink", "pp",
)


@dataclass(frozen=True)
class SpatialPooler:
    kind: str
    p: float = 1.0        # md / dw / mink exponent
    o: float = 1.0        # md outer exponent
    a: float = 0.0        # lw lower luminance limit
    b: float = 0.0        # lw ramp length
    ps: float = 6.0       # pp percentile of lowest values
    rs: float = 1.0       # pp down-weighting divisor

    def __post_init__(self):
        if self.kind not in SPATIAL_KINDS:
            raise ValidationError(f"unknown spatial pooler {self.kind!r}")
        if self.kind in ("md", "dw", "mink") and self.p <= 0:
            raise ValidationError(f"{self.kind} pooling needs p > 0")
        if self.kind == "md" and self.o <= 0:
            raise ValidationError("md pooling needs o > 0")
        if self.kind == "lw" and self.b < 0:
            raise ValidationError("lw ramp length must be >= 0")
        if self.kind == "pp":
            if not 0.0 <= self.ps <= 100.0:
                raise ValidationError("pp percentile must be in [0, 100]")
            if self.rs < 1:
                raise ValidationError("pp divisor must be >= 1")

    def selector(self) -> str:
        return _format_selector(self.kind, self)


@dataclass(frozen=True)
class TemporalPooler:
    kind: str
    k: int = 1            # window length for windowed forms
    p: float = 1.0
    o: float = 1.0
    ps: float = 6.0
    rs: float = 1.0

    def __post_init__(self):
        if self.kind not in TEMPORAL_KINDS:
            raise ValidationError(f"unknown temporal pooler {self.kind!r}")
        if self.kind.startswith("w") and (not isinstance(self.k, int) or self.k < 1):
            raise ValidationError("windowed pooling needs an integer window k >= 1")
        if self.kind in ("md", "dw", "mink") and self.p <= 0:
            raise ValidationError(f"{self.kind} pooling needs p > 0")
        if self.kind == "md" and self.o <= 0:
            raise ValidationError("md pooling needs o > 0")
        if self.kind == "pp":
            if not 0.0 <= self.ps <= 100.0:
                raise ValidationError("pp percentile must be in [0, 100]")
            if self.rs < 1:
                raise ValidationError("pp divisor must be >= 1")

    def selector(self) -> str:
        return _format_selector(self.kind, self)


def _format_selector(kind: str, pool) -> str:
    if kind == "md":
        return f"md:p={pool.p:g},o={pool.o:g}"
    if kind in ("dw", "mink"):
        return f"{kind}:p={pool.p:g}"
    if kind == "lw":
        return f"lw:a={pool.a:g},b={pool.b:g}"
    if kind == "pp":
        return f"pp:ps={pool.ps:g},rs={pool.rs:g}"
    if kind in ("wam", "wgm", "whm", "wcov"):
        return f"{kind}:k={pool.k}"
    return kind


def parse_spatial(text: str) -> SpatialPooler:
    """Parse a spatial pooler selector, e.g. ``cov`` or ``md:p=2,o=3``."""
    from .config import split_selector, _num

    name, pos, kw = split_selector(text)
    if name in ("am", "cov", "fns"):
        return SpatialPooler(name)
    if name == "md":
        return SpatialPooler("md", p=_num(kw.get("p", pos[0] if pos else "2"), "md"),
                             o=_num(kw.get("o", pos[1] if len(pos) > 1 else "1"), "md"))
    if name in ("dw", "mink"):
        return SpatialPooler(name, p=_num(kw.get("p", pos[0] if pos else "1"), name))
    if name == "lw":
        return SpatialPooler("lw", a=_num(kw.get("a", "0"), "lw"), b=_num(kw.get("b", "0"), "lw"))
    if name == "pp":
        ps = kw.get("ps", kw.get("p", pos[0] if pos else "6"))
        rs = kw.get("rs", kw.get("r", pos[1] if len(pos) > 1 else "1"))
        return SpatialPooler("pp", ps=_num(ps, "pp"), rs=_num(rs, "pp"))
    raise ValidationError(f"unknown spatial pooler {name!r}")


def parse_temporal(text: str) -> TemporalPooler:
    """Parse a temporal pooler selector, e.g. ``wam:k=3`` or ``pp:ps=6,rs=4000``."""
    from .config import split_selector, _num, _intval

    name, pos, kw = split_selector(text)
    if name in ("am", "gm", "hm", "median", "cov", "fns"):
        return TemporalPooler(name)
    if name in ("wam", "wgm", "whm", "wcov"):
        k = kw.get("k", pos[0] if pos else None)
        if k is None:
            raise ValidationError(f"{name} pooling needs a window, e.g. {name}:k=10")
        return TemporalPooler(name, k=_intval(k, name))
    if name == "md":
        return TemporalPooler("md", p=_num(kw.get("p", pos[0] if pos else "2"), "md"),
                              o=_num(kw.get("o", pos[1] if len(pos) > 1 else "1"), "md"))
    if name in ("dw", "mink"):
        return TemporalPooler(name, p=_num(kw.get("p", pos[0] if pos else "1"), name))
    if name == "pp":
        ps = kw.get("pt", kw.get("ps", pos[0] if pos else "6"))
        rs = kw.get("rt", kw.get("rs", pos[1] if len(pos) > 1 else "1"))
        return TemporalPooler("pp", ps=_num(ps, "pp"), rs=_num(rs, "pp"))
    raise ValidationError(f"unknown temporal pooler {name!r}")


# ---------------------------------------------------------------------------
# base statistics shared by spatial and temporal paths
# ---------------------------------------------------------------------------

def _cov_stat(v: np.ndarray) -> float:
    mean = v.mean()
    if mean == 0.0:
        raise ZeroMeanCoV("coefficient of variation is undefined for a zero-mean input")
    return float(v.std() / mean)


def _md_stat(v: np.ndarray, p: float, o: float) -> float:
    dev = np.abs(v - v.mean()) ** p
    return float((dev.mean() ** (1.0 / p)) ** o)


def _fns_stat(v: np.ndarray) -> float:
    q1, med, q3 = np.percentile(v, [25.0, 50.0, 75.0])
    return float((v.min() + q1 + med + q3 + v.max()) / 5.0)


def _dw_stat(v: np.ndarray, p: float) -> float:
    w = (1.0 - v) ** p
    total = w.sum()
    if total == 0.0:
        return float(v.mean())  # all values exactly 1: uniform-weight fallback
    return float((w * v).sum() / total)


def _mink_stat(v: np.ndarray, p: float) -> float:
    return float(((1.0 - v) ** p).mean())


def _pp_stat(v: np.ndarray, ps: float, rs: float) -> float:
    if ps <= 0.0 or rs == 1.0:
        return float(v.mean())
    cutoff = np.percentile(v, ps)
    scaled = np.where(v <= cutoff, v / rs, v)
    return float(scaled.mean())


def _gm_stat(v: np.ndarray) -> float:
    return float(np.exp(np.log(np.maximum(v, MEAN_EPS)).mean()))


def _hm_stat(v: np.ndarray) -> float:
    return float(1.0 / (1.0 / np.maximum(v, MEAN_EPS)).mean())


def pool_spatial(
    qmap: Union[QualityMap, np.ndarray],
    method: Union[SpatialPooler, str],
    ref_luma: Optional[Union[QualityMap, np.ndarray]] = None,
) -> float:
    """Collapse a quality map to one frame score.

    ``ref_luma`` is the reference image's local-mean map on the same window
    grid; it is required by (and only by) luminance-weighted pooling.
    """
    pool = parse_spatial(method) if isinstance(method, str) else method
    v = qmap.values if isinstance(qmap, QualityMap) else np.asarray(qmap, dtype=np.float64)
    if v.size == 0:
        raise EmptyMap("cannot pool an empty quality map")
    v = v.reshape(-1)

    if pool.kind == "am":
        return float(v.mean())
    if pool.kind == "cov":
        return _cov_stat(v)
    if pool.kind == "md":
        return _md_stat(v, pool.p, pool.o)
    if pool.kind == "fns":
        return _fns_stat(v)
    if pool.kind == "dw":
        return _dw_stat(v, pool.p)
    if pool.kind == "mink":
        return _mink_stat(v, pool.p)
    if pool.kind == "pp":
        return _pp_stat(v, pool.ps, pool.rs)
    # lw
    if ref_luma is None:
        raise MissingLumaForLW("lw pooling needs the reference mean-luminance map")
    mu = ref_luma.values if isinstance(ref_luma, QualityMap) else np.asarray(ref_luma, dtype=np.float64)
    mu = mu.reshape(-1)
    if mu.shape != v.shape:
        raise MissingLumaForLW("mean-luminance map is not co-registered with the quality map")
    if pool.b == 0.0:
        w = (mu >= pool.a).astype(np.float64)
    else:
        w = np.clip((mu - pool.a) / pool.b, 0.0, 1.0)
    return float((w * v).mean())


def pool_temporal(series: Union[ScoreSeries, np.ndarray], method: Union[TemporalPooler, str]) -> float:
    """Collapse a per-frame score series to one sequence score."""
    pool = parse_temporal(method) if isinstance(method, str) else method
    v = series.scores if isinstance(series, ScoreSeries) else np.asarray(series, dtype=np.float64)
    v = v.reshape(-1)
    if v.size == 0:
        raise EmptySeries("cannot pool an empty score series")

    if pool.kind == "am":
        return float(v.mean())
    if pool.kind == "gm":
        return _gm_stat(v)
    if pool.kind == "hm":
        return _hm_stat(v)
    if pool.kind == "median":
        return float(np.median(v))
    if pool.kind == "cov":
        return _cov_stat(v)
    if pool.kind == "md":
        return _md_stat(v, pool.p, pool.o)
    if pool.kind == "fns":
        return _fns_stat(v)
    if pool.kind == "dw":
        return _dw_stat(v, pool.p)
    if pool.kind == "mink":
        return _mink_stat(v, pool.p)
    if pool.kind == "pp":
        return _pp_stat(v, pool.ps, pool.rs)

    # windowed forms: base statistic over every length-k sliding window, then
    # the mean of the window statistics; short series collapse to one window
    base = {"wam": np.mean, "wgm": _gm_stat, "whm": _hm_stat, "wcov": _cov_stat}[pool.kind]
    k = min(pool.k, v.size)
    stats = [float(base(v[i : i + k])) for i in range(v.size - k + 1)]
    return float(np.mean(stats))
