"""Batch scoring pipelines: media in, per-frame records and pooled summaries out.

A PipelineSpec resolves a configuration (possibly from a named preset) into a
deterministic scoring run. Reports are reproducible byte-for-byte on the same
inputs; only the timing fields vary between runs.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np

from . import color as colormod
from .adaptation import box_downsample, policy_factor
from .config import ColorModelSpec, ScalePolicy, SsimConfig, WindowSpec
from .errors import (
    DegenerateData,
    DimensionMismatch,
    LengthMismatch,
    SsimkitError,
    ValidationError,
)
from .evaluation import (
    CostPerfPoint,
    LabeledDataset,
    correlations,
    eval_5pl,
    fit_5pl,
    is_rank_preserving,
    load_manifest,
    normalize_scores,
    pareto_front,
)
from .frames import (
    SPACE_RGB,
    SPACE_YCBCR,
    ColorFrame,
    LumaPlane,
    ScoreSeries,
    validate_color_pair,
    validate_frame_pair,
)
from .media import VideoStream, read_pnm, read_planar_raw, read_y4m
from .multiscale import msssim
from .pooling import parse_spatial, parse_temporal, pool_spatial, pool_temporal
from .spatiotemporal import RollingVolume, msssim3d
from .ssim import mssim, term_maps_from_stats
from .stats import local_statistics

FrameType = Union[LumaPlane, ColorFrame]

#: Per-frame record schema, in report column order.
FRAME_FIELDS = ("frame", "score", "am", "l_mean", "cs_mean")

BENCH_FIELDS = (
    "spec", "clips", "pcc", "srocc", "rmse", "fit_monotone",
    "user_seconds", "pareto", "note",
)


@dataclass(frozen=True)
class PipelineSpec:
    """A fully resolved scoring pipeline: config + temporal depth + reporting."""

    config: SsimConfig = field(default_factory=SsimConfig)
    kt: int = 1
    report_format: str = "jsonl"
    preset: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.report_format not in ("jsonl", "csv"):
            raise ValidationError(f"unknown report format {self.report_format!r}")
        if not isinstance(self.kt, int) or self.kt < 1:
            raise ValidationError("kt must be an integer >= 1")
        if self.kt > 1 and self.config.color.model != "luma":
            raise ValidationError("spatio-temporal scoring operates on the luminance channel only")
        if self.kt > 1 and self.config.window.shape != "rect":
            raise ValidationError("spatio-temporal scoring needs a rectangular window")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ValidationError("workers must be an integer >= 1")


def _enhanced_config() -> SsimConfig:
    return SsimConfig(
        window=WindowSpec.rectangular(11, stride=5),
        engine="integral",
        scaling=ScalePolicy.enhanced_dh(3.0),
        color=ColorModelSpec.luma(),
        spatial_pool="cov",
        temporal_pool="am",
    )


def preset_specs() -> dict[str, PipelineSpec]:
    """The named presets the CLI exposes."""
    return {
        "default": PipelineSpec(SsimConfig(), preset="default"),
        "enhanced": PipelineSpec(_enhanced_config(), preset="enhanced"),
    }


def expand_preset(name: str) -> PipelineSpec:
    presets = preset_specs()
    if name not in presets:
        raise ValidationError(f"unknown preset {name!r} (have: {', '.join(sorted(presets))})")
    return presets[name]


# ---------------------------------------------------------------------------
# media plumbing
# ---------------------------------------------------------------------------

def open_stream(
    path: Union[str, os.PathLike],
    width: Optional[int] = None,
    height: Optional[int] = None,
    bit_depth: int = 8,
    chroma: str = "420",
) -> VideoStream:
    """Open any supported media file as a video stream (images become 1-frame
    streams). Raw planar input needs width/height from the caller."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".y4m":
        return read_y4m(path)
    if ext in (".pnm", ".pgm", ".ppm"):
        image = read_pnm(path)
        from .media import StreamHeader

        if isinstance(image, LumaPlane):
            header = StreamHeader(image.width, image.height, (1, 1), "mono", image.bit_depth)
        else:
            header = StreamHeader(image.width, image.height, (1, 1), image.subsampling, image.bit_depth)
        return VideoStream(header, lambda: iter([image]))
    if width is None or height is None:
        raise ValidationError(f"{path}: raw planar input needs explicit --width and --height")
    return read_planar_raw(path, width, height, bit_depth, chroma)


def _stream_pairs(ref: VideoStream, dist: VideoStream) -> Iterator[tuple[FrameType, FrameType]]:
    a_it, b_it = iter(ref), iter(dist)
    sentinel = object()
    index = 0
    while True:
        a = next(a_it, sentinel)
        b = next(b_it, sentinel)
        if a is sentinel and b is sentinel:
            return
        if a is sentinel or b is sentinel:
            raise LengthMismatch(f"streams differ in length (one ended at frame {index})")
        yield a, b
        index += 1


# ---------------------------------------------------------------------------
# per-frame scoring
# ---------------------------------------------------------------------------

def _luma_plane(frame: FrameType) -> LumaPlane:
    if isinstance(frame, LumaPlane):
        return frame
    if frame.space == SPACE_YCBCR:
        return LumaPlane(frame.channels[0], frame.bit_depth)
    return colormod.luma_of(frame)


def _scale_frame(frame: FrameType, factor: int) -> FrameType:
    if factor == 1:
        return frame
    if isinstance(frame, LumaPlane):
        return box_downsample(frame, factor)
    chans = tuple(box_downsample(c, factor) for c in frame.channels)
    return ColorFrame(chans, frame.space, frame.subsampling, frame.bit_depth)


def _rgb_frame(frame: FrameType) -> ColorFrame:
    if isinstance(frame, LumaPlane):
        raise ValidationError("this color model needs tri-channel input, stream is luma-only")
    if frame.space == SPACE_YCBCR:
        return colormod.ycbcr_bt709_to_rgb(frame)
    return frame.require_space(SPACE_RGB)


@dataclass
class FrameScore:
    score: float
    am: Optional[float]
    l_mean: Optional[float]
    cs_mean: Optional[float]


def score_frame_pair(
    ref: FrameType,
    dist: FrameType,
    config: SsimConfig,
    volume: Optional[RollingVolume] = None,
) -> FrameScore:
    """Score one frame pair under a config; a volume makes scoring 3-D."""
    if isinstance(ref, LumaPlane) or isinstance(dist, LumaPlane):
        if type(ref) is not type(dist):
            raise DimensionMismatch("one stream is luma-only, the other tri-channel")
        validate_frame_pair(ref, dist)
    else:
        validate_color_pair(ref, dist)

    factor = policy_factor(config.scaling, _luma_plane(ref).width, _luma_plane(ref).height)
    model = config.color.model

    if model == "luma":
        y1 = _scale_frame(_luma_plane(ref), factor)
        y2 = _scale_frame(_luma_plane(dist), factor)
        config = config.for_bit_depth(y1.bit_depth)
        if volume is not None:
            volume.push(y1, y2)
            if config.multiscale.enabled:
                raise ValidationError("use run_score for multiscale 3-D pipelines")
            stats = volume.local_statistics(config.window)
            maps = term_maps_from_stats(stats, config.c1, config.c2)
        elif config.multiscale.enabled:
            score = msssim(y1, y2, config, config.multiscale)
            return FrameScore(score, None, None, None)
        else:
            stats = local_statistics(y1, y2, config.window, config.engine)
            maps = term_maps_from_stats(stats, config.c1, config.c2)
        pooled = pool_spatial(maps.q_map, parse_spatial(config.spatial_pool), ref_luma=stats.mu1)
        return FrameScore(
            pooled,
            mssim(maps.q_map),
            float(maps.l_map.values.mean()),
            float(maps.cs_map.values.mean()),
        )

    # tri-channel models; scaling applies per channel
    if isinstance(ref, LumaPlane):
        raise ValidationError(f"color model {model!r} needs tri-channel input, stream is luma-only")
    ref = _scale_frame(ref, factor)
    dist = _scale_frame(dist, factor)
    config = config.for_bit_depth(ref.bit_depth)
    spec = config.color
    if model == "cw":
        score = colormod.channelwise_cssim(ref, dist, spec.alpha, spec.beta, config)
    elif model == "fixed":
        score = colormod.fixed_weight_cssim(ref, dist, spec.weights, config)
    elif model == "qssim":
        pair = (ref, dist)
        if spec.space in ("rgb", "lab"):
            pair = (_rgb_frame(ref), _rgb_frame(dist))
        score = colormod.qssim(*pair, window=config.window, k1=config.k1, k2=config.k2, space=spec.space)
    elif model == "cmssim":
        score = colormod.cmssim(ref, dist, config.window, config)
    else:  # hssim
        score = colormod.hssim(ref, dist, config.window, config)
    return FrameScore(score, None, None, None)


# ---------------------------------------------------------------------------
# whole-run drivers
# ---------------------------------------------------------------------------

def _user_seconds() -> tuple[float, str]:
    try:
        import resource

        usage = resource.getrusage(resource.RUSAGE_SELF)
        return usage.ru_utime, "user"
    except ImportError:  # platform without resource: fall back to wall time
        return time.perf_counter(), "wall"


def run_score(
    ref_path: Union[str, os.PathLike],
    dist_path: Union[str, os.PathLike],
    spec: PipelineSpec,
    *,
    width: Optional[int] = None,
    height: Optional[int] = None,
    bit_depth: int = 8,
    chroma: str = "420",
) -> dict:
    """Score a reference/distorted pair of media files.

    Returns {"records": [per-frame dicts], "summary": {...}}; the records
    follow FRAME_FIELDS and the summary carries the pooled score and timing.
    """
    ref_stream = open_stream(ref_path, width, height, bit_depth, chroma)
    dist_stream = open_stream(dist_path, width, height, bit_depth, chroma)
    rh, dh = ref_stream.header, dist_stream.header
    if (rh.width, rh.height) != (dh.width, dh.height):
        raise DimensionMismatch(
            f"{ref_path} is {rh.width}x{rh.height}, {dist_path} is {dh.width}x{dh.height}"
        )
    if rh.bit_depth != dh.bit_depth or rh.chroma != dh.chroma:
        raise DimensionMismatch("streams differ in bit depth or chroma subsampling")

    config = spec.config
    start, timing_source = _user_seconds()
    wall_start = time.perf_counter()

    results: list[FrameScore] = []
    try:
        if spec.kt > 1 and config.multiscale.enabled:
            series = msssim3d(
                ref_stream.luma_frames(), dist_stream.luma_frames(), spec.kt, config.multiscale, config
            )
            results = [FrameScore(float(s), None, None, None) for s in series.scores]
        elif spec.kt > 1:
            volume = RollingVolume(spec.kt)
            for i, (a, b) in enumerate(_stream_pairs(ref_stream, dist_stream)):
                try:
                    results.append(score_frame_pair(a, b, config, volume))
                except SsimkitError as exc:
                    raise type(exc)(f"frame {i}: {exc}") from exc
        else:
            pairs = _stream_pairs(ref_stream, dist_stream)
            if spec.workers > 1:
                with ThreadPoolExecutor(max_workers=spec.workers) as pool:
                    results = list(pool.map(lambda ab: score_frame_pair(*ab, config), pairs))
            else:
                for i, (a, b) in enumerate(pairs):
                    try:
                        results.append(score_frame_pair(a, b, config))
                    except SsimkitError as exc:
                        raise type(exc)(f"frame {i}: {exc}") from exc
    except SsimkitError as exc:
        raise type(exc)(f"{ref_path} vs {dist_path}: {exc}") from exc
    if not results:
        raise ValidationError(f"{ref_path} vs {dist_path}: no frames to score")

    end, _ = _user_seconds()
    elapsed = end - start if timing_source == "user" else time.perf_counter() - wall_start

    records = [
        {
            "frame": i,
            "score": r.score,
            "am": r.am,
            "l_mean": r.l_mean,
            "cs_mean": r.cs_mean,
        }
        for i, r in enumerate(results)
    ]
    series = ScoreSeries(np.array([r.score for r in results]))
    pooled = pool_temporal(series, parse_temporal(config.temporal_pool))
    summary = {
        "frames": len(results),
        "spatial_pool": config.spatial_pool,
        "temporal_pool": config.temporal_pool,
        "pooled_score": pooled,
        "mean_score": float(series.scores.mean()),
        "user_seconds": elapsed,
        "timing_source": timing_source,
    }
    ams = [r.am for r in results if r.am is not None]
    if ams:
        summary["mean_am"] = float(np.mean(ams))
    if parse_spatial(config.spatial_pool).kind == "cov":
        summary["note"] = (
            "cov pooling maps a perfect (constant 1) quality map to 0; "
            "per-frame arithmetic means are reported in the 'am' field"
        )
    return {"records": records, "summary": summary}


def run_benchmark(manifest_path: Union[str, os.PathLike], specs: dict[str, PipelineSpec]) -> list[dict]:
    """Correlate every spec's scores against a labeled manifest.

    Per spec: 5PL-linearized PCC, SROCC, RMSE, total user time, and a Pareto
    flag over (time, SROCC). Degenerate correlations are reported as NaN.
    """
    if not specs:
        raise ValidationError("no pipeline specs to benchmark")
    rows = load_manifest(str(manifest_path))
    subjective = np.array([row["subjective_score"] for row in rows])
    if subjective.size and (subjective.min() < 0.0 or subjective.max() > 1.0):
        subjective = normalize_scores(subjective)  # protocol: scale/shift to [0, 1]
    results = []
    for name, spec in specs.items():
        start, timing_source = _user_seconds()
        wall_start = time.perf_counter()
        scores = []
        for row_idx, row in enumerate(rows):
            try:
                out = run_score(
                    row["ref_path"],
                    row["dist_path"],
                    spec,
                    width=row.get("width"),
                    height=row.get("height"),
                    bit_depth=row.get("bit_depth", 8),
                    chroma=row.get("chroma", "420"),
                )
            except (SsimkitError, OSError) as exc:
                raise type(exc)(f"manifest row {row_idx + 2}: {exc}") from exc
            scores.append(out["summary"]["pooled_score"])
        end, _ = _user_seconds()
        elapsed = end - start if timing_source == "user" else time.perf_counter() - wall_start
        objective = np.array(scores)
        note = ""
        try:
            data = LabeledDataset.from_pairs(objective, subjective)
            fit = fit_5pl(data)
            fitted = np.asarray(eval_5pl(fit, objective))
            # Correlations after linearization; a rank-preserving fit leaves
            # |SROCC| equal to the raw value (and fixes its sign for
            # dissimilarity-style pooled scores).
            pcc, srocc, rmse = correlations(fitted, subjective)
            monotone = is_rank_preserving(fit, float(objective.min()), float(objective.max()))
        except DegenerateData as exc:
            pcc = srocc = rmse = float("nan")
            monotone = False
            note = f"degenerate data: {exc}"
        results.append(
            {
                "spec": name,
                "clips": len(rows),
                "pcc": pcc,
                "srocc": srocc,
                "rmse": rmse,
                "fit_monotone": monotone,
                "user_seconds": elapsed,
                "pareto": False,
                "note": note,
            }
        )
    scored = [r for r in results if r["srocc"] == r["srocc"]]
    points = [
        CostPerfPoint(r["spec"], max(r["user_seconds"], 1e-9), r["srocc"]) for r in scored
    ]
    front = {p.label for p in pareto_front(points)}
    for r in results:
        r["pareto"] = r["spec"] in front
    return results
