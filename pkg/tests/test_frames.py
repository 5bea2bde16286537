import numpy as np
import pytest

from ssimkit.config import (
    ColorModelSpec,
    MultiscaleSpec,
    ScalePolicy,
    SsimConfig,
    WindowSpec,
    parse_color,
    parse_multiscale,
    parse_scale,
    parse_window,
)
from ssimkit.errors import (
    BitDepthMismatch,
    DegenerateWeights,
    DimensionMismatch,
    NonPositiveSigma,
    ValidationError,
)
from ssimkit.frames import (
    ColorFrame,
    LumaPlane,
    QualityMap,
    ScoreSeries,
    validate_frame_pair,
)

from conftest import random_plane


class TestLumaPlane:
    def test_basic_properties(self, rng):
        plane = random_plane(rng, 24, 48)
        assert (plane.height, plane.width) == (24, 48)
        assert plane.peak == 255.0
        assert plane.as_float().dtype == np.float64

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValidationError):
            LumaPlane(np.zeros(16, dtype=np.uint8))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            LumaPlane(np.full((4, 4), 300.0), bit_depth=8)
        with pytest.raises(ValidationError):
            LumaPlane(np.full((4, 4), -1.0), bit_depth=8)

    def test_rejects_bad_bit_depth(self):
        with pytest.raises(ValidationError):
            LumaPlane(np.zeros((4, 4), dtype=np.uint8), bit_depth=7)

    def test_ten_bit_range(self):
        plane = LumaPlane(np.full((4, 4), 1023, dtype=np.uint16), bit_depth=10)
        assert plane.peak == 1023.0
        with pytest.raises(ValidationError):
            LumaPlane(np.full((4, 4), 1024, dtype=np.uint16), bit_depth=10)

    def test_immutable(self, rng):
        plane = random_plane(rng)
        with pytest.raises(ValueError):
            plane.samples[0, 0] = 1


class TestColorFrame:
    def test_420_chroma_dims(self):
        y = np.zeros((5, 5), dtype=np.uint8)
        c = np.zeros((3, 3), dtype=np.uint8)  # ceil(5/2) = 3
        frame = ColorFrame((y, c, c), "ycbcr-bt709", "420")
        assert frame.height == frame.width == 5

    def test_420_rejects_wrong_chroma_dims(self):
        y = np.zeros((6, 6), dtype=np.uint8)
        c = np.zeros((2, 2), dtype=np.uint8)
        with pytest.raises(ValidationError):
            ColorFrame((y, c, c), "ycbcr-bt709", "420")

    def test_444_needs_matching_dims(self):
        y = np.zeros((4, 4), dtype=np.uint8)
        c = np.zeros((2, 2), dtype=np.uint8)
        with pytest.raises(ValidationError):
            ColorFrame((y, c, c), "rgb", "444")

    def test_unknown_space_rejected(self):
        y = np.zeros((4, 4), dtype=np.uint8)
        with pytest.raises(ValidationError):
            ColorFrame((y, y, y), "cmyk")


class TestValidateFramePair:
    def test_matching_pair_passes(self, rng):
        a, b = random_plane(rng, 64, 64), random_plane(rng, 64, 64)
        assert validate_frame_pair(a, b) == (a, b)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            validate_frame_pair(random_plane(rng, 64, 64), random_plane(rng, 48, 64))

    def test_bit_depth_mismatch(self, rng):
        a = random_plane(rng, 8, 8, 8)
        b = LumaPlane(a.samples.astype(np.uint16), 10)
        with pytest.raises(BitDepthMismatch):
            validate_frame_pair(a, b)


class TestQualityMapAndSeries:
    def test_map_rejects_empty_and_nan(self):
        with pytest.raises(ValidationError):
            QualityMap(np.zeros((0, 3)))
        with pytest.raises(ValidationError):
            QualityMap(np.array([[np.nan]]))

    def test_map_grid_metadata(self):
        qm = QualityMap(np.ones((3, 4)), stride=2, source_dims=(10, 12))
        assert qm.shape == (3, 4)
        assert qm.stride == 2
        assert qm.mean() == 1.0

    def test_series_rejects_nan(self):
        with pytest.raises(ValidationError):
            ScoreSeries(np.array([0.5, np.nan]))

    def test_series_length(self):
        assert len(ScoreSeries(np.array([1.0, 0.5, 0.25]))) == 3


class TestSsimConfig:
    def test_constants_derived_from_bit_depth(self):
        cfg = SsimConfig()
        assert cfg.peak == 255.0
        assert cfg.c1 == pytest.approx((0.01 * 255) ** 2)
        assert cfg.c2 == pytest.approx((0.03 * 255) ** 2)
        assert cfg.c3 == cfg.c2 / 2.0
        ten = cfg.for_bit_depth(10)
        assert ten.c1 == pytest.approx((0.01 * 1023) ** 2)

    def test_rejects_nonpositive_constants(self):
        with pytest.raises(ValidationError):
            SsimConfig(k1=0.0)
        with pytest.raises(ValidationError):
            SsimConfig(k2=-0.03)

    def test_rejects_bad_pool_selector(self):
        with pytest.raises(ValidationError):
            SsimConfig(spatial_pool="nope")

    @pytest.mark.parametrize(
        "config",
        [
            SsimConfig(),
            SsimConfig(
                k1=0.02,
                k2=0.05,
                bit_depth=10,
                window=WindowSpec.gaussian(1.5),
                engine="naive",
                scaling=ScalePolicy.sast(distance=1000.0),
                color=ColorModelSpec("cw", alpha=-0.3, beta=-0.3),
                spatial_pool="md:p=2,o=3",
                temporal_pool="pp:ps=6,rs=4000",
                multiscale=MultiscaleSpec.product(4),
            ),
            SsimConfig(
                window=WindowSpec.rectangular(8, stride=4),
                scaling=ScalePolicy.enhanced_dh(3.0),
                color=ColorModelSpec("fixed", weights=(0.8, 0.1, 0.1)),
                multiscale=MultiscaleSpec.fast4(),
            ),
        ],
    )
    def test_round_trips_bit_exactly(self, config):
        assert SsimConfig.from_json(config.to_json()) == config
        assert SsimConfig.from_json(config.to_json()).to_json() == config.to_json()


class TestSpecValidation:
    def test_window_spec_gaussian_defaults(self):
        spec = WindowSpec.gaussian(1.5)
        assert spec.k == 11
        with pytest.raises(NonPositiveSigma):
            WindowSpec.gaussian(0.0)
        with pytest.raises(ValidationError):
            WindowSpec.gaussian(1.5, k=10)  # even size
        with pytest.raises(ValidationError):
            WindowSpec.rectangular(11, stride=0)

    def test_rect_even_size_allowed(self):
        assert WindowSpec.rectangular(8, stride=4).k == 8

    def test_multiscale_spec_validation(self):
        with pytest.raises(ValidationError):
            MultiscaleSpec("product", 3, (0.5, 0.5))  # exponent count mismatch
        with pytest.raises(ValidationError):
            MultiscaleSpec("product", 2, (0.5, -0.5))
        with pytest.raises(ValidationError):
            MultiscaleSpec("fast4", 5)
        renorm = MultiscaleSpec.fast4().effective_exponents()
        assert sum(renorm) == pytest.approx(1.0)

    def test_channelwise_degenerate_weights(self):
        with pytest.raises(DegenerateWeights):
            ColorModelSpec("cw", alpha=-0.5, beta=-0.5)

    def test_fixed_weights_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            ColorModelSpec("fixed", weights=(0.5, 0.2, 0.2))


class TestSelectorGrammar:
    def test_windows(self):
        assert parse_window("rect:11") == WindowSpec.rectangular(11)
        assert parse_window("rect:8,stride=4") == WindowSpec.rectangular(8, stride=4)
        assert parse_window("gauss:1.5") == WindowSpec.gaussian(1.5)
        assert parse_window("gauss:1.5,k=13") == WindowSpec.gaussian(1.5, k=13)
        with pytest.raises(ValidationError):
            parse_window("hex:5")

    def test_scales(self):
        assert parse_scale("none").kind == "none"
        assert parse_scale("legacy").kind == "legacy"
        assert parse_scale("legacy:ceil").rounding == "ceil"
        sast = parse_scale("sast:D=3000")
        assert (sast.kind, sast.distance) == ("sast", 3000.0)
        assert parse_scale("dh:6.0").d_over_h == 6.0
        with pytest.raises(ValidationError):
            parse_scale("sast")  # missing distance

    def test_colors(self):
        assert parse_color("luma").model == "luma"
        cw = parse_color("cw:a=-0.3,b=-0.2")
        assert (cw.alpha, cw.beta) == (-0.3, -0.2)
        fixed = parse_color("fixed:0.8,0.1,0.1")
        assert fixed.weights == (0.8, 0.1, 0.1)
        assert parse_color("qssim:ycbcr").space == "ycbcr"
        assert parse_color("cmssim").model == "cmssim"

    def test_multiscale(self):
        assert not parse_multiscale("off").enabled
        assert parse_multiscale("product").levels == 5
        assert parse_multiscale("product:levels=3").levels == 3
        assert parse_multiscale("fast4").levels == 4

    def test_selector_round_trip(self):
        for text in ["rect:11", "rect:8,stride=4", "gauss:1.5,k=11"]:
            spec = parse_window(text)
            assert parse_window(spec.selector()) == spec
        for text in ["none", "legacy", "sast:D=3000", "dh:3.0"]:
            policy = parse_scale(text)
            assert parse_scale(policy.selector()) == policy
