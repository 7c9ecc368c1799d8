"""Mock synthesizer: blending, proxy metric, correlation, file formats."""

import math

import numpy as np
import pytest

from aadiff.errors import (
    ConfigError,
    DegenerateSeries,
    DimensionError,
    FormatError,
    GridMismatch,
)
from aadiff.mocksynth import (
    EffectSpec,
    MetricSeries,
    MockImage,
    emit_plot_data,
    make_gaussian_attention,
    pearson,
    plot_data_bytes,
    ppm_bytes,
    proxy_score,
    read_ppm,
    render_frame,
    render_video,
    solid_image,
    write_ppm,
)
from aadiff.schedule import EditSchedule

from conftest import thunder_signal


def oracle_blend(base, color, attn, multiplier):
    weight = min(multiplier * attn, 1.0)
    return tuple(
        min(1.0, max(0.0, b + weight * (c - b))) for b, c in zip(base, color)
    )


def single_pixel(value):
    return MockImage(np.full((1, 1, 3), value))


def effect(color, attn, index=0):
    return EffectSpec(
        token_index=index,
        effect_color=np.asarray(color, dtype=np.float64),
        attention=np.asarray(attn, dtype=np.float64),
    )


def schedule_from(multipliers, index=0):
    return EditSchedule(
        fps=30.0,
        frame_count=len(multipliers),
        prompt="",
        tokens=((index, "tok"),),
        frames=tuple({index: float(m)} for m in multipliers),
    )


class TestRenderFrame:
    def test_zero_multiplier_returns_base_exactly(self):
        rng = np.random.default_rng(50)
        base = MockImage(rng.random((4, 6, 3)))
        spec = effect((1.0, 0.0, 0.0), rng.random(24))
        out = render_frame(base, spec, 0.0)
        assert np.array_equal(out.pixels, base.pixels)

    def test_saturated_weight_reaches_effect_color(self):
        base = MockImage(np.full((2, 2, 3), 0.3))
        attn = np.array([0.5, 1.0, 0.25, 2.0])
        spec = effect((0.9, 0.1, 0.4), attn)
        out = render_frame(base, spec, 100.0)  # min(m*attn, 1) == 1 wherever attn > 0
        for p in range(4):
            assert out.pixels.reshape(4, 3)[p] == pytest.approx([0.9, 0.1, 0.4], rel=0, abs=0)

    def test_single_pixel_blend_matches_closed_form(self):
        # base 0.2, effect 1.0, attn 0.5, multiplier 1:
        # weight = min(1 * 0.5, 1) = 0.5 -> 0.2 + 0.5 * 0.8 = 0.6
        base = single_pixel(0.2)
        spec = effect((1.0, 1.0, 1.0), [0.5])
        out = render_frame(base, spec, 1.0)
        expected = oracle_blend((0.2, 0.2, 0.2), (1.0, 1.0, 1.0), 0.5, 1.0)
        assert expected == pytest.approx((0.6, 0.6, 0.6), rel=1e-12)
        assert out.pixels[0, 0] == pytest.approx(expected, rel=1e-12)

    def test_matches_closed_form_oracle_on_random_pixels(self):
        rng = np.random.default_rng(51)
        for _ in range(50):
            base_color = tuple(rng.random(3))
            effect_color = tuple(rng.random(3))
            attn = float(rng.uniform(0, 2))
            multiplier = float(rng.uniform(0, 3))
            out = render_frame(
                MockImage(np.array(base_color).reshape(1, 1, 3)),
                effect(effect_color, [attn]),
                multiplier,
            )
            assert out.pixels[0, 0] == pytest.approx(
                oracle_blend(base_color, effect_color, attn, multiplier), rel=1e-12
            )

    def test_channels_never_leave_unit_interval(self):
        rng = np.random.default_rng(52)
        base = MockImage(rng.random((8, 8, 3)))
        spec = effect((1.0, 1.0, 1.0), rng.random(64) * 3)
        for multiplier in (0.0, 0.7, 5.0, 1000.0):
            out = render_frame(base, spec, multiplier)
            assert out.pixels.min() >= 0.0
            assert out.pixels.max() <= 1.0

    def test_dimension_mismatch_rejected(self):
        base = MockImage(np.zeros((2, 2, 3)))
        with pytest.raises(DimensionError):
            render_frame(base, effect((1, 1, 1), [0.5] * 3), 1.0)


class TestRenderVideo:
    def test_all_zero_schedule_returns_base_everywhere(self):
        rng = np.random.default_rng(53)
        base = MockImage(rng.random((4, 4, 3)))
        spec = effect((1, 0, 0), rng.random(16))
        frames = render_video(base, [spec], schedule_from([0.0] * 5))
        for frame in frames:
            assert np.array_equal(frame.pixels, base.pixels)

    def test_frame_count_matches_schedule(self):
        base = solid_image(4, 4)
        spec = effect((1, 1, 1), np.ones(16))
        frames = render_video(base, [spec], schedule_from(np.linspace(0, 1, 150)))
        assert len(frames) == 150

    def test_disjoint_attention_supports_edit_independently(self):
        base = MockImage(np.zeros((1, 4, 3)))
        left = effect((1.0, 0.0, 0.0), [1.0, 1.0, 0.0, 0.0], index=0)
        right = effect((0.0, 0.0, 1.0), [0.0, 0.0, 1.0, 1.0], index=1)
        schedule = EditSchedule(
            fps=30.0, frame_count=1, prompt="",
            tokens=((0, "l"), (1, "r")),
            frames=({0: 0.5, 1: 1.0},),
        )
        frame = render_video(base, [left, right], schedule)[0]
        only_left = render_frame(base, left, 0.5)
        only_right = render_frame(base, right, 1.0)
        assert frame.pixels[0, :2] == pytest.approx(only_left.pixels[0, :2])
        assert frame.pixels[0, 2:] == pytest.approx(only_right.pixels[0, 2:])

    def test_rerender_is_bit_identical(self):
        rng = np.random.default_rng(54)
        base = MockImage(rng.random((6, 6, 3)))
        spec = effect((0.9, 0.4, 0.1), rng.random(36))
        schedule = schedule_from(rng.random(20))
        first = render_video(base, [spec], schedule)
        second = render_video(base, [spec], schedule)
        for a, b in zip(first, second):
            assert a.pixels.tobytes() == b.pixels.tobytes()

    def test_missing_effect_rejected(self):
        base = solid_image(2, 2)
        with pytest.raises(ConfigError):
            render_video(base, [], schedule_from([1.0]))


class TestProxyScore:
    def test_perfect_match_scores_one(self):
        image = MockImage(np.full((3, 3, 3), 0.7))
        spec = effect((0.7, 0.7, 0.7), np.random.default_rng(55).random(9) + 0.1)
        assert proxy_score(image, spec) == pytest.approx(1.0, rel=1e-12)

    def test_zero_attention_scores_zero(self):
        image = solid_image(2, 2)
        spec = effect((1, 1, 1), np.zeros(4))
        assert proxy_score(image, spec) == 0.0

    def test_strictly_increasing_in_multiplier_before_saturation(self):
        base = MockImage(np.full((4, 4, 3), 0.2))
        spec = effect((1.0, 1.0, 1.0), np.full(16, 0.8))
        scores = [
            proxy_score(render_frame(base, spec, m), spec)
            for m in np.linspace(0.0, 1.2, 12)
        ]
        assert all(b > a for a, b in zip(scores, scores[1:]))

    def test_matches_weighted_closeness_oracle(self):
        rng = np.random.default_rng(56)
        image = MockImage(rng.random((3, 2, 3)))
        attn = rng.random(6)
        color = rng.random(3)
        spec = effect(color, attn)
        flat = image.pixels.reshape(6, 3)
        expected = sum(
            attn[p] * (1 - sum(abs(flat[p][c] - color[c]) for c in range(3)) / 3)
            for p in range(6)
        ) / sum(attn)
        assert proxy_score(image, spec) == pytest.approx(expected, rel=1e-12)


class TestPearson:
    def series(self, values, name="s"):
        return MetricSeries(np.asarray(values, dtype=np.float64), name)

    def test_self_correlation_is_one(self):
        a = self.series([1.0, 2.0, 5.0])
        assert pearson(a, a) == pytest.approx(1.0, rel=1e-12)

    def test_negated_series_is_minus_one(self):
        a = self.series([1.0, 2.0, 5.0])
        b = self.series([-1.0, -2.0, -5.0])
        assert pearson(a, b) == pytest.approx(-1.0, rel=1e-12)

    def test_textbook_example(self):
        r = pearson(self.series([1, 2, 3]), self.series([2, 4, 7]))
        assert r == pytest.approx(0.9934, abs=1e-3)

    def test_matches_corrcoef_oracle(self):
        rng = np.random.default_rng(57)
        for _ in range(30):
            n = int(rng.integers(2, 50))
            a = rng.random(n)
            b = rng.random(n) + 0.1 * a
            if np.ptp(a) == 0 or np.ptp(b) == 0:
                continue
            ours = pearson(self.series(a), self.series(b))
            assert ours == pytest.approx(np.corrcoef(a, b)[0, 1], abs=1e-12)

    def test_constant_series_rejected(self):
        with pytest.raises(DegenerateSeries):
            pearson(self.series([1.0, 1.0, 1.0]), self.series([1, 2, 3]))

    def test_length_mismatch_rejected(self):
        with pytest.raises(GridMismatch):
            pearson(self.series([1, 2]), self.series([1, 2, 3]))

    def test_single_point_rejected(self):
        with pytest.raises(DegenerateSeries):
            pearson(self.series([1.0]), self.series([2.0]))


class TestPlotData:
    def test_two_series_three_frames_is_four_lines(self):
        series = [
            MetricSeries(np.array([1.0, 2.0, 3.0]), "alpha"),
            MetricSeries(np.array([0.5, 0.25, 0.125]), "beta"),
        ]
        text = plot_data_bytes(series).decode()
        lines = text.strip().split("\n")
        assert lines[0] == "frame,alpha,beta"
        assert len(lines) == 4

    def test_empty_series_list_rejected(self):
        with pytest.raises(ConfigError):
            plot_data_bytes([])

    def test_roundtrip_through_text(self, tmp_path):
        rng = np.random.default_rng(58)
        series = [
            MetricSeries(rng.random(7), "a"),
            MetricSeries(rng.random(7), "b"),
        ]
        path = tmp_path / "plot.csv"
        emit_plot_data(series, path)
        lines = path.read_text().strip().split("\n")
        for t, line in enumerate(lines[1:]):
            frame, a, b = line.split(",")
            assert int(frame) == t
            assert float(a) == series[0].values[t]
            assert float(b) == series[1].values[t]

    def test_length_mismatch_rejected(self):
        series = [MetricSeries(np.ones(3), "a"), MetricSeries(np.ones(4), "b")]
        with pytest.raises(GridMismatch):
            plot_data_bytes(series)

    def test_io_failure_raises_write_error(self, tmp_path):
        from aadiff.errors import WriteError

        blocker = tmp_path / "blocker"
        blocker.write_text("file, not a directory")
        with pytest.raises(WriteError):
            emit_plot_data([MetricSeries(np.ones(2), "a")], blocker / "plot.csv")


class TestPpm:
    def test_roundtrip_preserves_quantized_levels(self, tmp_path):
        rng = np.random.default_rng(59)
        image = MockImage(rng.random((5, 7, 3)))
        path = tmp_path / "img.ppm"
        write_ppm(image, path)
        again = read_ppm(path)
        # one quantization trip: values land on k/255 lattice points
        expected = np.floor(image.pixels * 255.0 + 0.5) / 255.0
        assert again.pixels == pytest.approx(expected, abs=1e-12)
        # a second trip is exact
        assert np.array_equal(read_ppm(ppm_bytes(again)).pixels, again.pixels)

    def test_rounding_is_half_up(self):
        # 128/255 is the smallest level whose quantization exceeds half scale
        image = MockImage(np.full((1, 1, 3), 0.5))
        data = ppm_bytes(image)
        assert data.endswith(bytes([128, 128, 128]))

    def test_header_layout(self):
        image = solid_image(2, 3, color=(0, 0, 0))
        data = ppm_bytes(image)
        assert data.startswith(b"P6\n3 2\n255\n")
        assert len(data) == len(b"P6\n3 2\n255\n") + 2 * 3 * 3

    def test_bad_magic_rejected(self):
        with pytest.raises(FormatError):
            read_ppm(b"P3\n1 1\n255\n0 0 0")

    def test_truncated_raster_rejected(self):
        with pytest.raises(FormatError):
            read_ppm(b"P6\n2 2\n255\n\x00\x00\x00")

    def test_comments_in_header_are_skipped(self):
        data = b"P6\n# made by hand\n1 1\n255\n\x10\x20\x30"
        image = read_ppm(data)
        assert image.pixels[0, 0] == pytest.approx([16 / 255, 32 / 255, 48 / 255])


class TestGaussianAttention:
    def test_peak_is_one_at_center(self):
        row = make_gaussian_attention(9, 9, center=(0.5, 0.5), sigma=0.3)
        assert row.max() == pytest.approx(1.0)
        assert row.reshape(9, 9)[4, 4] == pytest.approx(1.0)

    def test_deterministic(self):
        a = make_gaussian_attention(16, 16)
        b = make_gaussian_attention(16, 16)
        assert np.array_equal(a, b)


class TestEndToEndSync:
    def test_proxy_tracks_multipliers_on_thunder_signal(self):
        values = thunder_signal()
        multipliers = values / values.max()
        schedule = schedule_from(multipliers)
        base = solid_image(16, 16, color=(0.25, 0.25, 0.25))
        spec = effect((1.0, 0.9, 0.6), make_gaussian_attention(16, 16, sigma=0.3))
        frames = render_video(base, [spec], schedule)
        proxy = MetricSeries(np.array([proxy_score(f, spec) for f in frames]), "proxy")
        mult = MetricSeries(multipliers, "multiplier")
        assert pearson(mult, proxy) >= 0.9

    def test_tv_of_proxy_non_increasing_in_window_size(self):
        from aadiff.envelope import Envelope, SmoothingConfig, smooth, total_variation

        raw = Envelope(thunder_signal(), fps=30.0, kind="raw")
        base = solid_image(8, 8, color=(0.3, 0.3, 0.3))
        spec = effect((1.0, 1.0, 1.0), make_gaussian_attention(8, 8, sigma=0.3))
        tvs = []
        for s in (1, 75, 150):
            smoothed = smooth(raw, SmoothingConfig(window_size_s=s))
            multipliers = smoothed.values / max(smoothed.values.max(), 1e-12)
            frames = render_video(base, [spec], schedule_from(multipliers))
            proxy = Envelope(
                np.array([proxy_score(f, spec) for f in frames]), fps=30.0, kind="raw"
            )
            tvs.append(total_variation(proxy))
        assert tvs[0] >= tvs[1] >= tvs[2]
