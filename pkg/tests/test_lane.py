import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lanefollow.hough import PolarLine, Segment
from lanefollow.imaging import ImageBuffer
from lanefollow.lane import (
    DegenerateParallel,
    InvalidGeometry,
    LaneConfig,
    Status,
    center_line,
    classify_lines,
    compute_roi,
    detect_lane,
    fit_lane_line,
    pre_roi_mask,
    steering_angle,
    vanishing_point,
)

from scenes import line_error, mirror, straight_frame, truth_lines

W, H = 640, 480
LEFT = PolarLine.through((0, 480), (320, 240))
RIGHT = PolarLine.through((640, 480), (320, 240))


def black(w=W, h=H):
    return ImageBuffer(np.zeros((h, w, 3), dtype=np.uint8))


class TestClassify:
    def test_empty(self):
        assert classify_lines([], W, H) == ([], [])

    def test_horizontal_discarded(self):
        assert classify_lines([PolarLine(100, math.pi / 2, 50)], W, H) == ([], [])

    def test_vertical_by_side(self):
        l, r = classify_lines([PolarLine(100, 0.0, 5), PolarLine(500, 0.0, 5)], W, H)
        assert [x.rho for x in l] == [100] and [x.rho for x in r] == [500]

    def test_symmetric_pair(self):
        # both chords span the whole image; below the pre-ROI top they separate
        l, r = classify_lines([LEFT, RIGHT], W, H, y_top=0.55 * (H - 1))
        assert l == [LEFT] and r == [RIGHT]

    def test_rendered_pair(self):
        _, state = straight_frame()
        left, right = truth_lines(state)
        l, r = classify_lines([right, left], W, H, y_top=0.55 * (H - 1))
        assert l == [left] and r == [right]

    def test_wrong_side_slope_rejected(self):
        # falls towards the right but sits in the left half of the image
        line = PolarLine.through((0, 300), (100, 479))
        assert classify_lines([line], W, H) == ([], [])


class TestFit:
    def test_empty(self):
        assert fit_lane_line([]) is None

    def test_single(self):
        c = PolarLine(12.5, 0.7, 9)
        assert fit_lane_line([c]) == c

    def test_weighted_mean(self):
        out = fit_lane_line([PolarLine(100, 1.0, 10), PolarLine(200, 2.0, 30)])
        assert out.rho == pytest.approx(175) and out.theta == pytest.approx(1.75) and out.votes == 40


class TestVanishingPoint:
    def test_constructed(self):
        x, y = vanishing_point(LEFT, RIGHT)
        assert x == pytest.approx(320, abs=1e-9) and y == pytest.approx(240, abs=1e-9)

    def test_parallel(self):
        with pytest.raises(DegenerateParallel):
            vanishing_point(PolarLine(10, 0.5), PolarLine(90, 0.5))

    @given(st.floats(-500, 500), st.floats(0, math.pi - 1e-3), st.floats(-500, 500), st.floats(0, math.pi - 1e-3))
    def test_back_substitution(self, r1, t1, r2, t2):
        if abs(math.sin(t2 - t1)) < 1e-3:
            return
        a, b = PolarLine(r1, t1), PolarLine(r2, t2)
        x, y = vanishing_point(a, b)
        assert abs(a.distance(x, y)) < 1e-6 and abs(b.distance(x, y)) < 1e-6


def shifted(line, dx):
    """The same line moved dx pixels to the right."""
    return PolarLine(line.rho + dx * math.cos(line.theta), line.theta, line.votes)


class TestRoiAndCenter:
    def test_symmetric_trapezoid(self):
        vp = vanishing_point(LEFT, RIGHT)
        bl, br, tr, tl = compute_roi(LEFT, RIGHT, vp, W, H)
        for a, b in ((bl, br), (tl, tr)):
            assert a[0] + b[0] == pytest.approx(640) and a[1] == b[1]
        assert bl[1] == H - 1 and tl[1] == pytest.approx(245)
        assert br[0] - bl[0] > tr[0] - tl[0]

    def test_vertices_on_lines(self):
        vp = vanishing_point(LEFT, RIGHT)
        bl, br, tr, tl = compute_roi(LEFT, RIGHT, vp, W, H)
        for p in (bl, tl):
            assert LEFT.distance(*p) == pytest.approx(0, abs=1e-9)
        for p in (br, tr):
            assert RIGHT.distance(*p) == pytest.approx(0, abs=1e-9)

    def test_crossed_lines_rejected(self):
        vp = vanishing_point(RIGHT, LEFT)
        with pytest.raises(InvalidGeometry):
            compute_roi(RIGHT, LEFT, vp, W, H)

    def test_apex_below_image(self):
        a = PolarLine.through((100, 600), (0, 0))
        b = PolarLine.through((100, 600), (200, 0))
        with pytest.raises(InvalidGeometry):
            compute_roi(a, b, vanishing_point(a, b), W, H)

    def test_center_vertical(self):
        c = center_line(LEFT, RIGHT, W, H)
        assert c.x0 == pytest.approx(320) and c.x1 == pytest.approx(320)
        assert c.y0 == H - 1 and c.y1 == 312

    def test_center_shift_40(self):
        c = center_line(LEFT, RIGHT, W, H)
        s = center_line(shifted(LEFT, 40), shifted(RIGHT, 40), W, H)
        assert s.x0 == pytest.approx(c.x0 + 40) and s.x1 == pytest.approx(c.x1 + 40)

    @given(st.floats(-150, 150), st.floats(-60, 60), st.floats(-60, 60))
    def test_translation_equivariance(self, dx, spread_l, spread_r):
        left = PolarLine.through((0 + spread_l, 480), (320, 240))
        right = PolarLine.through((640 + spread_r, 480), (320, 240))
        l2, r2 = shifted(left, dx), shifted(right, dx)
        vp, vp2 = vanishing_point(left, right), vanishing_point(l2, r2)
        assert vp2[0] == pytest.approx(vp[0] + dx, abs=1e-6)
        assert vp2[1] == pytest.approx(vp[1], abs=1e-6)
        roi, roi2 = compute_roi(left, right, vp, W, H), compute_roi(l2, r2, vp2, W, H)
        for p, q in zip(roi, roi2):
            assert q[0] == pytest.approx(p[0] + dx, abs=1e-6)
            assert q[1] == pytest.approx(p[1], abs=1e-6)
        c, c2 = center_line(left, right, W, H), center_line(l2, r2, W, H)
        assert c2.x0 == pytest.approx(c.x0 + dx, abs=1e-6)
        assert c2.x1 == pytest.approx(c.x1 + dx, abs=1e-6)


class TestSteering:
    def test_straight_ahead(self):
        assert steering_angle(Segment(320, 479, 320, 312), W, H) == 0.0

    def test_fifty_over_hundred(self):
        assert steering_angle(Segment(320, 479, 370, 379), W, H) == pytest.approx(26.565, abs=1e-3)

    def test_endpoint_order_irrelevant(self):
        assert steering_angle(Segment(370, 379, 320, 479), W, H) == pytest.approx(26.565, abs=1e-3)

    def test_zero_span(self):
        with pytest.raises(ValueError):
            steering_angle(Segment(0, 100, 50, 100), W, H)

    @given(st.floats(-2000, 2000), st.floats(-2000, 2000))
    def test_mirror(self, x0, x1):
        # the reference column is width/2, so a mirrored scene is off by one pixel
        a = steering_angle(Segment(x0, 479, x1, 312), W, H)
        b = steering_angle(Segment(W - 1 - x0, 479, W - 1 - x1, 312), W, H)
        assert abs(a + b) <= math.degrees(math.atan(1 / 167)) + 1e-9
        assert -90 <= a <= 90


class TestPreRoi:
    def test_default_shape(self):
        m = pre_roi_mask(W, H, LaneConfig().pre_roi)
        assert m[H - 1].all()
        top = round(0.55 * (H - 1)) + 1
        assert not m[:top - 1].any()
        assert m[top, W // 2] and not m[top, 0]

    def test_full_frame(self):
        assert pre_roi_mask(8, 8, ((0, 1), (1, 1), (1, 0), (0, 0))).all()


class TestDetect:
    def test_black_lost(self):
        est = detect_lane(black())
        assert est.status is Status.LOST and est.steering_angle == 0.0

    def test_too_small(self):
        with pytest.raises(ValueError):
            detect_lane(black(32, 32))

    @pytest.mark.parametrize("offset", [0.0, 0.1, -0.1])
    def test_rendered_straight(self, offset):
        frame, state = straight_frame(offset)
        est = detect_lane(frame)
        assert est.status is Status.TRACKED
        for found, truth in zip((est.left, est.right), truth_lines(state)):
            d_rho, d_theta = line_error(found, truth)
            assert d_rho <= 2 and d_theta <= 2

    def test_offset_steers_back(self):
        # vehicle left of centre sees the lane to its right
        assert detect_lane(straight_frame(0.1)[0]).steering_angle > 0
        assert detect_lane(straight_frame(-0.1)[0]).steering_angle < 0

    def test_pure(self):
        frame, _ = straight_frame(0.05)
        assert detect_lane(frame) == detect_lane(frame)

    def test_coasting_walkthrough(self):
        cfg = LaneConfig(max_coast_frames=3)
        prev = detect_lane(straight_frame(0.05)[0], cfg)
        assert prev.status is Status.TRACKED
        est = prev
        for n in range(1, 4):
            est = detect_lane(black(), cfg, est)
            assert est.status is Status.COASTING and est.coast_frames == n
            assert (est.left, est.right) == (prev.left, prev.right)
            assert est.steering_angle == prev.steering_angle
        est = detect_lane(black(), cfg, est)
        assert est.status is Status.LOST
        assert detect_lane(black(), cfg, est).status is Status.LOST
        assert detect_lane(straight_frame(0.05)[0], cfg, est).status is Status.TRACKED

    def test_no_coasting_allowed(self):
        cfg = LaneConfig(max_coast_frames=0)
        prev = detect_lane(straight_frame()[0], cfg)
        assert detect_lane(black(), cfg, prev).status is Status.LOST

    def test_transition_rules(self, rng):
        cfg = LaneConfig(max_coast_frames=2)
        good = [straight_frame(o)[0] for o in (-0.08, 0.0, 0.08)]
        blank = black()
        est = None
        run = 0
        for _ in range(40):
            frame = good[rng.integers(3)] if rng.random() < 0.5 else blank
            nxt = detect_lane(frame, cfg, est)
            before = Status.LOST if est is None else est.status
            assert (before, nxt.status) not in {(Status.LOST, Status.COASTING), (Status.TRACKED, Status.LOST)}
            run = run + 1 if nxt.status is Status.COASTING else 0
            assert run <= cfg.max_coast_frames and nxt.coast_frames == run
            if nxt.has_geometry:
                assert -90 <= nxt.steering_angle <= 90
            est = nxt

    @pytest.mark.parametrize("offset,heading", [(0.0, 0.0), (0.12, 0.0), (-0.07, 0.05), (0.03, -0.08)])
    def test_mirror_antisymmetry(self, offset, heading):
        frame, _ = straight_frame(offset, heading)
        a = detect_lane(frame)
        b = detect_lane(mirror(frame))
        assert a.status is Status.TRACKED and b.status is Status.TRACKED
        assert abs(a.steering_angle + b.steering_angle) <= 0.5
