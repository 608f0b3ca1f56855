"""Report figures render non-empty PNG files."""

import math

from skinsafe.harness import aggregate
from skinsafe.plots import render_report_figures, threshold_timeline_figure
from test_harness import _record


def test_render_report_figures(tmp_path):
    recs = [
        _record(0),
        _record(1, policy="LINK_VELOCITY", total_time=7.0,
                level0_ticks=0, level1_ticks=40, level2_ticks=60),
        _record(2, policy="EFFECTIVE_MASS", reaction="AVOID", reacted=False,
                total_time=3.2, reaction_time=math.nan,
                detection_time=math.nan, level0_ticks=0, level1_ticks=50,
                level2_ticks=50),
    ]
    written = render_report_figures(aggregate(recs), tmp_path)
    assert written
    for path in written:
        assert path.suffix == ".png"
        assert path.stat().st_size > 1000


def test_threshold_timeline_figure(tmp_path):
    times = [0.0, 0.5, 1.0, 1.5]
    grid = [[0] * 11, [1] * 11, [2] * 11, [1] * 11]
    out = threshold_timeline_figure(times, grid, list(range(11)),
                                    tmp_path / "timeline.png")
    assert out.stat().st_size > 1000
