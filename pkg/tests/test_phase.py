"""Phase-diagram drivers and SVG rendering tests."""

import math

import pytest

from graphentropy import errors
from graphentropy.graphon import Motif, bipodal_graphon, rate_value
from graphentropy.optimize import OptimConfig
from graphentropy.phase import (
    ScanSpec,
    crease_report,
    phase_diagram_scan,
    render_svg,
)

FAST = OptimConfig(m=8, multistart_count=2)


def test_scan_er_point():
    spec = ScanSpec(e_grid=[0.6], t_grid=[0.0], relative=True, config=FAST)
    table = phase_diagram_scan(spec)
    assert len(table) == 1
    row = table[0]
    assert row.status == "ok"
    assert row.s == pytest.approx(-rate_value(0.6), abs=1e-6)


def test_scan_rows_respect_ceiling_and_order():
    spec = ScanSpec(e_grid=[0.5], t_grid=[-1e-2, -1e-3, 0.0, 1e-3, 1e-2],
                    relative=True, config=FAST)
    table = phase_diagram_scan(spec)
    ts = [r.t for r in table]
    assert ts == sorted(ts)
    for r in table:
        if math.isfinite(r.s):
            assert r.s <= -rate_value(0.5) + 1e-9
    ridge = max(table, key=lambda r: r.s if math.isfinite(r.s) else -math.inf)
    assert ridge.t == pytest.approx(0.125, abs=1e-12)


def test_scan_records_infeasible_rows():
    spec = ScanSpec(e_grid=[0.5], t_grid=[0.4], relative=False, config=FAST)
    table = phase_diagram_scan(spec)
    assert table[0].status == "infeasible"
    assert math.isnan(table[0].s)


def test_scan_spec_validation():
    with pytest.raises(errors.ValueOutOfRange):
        ScanSpec(e_grid=[], t_grid=[0.0])


def test_crease_report_detects_triangle_crease():
    verdicts = crease_report([0.5], Motif.triangle(), FAST,
                             deltas=[1e-3, 3e-3, 1e-2, 3e-2])
    v = verdicts[0]
    assert v.crease_detected
    assert not v.one_sided
    assert v.left_quotient > v.right_quotient
    assert v.separation_sigma > 5.0


def test_svg_renders_deterministically():
    spec = ScanSpec(e_grid=[0.5], t_grid=[0.0, -1e-2], relative=True, config=FAST)
    table = phase_diagram_scan(spec)
    svg1 = render_svg(table, "heatmap")
    svg2 = render_svg(table, "heatmap")
    assert svg1 == svg2
    assert svg1.startswith("<svg") and svg1.endswith("</svg>")


def test_svg_region_and_graphon_kinds():
    region = render_svg(None, "region")
    assert "polyline" in region
    g = bipodal_graphon(0.5, 0.6, 0.4, 0.6, 4)
    block = render_svg(g, "graphon")
    assert block.count("<rect") >= 16


def test_svg_curves_kind():
    rows = [(1.0, -0.9, 0.15, 0.98), (2.0, -2.0, 0.02, 0.999)]
    svg = render_svg(rows, "curves")
    assert "polyline" in svg


def test_svg_empty_rejected():
    with pytest.raises(errors.EmptyTable):
        render_svg([], "heatmap")
    with pytest.raises(errors.EmptyTable):
        render_svg([], "curves")
    with pytest.raises(errors.ValueOutOfRange):
        render_svg([], "unknown")
