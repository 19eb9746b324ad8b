"""Forest-plot SVG output.

Renders one group table from an analysis payload as a self-contained
SVG: a row per study result (citation, arm statistics, quantile
dotplot, flag glyph), a pooled bottom row for meta-analyzed groups, and
a shared horizontal axis. Output is a pure function of the payload, so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH = 860
MARGIN_LEFT = 12
TEXT_COL = 12
ARMS_COL = 230
PLOT_X = 470
PLOT_W = 360
ROW_H = 52
HEADER_H = 56
AXIS_H = 44
DOT_R = 4.0
FONT = "font-family=\"Helvetica, Arial, sans-serif\""


def _n(x: float) -> str:
    """Stable short decimal formatting for coordinates and labels."""
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _scale(axis: dict):
    lo, hi = axis["min"], axis["max"]
    span = hi - lo

    def to_px(v: float) -> float:
        return PLOT_X + (v - lo) / span * PLOT_W

    return to_px


def _dotplot_elems(dp: dict, to_px, baseline: float, fill: str) -> list[str]:
    out = []
    for dot in dp["dots"]:
        cx = to_px(dot["bin_center"])
        cy = baseline - DOT_R - dot["stack_index"] * (2 * DOT_R + 1)
        out.append(f'<circle cx="{_n(cx)}" cy="{_n(cy)}" r="{_n(DOT_R)}" fill="{fill}"/>')
    return out


def _axis_elems(axis: dict, y: float) -> list[str]:
    to_px = _scale(axis)
    lo, hi = axis["min"], axis["max"]
    out = [f'<line x1="{_n(PLOT_X)}" y1="{_n(y)}" x2="{_n(PLOT_X + PLOT_W)}" '
           f'y2="{_n(y)}" stroke="#444" stroke-width="1"/>']
    ticks = 6
    for i in range(ticks + 1):
        v = lo + (hi - lo) * i / ticks
        x = to_px(v)
        out.append(f'<line x1="{_n(x)}" y1="{_n(y)}" x2="{_n(x)}" y2="{_n(y + 5)}" '
                   f'stroke="#444" stroke-width="1"/>')
        out.append(f'<text x="{_n(x)}" y="{_n(y + 18)}" font-size="11" '
                   f'text-anchor="middle" {FONT} fill="#333">{_n(round(v, 4))}</text>')
    if lo < 0 < hi:
        zx = to_px(0.0)
        out.append(f'<line x1="{_n(zx)}" y1="{_n(HEADER_H - 8)}" x2="{_n(zx)}" '
                   f'y2="{_n(y)}" stroke="#999" stroke-width="1" stroke-dasharray="4 3"/>')
    return out


def render_group_svg(group: dict, question: str) -> str:
    """One forest plot for one analysis group table."""
    rows = group["rows"]
    pooled = group.get("pooled")
    n_rows = len(rows) + (1 if pooled or group.get("pooled_note") else 0)
    height = HEADER_H + max(1, n_rows) * ROW_H + AXIS_H
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}">',
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>',
        f'<text x="{MARGIN_LEFT}" y="20" font-size="15" font-weight="bold" {FONT} '
        f'fill="#111">{escape(group["name"])}</text>',
        f'<text x="{MARGIN_LEFT}" y="38" font-size="12" {FONT} fill="#555">'
        f'{escape(question)}</text>',
    ]
    axis = group.get("axis")
    to_px = _scale(axis) if axis else None

    y = HEADER_H
    for row in rows:
        base = y + ROW_H - 8
        label = row["citation"]
        if row["timepoint"] and row["timepoint"] != "post":
            label += f" [{row['timepoint']}]"
        color = "#1f77b4" if row["included"] else "#bbbbbb"
        parts.append(f'<text x="{TEXT_COL}" y="{_n(y + 20)}" font-size="12" {FONT} '
                     f'fill="#111">{escape(label)}</text>')
        if row.get("flag"):
            note = escape(row["flag"]["note"])
            parts.append(
                f'<g><text x="{TEXT_COL}" y="{_n(y + 36)}" font-size="12" {FONT} '
                f'fill="#c23b22">&#9873; flagged<title>{note}</title></text></g>')
        parts.append(f'<text x="{ARMS_COL}" y="{_n(y + 20)}" font-size="11" {FONT} '
                     f'fill="#444">{escape(row["arm_summary"])}</text>')
        eff = row["effect"]
        eff_txt = f'{eff["kind"]} {_n(round(eff["y"], 4))}'
        if not row["included"]:
            eff_txt += " (excluded)"
        parts.append(f'<text x="{ARMS_COL}" y="{_n(y + 36)}" font-size="11" {FONT} '
                     f'fill="#666">{eff_txt}</text>')
        if row.get("dotplot") and to_px:
            parts.extend(_dotplot_elems(row["dotplot"], to_px, base, color))
        y += ROW_H

    if pooled or group.get("pooled_note"):
        parts.append(f'<line x1="{MARGIN_LEFT}" y1="{_n(y)}" x2="{WIDTH - MARGIN_LEFT}" '
                     f'y2="{_n(y)}" stroke="#888" stroke-width="1"/>')
        base = y + ROW_H - 8
        if pooled:
            label = f'Pooled (k={pooled["k"]})'
            stats = (f'mu={_n(round(pooled["mu"], 4))} '
                     f'[{_n(round(pooled["ci95"][0], 4))}, {_n(round(pooled["ci95"][1], 4))}] '
                     f'tau2={_n(round(pooled["tau2"], 4))} I2={_n(round(pooled["I2"], 3))}')
            parts.append(f'<text x="{TEXT_COL}" y="{_n(y + 22)}" font-size="12" '
                         f'font-weight="bold" {FONT} fill="#111">{escape(label)}</text>')
            parts.append(f'<text x="{ARMS_COL}" y="{_n(y + 22)}" font-size="11" {FONT} '
                         f'fill="#444">{stats}</text>')
            if pooled.get("dotplot") and to_px:
                parts.extend(_dotplot_elems(pooled["dotplot"], to_px, base, "#d62728"))
        else:
            parts.append(f'<text x="{TEXT_COL}" y="{_n(y + 22)}" font-size="12" {FONT} '
                         f'fill="#666">{escape(group["pooled_note"])}</text>')
        y += ROW_H

    if axis:
        parts.extend(_axis_elems(axis, y + 6))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_analysis_svgs(payload: dict) -> dict:
    """Map of group name to standalone SVG document."""
    return {g["name"]: render_group_svg(g, payload["question"])
            for g in payload["groups"]}
