"""Deterministic SVG views of band structure and disagreement.

Three renderers:

  stability_profile    per band, a pyramid of identical-prediction groups
  fairness_profile     per band and instance, every member's prediction as a
                       coloured cell (faithful row order or sorted summary)
  multiplicity_panel   ambiguity curves, discrepancy violins and run counts
                       across folds, sharing one band axis

Rendering is pure string building over already-computed numbers: the same
inputs give byte-identical SVG, so outputs are diffable and golden-file
testable.  Every renderer returns the SVG together with a JSON-ready sidecar
holding the plotted numbers, because pixels are not an API.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .banding import PerformanceBand
from .core import ExactRatio, decimal_display
from .errors import AlignmentError, AnalysisError
from .fairness import DiscrepancyStats, RunSource, member_matrix, prediction_vector_groups

_HEX_COLOR = re.compile(r"#[0-9a-f]{6}", re.IGNORECASE)

# colour-blind-friendly cycle; dashes disambiguate once colours repeat
DEFAULT_PALETTE = (
    "#0173b2",
    "#de8f05",
    "#029e73",
    "#d55e00",
    "#cc78bc",
    "#ca9161",
    "#fbafe4",
    "#949494",
    "#ece133",
    "#56b4e9",
    "#b2182b",
    "#2166ac",
)


@dataclass(frozen=True)
class ProfileStyle:
    """Shared look of the rendered profiles.

    favourable_shade / unfavourable_shade are mix weights towards white for
    the two prediction cells; they must stay well apart so the two outcomes
    survive both printing and mild colour-vision loss.
    """

    band_palette: tuple[str, ...] = DEFAULT_PALETTE
    dash_patterns: tuple[str, ...] = ("", "6,3", "2,2", "8,2,2,2")
    favourable_shade: float = 0.95
    unfavourable_shade: float = 0.30
    cell_px: int = 14
    font_px: int = 11
    max_width: int = 1600
    max_height: int = 1200

    def __post_init__(self) -> None:
        object.__setattr__(self, "band_palette", tuple(self.band_palette))
        object.__setattr__(self, "dash_patterns", tuple(self.dash_patterns))
        if not self.band_palette:
            raise ValueError("band_palette must not be empty")
        for colour in self.band_palette:
            if not _HEX_COLOR.fullmatch(colour):
                raise ValueError(f"palette entry {colour!r} is not a #rrggbb colour")
        for shade in (self.favourable_shade, self.unfavourable_shade):
            if not 0.0 <= shade <= 1.0:
                raise ValueError("shades must lie in [0, 1]")
        if abs(self.favourable_shade - self.unfavourable_shade) < 0.3:
            raise ValueError("favourable and unfavourable shades are too close to tell apart")
        if self.cell_px < 4:
            raise ValueError("cell_px below 4 is unreadable")
        if self.font_px < 6:
            raise ValueError("font_px below 6 is unreadable")
        if self.max_width < 200 or self.max_height < 200:
            raise ValueError("maximum canvas dimensions are too small")

    def band_colour(self, position: int) -> str:
        return self.band_palette[position % len(self.band_palette)]

    def band_dash(self, position: int) -> str:
        return self.dash_patterns[(position // len(self.band_palette)) % len(self.dash_patterns)]

    def prediction_fill(self, position: int, favourable: bool) -> str:
        weight = self.favourable_shade if favourable else self.unfavourable_shade
        return _mix_towards_white(self.band_colour(position), weight)


DEFAULT_STYLE = ProfileStyle()


def _mix_towards_white(colour: str, weight: float) -> str:
    channels = [int(colour[i : i + 2], 16) for i in (1, 3, 5)]
    mixed = [round(255 - weight * (255 - c)) for c in channels]
    return "#" + "".join(f"{c:02x}" for c in mixed)


def _fmt(value: float) -> str:
    # fixed two decimals keeps coordinates byte-stable across platforms
    return f"{float(value):.2f}"


class _SvgDoc:
    """Accumulates SVG elements; geometry decided by the caller."""

    def __init__(self) -> None:
        self.elements: list[str] = []

    def rect(
        self,
        x: float,
        y: float,
        w: float,
        h: float,
        fill: str,
        stroke: str | None = None,
        extra: str = "",
    ) -> None:
        attrs = f'x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" fill="{fill}"'
        if stroke is not None:
            attrs += f' stroke="{stroke}" stroke-width="1"'
        if extra:
            attrs += " " + extra
        self.elements.append(f"<rect {attrs}/>")

    def line(self, x1: float, y1: float, x2: float, y2: float, stroke: str = "#444") -> None:
        self.elements.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="1"/>'
        )

    def polyline(self, points: Sequence[tuple[float, float]], stroke: str, dash: str = "") -> None:
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.elements.append(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
            f'stroke-width="1.5"{dash_attr}/>'
        )

    def circle(self, cx: float, cy: float, r: float, fill: str) -> None:
        self.elements.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="{fill}"/>')

    def text(
        self,
        x: float,
        y: float,
        content: str,
        size: int,
        anchor: str = "start",
        fill: str = "#222222",
    ) -> None:
        self.elements.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
            f'text-anchor="{anchor}" fill="{fill}">{escape(content)}</text>'
        )

    def render(self, width: float, height: float, style: ProfileStyle) -> str:
        # the viewBox carries layout coordinates; width/height shrink the
        # display size when a profile outgrows the configured canvas
        scale = min(1.0, style.max_width / width, style.max_height / height)
        header = (
            '<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="0 0 {_fmt(width)} {_fmt(height)}" '
            f'width="{_fmt(width * scale)}" height="{_fmt(height * scale)}" '
            'font-family="sans-serif">'
        )
        body = "\n".join(self.elements)
        return f"{header}\n{body}\n</svg>\n"


@dataclass(frozen=True)
class RenderedSvg:
    """An SVG document plus the JSON-ready numbers it was drawn from."""

    svg: str
    sidecar: dict


def _hash_rank(seed: int, item: str) -> tuple[str, str]:
    return (hashlib.sha256(f"{seed}:{item}".encode()).hexdigest(), item)


def stability_profile(
    bands: Sequence[PerformanceBand],
    runs: RunSource,
    top_n: int = 8,
    style: ProfileStyle = DEFAULT_STYLE,
    which: str = "fairness",
) -> RenderedSvg:
    """One pyramid per band: its identical-prediction groups, largest at the base.

    Segment widths share a single per-run scale across bands, so a band of
    36 runs visibly dwarfs a band of 3 and equal-width segments mean equal
    multiplicity wherever they appear.
    """
    if top_n < 1:
        raise AnalysisError("top_n must be at least 1")
    shown = list(bands[:top_n])
    if not shown:
        raise AnalysisError("no bands to draw")
    counts_per_band = [
        [len(group) for group in prediction_vector_groups(band, runs, which=which)]
        for band in shown
    ]
    max_count = max(c for counts in counts_per_band for c in counts)
    max_segments = max(len(counts) for counts in counts_per_band)

    col_inner = max(110, style.cell_px * 8)
    col_gap = 24
    seg_h = style.cell_px + 2
    margin_left = 20
    margin_top = 48
    label_h = 2 * (style.font_px + 4)
    pyramid_h = max_segments * seg_h
    width = margin_left + len(shown) * (col_inner + col_gap) + margin_left
    height = margin_top + pyramid_h + label_h + 16
    unit = col_inner / max_count

    doc = _SvgDoc()
    doc.text(margin_left, 24, "stability profile: identical-prediction groups per band", style.font_px + 3)
    base_y = margin_top + pyramid_h
    sidecar_bands = []
    for pos, (band, counts) in enumerate(zip(shown, counts_per_band)):
        cx = margin_left + pos * (col_inner + col_gap) + col_inner / 2
        for level, count in enumerate(reversed(counts)):
            # widest group sits at the bottom; equal widths stack upwards
            w = count * unit
            x = cx - w / 2
            y = base_y - (level + 1) * seg_h
            shade = style.favourable_shade if level % 2 == 0 else (
                style.favourable_shade + style.unfavourable_shade
            ) / 2
            doc.rect(x, y, w, seg_h - 1, _mix_towards_white(style.band_colour(pos), shade), stroke=style.band_colour(pos))
            doc.text(cx, y + seg_h - 4, str(count), style.font_px - 1, anchor="middle")
        doc.line(cx - col_inner / 2, base_y, cx + col_inner / 2, base_y, stroke="#888888")
        doc.text(cx, base_y + style.font_px + 4, band.label, style.font_px, anchor="middle")
        doc.text(
            cx,
            base_y + 2 * (style.font_px + 4),
            f"{band.run_count} runs / {len(counts)} vectors",
            style.font_px - 1,
            anchor="middle",
        )
        sidecar_bands.append(
            {
                "label": band.label,
                "epsilon": str(band.epsilon),
                "run_count": band.run_count,
                "segments": sorted(counts, reverse=True),
            }
        )
    sidecar = {
        "kind": "stability_profile",
        "prediction_set": which,
        "bands": sidecar_bands,
    }
    return RenderedSvg(svg=doc.render(width, height, style), sidecar=sidecar)


def _select_columns(
    index_ids: tuple[str, ...],
    disputable_union: list[str],
    max_instances: int,
    seed: int,
) -> tuple[list[str], bool]:
    """Pick which instance columns to draw; True means sampling kicked in."""
    if len(index_ids) <= max_instances:
        return list(index_ids), False
    if len(disputable_union) > max_instances:
        chosen = sorted(disputable_union, key=lambda i: _hash_rank(seed, i))[:max_instances]
        order = {instance_id: pos for pos, instance_id in enumerate(index_ids)}
        return sorted(chosen, key=order.__getitem__), True
    disputed = set(disputable_union)
    columns = list(disputable_union)
    for instance_id in index_ids:
        if len(columns) >= max_instances:
            break
        if instance_id not in disputed:
            columns.append(instance_id)
    order = {instance_id: pos for pos, instance_id in enumerate(index_ids)}
    return sorted(columns, key=order.__getitem__), False


def fairness_profile(
    bands: Sequence[PerformanceBand],
    runs: RunSource,
    variant: str = "summary",
    max_instances: int = 250,
    style: ProfileStyle = DEFAULT_STYLE,
    seed: int = 0,
) -> RenderedSvg:
    """Per-instance predictions of every member of every band, as cell rows.

    The faithful variant keeps members in run-id order, so each row is a real
    model.  The summary variant sorts every column within each band block
    (favourable on top), which surrenders row identity but makes the vote
    split legible; per-(instance, band) prediction multisets are identical
    between the two variants by construction.

    When the fairness index outgrows max_instances, disputed columns win
    seats first; if even those overflow, a deterministic seeded sample of
    them is drawn and flagged in the legend and sidecar.
    """
    if variant not in ("faithful", "summary"):
        raise AnalysisError(f"unknown fairness profile variant {variant!r}")
    if max_instances < 1:
        raise AnalysisError("max_instances must be at least 1")
    shown = list(bands)
    if not shown:
        raise AnalysisError("no bands to draw")
    matrices = []
    index = None
    for band in shown:
        member_ids, matrix, band_index = member_matrix(band, runs, which="fairness")
        if index is None:
            index = band_index
        elif band_index != index:
            raise AlignmentError(f"band {band.label!r} uses a different fairness index")
        matrices.append((band, member_ids, matrix))
    assert index is not None

    disputable_union: list[str] = []
    disputed_any = np.zeros(index.size, dtype=bool)
    for _, _, matrix in matrices:
        disputed_any |= (matrix != matrix[0]).any(axis=0)
    disputable_union = [index.ids[pos] for pos in range(index.size) if disputed_any[pos]]

    columns, sampled = _select_columns(index.ids, disputable_union, max_instances, seed)
    if variant == "summary":
        disputed_set = set(disputable_union)
        columns = [c for c in columns if c in disputed_set] + [
            c for c in columns if c not in disputed_set
        ]
    col_pos = [index.position(c) for c in columns]

    cell = style.cell_px
    band_gap = 8
    margin_left = 140
    margin_top = 48
    legend_h = (style.font_px + 6) * (len(shown) + 2)
    total_rows = sum(len(member_ids) for _, member_ids, _ in matrices)
    width = margin_left + len(columns) * cell + 30
    height = margin_top + total_rows * cell + band_gap * len(shown) + legend_h + 30

    doc = _SvgDoc()
    title = f"fairness profile ({variant}): member predictions per instance"
    doc.text(20, 24, title, style.font_px + 3)
    sidecar_bands = []
    y = margin_top
    for pos, (band, member_ids, matrix) in enumerate(matrices):
        block = matrix[:, col_pos]
        if variant == "summary":
            block = np.sort(block, axis=0)[::-1]
        rows_meta = []
        for r in range(block.shape[0]):
            run_id = member_ids[r] if variant == "faithful" else None
            rows_meta.append({"run_id": run_id})
            for c in range(block.shape[1]):
                favourable = bool(block[r, c])
                doc.rect(
                    margin_left + c * cell,
                    y + r * cell,
                    cell - 1,
                    cell - 1,
                    style.prediction_fill(pos, favourable),
                )
        doc.text(
            margin_left - 8,
            y + (block.shape[0] * cell) / 2 + style.font_px / 2,
            band.label,
            style.font_px,
            anchor="end",
            fill=style.band_colour(pos),
        )
        counts = {
            column: [int(block[:, c].sum()), int(block.shape[0] - block[:, c].sum())]
            for c, column in enumerate(columns)
        }
        sidecar_bands.append(
            {
                "label": band.label,
                "members": list(member_ids),
                "rows": rows_meta,
                "column_counts": counts,
            }
        )
        y += block.shape[0] * cell + band_gap

    legend_y = y + style.font_px + 6
    doc.text(20, legend_y, "bands:", style.font_px)
    for pos, (band, _, _) in enumerate(matrices):
        ly = legend_y + (pos + 1) * (style.font_px + 6)
        doc.rect(20, ly - style.font_px + 2, style.font_px, style.font_px, style.band_colour(pos))
        doc.text(20 + style.font_px + 6, ly, band.label, style.font_px)
    note_y = legend_y + (len(matrices) + 1) * (style.font_px + 6)
    shade_x = 20
    doc.rect(shade_x, note_y - style.font_px + 2, style.font_px, style.font_px, style.prediction_fill(0, True))
    doc.text(shade_x + style.font_px + 6, note_y, "favourable", style.font_px)
    shade_x += 110
    doc.rect(shade_x, note_y - style.font_px + 2, style.font_px, style.font_px, style.prediction_fill(0, False))
    doc.text(shade_x + style.font_px + 6, note_y, "unfavourable", style.font_px)
    if sampled:
        doc.text(
            shade_x + 140,
            note_y,
            f"columns: seeded sample of {len(columns)} disputed instances (seed {seed})",
            style.font_px,
        )

    sidecar = {
        "kind": "fairness_profile",
        "variant": variant,
        "columns": columns,
        "sampled": sampled,
        "seed": seed,
        "disputable_union_size": len(disputable_union),
        "bands": sidecar_bands,
    }
    return RenderedSvg(svg=doc.render(width, height, style), sidecar=sidecar)


@dataclass(frozen=True)
class FoldPanelData:
    """One fold's per-band numbers for the multiplicity panel."""

    fold_id: str
    ambiguity: Mapping[str, ExactRatio]
    discrepancy: Mapping[str, DiscrepancyStats]
    run_counts: Mapping[str, int]


def multiplicity_panel(
    folds: Sequence[FoldPanelData],
    band_order: Sequence[str],
    style: ProfileStyle = DEFAULT_STYLE,
) -> RenderedSvg:
    """Three stacked panels over one band axis: ambiguity, discrepancy, counts.

    Discrepancy pools every fold's pairwise fractions per band into a
    mirrored histogram; a band whose folds all hold a single run draws an x
    marker (no pairs exist), and a band whose pairs all agree draws a flat
    dash at zero.  Run-count bars use a log scale and show each band's
    maximum across folds; per-fold counts live in the sidecar.
    """
    band_order = list(band_order)
    if not folds:
        raise AnalysisError("no folds to draw")
    if not band_order:
        raise AnalysisError("band_order must not be empty")
    if len(set(band_order)) != len(band_order):
        raise AnalysisError("band_order must not repeat labels")
    known = set(band_order)
    for fold in folds:
        for mapping_name, mapping in (
            ("ambiguity", fold.ambiguity),
            ("discrepancy", fold.discrepancy),
            ("run_counts", fold.run_counts),
        ):
            for label in mapping:
                if label not in known:
                    raise AnalysisError(
                        f"fold {fold.fold_id!r} reports {mapping_name} for unknown band {label!r}"
                    )

    col_w = max(64, style.cell_px * 5)
    margin_left = 70
    margin_top = 40
    panel_h = 130
    panel_gap = 34
    width = margin_left + len(band_order) * col_w + 30
    height = margin_top + 3 * panel_h + 2 * panel_gap + 60

    def band_x(i: int) -> float:
        return margin_left + i * col_w + col_w / 2

    doc = _SvgDoc()
    doc.text(20, 22, "multiplicity panel: ambiguity / discrepancy / run count by band", style.font_px + 3)

    # panel 1: ambiguity polylines, one per fold
    amb_top = margin_top
    amb_values = [
        float(fold.ambiguity[label].as_fraction())
        for fold in folds
        for label in fold.ambiguity
    ]
    amb_max = max(amb_values + [0.0]) or 1.0
    doc.text(margin_left - 10, amb_top + style.font_px, "ambiguity", style.font_px, anchor="end")
    doc.line(margin_left, amb_top + panel_h, width - 30, amb_top + panel_h)
    doc.line(margin_left, amb_top, margin_left, amb_top + panel_h)
    for tick in (0.0, 0.5, 1.0):
        ty = amb_top + panel_h - tick * (panel_h - 14)
        doc.text(margin_left - 6, ty + 3, f"{tick * amb_max * 100:.1f}%", style.font_px - 2, anchor="end")
    for fpos, fold in enumerate(folds):
        pts = []
        colour = style.band_colour(fpos)
        for i, label in enumerate(band_order):
            if label not in fold.ambiguity:
                continue
            value = float(fold.ambiguity[label].as_fraction())
            pts.append((band_x(i), amb_top + panel_h - (value / amb_max) * (panel_h - 14)))
        if len(pts) > 1:
            doc.polyline(pts, colour, dash=style.band_dash(fpos))
        for x, yy in pts:
            doc.circle(x, yy, 2.5, colour)

    # panel 2: pooled discrepancy violins
    disc_top = margin_top + panel_h + panel_gap
    doc.text(margin_left - 10, disc_top + style.font_px, "discrepancy", style.font_px, anchor="end")
    doc.line(margin_left, disc_top + panel_h, width - 30, disc_top + panel_h)
    doc.line(margin_left, disc_top, margin_left, disc_top + panel_h)
    pooled: dict[str, list[ExactRatio]] = {label: [] for label in band_order}
    single_only: dict[str, bool] = {label: True for label in band_order}
    seen_in_fold: dict[str, bool] = {label: False for label in band_order}
    for fold in folds:
        for label, stats in fold.discrepancy.items():
            seen_in_fold[label] = True
            pooled[label].extend(stats.pair_fractions)
            if not stats.single_run:
                single_only[label] = False
    disc_values = [float(f.as_fraction()) for fracs in pooled.values() for f in fracs]
    disc_max = max(disc_values + [0.0]) or 1.0
    for tick in (0.0, 0.5, 1.0):
        ty = disc_top + panel_h - tick * (panel_h - 14)
        doc.text(margin_left - 6, ty + 3, f"{tick * disc_max * 100:.1f}%", style.font_px - 2, anchor="end")
    n_bins = 12
    markers: dict[str, str] = {}
    for i, label in enumerate(band_order):
        x = band_x(i)
        fracs = pooled[label]
        if not seen_in_fold[label]:
            continue
        if not fracs and single_only[label]:
            markers[label] = "single-run"
            arm = 5.0
            yy = disc_top + panel_h
            doc.polyline([(x - arm, yy - arm), (x + arm, yy + arm)], "#444444")
            doc.polyline([(x - arm, yy + arm), (x + arm, yy - arm)], "#444444")
            continue
        values = [float(f.as_fraction()) for f in fracs]
        if all(v == 0.0 for v in values):
            markers[label] = "all-zero"
            doc.line(x - 8, disc_top + panel_h, x + 8, disc_top + panel_h, stroke="#444444")
            continue
        markers[label] = "violin"
        hist, edges = np.histogram(values, bins=n_bins, range=(0.0, disc_max))
        peak = int(hist.max())
        half_unit = (col_w / 2 - 4) / peak
        bin_h = (panel_h - 14) / n_bins
        for b in range(n_bins):
            if hist[b] == 0:
                continue
            half = hist[b] * half_unit
            y_lo = disc_top + panel_h - (b + 1) * bin_h
            doc.rect(x - half, y_lo, 2 * half, bin_h - 0.5, style.band_colour(i % len(style.band_palette)))
    for i, label in enumerate(band_order):
        doc.text(band_x(i), disc_top + panel_h + style.font_px + 4, label, style.font_px - 1, anchor="middle")

    # panel 3: run counts (log scale, max across folds)
    cnt_top = disc_top + panel_h + panel_gap + style.font_px + 8
    doc.text(margin_left - 10, cnt_top + style.font_px, "runs", style.font_px, anchor="end")
    doc.line(margin_left, cnt_top + panel_h, width - 30, cnt_top + panel_h)
    doc.line(margin_left, cnt_top, margin_left, cnt_top + panel_h)
    max_counts = {
        label: max((fold.run_counts.get(label, 0) for fold in folds), default=0)
        for label in band_order
    }
    global_max = max(list(max_counts.values()) + [1])
    log_cap = float(np.log10(global_max + 1))
    for i, label in enumerate(band_order):
        count = max_counts[label]
        if count == 0:
            continue
        h = (float(np.log10(count + 1)) / log_cap) * (panel_h - 18)
        x = band_x(i)
        doc.rect(x - col_w / 4, cnt_top + panel_h - h, col_w / 2, h, style.band_colour(i % len(style.band_palette)))
        doc.text(x, cnt_top + panel_h - h - 4, str(count), style.font_px - 2, anchor="middle")

    sidecar = {
        "kind": "multiplicity_panel",
        "bands": band_order,
        "markers": markers,
        "folds": [
            {
                "fold_id": fold.fold_id,
                "ambiguity": {label: str(r) for label, r in sorted(fold.ambiguity.items())},
                "run_counts": {label: fold.run_counts[label] for label in sorted(fold.run_counts)},
                "pair_counts": {
                    label: fold.discrepancy[label].pair_count
                    for label in sorted(fold.discrepancy)
                },
            }
            for fold in folds
        ],
        "pooled_fraction_counts": {
            label: _fraction_counts(pooled[label]) for label in band_order if seen_in_fold[label]
        },
    }
    return RenderedSvg(svg=doc.render(width, height, style), sidecar=sidecar)


def _fraction_counts(fractions: Sequence[ExactRatio]) -> dict[str, int]:
    """Compact distribution of exact fractions: display string -> occurrences."""
    out: dict[str, int] = {}
    for fraction in sorted(fractions):
        key = str(fraction)
        out[key] = out.get(key, 0) + 1
    return out
