"""Audit orchestration and the versioned JSON report.

run_audit glues the pipeline together: ingest, band, analyse every band,
render profiles, and assemble one JSON-ready payload in which every number
appears both as an exact ratio string and as a rounded decimal.  Emission is
canonical (sorted keys, fixed indentation, trailing newline), so the same
audit produces byte-identical reports and artefacts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .banding import Banding, BandingPolicy, PerformanceBand, partition, refine_lexicographic
from .core import ExactRatio, LabelVector, ModelRun, decimal_display
from .errors import InvariantViolation
from .fairness import (
    DiscrepancyStats,
    DisputableSet,
    FairEnsembleReport,
    ambiguity,
    ambiguity_by_group,
    discrepancy,
    disputable_instances,
    fair_ensemble,
    unique_vector_counts,
)
from .ingest import (
    AuditManifest,
    attach_fairness,
    load_fairness_predictions,
    load_manifest,
    load_predictions,
    read_group_map,
    read_labels,
)
from .profiles import (
    FoldPanelData,
    RenderedSvg,
    fairness_profile,
    multiplicity_panel,
    stability_profile,
)

FORMAT_VERSION = "1"

REPORT_BASENAME = "report.json"
PROFILE_BASENAMES = ("stability_profile", "fairness_profile", "multiplicity_panel")


def ratio_payload(value: ExactRatio) -> dict:
    """A ratio as both exact text and fixed-precision decimal."""
    return {"ratio": str(value), "decimal": value.display()}


def signed_payload(value: Fraction) -> dict:
    """Like ratio_payload but for signed exact deltas."""
    sign = "-" if value < 0 else ""
    return {
        "ratio": f"{value.numerator}/{value.denominator}",
        "decimal": sign + decimal_display(abs(value.numerator), value.denominator),
    }


@dataclass(frozen=True)
class BandAnalysis:
    """Everything computed about one band, in native types."""

    band: PerformanceBand
    unique_counts: tuple[int, ...]
    disputable: DisputableSet
    ambiguity: ExactRatio
    discrepancy: DiscrepancyStats
    ensemble: FairEnsembleReport
    group_ambiguity: dict[str, ExactRatio] | None
    refinement: tuple[PerformanceBand, ...] | None


@dataclass(frozen=True)
class PolicyComparison:
    """One row of the policy comparison table."""

    policy: str
    band_count: int
    top_band_label: str
    top_band_run_count: int
    top_band_ambiguity: ExactRatio


@dataclass(frozen=True)
class AuditOutcome:
    """In-memory result of one audit: inputs, analyses, payload, renders."""

    manifest: AuditManifest
    seed: int
    labels: LabelVector
    runs: tuple[ModelRun, ...]
    banding: Banding
    analyses: tuple[BandAnalysis, ...]
    comparison: tuple[PolicyComparison, ...]
    payload: dict
    renders: dict[str, RenderedSvg]


def compare_policies(
    runs: Sequence[ModelRun], policies: Sequence[BandingPolicy]
) -> tuple[PolicyComparison, ...]:
    """Band counts and top-band ambiguity under each candidate policy."""
    rows = []
    for policy in policies:
        banding = partition(runs, policy)
        top = banding.top
        rows.append(
            PolicyComparison(
                policy=policy.describe(),
                band_count=len(banding.bands),
                top_band_label=top.label,
                top_band_run_count=top.run_count,
                top_band_ambiguity=ambiguity(top, runs),
            )
        )
    return tuple(rows)


def default_comparison_policies(policy: BandingPolicy) -> tuple[BandingPolicy, ...]:
    """The audited policy next to the standard strict/round:3/round:2 ladder."""
    candidates = [
        policy,
        BandingPolicy.parse("strict"),
        BandingPolicy.parse("round:3"),
        BandingPolicy.parse("round:2"),
    ]
    out: list[BandingPolicy] = []
    seen: set[str] = set()
    for candidate in candidates:
        text = candidate.describe()
        if text not in seen:
            seen.add(text)
            out.append(candidate)
    return tuple(out)


def _analyse_band(
    band: PerformanceBand,
    runs: Sequence[ModelRun],
    labels: LabelVector,
    manifest: AuditManifest,
    seed: int,
    grouping: Mapping[str, str] | None,
) -> BandAnalysis:
    refinement = None
    if manifest.policy.tie_break:
        refinement = refine_lexicographic(band, runs, labels, manifest.policy.tie_break)
    return BandAnalysis(
        band=band,
        unique_counts=unique_vector_counts(band, runs),
        disputable=disputable_instances(band, runs),
        ambiguity=ambiguity(band, runs),
        discrepancy=discrepancy(band, runs, cap=manifest.discrepancy_cap, seed=seed),
        ensemble=fair_ensemble(band, runs, labels),
        group_ambiguity=ambiguity_by_group(band, runs, grouping) if grouping else None,
        refinement=refinement,
    )


def _discrepancy_payload(stats: DiscrepancyStats) -> dict:
    counts: dict[str, int] = {}
    for fraction in sorted(stats.pair_fractions):
        key = str(fraction)
        counts[key] = counts.get(key, 0) + 1
    mean = stats.mean_fraction
    return {
        "total_runs": stats.total_runs,
        "sampled_runs": stats.sampled_runs,
        "cap": stats.cap,
        "seed": stats.seed,
        "single_run": stats.single_run,
        "pair_count": stats.pair_count,
        "retained_run_ids": list(stats.run_ids),
        "fraction_counts": counts,
        "min": ratio_payload(stats.min_fraction) if stats.min_fraction is not None else None,
        "max": ratio_payload(stats.max_fraction) if stats.max_fraction is not None else None,
        "mean": signed_payload(mean) if mean is not None else None,
    }


def _band_payload(analysis: BandAnalysis) -> dict:
    band = analysis.band
    ensemble = analysis.ensemble
    return {
        "label": band.label,
        "mode": band.mode,
        "epsilon": ratio_payload(band.epsilon),
        "run_ids": list(band.run_ids),
        "run_count": band.run_count,
        "unique_vector_counts": list(analysis.unique_counts),
        "ambiguity": ratio_payload(analysis.ambiguity),
        "disputable": {
            "count": analysis.disputable.size,
            "instance_ids": list(analysis.disputable.instance_ids),
            "votes": {
                instance_id: list(vote)
                for instance_id, vote in analysis.disputable.per_instance_vote.items()
            },
        },
        "discrepancy": _discrepancy_payload(analysis.discrepancy),
        "fair_ensemble": {
            "accuracy": ratio_payload(ensemble.accuracy),
            "recall": ratio_payload(ensemble.recall),
            "specificity": ratio_payload(ensemble.specificity),
            "member_deltas": {
                run_id: {
                    "accuracy": signed_payload(delta.accuracy),
                    "recall": signed_payload(delta.recall),
                    "specificity": signed_payload(delta.specificity),
                }
                for run_id, delta in ensemble.member_deltas.items()
            },
        },
        "group_ambiguity": {
            group: ratio_payload(value) for group, value in analysis.group_ambiguity.items()
        }
        if analysis.group_ambiguity is not None
        else None,
        "refinement": [
            {"label": sub.label, "run_ids": list(sub.run_ids)} for sub in analysis.refinement
        ]
        if analysis.refinement is not None
        else None,
    }


def validate_payload(payload: dict) -> None:
    """Cheap structural sanity check before anything is written to disk."""
    required = (
        "format_version",
        "kind",
        "seed",
        "policy",
        "counts",
        "baseline_accuracy",
        "bands",
        "policy_comparison",
        "is_partition",
    )
    for key in required:
        if key not in payload:
            raise InvariantViolation(f"report payload lacks required key {key!r}")
    if payload["format_version"] != FORMAT_VERSION:
        raise InvariantViolation(f"unexpected format_version {payload['format_version']!r}")
    if not payload["bands"]:
        raise InvariantViolation("report payload has no bands")


def emit_json(payload: dict) -> str:
    """Canonical serialisation: sorted keys, two-space indent, one newline."""
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def run_audit(manifest: AuditManifest, seed_override: int | None = None) -> AuditOutcome:
    """Execute the full audit described by the manifest, in memory.

    seed_override (the CLI wires MULTIMAX_SEED into it) replaces the
    manifest seed for every seeded choice; the effective seed is recorded in
    the report either way.
    """
    seed = manifest.seed if seed_override is None else seed_override
    labels, value_map = read_labels(manifest.labels_path, manifest.favourable_label)
    family_tag = manifest.provenance.get("family", "ingested")
    runs = load_predictions(manifest.predictions_path, labels, value_map, family_tag=family_tag)
    if manifest.fairness_predictions_path is not None:
        _, fairness_vectors = load_fairness_predictions(
            manifest.fairness_predictions_path, value_map
        )
        runs = attach_fairness(runs, fairness_vectors)
    grouping = read_group_map(manifest.group_map_path) if manifest.group_map_path else None
    banding = partition(runs, manifest.policy)
    analyses = tuple(
        _analyse_band(band, runs, labels, manifest, seed, grouping) for band in banding
    )
    comparison = compare_policies(runs, default_comparison_policies(manifest.policy))

    top_bands = banding.bands[: manifest.profile_top_n]
    renders = {
        "stability_profile": stability_profile(
            banding.bands, runs, top_n=manifest.profile_top_n
        ),
        "fairness_profile": fairness_profile(
            top_bands,
            runs,
            variant=manifest.profile_variant,
            max_instances=manifest.profile_max_instances,
            seed=seed,
        ),
        "multiplicity_panel": multiplicity_panel(
            [
                FoldPanelData(
                    fold_id="all",
                    ambiguity={a.band.label: a.ambiguity for a in analyses},
                    discrepancy={a.band.label: a.discrepancy for a in analyses},
                    run_counts={a.band.label: a.band.run_count for a in analyses},
                )
            ],
            [band.label for band in banding.bands],
        ),
    }

    fairness_size = runs[0].preds_fairness.index.size
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": "audit_report",
        "seed": seed,
        "policy": manifest.policy.describe(),
        "tie_break": list(manifest.policy.tie_break),
        "favourable_label": manifest.favourable_label,
        "provenance": dict(sorted(manifest.provenance.items())),
        "counts": {
            "runs": len(runs),
            "validation_instances": labels.index.size,
            "fairness_instances": fairness_size,
        },
        "baseline_accuracy": ratio_payload(ExactRatio(labels.positives, labels.index.size)),
        "is_partition": banding.is_partition,
        "bands": [_band_payload(analysis) for analysis in analyses],
        "policy_comparison": [
            {
                "policy": row.policy,
                "band_count": row.band_count,
                "top_band_label": row.top_band_label,
                "top_band_run_count": row.top_band_run_count,
                "top_band_ambiguity": ratio_payload(row.top_band_ambiguity),
            }
            for row in comparison
        ],
    }
    validate_payload(payload)
    return AuditOutcome(
        manifest=manifest,
        seed=seed,
        labels=labels,
        runs=runs,
        banding=banding,
        analyses=analyses,
        comparison=comparison,
        payload=payload,
        renders=renders,
    )


def audit(
    manifest_path: Path, out_dir: Path, seed_override: int | None = None
) -> tuple[AuditOutcome, dict[str, Path]]:
    """File-level audit: load the manifest, run it, write every artefact.

    Writes report.json plus each profile as .svg with a .sidecar.json, and
    returns the outcome together with the written paths.
    """
    manifest = load_manifest(Path(manifest_path))
    outcome = run_audit(manifest, seed_override=seed_override)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    report_path = out_dir / REPORT_BASENAME
    report_path.write_text(emit_json(outcome.payload), encoding="utf-8")
    written["report"] = report_path
    for name in PROFILE_BASENAMES:
        render = outcome.renders[name]
        svg_path = out_dir / f"{name}.svg"
        svg_path.write_text(render.svg, encoding="utf-8")
        sidecar_path = out_dir / f"{name}.sidecar.json"
        sidecar_path.write_text(emit_json(render.sidecar), encoding="utf-8")
        written[name] = svg_path
        written[f"{name}.sidecar"] = sidecar_path
    return outcome, written
