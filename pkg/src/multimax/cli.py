"""Command-line interface.

Subcommands: audit, profile, fair-model, zoo, compare.  Exit codes are part
of the contract: 0 on success, 2 when inputs fail validation (files,
manifest, arguments), 3 when an analysis cannot be computed.  The
MULTIMAX_SEED environment variable overrides the manifest seed everywhere,
so a recorded report can be reproduced without editing files.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .banding import BandingPolicy
from .errors import (
    AlignmentError,
    AnalysisError,
    InvariantViolation,
    MultimaxError,
    UndefinedMetricError,
    ValidationError,
)
from .fairness import ensemble_predictions
from .ingest import (
    load_manifest,
    write_labels_csv,
    write_manifest,
    write_predictions_csv,
)
from .report import audit, compare_policies, emit_json, ratio_payload, run_audit
from .zoo import SCENARIOS, build_scenario

SEED_ENV = "MULTIMAX_SEED"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_COMPUTE = 3


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _cmd_audit(args: argparse.Namespace) -> int:
    outcome, written = audit(args.manifest, args.out, seed_override=_env_seed())
    top = outcome.analyses[0]
    print(f"policy: {outcome.payload['policy']}  runs: {outcome.payload['counts']['runs']}")
    print(f"bands: {len(outcome.banding.bands)}  (partition: {outcome.banding.is_partition})")
    print(
        f"top band {top.band.label}: {top.band.run_count} runs, "
        f"ambiguity {top.ambiguity} ({top.ambiguity.display()})"
    )
    for name in sorted(written):
        print(f"wrote {written[name]}")
    return EXIT_OK


def _cmd_profile(args: argparse.Namespace) -> int:
    manifest = load_manifest(Path(args.manifest))
    outcome = run_audit(manifest, seed_override=_env_seed())
    render = outcome.renders[args.kind]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(render.svg, encoding="utf-8")
    sidecar = out.parent / (out.stem + ".sidecar.json")
    sidecar.write_text(emit_json(render.sidecar), encoding="utf-8")
    print(f"wrote {out}")
    print(f"wrote {sidecar}")
    return EXIT_OK


def _cmd_fair_model(args: argparse.Namespace) -> int:
    manifest = load_manifest(Path(args.manifest))
    outcome = run_audit(manifest, seed_override=_env_seed())
    wanted = args.band
    for analysis in outcome.analyses:
        if analysis.band.label == wanted:
            break
    else:
        known = ", ".join(a.band.label for a in outcome.analyses)
        raise ValidationError(f"no band labelled {wanted!r}; bands: {known}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ensemble = analysis.ensemble
    payload = {
        "kind": "fair_model",
        "band": analysis.band.label,
        "run_count": analysis.band.run_count,
        "accuracy": ratio_payload(ensemble.accuracy),
        "recall": ratio_payload(ensemble.recall),
        "specificity": ratio_payload(ensemble.specificity),
        "resolved_disputes": analysis.disputable.size,
    }
    (out_dir / "fair_model.json").write_text(emit_json(payload), encoding="utf-8")
    fair_fairness = ensemble_predictions(analysis.band, outcome.runs, which="fairness")
    lines = ["run_id,instance_id,prediction"]
    for instance_id, value in zip(ensemble.preds.index.ids, ensemble.preds.values):
        lines.append(f"fair-ensemble,{instance_id},{value}")
    (out_dir / "fair_model_validation.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if fair_fairness.index != ensemble.preds.index:
        lines = ["run_id,instance_id,prediction"]
        for instance_id, value in zip(fair_fairness.index.ids, fair_fairness.values):
            lines.append(f"fair-ensemble,{instance_id},{value}")
        (out_dir / "fair_model_fairness.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"band {analysis.band.label}: accuracy {ensemble.accuracy}, recall {ensemble.recall}, specificity {ensemble.specificity}")
    print(f"wrote {out_dir / 'fair_model.json'}")
    return EXIT_OK


def _cmd_zoo(args: argparse.Namespace) -> int:
    seed = _env_seed()
    if seed is None:
        seed = args.seed
    scenario = build_scenario(args.scenario, seed=seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels_path = out_dir / "labels.csv"
    preds_path = out_dir / "predictions.csv"
    write_labels_csv(labels_path, scenario.validation.labels)
    write_predictions_csv(preds_path, scenario.runs, which="validation")
    entries = {
        "labels": labels_path.name,
        "predictions": preds_path.name,
        "favourable_label": "1",
        "band": args.banding,
        "seed": str(seed),
        "provenance.family": scenario.family.family_tag,
        "provenance.scenario": scenario.name,
    }
    if args.tie_break:
        entries["tie_break"] = args.tie_break
    if scenario.fairness is not None:
        fairness_path = out_dir / "fairness_predictions.csv"
        write_predictions_csv(fairness_path, scenario.runs, which="fairness")
        entries["fairness_predictions"] = fairness_path.name
    manifest_path = out_dir / "manifest.txt"
    write_manifest(manifest_path, entries)
    print(f"scenario {scenario.name}: {scenario.notes}")
    print(f"{len(scenario.runs)} runs over {scenario.validation.size} validation instances")
    for path in (labels_path, preds_path, manifest_path):
        print(f"wrote {path}")
    if scenario.fairness is not None:
        print(f"wrote {out_dir / 'fairness_predictions.csv'}")
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    manifest = load_manifest(Path(args.manifest))
    outcome = run_audit(manifest, seed_override=_env_seed())
    if args.policies:
        try:
            policies = tuple(BandingPolicy.parse(text) for text in args.policies)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        rows = compare_policies(outcome.runs, policies)
    else:
        rows = outcome.comparison
    header = ("policy", "bands", "top_band", "top_runs", "top_ambiguity")
    table = [header]
    for row in rows:
        table.append(
            (
                row.policy,
                str(row.band_count),
                row.top_band_label,
                str(row.top_band_run_count),
                f"{row.top_band_ambiguity} ({row.top_band_ambiguity.display()})",
            )
        )
    widths = [max(len(line[col]) for line in table) for col in range(len(header))]
    for line in table:
        print("  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip())
    if args.out:
        payload = {
            "kind": "policy_comparison",
            "rows": [
                {
                    "policy": row.policy,
                    "band_count": row.band_count,
                    "top_band_label": row.top_band_label,
                    "top_band_run_count": row.top_band_run_count,
                    "top_band_ambiguity": ratio_payload(row.top_band_ambiguity),
                }
                for row in rows
            ],
        }
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(emit_json(payload), encoding="utf-8")
        print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multimax",
        description="Audit individual fairness across equally-performing model runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_audit = sub.add_parser("audit", help="run a full audit from a manifest")
    p_audit.add_argument("--manifest", required=True, help="path to the audit manifest")
    p_audit.add_argument("--out", required=True, help="output directory for report and profiles")
    p_audit.set_defaults(func=_cmd_audit)

    p_profile = sub.add_parser("profile", help="render one profile from a manifest")
    p_profile.add_argument("--manifest", required=True)
    p_profile.add_argument(
        "--kind",
        choices=("stability_profile", "fairness_profile", "multiplicity_panel"),
        default="stability_profile",
    )
    p_profile.add_argument("--out", required=True, help="output SVG path")
    p_profile.set_defaults(func=_cmd_profile)

    p_fair = sub.add_parser("fair-model", help="materialise a band's fair ensemble")
    p_fair.add_argument("--manifest", required=True)
    p_fair.add_argument("--band", required=True, help="band label, as shown by audit")
    p_fair.add_argument("--out", required=True, help="output directory")
    p_fair.set_defaults(func=_cmd_fair_model)

    p_zoo = sub.add_parser("zoo", help="generate a synthetic scenario as audit inputs")
    p_zoo.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    p_zoo.add_argument("--seed", type=int, default=0)
    p_zoo.add_argument("--out", required=True, help="output directory")
    p_zoo.add_argument("--banding", default="strict", help="band policy to write into the manifest")
    p_zoo.add_argument(
        "--tie-break",
        dest="tie_break",
        default="",
        help="comma-separated tie-break metrics for the manifest",
    )
    p_zoo.set_defaults(func=_cmd_zoo)

    p_compare = sub.add_parser("compare", help="band counts under alternative policies")
    p_compare.add_argument("--manifest", required=True)
    p_compare.add_argument(
        "--policies",
        nargs="*",
        default=None,
        help="policies to compare (default: manifest policy, strict, round:3, round:2)",
    )
    p_compare.add_argument("--out", default=None, help="optional JSON output path")
    p_compare.set_defaults(func=_cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (AnalysisError, AlignmentError, UndefinedMetricError, InvariantViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except MultimaxError as exc:  # any future member of the hierarchy
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
