"""File formats: label/prediction CSVs and the flat audit manifest.

Inputs are validated row by row and rejected with path:line context; an
audit either ingests a file completely or refuses it, there is no partial
acceptance.  Predictions arrive in long form (run_id, instance_id,
prediction) using the same value vocabulary as the label file, so the files
stay greppable and diffable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .banding import BandingPolicy
from .core import InstanceIndex, LabelVector, ModelRun, PredictionVector
from .errors import ValidationError

LABEL_HEADER = ["instance_id", "label"]
PREDICTION_HEADER = ["run_id", "instance_id", "prediction"]
GROUP_HEADER = ["instance_id", "group"]

MANIFEST_REQUIRED = ("labels", "predictions", "favourable_label", "band")
MANIFEST_OPTIONAL = (
    "fairness_predictions",
    "group_map",
    "tie_break",
    "discrepancy_cap",
    "seed",
    "profile_top_n",
    "profile_variant",
    "profile_max_instances",
)
PROVENANCE_PREFIX = "provenance."


def _read_rows(path: Path, header: list[str]) -> list[tuple[int, list[str]]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read file: {exc}", path=str(path)) from None
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ValidationError("file is empty", path=str(path))
    got = [cell.strip() for cell in rows[0]]
    if got != header:
        raise ValidationError(
            f"expected header {','.join(header)!r}, got {','.join(got)!r}",
            path=str(path),
            line=1,
        )
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ValidationError(
                f"expected {len(header)} fields, got {len(row)}", path=str(path), line=lineno
            )
        cells = [cell.strip() for cell in row]
        if any(not cell for cell in cells):
            raise ValidationError("empty field", path=str(path), line=lineno)
        out.append((lineno, cells))
    if not out:
        raise ValidationError("no data rows", path=str(path))
    return out


def read_labels(path: Path, favourable_label: str) -> tuple[LabelVector, dict[str, int]]:
    """Load the label file; returns the labels and the value vocabulary.

    The file must use exactly two distinct label values, one of them the
    favourable label; instance order in the file defines the validation
    index.  The returned mapping sends each raw value to 0 or 1 and is the
    vocabulary prediction files must use.
    """
    rows = _read_rows(path, LABEL_HEADER)
    ids: list[str] = []
    raw: list[str] = []
    seen: set[str] = set()
    for lineno, (instance_id, value) in rows:
        if instance_id in seen:
            raise ValidationError(
                f"duplicate instance id {instance_id!r}", path=str(path), line=lineno
            )
        seen.add(instance_id)
        ids.append(instance_id)
        raw.append(value)
    values = sorted(set(raw))
    if favourable_label not in values:
        raise ValidationError(
            f"favourable label {favourable_label!r} never occurs (values: {values})",
            path=str(path),
        )
    if len(values) > 2:
        raise ValidationError(
            f"labels must be binary; found {len(values)} distinct values {values}",
            path=str(path),
        )
    if len(values) == 1:
        raise ValidationError(
            f"labels must be binary; only {values[0]!r} occurs", path=str(path)
        )
    value_map = {value: 1 if value == favourable_label else 0 for value in values}
    index = InstanceIndex(tuple(ids))
    return LabelVector(index, tuple(value_map[v] for v in raw)), value_map


def _read_prediction_table(
    path: Path, value_map: Mapping[str, int]
) -> tuple[list[str], dict[str, dict[str, int]], dict[str, int]]:
    """Parse a long-form prediction file into per-run id->value mappings.

    Returns run ids in first-appearance order, the per-run mappings, and
    instance ids in first-appearance order (as an ordered mapping to their
    first line, for error reporting).
    """
    rows = _read_rows(path, PREDICTION_HEADER)
    run_order: list[str] = []
    per_run: dict[str, dict[str, int]] = {}
    instance_first_seen: dict[str, int] = {}
    for lineno, (run_id, instance_id, value) in rows:
        if value not in value_map:
            raise ValidationError(
                f"prediction value {value!r} is not a label value "
                f"(expected one of {sorted(value_map)})",
                path=str(path),
                line=lineno,
            )
        bucket = per_run.get(run_id)
        if bucket is None:
            bucket = per_run[run_id] = {}
            run_order.append(run_id)
        if instance_id in bucket:
            raise ValidationError(
                f"duplicate prediction for run {run_id!r}, instance {instance_id!r}",
                path=str(path),
                line=lineno,
            )
        bucket[instance_id] = value_map[value]
        instance_first_seen.setdefault(instance_id, lineno)
    return run_order, per_run, instance_first_seen


def load_predictions(
    path: Path,
    labels: LabelVector,
    value_map: Mapping[str, int],
    family_tag: str = "ingested",
) -> tuple[ModelRun, ...]:
    """Load validation predictions as ModelRuns with recomputed utilities.

    Every run must predict every instance of the label index and nothing
    else.  Runs come back in first-appearance order.
    """
    run_order, per_run, _ = _read_prediction_table(path, value_map)
    index = labels.index
    runs = []
    for run_id in run_order:
        bucket = per_run[run_id]
        unknown = [i for i in bucket if i not in index]
        if unknown:
            raise ValidationError(
                f"run {run_id!r} predicts unknown instance {unknown[0]!r}", path=str(path)
            )
        missing = [i for i in index.ids if i not in bucket]
        if missing:
            raise ValidationError(
                f"run {run_id!r} misses {len(missing)} instances "
                f"(first missing: {missing[0]!r})",
                path=str(path),
            )
        preds = PredictionVector(index, tuple(bucket[i] for i in index.ids))
        runs.append(
            ModelRun.from_predictions(
                run_id=run_id, family_tag=family_tag, preds_validation=preds, labels=labels
            )
        )
    return tuple(runs)


def load_fairness_predictions(
    path: Path, value_map: Mapping[str, int]
) -> tuple[InstanceIndex, dict[str, PredictionVector]]:
    """Load fairness-set predictions; the set needs no labels.

    The fairness index is the first run's instance order; every other run
    must cover exactly the same instances.
    """
    run_order, per_run, first_seen = _read_prediction_table(path, value_map)
    first_run = run_order[0]
    index = InstanceIndex(tuple(per_run[first_run].keys()))
    vectors: dict[str, PredictionVector] = {}
    for run_id in run_order:
        bucket = per_run[run_id]
        extra = [i for i in bucket if i not in index]
        if extra:
            raise ValidationError(
                f"run {run_id!r} predicts instance {extra[0]!r} outside the fairness index "
                f"defined by run {first_run!r}",
                path=str(path),
                line=first_seen[extra[0]],
            )
        missing = [i for i in index.ids if i not in bucket]
        if missing:
            raise ValidationError(
                f"run {run_id!r} misses fairness instance {missing[0]!r} "
                f"({len(missing)} missing in total)",
                path=str(path),
            )
        vectors[run_id] = PredictionVector(index, tuple(bucket[i] for i in index.ids))
    return index, vectors


def attach_fairness(
    runs: Sequence[ModelRun], fairness: Mapping[str, PredictionVector]
) -> tuple[ModelRun, ...]:
    """Swap each run's fairness vector for the one loaded from file.

    The two run sets must match exactly; a fairness file for different runs
    is a wiring mistake, not something to heal silently.
    """
    run_ids = {run.run_id for run in runs}
    missing = sorted(run_ids - set(fairness))
    if missing:
        raise ValidationError(f"fairness predictions missing for run {missing[0]!r}")
    extra = sorted(set(fairness) - run_ids)
    if extra:
        raise ValidationError(f"fairness predictions for unknown run {extra[0]!r}")
    return tuple(
        ModelRun(
            run_id=run.run_id,
            family_tag=run.family_tag,
            preds_validation=run.preds_validation,
            preds_fairness=fairness[run.run_id],
            utility=run.utility,
            complexity=run.complexity,
        )
        for run in runs
    )


def read_group_map(path: Path) -> dict[str, str]:
    """instance_id -> group name; duplicates rejected."""
    rows = _read_rows(path, GROUP_HEADER)
    out: dict[str, str] = {}
    for lineno, (instance_id, group) in rows:
        if instance_id in out:
            raise ValidationError(
                f"duplicate group assignment for {instance_id!r}", path=str(path), line=lineno
            )
        out[instance_id] = group
    return out


@dataclass(frozen=True)
class AuditManifest:
    """Everything one audit needs, resolved from a flat key=value file."""

    labels_path: Path
    predictions_path: Path
    favourable_label: str
    policy: BandingPolicy
    fairness_predictions_path: Path | None = None
    group_map_path: Path | None = None
    discrepancy_cap: int = 500
    seed: int = 0
    profile_top_n: int = 8
    profile_variant: str = "summary"
    profile_max_instances: int = 250
    provenance: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.discrepancy_cap < 2:
            raise ValidationError("discrepancy_cap must be at least 2")
        if self.profile_top_n < 1:
            raise ValidationError("profile_top_n must be at least 1")
        if self.profile_variant not in ("summary", "faithful"):
            raise ValidationError(f"unknown profile_variant {self.profile_variant!r}")
        if self.profile_max_instances < 1:
            raise ValidationError("profile_max_instances must be at least 1")


def _parse_int(raw: str, key: str, path: Path, line: int) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{key} must be an integer, got {raw!r}", path=str(path), line=line) from None


def load_manifest(path: Path) -> AuditManifest:
    """Parse the audit manifest: key=value lines, # comments, relative paths.

    Unknown keys are rejected (typos must not silently change an audit);
    provenance.* keys are free-form and echoed into the report.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read manifest: {exc}", path=str(path)) from None
    values: dict[str, str] = {}
    value_lines: dict[str, int] = {}
    provenance: dict[str, str] = {}
    for lineno, raw_line in enumerate(lines, start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError("expected key=value", path=str(path), line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ValidationError("empty key or value", path=str(path), line=lineno)
        if key.startswith(PROVENANCE_PREFIX):
            provenance[key[len(PROVENANCE_PREFIX):]] = value
            continue
        if key not in MANIFEST_REQUIRED and key not in MANIFEST_OPTIONAL:
            raise ValidationError(f"unknown manifest key {key!r}", path=str(path), line=lineno)
        if key in values:
            raise ValidationError(f"duplicate manifest key {key!r}", path=str(path), line=lineno)
        values[key] = value
        value_lines[key] = lineno
    for key in MANIFEST_REQUIRED:
        if key not in values:
            raise ValidationError(f"missing required manifest key {key!r}", path=str(path))
    base = path.parent

    def resolve(key: str) -> Path:
        return (base / values[key]).resolve() if not Path(values[key]).is_absolute() else Path(values[key])

    tie_break: tuple[str, ...] = ()
    if "tie_break" in values:
        tie_break = tuple(part.strip() for part in values["tie_break"].split(",") if part.strip())
    try:
        policy = BandingPolicy.parse(values["band"], tie_break=tie_break)
    except ValueError as exc:
        raise ValidationError(str(exc), path=str(path), line=value_lines["band"]) from None
    return AuditManifest(
        labels_path=resolve("labels"),
        predictions_path=resolve("predictions"),
        favourable_label=values["favourable_label"],
        policy=policy,
        fairness_predictions_path=resolve("fairness_predictions")
        if "fairness_predictions" in values
        else None,
        group_map_path=resolve("group_map") if "group_map" in values else None,
        discrepancy_cap=_parse_int(values["discrepancy_cap"], "discrepancy_cap", path, value_lines["discrepancy_cap"])
        if "discrepancy_cap" in values
        else 500,
        seed=_parse_int(values["seed"], "seed", path, value_lines["seed"]) if "seed" in values else 0,
        profile_top_n=_parse_int(values["profile_top_n"], "profile_top_n", path, value_lines["profile_top_n"])
        if "profile_top_n" in values
        else 8,
        profile_variant=values.get("profile_variant", "summary"),
        profile_max_instances=_parse_int(
            values["profile_max_instances"], "profile_max_instances", path, value_lines["profile_max_instances"]
        )
        if "profile_max_instances" in values
        else 250,
        provenance=provenance,
    )


def write_labels_csv(path: Path, labels: LabelVector) -> None:
    """Write labels with the canonical 0/1 vocabulary."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(LABEL_HEADER)
        for instance_id, value in zip(labels.index.ids, labels.values):
            writer.writerow([instance_id, str(value)])


def write_predictions_csv(path: Path, runs: Iterable[ModelRun], which: str = "validation") -> None:
    """Write runs in long form, grouped by run in the given order."""
    if which not in ("validation", "fairness"):
        raise ValueError(f"unknown prediction set {which!r}")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(PREDICTION_HEADER)
        for run in runs:
            vector = run.preds_validation if which == "validation" else run.preds_fairness
            for instance_id, value in zip(vector.index.ids, vector.values):
                writer.writerow([run.run_id, instance_id, str(value)])


def write_manifest(path: Path, entries: Mapping[str, str]) -> None:
    """Write a flat manifest; values land verbatim."""
    lines = [f"{key}={value}" for key, value in entries.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
