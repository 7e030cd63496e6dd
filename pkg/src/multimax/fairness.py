"""Individual-fairness analysis of a performance band.

A band's members all perform equally well, yet they may still disagree on
individual instances.  Those instances are disputable: the model actually
deployed decides their outcome even though every candidate was equally
justified.  This module measures that disagreement (ambiguity, pairwise
discrepancy), finds the disputable instances, and builds the fair ensemble
that grants the favourable outcome whenever any band member would.

All rates are exact ratios over the fairness index; nothing is estimated
except where run pairs are explicitly capped (and then the retained runs are
chosen by a deterministic seeded hash, recorded in the result).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .banding import PerformanceBand
from .core import (
    ExactRatio,
    InstanceIndex,
    LabelVector,
    ModelRun,
    PredictionVector,
    confusion_matrix,
    metric,
    runs_by_id,
)
from .errors import AlignmentError, AnalysisError, InvariantViolation

RunSource = Iterable[ModelRun] | Mapping[str, ModelRun]


def member_matrix(
    band: PerformanceBand, runs: RunSource, which: str = "fairness"
) -> tuple[tuple[str, ...], np.ndarray, InstanceIndex]:
    """Member ids (sorted), their stacked prediction rows, and the shared index.

    The workhorse behind every band-level analysis and the rendered
    profiles: one uint8 row per member, aligned to the shared index.
    """
    if which not in ("fairness", "validation"):
        raise ValueError(f"unknown prediction set {which!r}")
    lookup = runs if isinstance(runs, Mapping) else runs_by_id(runs)
    members = []
    for run_id in band.run_ids:
        if run_id not in lookup:
            raise AnalysisError(f"band member {run_id!r} missing from the run collection")
        members.append(lookup[run_id])
    vectors = [
        run.preds_fairness if which == "fairness" else run.preds_validation for run in members
    ]
    index = vectors[0].index
    for run, vec in zip(members, vectors):
        if vec.index != index:
            raise AlignmentError(f"run {run.run_id!r} uses a different {which} index")
    matrix = np.vstack([vec.as_array for vec in vectors])
    return tuple(run.run_id for run in members), matrix, index


@dataclass(frozen=True)
class DisputableSet:
    """Instances on which the band's members disagree, with the vote split."""

    band_label: str
    instance_ids: tuple[str, ...]
    per_instance_vote: dict[str, tuple[int, int]]  # id -> (favourable, unfavourable)

    @property
    def size(self) -> int:
        return len(self.instance_ids)

    def __contains__(self, instance_id: object) -> bool:
        return instance_id in self.per_instance_vote


def disputable_instances(
    band: PerformanceBand, runs: RunSource, fairness_index: InstanceIndex | None = None
) -> DisputableSet:
    """Fairness instances where at least two band members disagree.

    Instance ids come back in fairness-index order.  When fairness_index is
    given, the members' shared index must equal it.
    """
    member_ids, matrix, index = member_matrix(band, runs, which="fairness")
    if fairness_index is not None and index != fairness_index:
        raise AlignmentError("band members do not use the requested fairness index")
    disputed = (matrix != matrix[0]).any(axis=0)
    ones = matrix.sum(axis=0, dtype=np.int64)
    ids = []
    votes: dict[str, tuple[int, int]] = {}
    for pos, instance_id in enumerate(index.ids):
        if disputed[pos]:
            ids.append(instance_id)
            votes[instance_id] = (int(ones[pos]), len(member_ids) - int(ones[pos]))
    return DisputableSet(band_label=band.label, instance_ids=tuple(ids), per_instance_vote=votes)


def ambiguity(band: PerformanceBand, runs: RunSource) -> ExactRatio:
    """Disputable fraction of the fairness index, as an exact ratio."""
    _, matrix, index = member_matrix(band, runs, which="fairness")
    disputed = (matrix != matrix[0]).any(axis=0)
    return ExactRatio(int(np.count_nonzero(disputed)), index.size)


@dataclass(frozen=True)
class FairnessVerdict:
    """Whether one run treats every fairness instance like its whole band."""

    run_id: str
    band_label: str
    fair: bool
    witness_run: str | None = None
    witness_instance: str | None = None


def is_individually_fair(run_id: str, band: PerformanceBand, runs: RunSource) -> FairnessVerdict:
    """Check one band member against all the others.

    The run is individually fair when no other member contradicts it on any
    fairness instance; otherwise the verdict carries the first disagreeing
    (instance, run) pair in index order as a witness.
    """
    if run_id not in band.run_ids:
        raise AnalysisError(f"run {run_id!r} is not a member of band {band.label!r}")
    member_ids, matrix, index = member_matrix(band, runs, which="fairness")
    row = matrix[member_ids.index(run_id)]
    differs = matrix != row
    for pos in range(index.size):
        col = differs[:, pos]
        if col.any():
            other = member_ids[int(np.argmax(col))]
            return FairnessVerdict(
                run_id=run_id,
                band_label=band.label,
                fair=False,
                witness_run=other,
                witness_instance=index.ids[pos],
            )
    return FairnessVerdict(run_id=run_id, band_label=band.label, fair=True)


@dataclass(frozen=True)
class DiscrepancyStats:
    """Pairwise disagreement rates between (up to cap) runs of one band.

    run_ids are the retained members, sorted; pair_fractions follow the
    lexicographic pair order over them.  When the band exceeds the cap, the
    retained members are the ones with the smallest sha256("{seed}:{run_id}")
    digests, so the draw is reproducible from the recorded seed alone.
    """

    band_label: str
    total_runs: int
    cap: int
    seed: int
    run_ids: tuple[str, ...]
    pair_fractions: tuple[ExactRatio, ...]
    single_run: bool

    @property
    def sampled_runs(self) -> int:
        return len(self.run_ids)

    @property
    def pair_count(self) -> int:
        return len(self.pair_fractions)

    @property
    def min_fraction(self) -> ExactRatio | None:
        return min(self.pair_fractions) if self.pair_fractions else None

    @property
    def max_fraction(self) -> ExactRatio | None:
        return max(self.pair_fractions) if self.pair_fractions else None

    @property
    def mean_fraction(self) -> Fraction | None:
        if not self.pair_fractions:
            return None
        total = sum((f.as_fraction() for f in self.pair_fractions), Fraction(0))
        return total / len(self.pair_fractions)


def _hash_rank(seed: int, item: str) -> tuple[str, str]:
    return (hashlib.sha256(f"{seed}:{item}".encode()).hexdigest(), item)


def discrepancy(
    band: PerformanceBand, runs: RunSource, cap: int = 500, seed: int = 0
) -> DiscrepancyStats:
    """Disagreement fraction for every pair among up to cap retained runs."""
    if cap < 2:
        raise AnalysisError(f"discrepancy cap must be at least 2, got {cap}")
    member_ids, matrix, index = member_matrix(band, runs, which="fairness")
    if len(member_ids) > cap:
        retained = sorted(sorted(member_ids, key=lambda rid: _hash_rank(seed, rid))[:cap])
    else:
        retained = list(member_ids)
    rows = {rid: matrix[member_ids.index(rid)] for rid in retained}
    fractions = []
    for i, first in enumerate(retained):
        if i + 1 == len(retained):
            break
        rest = np.vstack([rows[other] for other in retained[i + 1 :]])
        counts = (rest != rows[first]).sum(axis=1)
        fractions.extend(ExactRatio(int(c), index.size) for c in counts)
    return DiscrepancyStats(
        band_label=band.label,
        total_runs=len(member_ids),
        cap=cap,
        seed=seed,
        run_ids=tuple(retained),
        pair_fractions=tuple(fractions),
        single_run=len(member_ids) == 1,
    )


def ensemble_predictions(
    band: PerformanceBand, runs: RunSource, which: str = "fairness"
) -> PredictionVector:
    """Pointwise maximum of the band: favourable wherever any member says so."""
    _, matrix, index = member_matrix(band, runs, which=which)
    return PredictionVector(index=index, values=tuple(int(v) for v in matrix.max(axis=0)))


@dataclass(frozen=True)
class MetricDeltas:
    """Exact metric changes of the ensemble relative to one member."""

    accuracy: Fraction
    recall: Fraction
    specificity: Fraction


@dataclass(frozen=True)
class FairEnsembleReport:
    """The band's max-ensemble on the validation set, with member-wise deltas."""

    band_label: str
    preds: PredictionVector
    accuracy: ExactRatio
    recall: ExactRatio
    specificity: ExactRatio
    member_deltas: dict[str, MetricDeltas]


def fair_ensemble(band: PerformanceBand, runs: RunSource, labels: LabelVector) -> FairEnsembleReport:
    """Build the band's max-ensemble and measure it on the validation labels.

    The ensemble predicts the favourable class for an instance exactly when
    some band member does, which removes every within-band dispute.  Its
    recall can only rise and its specificity can only fall relative to each
    member; that is enforced as a postcondition, not assumed.
    """
    member_ids, matrix, index = member_matrix(band, runs, which="validation")
    if labels.index != index:
        raise AlignmentError("labels do not use the band's validation index")
    preds = PredictionVector(index=index, values=tuple(int(v) for v in matrix.max(axis=0)))
    star = confusion_matrix(preds, labels)
    star_metrics = {kind: metric(star, kind) for kind in ("accuracy", "recall", "specificity")}
    lookup = runs if isinstance(runs, Mapping) else runs_by_id(runs)
    deltas: dict[str, MetricDeltas] = {}
    for run_id in member_ids:
        cm = confusion_matrix(lookup[run_id].preds_validation, labels)
        delta = MetricDeltas(
            accuracy=star_metrics["accuracy"].as_fraction() - metric(cm, "accuracy").as_fraction(),
            recall=star_metrics["recall"].as_fraction() - metric(cm, "recall").as_fraction(),
            specificity=star_metrics["specificity"].as_fraction()
            - metric(cm, "specificity").as_fraction(),
        )
        if delta.recall < 0 or delta.specificity > 0:
            raise InvariantViolation(
                f"ensemble must not lose recall or gain specificity against member {run_id!r}"
            )
        deltas[run_id] = delta
    return FairEnsembleReport(
        band_label=band.label,
        preds=preds,
        accuracy=star_metrics["accuracy"],
        recall=star_metrics["recall"],
        specificity=star_metrics["specificity"],
        member_deltas=deltas,
    )


def prediction_vector_groups(
    band: PerformanceBand, runs: RunSource, which: str = "fairness"
) -> tuple[tuple[str, ...], ...]:
    """Band members grouped by identical prediction vectors.

    Groups come back largest first (ties by first appearance among the sorted
    member ids); each group lists its member run ids sorted.
    """
    member_ids, matrix, _ = member_matrix(band, runs, which=which)
    groups: dict[bytes, list[str]] = {}
    for run_id, row in zip(member_ids, matrix):
        groups.setdefault(row.tobytes(), []).append(run_id)
    ordered = sorted(groups.values(), key=lambda g: (-len(g), member_ids.index(g[0])))
    return tuple(tuple(sorted(g)) for g in ordered)


def unique_vector_counts(
    band: PerformanceBand, runs: RunSource, which: str = "fairness"
) -> tuple[int, ...]:
    """Sizes of the identical-prediction groups, largest first."""
    return tuple(len(g) for g in prediction_vector_groups(band, runs, which=which))


def ambiguity_by_group(
    band: PerformanceBand, runs: RunSource, grouping: Mapping[str, str]
) -> dict[str, ExactRatio]:
    """Disputable fraction within each instance group, keyed by group name.

    grouping must cover every fairness instance (extra ids are ignored, a
    missing one is an error).  Group names come back sorted.
    """
    _, matrix, index = member_matrix(band, runs, which="fairness")
    missing = [instance_id for instance_id in index.ids if instance_id not in grouping]
    if missing:
        raise AnalysisError(
            f"group map does not cover instance {missing[0]!r} "
            f"({len(missing)} uncovered in total)"
        )
    disputed = (matrix != matrix[0]).any(axis=0)
    totals: dict[str, int] = {}
    hits: dict[str, int] = {}
    for pos, instance_id in enumerate(index.ids):
        group = grouping[instance_id]
        totals[group] = totals.get(group, 0) + 1
        if disputed[pos]:
            hits[group] = hits.get(group, 0) + 1
    return {
        group: ExactRatio(hits.get(group, 0), totals[group]) for group in sorted(totals)
    }
