"""Exact primitives for crisp binary prediction audits.

Everything downstream (banding, disputability, reports) is built on the types
here: an ordered instance index, 0/1 label and prediction vectors aligned to
it, confusion counts, and ExactRatio, a rational number that remembers how it
was written.  No floats are involved in any comparison; 98/100 and 49/50 are
equal as values but keep their own display forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, total_ordering
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import AlignmentError, UndefinedMetricError

FAVOURABLE = 1
UNFAVOURABLE = 0

METRIC_KINDS = ("accuracy", "recall", "specificity", "precision")


def round_scaled(num: int, den: int, digits: int) -> int:
    """Round the non-negative ratio num/den to `digits` decimal places.

    Returns the scaled integer q such that q / 10**digits is the rounded
    value.  Pure integer arithmetic; exact midpoints round away from zero,
    so 925/1000 at two digits gives 93, not 92.
    """
    if den <= 0:
        raise ValueError(f"denominator must be positive, got {den}")
    if num < 0:
        raise ValueError(f"numerator must be non-negative, got {num}")
    if digits < 0:
        raise ValueError(f"digits must be non-negative, got {digits}")
    scale = 10**digits
    q = (num * scale) // den
    # round up iff the remainder is at least half a unit: num/den >= (2q+1)/2s
    if 2 * num * scale >= den * (2 * q + 1):
        q += 1
    return q


def decimal_display(num: int, den: int, digits: int = 4) -> str:
    """Exact decimal rendering of num/den with a fixed number of places."""
    q = round_scaled(num, den, digits)
    if digits == 0:
        return str(q)
    scale = 10**digits
    return f"{q // scale}.{q % scale:0{digits}d}"


@total_ordering
@dataclass(frozen=True, eq=False)
class ExactRatio:
    """A ratio in [0, 1] compared by value but displayed as written.

    Equality and ordering use cross multiplication, so ExactRatio(49, 50) ==
    ExactRatio(98, 100), while str() keeps the original numerator and
    denominator.  Hash goes through the reduced fraction so equal ratios
    collide as dict keys.
    """

    num: int
    den: int

    def __post_init__(self) -> None:
        if not isinstance(self.num, int) or not isinstance(self.den, int):
            raise TypeError("ExactRatio takes integer numerator and denominator")
        if self.den <= 0:
            raise ValueError(f"denominator must be positive, got {self.den}")
        if not 0 <= self.num <= self.den:
            raise ValueError(f"ratio {self.num}/{self.den} is outside [0, 1]")

    @classmethod
    def from_fraction(cls, value: Fraction) -> "ExactRatio":
        return cls(value.numerator, value.denominator)

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def display(self, digits: int = 4) -> str:
        return decimal_display(self.num, self.den, digits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExactRatio):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __lt__(self, other: "ExactRatio") -> bool:
        if not isinstance(other, ExactRatio):
            return NotImplemented
        return self.num * other.den < other.num * self.den

    def __hash__(self) -> int:
        return hash(Fraction(self.num, self.den))

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


@dataclass(frozen=True)
class InstanceIndex:
    """Ordered, duplicate-free instance identifiers.

    Labels and predictions are aligned by position against one shared index;
    two vectors are comparable only when their indices are equal (same ids in
    the same order).
    """

    ids: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        if not self.ids:
            raise ValueError("instance index must not be empty")
        if len(set(self.ids)) != len(self.ids):
            seen: set[str] = set()
            dup = next(i for i in self.ids if i in seen or seen.add(i))
            raise ValueError(f"duplicate instance id {dup!r} in index")

    @property
    def size(self) -> int:
        return len(self.ids)

    @cached_property
    def _positions(self) -> dict[str, int]:
        return {instance_id: pos for pos, instance_id in enumerate(self.ids)}

    def position(self, instance_id: str) -> int:
        try:
            return self._positions[instance_id]
        except KeyError:
            raise KeyError(f"instance id {instance_id!r} not in index") from None

    def __contains__(self, instance_id: object) -> bool:
        return instance_id in self._positions

    def __iter__(self) -> Iterator[str]:
        return iter(self.ids)

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class _BinaryVector:
    index: InstanceIndex
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        coerced = tuple(int(v) for v in self.values)
        if any(v not in (UNFAVOURABLE, FAVOURABLE) for v in coerced):
            bad = next(v for v in coerced if v not in (UNFAVOURABLE, FAVOURABLE))
            raise ValueError(f"binary vector values must be 0 or 1, got {bad}")
        object.__setattr__(self, "values", coerced)
        if len(self.values) != self.index.size:
            raise AlignmentError(
                f"{len(self.values)} values for an index of size {self.index.size}"
            )

    @cached_property
    def as_array(self) -> np.ndarray:
        arr = np.array(self.values, dtype=np.uint8)
        arr.flags.writeable = False
        return arr

    def value_for(self, instance_id: str) -> int:
        return self.values[self.index.position(instance_id)]


@dataclass(frozen=True)
class LabelVector(_BinaryVector):
    """Ground-truth labels over an index; 1 is the favourable class."""

    @property
    def positives(self) -> int:
        return int(np.count_nonzero(self.as_array))

    @property
    def negatives(self) -> int:
        return self.index.size - self.positives


@dataclass(frozen=True)
class PredictionVector(_BinaryVector):
    """Crisp 0/1 predictions of one model run over an index."""


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts of a prediction vector against labels; favourable class is 1."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fn", "fp", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.total == 0:
            raise ValueError("confusion matrix must count at least one instance")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


def confusion_matrix(preds: PredictionVector, labels: LabelVector) -> ConfusionMatrix:
    """Tally predictions against labels sharing the same index."""
    if preds.index != labels.index:
        raise AlignmentError(
            "predictions and labels use different instance indices "
            f"({preds.index.size} vs {labels.index.size} ids)"
        )
    p = preds.as_array
    y = labels.as_array
    tp = int(np.count_nonzero(p & y))
    fp = int(np.count_nonzero(p > y))
    fn = int(np.count_nonzero(y > p))
    tn = len(y) - tp - fp - fn
    return ConfusionMatrix(tp=tp, fn=fn, fp=fp, tn=tn)


def metric(cm: ConfusionMatrix, kind: str) -> ExactRatio:
    """One of accuracy / recall / specificity / precision, as an exact ratio.

    Raises UndefinedMetricError when the metric's denominator is zero, rather
    than inventing a value.
    """
    if kind == "accuracy":
        return ExactRatio(cm.tp + cm.tn, cm.total)
    if kind == "recall":
        den = cm.tp + cm.fn
        if den == 0:
            raise UndefinedMetricError("recall is undefined: no favourable-labelled instances")
        return ExactRatio(cm.tp, den)
    if kind == "specificity":
        den = cm.tn + cm.fp
        if den == 0:
            raise UndefinedMetricError(
                "specificity is undefined: no unfavourable-labelled instances"
            )
        return ExactRatio(cm.tn, den)
    if kind == "precision":
        den = cm.tp + cm.fp
        if den == 0:
            raise UndefinedMetricError("precision is undefined: no favourable predictions")
        return ExactRatio(cm.tp, den)
    raise ValueError(f"unknown metric kind {kind!r}; expected one of {METRIC_KINDS}")


@dataclass(frozen=True)
class ModelRun:
    """One classifier execution: predictions plus its recomputed utility.

    The utility (validation accuracy) is always derived from the stored
    predictions, never trusted from an external source; use from_predictions
    to construct runs so the two cannot drift apart.
    """

    run_id: str
    family_tag: str
    preds_validation: PredictionVector
    preds_fairness: PredictionVector
    utility: ExactRatio
    complexity: float | None = None

    def __post_init__(self) -> None:
        if not self.run_id:
            raise ValueError("run_id must be non-empty")
        if self.complexity is not None and self.complexity < 0:
            raise ValueError("complexity must be non-negative when given")

    @classmethod
    def from_predictions(
        cls,
        run_id: str,
        family_tag: str,
        preds_validation: PredictionVector,
        labels: LabelVector,
        preds_fairness: PredictionVector | None = None,
        complexity: float | None = None,
    ) -> "ModelRun":
        utility = metric(confusion_matrix(preds_validation, labels), "accuracy")
        return cls(
            run_id=run_id,
            family_tag=family_tag,
            preds_validation=preds_validation,
            preds_fairness=preds_fairness if preds_fairness is not None else preds_validation,
            utility=utility,
            complexity=complexity,
        )


def verify_utility(run: ModelRun, labels: LabelVector) -> bool:
    """True when the stored utility matches a fresh recomputation."""
    return run.utility == metric(confusion_matrix(run.preds_validation, labels), "accuracy")


def common_validation_index(runs: Sequence[ModelRun]) -> InstanceIndex:
    """The single validation index shared by all runs; error if mixed."""
    if not runs:
        raise ValueError("no runs given")
    index = runs[0].preds_validation.index
    for run in runs[1:]:
        if run.preds_validation.index != index:
            raise AlignmentError(
                f"run {run.run_id!r} uses a different validation index than "
                f"run {runs[0].run_id!r}"
            )
    return index


def runs_by_id(runs: Iterable[ModelRun]) -> dict[str, ModelRun]:
    """Index runs by id, rejecting duplicates."""
    out: dict[str, ModelRun] = {}
    for run in runs:
        if run.run_id in out:
            raise ValueError(f"duplicate run id {run.run_id!r}")
        out[run.run_id] = run
    return out
