"""Enumerating classifier families over a shared dataset.

A family spec describes a finite candidate pool (explicit halfplanes,
perturbed polynomial fits, leave-one-out neighbour variants, reseeded trees).
Enumeration evaluates every candidate on the validation set (and on a
separate fairness point set when given), wraps each into a ModelRun with its
recomputed utility, and optionally deduplicates candidates that are
indistinguishable on a dense behaviour grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import ModelRun, PredictionVector
from ..errors import AnalysisError, InvariantViolation
from ..banding import PerformanceBand
from .classifiers import (
    AxisAlignedTreeClassifier,
    HalfplaneClassifier,
    NearestNeighborsClassifier,
    PolynomialBoundaryClassifier,
)
from .datasets import Dataset2D, PointSet
from .regions import grid_centres

FAMILY_KINDS = ("linear", "polynomial", "knn", "tree")


@dataclass(frozen=True)
class FamilySpec:
    """A finite, reproducible pool of same-kind classifiers.

    kind selects the classifier and which knobs matter:
      linear      lines, a tuple of (angle, offset) pairs
      polynomial  degree, n_variants perturbed refits at noise scale
      knn         k, perturbation "loo" (one variant per dropped point) or "none"
      tree        max_depth with n_seeds reseeded fits, or explicit stump
                  thresholds on feature 0 (favourable above)
    """

    kind: str
    tag: str = ""
    lines: tuple[tuple[float, float], ...] = ()
    degree: int = 1
    n_variants: int = 0
    scale: float = 0.25
    k: int = 1
    perturbation: str = "loo"
    max_depth: int = 1
    n_seeds: int = 0
    thresholds: tuple[float, ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; expected one of {FAMILY_KINDS}")
        if self.kind == "linear" and not self.lines:
            raise ValueError("a linear family needs at least one (angle, offset) line")
        if self.kind == "polynomial":
            if self.degree < 1:
                raise ValueError("degree must be at least 1")
            if self.n_variants < 0 or self.scale < 0:
                raise ValueError("n_variants and scale must be non-negative")
        if self.kind == "knn":
            if self.k < 1:
                raise ValueError("k must be at least 1")
            if self.perturbation not in ("loo", "none"):
                raise ValueError(f"unknown knn perturbation {self.perturbation!r}")
        if self.kind == "tree":
            if self.max_depth < 1:
                raise ValueError("max_depth must be at least 1")
            if not self.thresholds and self.n_seeds < 1:
                raise ValueError("a tree family needs stump thresholds or n_seeds >= 1")

    @property
    def family_tag(self) -> str:
        return self.tag or self.kind


@dataclass(frozen=True)
class ZooModel:
    """An enumerated candidate: the audit-facing run plus its classifier."""

    run: ModelRun
    classifier: object
    description: str


def _candidates(spec: FamilySpec, train: Dataset2D) -> list[tuple[object, str]]:
    X = train.points.as_array()
    y = train.labels.as_array
    out: list[tuple[object, str]] = []
    if spec.kind == "linear":
        for angle, offset in spec.lines:
            out.append(
                (HalfplaneClassifier(angle, offset), f"halfplane angle={angle:.4f} offset={offset:.4f}")
            )
    elif spec.kind == "polynomial":
        base = PolynomialBoundaryClassifier(degree=spec.degree).fit(X, y)
        out.append((base, f"poly degree={spec.degree} base fit"))
        rng = np.random.default_rng(spec.seed)
        for i in range(spec.n_variants):
            out.append((base.perturbed(rng, spec.scale), f"poly degree={spec.degree} variant {i}"))
    elif spec.kind == "knn":
        base = NearestNeighborsClassifier(k=spec.k).fit(X, y)
        out.append((base, f"{spec.k}-nn full training set"))
        if spec.perturbation == "loo":
            if len(X) - 1 < spec.k:
                raise AnalysisError(
                    f"cannot drop a training point: k={spec.k} needs {spec.k} of {len(X)} points"
                )
            for row in range(len(X)):
                out.append((base.without_point(row), f"{spec.k}-nn without row {row}"))
    else:
        for threshold in spec.thresholds:
            out.append(
                (
                    AxisAlignedTreeClassifier.stump(0, threshold, above=1),
                    f"stump x>{threshold:.4f}",
                )
            )
        for i in range(spec.n_seeds):
            tree = AxisAlignedTreeClassifier(max_depth=spec.max_depth, seed=spec.seed + i).fit(X, y)
            out.append((tree, f"tree depth<={spec.max_depth} seed {spec.seed + i}"))
    return out


def _complexity(spec: FamilySpec, classifier: object) -> float:
    if spec.kind == "linear":
        assert isinstance(classifier, HalfplaneClassifier)
        weights = (math.cos(classifier.angle), math.sin(classifier.angle), classifier.offset)
        return float(sum(1 for w in weights if abs(w) > 1e-12))
    if spec.kind == "polynomial":
        assert isinstance(classifier, PolynomialBoundaryClassifier)
        assert classifier.coefficients is not None
        return float(sum(1 for c in classifier.coefficients if abs(c) > 1e-12))
    if spec.kind == "knn":
        assert isinstance(classifier, NearestNeighborsClassifier)
        return float(classifier.k)
    assert isinstance(classifier, AxisAlignedTreeClassifier)
    return float(classifier.depth)


def enumerate_family(
    spec: FamilySpec,
    train: Dataset2D,
    validation: Dataset2D,
    fairness: PointSet | None = None,
    dedupe: bool = True,
    grid_resolution: int = 64,
) -> tuple[ZooModel, ...]:
    """Evaluate the family's candidate pool into ModelRuns.

    Run ids are assigned in candidate order before deduplication, so a run
    keeps its id whether or not dedupe removes its behavioural twins.
    Deduplication compares predictions on a grid_resolution^2 cell-centre
    grid over the validation domain, keeping each signature's first
    candidate.
    """
    if grid_resolution < 2:
        raise AnalysisError("grid_resolution must be at least 2")
    pool = _candidates(spec, train)
    val_X = validation.points.as_array()
    fair_points = fairness if fairness is not None else validation.points
    fair_X = fair_points.as_array()
    grid = grid_centres(validation.domain_box, grid_resolution) if dedupe else None
    models: list[ZooModel] = []
    seen: set[bytes] = set()
    width = max(3, len(str(max(0, len(pool) - 1))))
    for i, (classifier, description) in enumerate(pool):
        if grid is not None:
            signature = classifier.predict(grid).tobytes()
            if signature in seen:
                continue
            seen.add(signature)
        preds_val = PredictionVector(validation.index, tuple(int(v) for v in classifier.predict(val_X)))
        preds_fair = (
            preds_val
            if fairness is None
            else PredictionVector(fair_points.index, tuple(int(v) for v in classifier.predict(fair_X)))
        )
        run = ModelRun.from_predictions(
            run_id=f"{spec.family_tag}-{i:0{width}d}",
            family_tag=spec.family_tag,
            preds_validation=preds_val,
            labels=validation.labels,
            preds_fairness=preds_fair,
            complexity=_complexity(spec, classifier),
        )
        models.append(ZooModel(run=run, classifier=classifier, description=description))
    return tuple(models)


@dataclass(frozen=True)
class FlipOutcome:
    """Result of hunting for an equally-good model that flips one instance.

    exhausted is True only when the whole candidate pool was examined without
    success; a budget cut-off leaves it False because untried candidates
    remain.
    """

    found: ZooModel | None
    tried: int
    exhausted: bool


def flip_search(
    band: PerformanceBand,
    models: Sequence[ZooModel],
    validation: Dataset2D,
    fairness: PointSet | None,
    target_id: str,
    target_class: int,
    budget: int = 1000,
) -> FlipOutcome:
    """Look for a band-level model assigning target_class to one instance.

    Band members are scanned first (sorted by run id), then the remaining
    candidates in enumeration order, stopping after `budget` examinations.
    A hit is verified from scratch: the classifier is re-run on the target
    point and on the validation set before the model is returned.
    """
    if target_class not in (0, 1):
        raise AnalysisError(f"target_class must be 0 or 1, got {target_class}")
    if budget < 1:
        raise AnalysisError("budget must be at least 1")
    fair_points = fairness if fairness is not None else validation.points
    if target_id not in fair_points.index:
        raise AnalysisError(f"target instance {target_id!r} is not in the fairness index")
    target_pos = fair_points.index.position(target_id)
    target_point = np.array([fair_points.points[target_pos]], dtype=np.float64)
    by_id = {model.run.run_id: model for model in models}
    member_models = [by_id[rid] for rid in band.run_ids if rid in by_id]
    if len(member_models) != len(band.run_ids):
        missing = next(rid for rid in band.run_ids if rid not in by_id)
        raise AnalysisError(f"band member {missing!r} missing from the candidate pool")
    others = [m for m in models if m.run.run_id not in band.run_ids]
    tried = 0
    for model in member_models + others:
        if tried >= budget:
            return FlipOutcome(found=None, tried=tried, exhausted=False)
        tried += 1
        run = model.run
        if run.preds_fairness.value_for(target_id) != target_class:
            continue
        if not band.contains_utility(run.utility):
            continue
        fresh_target = int(model.classifier.predict(target_point)[0])
        fresh_val = model.classifier.predict(validation.points.as_array())
        if fresh_target != target_class or tuple(int(v) for v in fresh_val) != run.preds_validation.values:
            raise InvariantViolation(f"stored predictions for run {run.run_id!r} do not replay")
        return FlipOutcome(found=model, tried=tried, exhausted=False)
    return FlipOutcome(found=None, tried=tried, exhausted=True)
