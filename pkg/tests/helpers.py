"""Shared fixtures builders and independent oracles.

The oracles deliberately use different algorithms than the package (pure
python loops, Fraction remainders) so a bug in the implementation cannot
hide in a test that re-derives values the same way.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from multimax.banding import PerformanceBand
from multimax.core import ExactRatio, InstanceIndex, LabelVector, ModelRun, PredictionVector


def make_index(n: int, prefix: str = "i") -> InstanceIndex:
    return InstanceIndex(tuple(f"{prefix}{k:04d}" for k in range(n)))


def run_from_bits(
    run_id: str,
    labels: LabelVector,
    bits,
    fairness_bits=None,
    fairness_index: InstanceIndex | None = None,
) -> ModelRun:
    preds = PredictionVector(labels.index, tuple(int(b) for b in bits))
    fair = None
    if fairness_bits is not None:
        fair = PredictionVector(
            fairness_index if fairness_index is not None else labels.index,
            tuple(int(b) for b in fairness_bits),
        )
    return ModelRun.from_predictions(
        run_id=run_id,
        family_tag="test",
        preds_validation=preds,
        labels=labels,
        preds_fairness=fair,
    )


def whole_band(runs, label: str = "band") -> PerformanceBand:
    """All given runs as one band; epsilon is the first run's utility."""
    run_list = sorted(runs, key=lambda r: r.run_id)
    return PerformanceBand(
        label=label,
        run_ids=tuple(r.run_id for r in run_list),
        epsilon=run_list[0].utility,
        epsilon_display=run_list[0].utility.display(),
        mode="strict",
    )


def random_labels(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random 0/1 labels guaranteed to contain both classes."""
    y = rng.integers(0, 2, size=n).astype(np.uint8)
    y[0] = 1
    y[-1] = 0
    return y


def pyramid_runs():
    """36 runs over 12 distinct prediction vectors, all at accuracy 93/100.

    Vector j flips the 7 labels in window [7j, 7j+7), so the vectors are
    pairwise distinct and the group sizes are exactly the multiplicities.
    """
    idx = make_index(100)
    labels = LabelVector(idx, (1,) * 50 + (0,) * 50)
    multiplicities = (10, 6, 5, 4, 3, 2, 1, 1, 1, 1, 1, 1)
    runs = []
    serial = 0
    for j, mult in enumerate(multiplicities):
        bits = list(labels.values)
        for p in range(7 * j, 7 * j + 7):
            bits[p] ^= 1
        for _ in range(mult):
            runs.append(run_from_bits(f"r{serial:03d}", labels, bits))
            serial += 1
    return labels, runs, multiplicities


def two_band_runs():
    """Two 2-member bands plus a singleton and an identical pair.

    Utilities: 5/6 (disagreeing pair), 4/6 (disagreeing pair), 3/6 (single
    run), 1/6 (identical pair); disputable union {i0001, i0002, i0003}.
    """
    idx = make_index(6)
    labels = LabelVector(idx, (1, 1, 1, 0, 0, 0))
    runs = [
        run_from_bits("a1", labels, (1, 1, 0, 0, 0, 0)),
        run_from_bits("a2", labels, (1, 1, 1, 1, 0, 0)),
        run_from_bits("b1", labels, (1, 0, 0, 0, 0, 0)),
        run_from_bits("b2", labels, (1, 1, 0, 1, 0, 0)),
        run_from_bits("c1", labels, (0, 0, 0, 0, 0, 0)),
        run_from_bits("d1", labels, (1, 0, 0, 1, 1, 1)),
        run_from_bits("d2", labels, (1, 0, 0, 1, 1, 1)),
    ]
    return labels, runs


# ---------------------------------------------------------------- oracles

def oracle_round_key(num: int, den: int, digits: int) -> int:
    """Half-away-from-zero rounding via Fraction remainder comparison."""
    scaled = Fraction(num, den) * 10**digits
    floor = scaled.numerator // scaled.denominator
    return floor + 1 if scaled - floor >= Fraction(1, 2) else floor


def oracle_confusion(preds, labels) -> tuple[int, int, int, int]:
    """(tp, fn, fp, tn) by item-by-item comparison."""
    tp = fn = fp = tn = 0
    for p, y in zip(preds, labels):
        if y == 1 and p == 1:
            tp += 1
        elif y == 1:
            fn += 1
        elif p == 1:
            fp += 1
        else:
            tn += 1
    return tp, fn, fp, tn


def oracle_disputable(vectors: dict[str, tuple[int, ...]], ids) -> list[str]:
    """Instance ids where any two prediction vectors differ."""
    rows = list(vectors.values())
    out = []
    for pos, instance_id in enumerate(ids):
        column = {row[pos] for row in rows}
        if len(column) > 1:
            out.append(instance_id)
    return out


def oracle_pair_fractions(vectors: dict[str, tuple[int, ...]]) -> list[Fraction]:
    """Disagreement fractions over all pairs in sorted-id order."""
    out = []
    for a, b in itertools.combinations(sorted(vectors), 2):
        va, vb = vectors[a], vectors[b]
        disagreements = sum(1 for x, y in zip(va, vb) if x != y)
        out.append(Fraction(disagreements, len(va)))
    return out


def oracle_max_ensemble(vectors: dict[str, tuple[int, ...]]) -> tuple[int, ...]:
    rows = list(vectors.values())
    return tuple(max(row[pos] for row in rows) for pos in range(len(rows[0])))
