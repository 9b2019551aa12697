"""Observer screening and mean opinion scores."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import RatingsError
from ..videoio import RatingsTable

__all__ = [
    "SubjectTally",
    "ScreeningResult",
    "MosRecord",
    "screen_outliers",
    "compute_mos",
    "write_mos",
    "read_mos",
]

REJECT_FRACTION = 0.05
REJECT_BALANCE = 0.3


@dataclass(frozen=True)
class SubjectTally:
    subject: str
    n_ratings: int
    above: int  # P: ratings at or above the upper bound
    below: int  # Q: ratings at or below the lower bound

    @property
    def outlier_fraction(self) -> float:
        return (self.above + self.below) / self.n_ratings if self.n_ratings else 0.0

    @property
    def balance(self) -> float:
        n = self.above + self.below
        return abs(self.above - self.below) / n if n else 1.0

    @property
    def rejected(self) -> bool:
        return self.outlier_fraction > REJECT_FRACTION and self.balance < REJECT_BALANCE

    def reason(self) -> str:
        return (
            f"P={self.above} Q={self.below} of {self.n_ratings} ratings: "
            f"(P+Q)/N={self.outlier_fraction:.3f} > {REJECT_FRACTION}, "
            f"|P-Q|/(P+Q)={self.balance:.3f} < {REJECT_BALANCE}"
        )


@dataclass(frozen=True)
class ScreeningResult:
    retained: Tuple[str, ...]
    rejected: Dict[str, str]
    tallies: Tuple[SubjectTally, ...] = field(repr=False)


@dataclass(frozen=True)
class MosRecord:
    item: str
    mos: float
    n_subjects_retained: int

    def __post_init__(self):
        if not 1.0 <= self.mos <= 10.0:
            raise ValueError(f"MOS {self.mos} for {self.item!r} outside [1, 10]")


def screen_outliers(ratings: RatingsTable) -> ScreeningResult:
    """Observer rejection in the manner of ITU-R BT.500 (Annex 2, 2.3.1).

    For every item the kurtosis ``m4 / m2**2`` of its ratings decides the
    bound: ``2*S`` when it lies in [2, 4] (treated as normal), otherwise
    ``sqrt(20)*S``, with ``S`` the sample standard deviation. Each rating at
    or beyond ``mean +/- bound`` counts toward the subject's P (above) or Q
    (below). A subject is rejected when ``(P+Q)/N > 0.05`` and
    ``|P-Q|/(P+Q) < 0.3``, ``N`` being the number of ratings they gave.
    Items whose ratings have no spread are skipped.
    """
    n_items, n_subj = ratings.scores.shape
    if n_subj < 3:
        raise RatingsError(f"screening needs at least 3 subjects, got {n_subj}")
    scores = ratings.scores
    above = np.zeros(n_subj, dtype=np.int64)
    below = np.zeros(n_subj, dtype=np.int64)
    for j in range(n_items):
        row = scores[j]
        have = ~np.isnan(row)
        vals = row[have]
        if vals.size < 2:
            continue
        mean = vals.mean()
        dev = vals - mean
        m2 = np.mean(dev**2)
        if m2 == 0.0:
            continue
        kurt = np.mean(dev**4) / (m2 * m2)
        s = math.sqrt(np.sum(dev**2) / (vals.size - 1))
        k = 2.0 if 2.0 <= kurt <= 4.0 else math.sqrt(20.0)
        hi, lo = mean + k * s, mean - k * s
        idx = np.flatnonzero(have)
        above[idx[vals >= hi]] += 1
        below[idx[vals <= lo]] += 1
    counts = (~np.isnan(scores)).sum(axis=0)
    tallies = tuple(
        SubjectTally(s, int(counts[i]), int(above[i]), int(below[i]))
        for i, s in enumerate(ratings.subjects)
    )
    rejected = {t.subject: t.reason() for t in tallies if t.rejected}
    retained = tuple(t.subject for t in tallies if not t.rejected)
    return ScreeningResult(retained, rejected, tallies)


def compute_mos(ratings: RatingsTable, retained_subjects: Sequence[str]) -> List[MosRecord]:
    """Per-item mean over the retained subjects' non-missing ratings."""
    retained_subjects = list(retained_subjects)
    if not retained_subjects:
        raise RatingsError("no retained subjects")
    unknown = [s for s in retained_subjects if s not in ratings.subjects]
    if unknown:
        raise RatingsError(f"unknown subject id(s): {', '.join(unknown)}")
    sub = ratings.subset(retained_subjects).scores
    out = []
    for item, row in zip(ratings.items, sub):
        vals = row[~np.isnan(row)]
        if vals.size == 0:
            raise RatingsError(f"item {item!r} has no ratings from retained subjects")
        out.append(MosRecord(item, math.fsum(vals.tolist()) / vals.size, int(vals.size)))
    return out


def write_mos(records: Sequence[MosRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["item", "mos", "n_subjects_retained"])
        for r in records:
            w.writerow([r.item, repr(r.mos), r.n_subjects_retained])


def read_mos(path) -> List[MosRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"item", "mos"} <= set(reader.fieldnames):
            raise RatingsError(f"{path}: MOS file needs 'item' and 'mos' columns")
        out = []
        for row in reader:
            n = row.get("n_subjects_retained") or 0
            out.append(MosRecord(row["item"], float(row["mos"]), int(n)))
    return out
