"""TP / FP / Jaccard scores against a manual mask, and batch summaries."""
import csv
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

STD_CONVENTION = "population"


@dataclass(frozen=True)
class SegScores:
    tp: float
    fp: float
    js: float


def score(auto, manual):
    """Score an automatic mask against ground truth.

    ``tp = |M & A| / |M|``, ``fp = |A - M| / |M|``, ``js = |M & A| / |M | A|``.
    The ratios are exact :class:`~fractions.Fraction` values, so identities
    such as ``tp + fp == |A| / |M|`` hold without rounding.
    """
    a = np.asarray(auto, dtype=bool)
    m = np.asarray(manual, dtype=bool)
    if a.shape != m.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {m.shape}")
    n_m = int(np.count_nonzero(m))
    if n_m == 0:
        raise ValueError("ground-truth mask is empty")
    inter = int(np.count_nonzero(a & m))
    union = int(np.count_nonzero(a | m))
    extra = int(np.count_nonzero(a & ~m))
    return SegScores(tp=Fraction(inter, n_m), fp=Fraction(extra, n_m), js=Fraction(inter, union))


@dataclass
class BatchSummary:
    cases: list
    scores: list
    mean: SegScores
    std: SegScores

    def rows(self):
        """CSV rows: header, one per case, then the mean±std line."""
        out = [["case", "tp", "fp", "js"]]
        for name, s in zip(self.cases, self.scores):
            out.append([name] + [f"{float(getattr(s, k)):.6f}" for k in ("tp", "fp", "js")])
        out.append([f"mean±std({STD_CONVENTION})"] + [
            f"{getattr(self.mean, k):.6f}±{getattr(self.std, k):.6f}"
            for k in ("tp", "fp", "js")])
        return out

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(self.rows())

    def describe(self):
        parts = [f"{k.upper()} {100 * getattr(self.mean, k):.2f}% ± "
                 f"{100 * getattr(self.std, k):.2f}%" for k in ("tp", "fp", "js")]
        return f"n={len(self.scores)} ({STD_CONVENTION} std): " + "; ".join(parts)


def summarize(scores, cases=None):
    scores = list(scores)
    if not scores:
        raise ValueError("no scores to summarize")
    if cases is None:
        cases = [str(i) for i in range(len(scores))]
    table = np.array([[s.tp, s.fp, s.js] for s in scores], dtype=np.float64)
    mean = table.mean(axis=0)
    std = table.std(axis=0, ddof=0)
    return BatchSummary(cases=list(cases), scores=scores,
                        mean=SegScores(*map(float, mean)),
                        std=SegScores(*map(float, std)))
