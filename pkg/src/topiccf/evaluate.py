"""Precision / recall / f-measure at K, per user, averaged across users.

A user's relevant set is their held-out test items (optionally thresholded by
rating). Users with an empty relevant set are skipped. Precision divides by
the actual returned list length, so users with short lists are still scored;
f-measure is computed per user and then averaged.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .ingest import RatingDataset
from .recommend import RecommendationList

DEFAULT_KS = tuple(range(5, 76, 5))


@dataclass
class EvalRow:
    K: int
    precision: float
    recall: float
    f_measure: float
    users_evaluated: int


@dataclass
class EvalReport:
    algorithm: str
    rows: list[EvalRow]


def precision_recall_at_k(recs: Sequence[int], relevant: set[int]) -> tuple[float, float]:
    """(hits/|recs|, hits/|relevant|); precision is 0 for an empty list.
    Callers must skip users whose relevant set is empty."""
    if not relevant:
        raise ValueError("relevant set is empty; caller should skip this user")
    hits = sum(1 for item in recs if item in relevant)
    precision = hits / len(recs) if recs else 0.0
    recall = hits / len(relevant)
    return precision, recall


def f_measure(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def evaluate_sweep(
    recommender: Callable[[int], RecommendationList],
    train: RatingDataset,
    test: RatingDataset,
    Ks: Sequence[int] = DEFAULT_KS,
    max_K: int = 75,
    relevance_threshold: float | None = None,
    threads: int = 1,
    detail_sink=None,
) -> list[EvalRow]:
    """Generate max_K recommendations once per user, truncate per K, average.

    ``recommender(user)`` must return the user's full list (up to max_K items).
    ``detail_sink``, when given, receives per-user csv lines
    ``user_id,K,precision,recall,f``.
    """
    Ks = sorted(Ks)
    if len(set(Ks)) != len(Ks):
        raise ValueError("duplicate K values")
    if Ks and max_K < Ks[-1]:
        raise ValueError(f"max_K={max_K} below largest K={Ks[-1]}")
    users = []
    relevant_by_user: dict[int, set[int]] = {}
    for user in sorted(test.by_user):
        relevant = {
            item
            for item, rating in test.by_user[user]
            if relevance_threshold is None or rating >= relevance_threshold
        }
        if relevant:
            users.append(user)
            relevant_by_user[user] = relevant

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rec_lists = list(pool.map(recommender, users))
    else:
        rec_lists = [recommender(u) for u in users]

    sums = {k: [0.0, 0.0, 0.0] for k in Ks}
    for user, rec_list in zip(users, rec_lists):
        items = rec_list.item_ids()
        relevant = relevant_by_user[user]
        for k in Ks:
            p, r = precision_recall_at_k(items[:k], relevant)
            f = f_measure(p, r)
            sums[k][0] += p
            sums[k][1] += r
            sums[k][2] += f
            if detail_sink is not None:
                detail_sink.write(f"{user},{k},{p!r},{r!r},{f!r}\n")

    n = len(users)
    return [
        EvalRow(k, sums[k][0] / n if n else 0.0, sums[k][1] / n if n else 0.0,
                sums[k][2] / n if n else 0.0, n)
        for k in Ks
    ]


def emit_report(reports: EvalReport | Iterable[EvalReport], sink) -> None:
    """csv ``algorithm,K,precision,recall,f_measure,users`` at 6 decimal places,
    rows grouped by algorithm then K. Byte-identical across reruns."""
    if isinstance(reports, EvalReport):
        reports = [reports]
    own = isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__")
    fh = open(sink, "w", encoding="utf-8") if own else sink
    try:
        fh.write("# precision_denominator=actual_list_length\n")
        fh.write("algorithm,K,precision,recall,f_measure,users\n")
        for report in reports:
            for row in report.rows:
                fh.write(
                    f"{report.algorithm},{row.K},{row.precision:.6f},"
                    f"{row.recall:.6f},{row.f_measure:.6f},{row.users_evaluated}\n"
                )
    finally:
        if own:
            fh.close()
