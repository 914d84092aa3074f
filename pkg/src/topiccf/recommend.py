"""Top-K recommendation: the hybrid neighborhood algorithm, its topic-only
variant, and user-based / item-based CF baselines.

Neighborhood recommenders rank candidate items by total_weight: the fraction
of the neighborhood that liked the item. Baselines rank by a similarity-
weighted average of neighbor (or own) ratings. All ties break by ascending id
so every run is reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple

from .ingest import RatingDataset
from .persona import UserPersona
from .similarity import (
    SimilarityScore,
    hybrid_similarity,
    item_llr_similarity,
    llr_similarity,
    pearson_similarity,
    topic_similarity,
)

SimilarityFn = Callable[[int, int], SimilarityScore]

USER_SIMILARITIES = ("pearson", "llr")


@dataclass
class NeighborSet:
    user_id: int
    neighbors: tuple[tuple[int, float], ...]  # (user_id, similarity), similarity desc


class Recommendation(NamedTuple):
    item_id: int
    score: float


@dataclass
class RecommendationList:
    user_id: int
    items: tuple[Recommendation, ...]

    def item_ids(self) -> list[int]:
        return [r.item_id for r in self.items]


def build_neighborhood(user: int, sim: SimilarityFn, train: RatingDataset, N: int) -> NeighborSet:
    """Top-N other train users by sim; undefined or non-positive scores are
    excluded even if that leaves fewer than N."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    scored = []
    for other in train.users():
        if other == user:
            continue
        s = sim(user, other)
        if s.defined and s.value > 0.0:
            scored.append((other, s.value))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return NeighborSet(user, tuple(scored[:N]))


def recommend_neighborhood(
    user: int,
    neighbors: NeighborSet,
    train: RatingDataset,
    K: int,
    like_threshold: float = 1.0,
) -> RecommendationList:
    """Rank every item some neighbor rated by the fraction of the neighborhood
    that liked it (rating >= like_threshold), drop the user's own train items,
    return the top K.

    The denominator is the actual neighbor count, which may be below the
    nominal N for sparse users. Candidates nobody liked carry weight 0 and are
    dropped rather than ranked.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    nbrs = neighbors.neighbors
    if not nbrs:
        return RecommendationList(user, ())
    like_counts: dict[int, int] = {}
    for v, _ in nbrs:
        for item, rating in train.by_user.get(v, ()):
            if rating >= like_threshold:
                like_counts[item] = like_counts.get(item, 0) + 1
            else:
                like_counts.setdefault(item, 0)
    rated = train.user_items(user)
    denom = len(nbrs)
    scored = [
        Recommendation(item, count / denom)
        for item, count in like_counts.items()
        if count > 0 and item not in rated
    ]
    scored.sort(key=lambda r: (-r.score, r.item_id))
    return RecommendationList(user, tuple(scored[:K]))


def recommend_user_based(
    user: int,
    train: RatingDataset,
    sim: str = "llr",
    N: int = 30,
    K: int = 75,
) -> RecommendationList:
    """Standard user-based CF: rating-overlap neighborhood, then predicted
    rating sum(sim * r) / sum(|sim|) over neighbors who rated the candidate."""
    if sim not in USER_SIMILARITIES:
        raise ValueError(f"unknown similarity {sim!r}; expected one of {USER_SIMILARITIES}")
    sim_fn = pearson_similarity if sim == "pearson" else llr_similarity
    neighbors = build_neighborhood(user, lambda a, b: sim_fn(a, b, train), train, N)
    if not neighbors.neighbors:
        return RecommendationList(user, ())
    num: dict[int, float] = {}
    den: dict[int, float] = {}
    for v, s in neighbors.neighbors:
        for item, rating in train.by_user.get(v, ()):
            num[item] = num.get(item, 0.0) + s * rating
            den[item] = den.get(item, 0.0) + abs(s)
    rated = train.user_items(user)
    scored = [
        Recommendation(item, num[item] / den[item])
        for item in num
        if item not in rated and den[item] > 0.0
    ]
    scored.sort(key=lambda r: (-r.score, r.item_id))
    return RecommendationList(user, tuple(scored[:K]))


def recommend_item_based(user: int, train: RatingDataset, K: int = 75) -> RecommendationList:
    """Standard item-based CF: predicted rating for an unseen item is the
    item-LLR-weighted average of the user's own ratings; zero-similarity terms
    are skipped."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    rated = train.by_user.get(user, ())
    if not rated:
        return RecommendationList(user, ())
    rated_set = train.user_items(user)
    scored = []
    for item in train.items():
        if item in rated_set:
            continue
        num = den = 0.0
        for j, rating in rated:
            s = item_llr_similarity(item, j, train)
            if s.defined and s.value > 0.0:
                num += s.value * rating
                den += s.value
        if den > 0.0:
            scored.append(Recommendation(item, num / den))
    scored.sort(key=lambda r: (-r.score, r.item_id))
    return RecommendationList(user, tuple(scored[:K]))


def recommend_hybrid(
    user: int,
    personas: Mapping[int, UserPersona],
    train: RatingDataset,
    N: int = 30,
    K: int = 75,
    like_threshold: float = 1.0,
) -> RecommendationList:
    """Neighborhood by topic x rating-overlap similarity, then total_weight ranking."""
    neighbors = build_neighborhood(
        user, lambda a, b: hybrid_similarity(a, b, personas, train), train, N
    )
    return recommend_neighborhood(user, neighbors, train, K, like_threshold)


def recommend_topic_only(
    user: int,
    personas: Mapping[int, UserPersona],
    train: RatingDataset,
    N: int = 30,
    K: int = 75,
    like_threshold: float = 1.0,
) -> RecommendationList:
    """Neighborhood by latent-topic similarity alone, then total_weight ranking."""
    neighbors = build_neighborhood(
        user, lambda a, b: topic_similarity(personas.get(a), personas.get(b)), train, N
    )
    return recommend_neighborhood(user, neighbors, train, K, like_threshold)


def write_recommendations_csv(lists: Mapping[int, RecommendationList], path) -> None:
    """Rows ``user_id,rank,item_id,score``, users ascending, rank starting at 1."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("user_id,rank,item_id,score\n")
        for user in sorted(lists):
            for rank, rec in enumerate(lists[user].items, start=1):
                fh.write(f"{user},{rank},{rec.item_id},{float(rec.score)!r}\n")
