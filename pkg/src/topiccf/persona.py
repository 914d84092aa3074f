"""User personas: each user projected into topic space as a rating-weighted mix
of the topic profiles of the items they rated.

The mixing weight of item i for user u is r_ui / sum_j r_uj, where the sum
runs over u's rated items that actually have topic profiles, so every defined
persona is a proper distribution. Users none of whose rated items are
documented get an undefined persona.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .ingest import RatingDataset
from .lda import ItemTopicProfile


@dataclass
class UserPersona:
    user_id: int
    distribution: np.ndarray | None          # None when undefined
    documented_item_count: int | None = None  # None when unknown (e.g. loaded from csv)

    @property
    def defined(self) -> bool:
        return self.distribution is not None


def build_persona(
    user_id: int,
    ratings: Iterable[tuple[int, float]],
    profiles: Mapping[int, ItemTopicProfile],
) -> UserPersona:
    """Weighted sum of profiled items' topic rows; weights are ratings normalized
    over the documented items only."""
    documented = [(i, r) for i, r in ratings if i in profiles]
    if not documented:
        return UserPersona(user_id, None, documented_item_count=0)
    total = sum(r for _, r in documented)
    dist = None
    for item, r in documented:
        contrib = (r / total) * profiles[item].distribution
        dist = contrib if dist is None else dist + contrib
    return UserPersona(user_id, dist, documented_item_count=len(documented))


def build_all_personas(
    train: RatingDataset,
    profiles: Mapping[int, ItemTopicProfile],
) -> dict[int, UserPersona]:
    """One persona per train user, keyed by user_id."""
    return {
        u: build_persona(u, train.by_user[u], profiles)
        for u in sorted(train.by_user)
    }


def undefined_count(personas: Mapping[int, UserPersona]) -> int:
    return sum(1 for p in personas.values() if not p.defined)


def write_personas_csv(personas: Mapping[int, UserPersona], path) -> None:
    """Rows ``user_id,p_0,...,p_{T-1}``; undefined personas persist as all-zero rows.
    A ``#undefined:<count>`` trailer records how many."""
    dims = {len(p.distribution) for p in personas.values() if p.defined}
    dim = dims.pop() if dims else 0
    with open(path, "w", encoding="utf-8") as fh:
        for user in sorted(personas):
            p = personas[user]
            if p.defined:
                fh.write(f"{user}," + ",".join(repr(float(x)) for x in p.distribution) + "\n")
            else:
                fh.write(f"{user}," + ",".join("0.0" for _ in range(dim)) + "\n")
        fh.write(f"#undefined:{undefined_count(personas)}\n")


def load_personas_csv(path) -> dict[int, UserPersona]:
    """Inverse of write_personas_csv; all-zero rows come back undefined.
    documented_item_count is not persisted, so loaded personas carry None."""
    personas: dict[int, UserPersona] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split(",")
        user = int(fields[0])
        dist = np.array([float(x) for x in fields[1:]])
        if dist.size == 0 or not dist.any():
            personas[user] = UserPersona(user, None, documented_item_count=0)
        else:
            personas[user] = UserPersona(user, dist)
    return personas
