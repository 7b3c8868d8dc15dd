"""Synthetic purchase logs shaped like the Steam interaction file.

Items belong to latent genres and have power-law popularity; each user
prefers one or two genres and buys a heavy-tailed number of games, mostly
from those genres.  Output rows use the same five-column CSV layout as the
real log, including ``play`` rows that ingestion filters out.
"""

from __future__ import annotations

import csv
import io

import numpy as np

__all__ = ["steam_like_csv"]


def steam_like_csv(n_users=2000, n_items=400, n_genres=12, mean_purchases=8.0,
                   genre_affinity=0.8, popularity_exponent=1.1, seed=0) -> str:
    """Return a CSV interaction log as text.

    Parameters
    ----------
    genre_affinity : float
        Probability that a purchase is drawn from one of the user's genres
        rather than from the whole catalogue.
    popularity_exponent : float
        Zipf exponent of item popularity within the catalogue.
    """
    rng = np.random.default_rng(seed)
    genre = rng.integers(n_genres, size=n_items)
    popularity = rng.permutation(np.arange(1, n_items + 1) ** -popularity_exponent)
    p_all = popularity / popularity.sum()
    by_genre = []
    for g in range(n_genres):
        members = np.flatnonzero(genre == g)
        w = popularity[members]
        by_genre.append((members, w / w.sum()))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for u in range(n_users):
        user_id = 10_000_000 + 7919 * u
        likes = rng.choice(n_genres, size=1 + (rng.random() < 0.4), replace=False)
        n = min(n_items, 1 + rng.geometric(1 / mean_purchases))
        bought = []
        seen = set()
        for _ in range(20 * n):
            if len(bought) == n:
                break
            if rng.random() < genre_affinity:
                members, wg = by_genre[rng.choice(likes)]
                if not len(members):
                    continue
                item = int(rng.choice(members, p=wg))
            else:
                item = int(rng.choice(n_items, p=p_all))
            if item not in seen:
                seen.add(item)
                bought.append(item)
        for item in bought:
            title = f"Game {item:04d} (genre {genre[item]})"
            w.writerow([user_id, title, "purchase", "1.0", 0])
            if rng.random() < 0.7:
                w.writerow([user_id, title, "play", f"{rng.exponential(20):.1f}", 0])
    return buf.getvalue()
