import os
from pathlib import Path

import numpy as np
import pytest

from lcf import ingest_text
from lcf.corpus import InteractionDataset

TOY4_CSV = """\
u1,a,purchase,1.0,0
u1,a,play,3.5,0
u1,b,purchase,1.0,0
u2,a,purchase,1.0,0
u2,b,purchase,1.0,0
u3,a,purchase,1.0,0
u4,c,purchase,1.0,0
u4,c,play,0.5,0
"""

REPO = Path(__file__).resolve().parents[1]


def steam_path():
    """Location of the Kaggle steam-200k.csv file, or None if unavailable."""
    candidates = [os.environ.get("LCF_STEAM_CSV"), REPO / "data" / "steam-200k.csv"]
    for c in candidates:
        if c and Path(c).is_file():
            return Path(c)
    return None


def random_dataset(rng, max_users=10, max_items=8, density=None):
    """Small dataset where every user and item has at least one interaction."""
    n_users = int(rng.integers(2, max_users + 1))
    n_items = int(rng.integers(2, max_items + 1))
    density = rng.uniform(0.15, 0.7) if density is None else density
    m = rng.random((n_users, n_items)) < density
    for u in range(n_users):
        if not m[u].any():
            m[u, rng.integers(n_items)] = True
    for i in range(n_items):
        if not m[:, i].any():
            m[rng.integers(n_users), i] = True
    pairs = np.argwhere(m)
    return InteractionDataset([f"u{u}" for u in range(n_users)], [f"i{i}" for i in range(n_items)], pairs)


@pytest.fixture
def toy4():
    return ingest_text(TOY4_CSV)


@pytest.fixture(scope="session")
def steam():
    path = steam_path()
    if path is None:
        pytest.skip("steam-200k.csv not available (set LCF_STEAM_CSV)")
    from lcf import load_interactions

    return load_interactions(path)


ACCEPTANCE_LINES = []


def record(criterion, status, detail=""):
    ACCEPTANCE_LINES.append(f"[{status:>9}] criterion {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
