import pickle
from pathlib import Path

import pytest

CACHE_DIR = Path(__file__).parent / "_cache"


@pytest.fixture(scope="session")
def run_cached():
    """Disk-cache heavy solver results keyed by a caller-chosen label.

    The compute callable must be deterministic for its label; delete
    tests/_cache to force recomputation.
    """
    CACHE_DIR.mkdir(exist_ok=True)

    def runner(label, compute):
        path = CACHE_DIR / f"{label}.pkl"
        if path.exists():
            with open(path, "rb") as f:
                return pickle.load(f)
        value = compute()
        with open(path, "wb") as f:
            pickle.dump(value, f)
        return value

    return runner
