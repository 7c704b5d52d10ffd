import numpy as np
import pytest
from hypothesis import settings

from sichash.cli import generate_keys

settings.register_profile("default", deadline=None)
settings.load_profile("default")

# recorded so the large-scale runs are exactly reproducible
MILLION_KEY_SEED = 20260810


@pytest.fixture(scope="session")
def million_keys() -> list[bytes]:
    return generate_keys(1_000_000, seed=MILLION_KEY_SEED)


@pytest.fixture(scope="session")
def keys_100k(million_keys) -> list[bytes]:
    return million_keys[:100_000]


@pytest.fixture(scope="session")
def uniform_hashes() -> tuple[np.ndarray, np.ndarray]:
    """One million synthetic uniform (hi, lo) pairs for derivation tests."""
    rng = np.random.default_rng(0xC0FFEE)
    hi = rng.integers(0, 2**64, size=1_000_000, dtype=np.uint64)
    lo = rng.integers(0, 2**64, size=1_000_000, dtype=np.uint64)
    return hi, lo
