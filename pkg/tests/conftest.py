import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ctckit import Alphabet, PosteriorMatrix, from_characters


@pytest.fixture
def ab_alphabet() -> Alphabet:
    return from_characters("ab")


@pytest.fixture
def fixture_matrix() -> PosteriorMatrix:
    # 3 frames over {<blk>, a, b}; argmax path is blank, a, blank.
    return PosteriorMatrix.from_probs(
        [[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.7, 0.2, 0.1]])


def random_posteriors(rng, t: int, k: int) -> PosteriorMatrix:
    return PosteriorMatrix.from_probs(rng.dirichlet(np.ones(k), size=t))


def random_instances(seed: int, count: int, max_t: int = 6, max_k: int = 4):
    """Seeded stream of (matrix, alphabet) pairs for property tests."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k = int(rng.integers(2, max_k + 1))
        t = int(rng.integers(1, max_t + 1))
        yield random_posteriors(rng, t, k), from_characters("abcdefg"[:k - 1])
