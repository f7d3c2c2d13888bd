"""Synthetic posterior generation from known transcripts.

Turns a text transcript into a frame-level posterior matrix with a
controlled error process: each character dwells for a random number of
frames, blanks appear between characters (always between repeats), and
a fraction of frames are corrupted so that the per-frame argmax flips
to a confusable label while the true label keeps substantial mass.
Greedy decoding therefore degrades with the corruption rate, while
decoders that pool path mass and add linguistic evidence can recover.
"""

from __future__ import annotations

import numpy as np

from .alphabet import Alphabet
from .errors import InvalidInputError
from .posteriors import PosteriorMatrix


def synthesize_posteriors(text: str, alphabet: Alphabet, rng,
                          min_dwell: int = 1, max_dwell: int = 2,
                          blank_prob: float = 0.6,
                          peak: float = 0.92,
                          corruption_rate: float = 0.08,
                          space_corruption_rate: float | None = None
                          ) -> PosteriorMatrix:
    """Posterior matrix whose clean argmax path spells ``text``."""
    labels = alphabet.text_to_labels(text)
    if not labels:
        raise InvalidInputError("cannot synthesize an empty transcript")
    k = alphabet.size
    blank = alphabet.blank_index
    if space_corruption_rate is None:
        space_corruption_rate = corruption_rate

    plan: list[int] = [blank]
    prev = None
    for lab in labels:
        if prev is not None and (lab == prev or rng.random() < blank_prob):
            plan.append(blank)
        dwell = int(rng.integers(min_dwell, max_dwell + 1))
        plan.extend([lab] * dwell)
        prev = lab
    plan.append(blank)

    rows = np.empty((len(plan), k))
    space = alphabet.space_index
    for t, true_lab in enumerate(plan):
        rate = corruption_rate
        if true_lab != blank and true_lab == space:
            rate = space_corruption_rate
        # corruption needs a second non-blank label to flip to
        corrupt = true_lab != blank and k > 2 and rng.random() < rate
        if corrupt:
            wrong = int(rng.integers(1, k))
            while wrong == true_lab:
                wrong = int(rng.integers(1, k))
            rows[t] = _row(k, {wrong: 0.52, true_lab: 0.33})
        else:
            rows[t] = _row(k, {true_lab: peak})
    return PosteriorMatrix.from_probs(rows)


def _row(k: int, peaks: dict[int, float]) -> np.ndarray:
    rest = 1.0 - sum(peaks.values())
    row = np.full(k, rest / (k - len(peaks)))
    for lab, p in peaks.items():
        row[lab] = p
    return row
