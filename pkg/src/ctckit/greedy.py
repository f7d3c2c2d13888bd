"""Best-path decoding and word rendering."""

from __future__ import annotations

import numpy as np

from .alphabet import (CONVENTION_CASE, CONVENTION_SPACE, Alphabet, squash)
from .errors import UnsupportedOperationError
from .posteriors import ScoreMatrix


def greedy_path(post: ScoreMatrix) -> tuple[int, ...]:
    """Per-frame argmax path; ties go to the lowest label index."""
    return tuple(int(k) for k in np.argmax(post.log_values, axis=1))


def greedy_decode(post: ScoreMatrix, alphabet: Alphabet) -> tuple[int, ...]:
    """Collapse the per-frame argmax path into a transcription."""
    return squash(greedy_path(post), alphabet)


def render_words(labels, alphabet: Alphabet,
                 convention: str | None = None) -> list[str]:
    """Split a transcription into words under the alphabet's convention.

    ``space``: tokens are separated by the space symbol. ``case``: an
    uppercase character starts a new word and the output is lowercased.
    """
    convention = convention or alphabet.word_convention
    if convention == CONVENTION_SPACE:
        sp = alphabet.space_index
        if sp is None:
            raise UnsupportedOperationError("alphabet has no space symbol")
        words: list[str] = []
        current: list[str] = []
        for k in labels:
            if k == sp:
                if current:
                    words.append("".join(current))
                    current = []
            else:
                current.append(alphabet.symbol(k))
        if current:
            words.append("".join(current))
        return words
    if convention == CONVENTION_CASE:
        words = []
        current = []
        for k in labels:
            sym = alphabet.symbol(k)
            if sym.isupper() and current:
                words.append("".join(current))
                current = []
            current.append(sym.lower())
        if current:
            words.append("".join(current))
        return words
    raise UnsupportedOperationError(
        "alphabet declares no word-boundary convention")
