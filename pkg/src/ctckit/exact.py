"""Exact CTC quantities: path scores, sequence marginals, enumerations.

These routines are the ground truth the decoders are tested against.
``forward_log_probability`` computes the exact marginal over all paths
that collapse to a transcription via the standard dynamic program over
the blank-interleaved label sequence; ``brute_force_log_probability``
computes the same quantity by enumerating every path, which is feasible
only for tiny instances and is used to validate the recursion.

All functions accept any :class:`~ctckit.posteriors.ScoreMatrix`; they
never assume rows are normalized, so they work on prior-scaled scores
as well as true posteriors.
"""

from __future__ import annotations

import itertools


from .alphabet import Alphabet, squash
from .errors import CapacityError, InvalidInputError
from .logmath import LOG_ZERO, log_add
from .posteriors import ScoreMatrix

DEFAULT_ENUMERATION_CAP = 10_000_000


def interleave_blanks(labels, blank: int = 0) -> tuple[int, ...]:
    """Return the label sequence with blanks inserted between, before,
    and after every label: length 2U+1, blanks at even positions."""
    out = [blank]
    for z in labels:
        out.append(z)
        out.append(blank)
    return tuple(out)


def path_log_probability(path_labels, post: ScoreMatrix) -> float:
    """Sum of per-frame log scores along one path."""
    labels = list(path_labels)
    if len(labels) != post.num_frames:
        raise InvalidInputError(
            f"path length {len(labels)} != frame count {post.num_frames}")
    total = 0.0
    for t, k in enumerate(labels):
        if not 0 <= k < post.num_labels:
            raise InvalidInputError(f"path label {k} out of range at frame {t}")
        total += post.log_values[t, k]
    return total


def _forward_trellis(labels, post: ScoreMatrix, blank: int, combine) -> float:
    """Shared trellis for the sum (marginal) and max (best-path) variants.

    ``combine`` merges incoming log scores: ``log_add`` for the marginal,
    ``max`` for the Viterbi variant.
    """
    aug = interleave_blanks(labels, blank)
    s_len = len(aug)
    t_len = post.num_frames
    lp = post.log_values

    alpha = [LOG_ZERO] * s_len
    alpha[0] = lp[0, aug[0]]
    if s_len > 1:
        alpha[1] = lp[0, aug[1]]

    for t in range(1, t_len):
        prev = alpha
        alpha = [LOG_ZERO] * s_len
        for s in range(s_len):
            acc = prev[s]
            if s >= 1:
                acc = combine(acc, prev[s - 1])
            # Skipping the blank between two labels is allowed only when
            # they differ; equal labels need the blank to stay distinct.
            if s >= 2 and aug[s] != blank and aug[s] != aug[s - 2]:
                acc = combine(acc, prev[s - 2])
            if acc != LOG_ZERO:
                alpha[s] = acc + lp[t, aug[s]]
    result = alpha[s_len - 1]
    if s_len > 1:
        result = combine(result, alpha[s_len - 2])
    return result


def forward_log_probability(labels, post: ScoreMatrix, blank: int = 0) -> float:
    """Exact log of the summed score over every path collapsing to ``labels``.

    Transcriptions too long for the frame count (counting the blanks
    forced between repeated labels) yield ``-inf`` rather than an error.
    """
    _check_transcription(labels, post, blank)
    return _forward_trellis(labels, post, blank, log_add)


def viterbi_log_probability(labels, post: ScoreMatrix, blank: int = 0) -> float:
    """Log score of the single best path collapsing to ``labels``."""
    _check_transcription(labels, post, blank)
    return _forward_trellis(labels, post, blank, max)


def _check_transcription(labels, post: ScoreMatrix, blank: int) -> None:
    for z in labels:
        if not 0 <= z < post.num_labels:
            raise InvalidInputError(f"transcription label {z} out of range")
        if z == blank:
            raise InvalidInputError("transcription must be blank-free")


def brute_force_log_probability(labels, post: ScoreMatrix,
                                alphabet: Alphabet,
                                cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Marginal by full path enumeration; the oracle for the forward DP."""
    target = tuple(labels)
    acc = LOG_ZERO
    for path, score in _enumerate_paths(post, cap):
        if squash(path, alphabet) == target:
            acc = log_add(acc, score)
    return acc


def enumerate_transcription_scores(post: ScoreMatrix, alphabet: Alphabet,
                                   cap: int = DEFAULT_ENUMERATION_CAP
                                   ) -> dict[tuple[int, ...], float]:
    """Map every reachable transcription to its exact marginal log score.

    Enumerates all K^T paths and pools their mass by squash image, so
    the values partition the full path space.
    """
    table: dict[tuple[int, ...], float] = {}
    for path, score in _enumerate_paths(post, cap):
        z = squash(path, alphabet)
        table[z] = log_add(table.get(z, LOG_ZERO), score)
    return table


def best_path_by_enumeration(post: ScoreMatrix,
                             cap: int = DEFAULT_ENUMERATION_CAP
                             ) -> tuple[tuple[int, ...], float]:
    """Highest-scoring single path, by enumeration."""
    best: tuple[int, ...] | None = None
    best_score = LOG_ZERO
    for path, score in _enumerate_paths(post, cap):
        if score > best_score or best is None:
            best, best_score = path, score
    assert best is not None
    return best, best_score


def _enumerate_paths(post: ScoreMatrix, cap: int):
    t, k = post.num_frames, post.num_labels
    total = k ** t
    if total > cap:
        raise CapacityError(
            f"enumeration of {k}^{t} = {total} paths exceeds cap {cap}")
    lp = post.log_values
    for path in itertools.product(range(k), repeat=t):
        score = 0.0
        for tt, kk in enumerate(path):
            score += lp[tt, kk]
        yield path, score
