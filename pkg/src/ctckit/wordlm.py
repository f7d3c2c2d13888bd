"""Word-level n-gram training on text corpora.

Thin wrapper over the shared Kneser-Ney machinery: sentences are
whitespace-tokenized lines, and the resulting model feeds the grammar
graph or standalone scoring.
"""

from __future__ import annotations

import math

from .errors import InvalidInputError
from .ngram import NGramLm, train_kneser_ney


def train_word_lm(lines, order: int = 3, discount: float = 0.75) -> NGramLm:
    sentences = []
    for line in lines:
        tokens = line.split()
        if tokens:
            sentences.append(tokens)
    if not sentences:
        raise InvalidInputError("word LM corpus is empty")
    return train_kneser_ney(sentences, order, discount)


def vocabulary(lines) -> set[str]:
    """Distinct corpus tokens (reserved symbols not included)."""
    vocab: set[str] = set()
    for line in lines:
        vocab.update(line.split())
    return vocab


def word_score(lm: NGramLm, context, word: str) -> float:
    """Backoff-evaluated log10 P(word | context words)."""
    return lm.log10_score(tuple(context), word)


def perplexity(lm: NGramLm, lines) -> float:
    """Corpus perplexity including end-of-sentence predictions."""
    total_log10 = 0.0
    count = 0
    for line in lines:
        tokens = line.split()
        if not tokens:
            continue
        total_log10 += lm.sentence_log10(tokens)
        count += len(tokens) + 1
    if count == 0:
        raise InvalidInputError("no text to evaluate")
    return math.pow(10.0, -total_log10 / count)
