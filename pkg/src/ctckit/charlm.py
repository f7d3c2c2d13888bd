"""Character-level language models behind one scoring interface.

Every character LM used by the beam decoder implements the same small
protocol:

``start_state()``
    Opaque state for the beginning of an utterance.
``score(state, token) -> (log_prob, next_state)``
    Natural-log probability of ``token`` in ``state`` and the advanced
    state. Tokens are single characters, ``"<sp>"`` for space, or any
    string (unknown strings are absorbed by the model's unknown symbol).
``has_space``
    Whether the model can score the space token at all.

The built-in model is an interpolated Kneser-Ney n-gram over characters
(:func:`train_char_lm`); :class:`FlatLm` scores everything at log 1 and
is the no-information baseline; :class:`UniformLm` spreads mass evenly.
External processes can serve the same protocol over a line protocol,
see :mod:`ctckit.external_lm`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError
from .ngram import BOS, EOS, NGramLm, train_kneser_ney

SPACE_TOKEN = "<sp>"

DEFAULT_ORDER = 7
DEFAULT_MAX_CHARS = 128


def char_tokens(line: str) -> list[str]:
    """One token per character; literal spaces become the space token."""
    return [SPACE_TOKEN if ch == " " else ch for ch in line]


@dataclass(frozen=True)
class CharNGramLm:
    """Character n-gram with tuple-of-last-characters states."""

    model: NGramLm

    @property
    def has_space(self) -> bool:
        return SPACE_TOKEN in self.model.vocab

    @property
    def vocab_size(self) -> int:
        return len(self.model.vocab)

    def start_state(self) -> tuple[str, ...]:
        return (BOS,)

    def score(self, state, token: str):
        token = self.model.normalize_token(token)
        logp = self.model.ln_score(state, token)
        next_state = (state + (token,))
        if self.model.order > 1:
            next_state = next_state[-(self.model.order - 1):]
        else:
            next_state = ()
        return logp, next_state

    def end_score(self, state) -> float:
        """Natural-log probability of the sentence ending in ``state``."""
        return self.model.ln_score(state, EOS)


class FlatLm:
    """Scores every token at probability one; the no-LM baseline."""

    has_space = True

    def start_state(self):
        return ()

    def score(self, state, token: str):
        return 0.0, ()

    def end_score(self, state) -> float:
        return 0.0


class UniformLm:
    """Uniform distribution over a fixed symbol count."""

    has_space = True

    def __init__(self, size: int):
        if size < 1:
            raise InvalidInputError("uniform LM needs a positive size")
        self.size = size
        self._logp = -math.log(size)

    def start_state(self):
        return ()

    def score(self, state, token: str):
        return self._logp, ()

    def end_score(self, state) -> float:
        return self._logp


def train_char_lm(lines, order: int = DEFAULT_ORDER, discount: float = 0.75,
                  max_chars: int = DEFAULT_MAX_CHARS,
                  alphabet=()) -> CharNGramLm:
    """Train the built-in character n-gram from text lines.

    Lines are truncated to ``max_chars`` characters. ``alphabet`` may
    force extra tokens into the closed vocabulary so that they receive
    the smoothing floor even when absent from the corpus.
    """
    sentences = []
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        sentences.append(char_tokens(line[:max_chars]))
    if not sentences:
        raise InvalidInputError("character LM corpus is empty")
    model = train_kneser_ney(sentences, order, discount, extra_vocab=alphabet)
    return CharNGramLm(model)


def bits_per_character(lm, lines) -> float:
    """Average negative log2 probability per predicted token.

    End-of-sentence predictions are scored and counted; start symbols
    condition the first prediction but are not counted.
    """
    ln2 = math.log(2.0)
    total_bits = 0.0
    count = 0
    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        state = lm.start_state()
        for token in char_tokens(line):
            logp, state = lm.score(state, token)
            total_bits -= logp / ln2
            count += 1
        total_bits -= lm.end_score(state) / ln2
        count += 1
    if count == 0:
        raise InvalidInputError("no text to evaluate")
    return total_bits / count
