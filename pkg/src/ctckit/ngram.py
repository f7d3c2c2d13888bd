"""Backoff n-gram language models with interpolated Kneser-Ney smoothing.

This module is shared by the word-level and character-level language
models: both are :class:`NGramLm` instances over string tokens and both
serialize to the standard ARPA text format (log10 probabilities plus
backoff weights).

Estimation
----------
Each training sentence ``w1 .. wm`` is padded to ``<s> w1 .. wm </s>``
and raw counts are collected for every order. Orders below the highest
use continuation counts (the number of distinct preceding tokens),
except that n-grams starting with ``<s>`` keep their raw counts, since
nothing can precede the sentence start. With a fixed discount
``0 < D < 1`` the conditional probability at order k is

    P_k(w|u) = (max(c(u,w) - D, 0) + D * N(u) * P_{k-1}(w|u')) / c(u)

where ``N(u)`` is the number of distinct continuations of context ``u``
and the recursion bottoms out in the uniform distribution over the
prediction vocabulary. Writing the interpolated probabilities for the
counted n-grams and ``D * N(u) / c(u)`` as the backoff weight of each
context reproduces the interpolated model exactly under standard
longest-match backoff evaluation, and every context distribution sums
to one over the closed vocabulary by construction.

The start symbol is never predicted: its unigram entry exists only to
carry a backoff weight and is pinned to log10 probability -99.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

import math

from .errors import FormatError, InvalidInputError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

BOS_LOG10 = -99.0

DEFAULT_DISCOUNT = 0.75

# ARPA numbers are printed with 6 decimal places so that write/read
# round-trips are bit-stable.
_FMT = "{:.6f}"


@dataclass
class NGramLm:
    """Backoff n-gram model over string tokens.

    ``probs`` maps each stored n-gram tuple to its log10 probability;
    ``bows`` maps context tuples to log10 backoff weights. ``vocab`` is
    the closed prediction vocabulary (includes ``</s>`` and ``<unk>``,
    never ``<s>``).
    """

    order: int
    probs: dict[tuple[str, ...], float]
    bows: dict[tuple[str, ...], float]
    vocab: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.vocab:
            vocab = {g[0] for g in self.probs if len(g) == 1 and g[0] != BOS}
            self.vocab = frozenset(vocab)

    def normalize_token(self, token: str) -> str:
        if token in self.vocab or token == BOS:
            return token
        return UNK

    def log10_score(self, context, word: str) -> float:
        """Backoff-evaluated log10 P(word | context).

        Unknown words (and unknown context tokens) map to ``<unk>``;
        the context is truncated to the model order.
        """
        word = word if word in self.vocab else UNK
        ctx = tuple(self.normalize_token(t) for t in context)
        if self.order > 1:
            ctx = ctx[-(self.order - 1):]
        else:
            ctx = ()
        return self._score(ctx, word)

    def _score(self, ctx: tuple[str, ...], word: str) -> float:
        gram = ctx + (word,)
        hit = self.probs.get(gram)
        if hit is not None:
            return hit
        if not ctx:
            # Closed vocabulary: the unigram table covers every
            # prediction token, so this is unreachable for valid input.
            raise InvalidInputError(f"token {word!r} has no unigram entry")
        return self.bows.get(ctx, 0.0) + self._score(ctx[1:], word)

    def ln_score(self, context, word: str) -> float:
        return self.log10_score(context, word) * math.log(10.0)

    def sentence_log10(self, tokens) -> float:
        """Score ``tokens </s>`` left to right from a fresh ``<s>`` context."""
        total = 0.0
        ctx: tuple[str, ...] = (BOS,)
        for tok in list(tokens) + [EOS]:
            total += self.log10_score(ctx, tok)
            ctx = ctx + (self.normalize_token(tok),)
        return total


def count_ngrams(sentences, order: int):
    """Raw n-gram counts per order over <s>-padded sentences.

    The ``<s>`` unigram itself is not counted; it can never be predicted.
    """
    counts = [Counter() for _ in range(order)]
    n_sentences = 0
    for sent in sentences:
        toks = (BOS,) + tuple(sent) + (EOS,)
        n_sentences += 1
        for k in range(1, order + 1):
            grams = counts[k - 1]
            for i in range(len(toks) - k + 1):
                gram = toks[i:i + k]
                if gram[-1] == BOS:
                    continue
                grams[gram] += 1
    if n_sentences == 0:
        raise InvalidInputError("training corpus is empty")
    return counts


def adjusted_counts(raw_counts):
    """Continuation counts for lower orders; highest order stays raw.

    A k-gram starting with ``<s>`` keeps its raw count because no token
    can precede it.
    """
    order = len(raw_counts)
    adjusted = [None] * order
    adjusted[order - 1] = Counter(raw_counts[order - 1])
    for k in range(order - 1, 0, -1):
        cont = Counter()
        for gram in raw_counts[k]:          # (k+1)-grams, raw
            cont[gram[1:]] += 1
        for gram, c in raw_counts[k - 1].items():
            if gram[0] == BOS:
                cont[gram] = c
        adjusted[k - 1] = cont
    return adjusted


def train_kneser_ney(sentences, order: int, discount: float = DEFAULT_DISCOUNT,
                     extra_vocab=()) -> NGramLm:
    """Estimate an interpolated Kneser-Ney model.

    ``extra_vocab`` forces tokens into the closed prediction vocabulary
    even when they never occur; they receive the interpolation floor.
    """
    if order < 1:
        raise InvalidInputError(f"order must be >= 1, got {order}")
    if not 0.0 < discount < 1.0:
        raise InvalidInputError(f"discount must be in (0, 1), got {discount}")
    counts = adjusted_counts(count_ngrams(sentences, order))

    vocab = {g[0] for g in counts[0]} | {EOS, UNK} | set(extra_vocab)
    vocab.discard(BOS)
    uniform = 1.0 / len(vocab)

    probs: dict[tuple[str, ...], float] = {}
    bows: dict[tuple[str, ...], float] = {}
    linear: dict[tuple[str, ...], float] = {}  # this order's linear probs

    for k in range(1, order + 1):
        denom: dict[tuple[str, ...], float] = defaultdict(float)
        types: dict[tuple[str, ...], int] = defaultdict(int)
        for gram, c in counts[k - 1].items():
            denom[gram[:-1]] += c
            types[gram[:-1]] += 1

        def lower_prob(gram: tuple[str, ...]) -> float:
            if k == 1:
                return uniform
            return linear[gram[1:]]

        current: dict[tuple[str, ...], float] = {}
        for gram, c in counts[k - 1].items():
            u = gram[:-1]
            p = (max(c - discount, 0.0)
                 + discount * types[u] * lower_prob(gram)) / denom[u]
            current[gram] = p
        if k == 1:
            # Zero-count vocabulary tokens get the interpolation floor.
            u = ()
            for w in vocab:
                if (w,) not in current:
                    current[(w,)] = discount * types[u] * uniform / denom[u]
        for u in denom:
            if u:
                bows[u] = math.log10(discount * types[u] / denom[u])
        for gram, p in current.items():
            probs[gram] = math.log10(p)
        linear = current

    probs[(BOS,)] = BOS_LOG10
    return NGramLm(order=order, probs=probs, bows=bows, vocab=frozenset(vocab))


def write_arpa(lm: NGramLm, path) -> None:
    """Serialize to ARPA; entries sorted for stable round trips."""
    by_order: list[list[tuple[tuple[str, ...], float]]] = [[] for _ in range(lm.order)]
    for gram, p in lm.probs.items():
        by_order[len(gram) - 1].append((gram, p))
    for entries in by_order:
        entries.sort(key=lambda item: item[0])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\\data\\\n")
        for k in range(1, lm.order + 1):
            fh.write(f"ngram {k}={len(by_order[k - 1])}\n")
        for k in range(1, lm.order + 1):
            fh.write(f"\n\\{k}-grams:\n")
            for gram, p in by_order[k - 1]:
                line = _FMT.format(p) + "\t" + " ".join(gram)
                bow = lm.bows.get(gram)
                if bow is not None and k < lm.order:
                    line += "\t" + _FMT.format(bow)
                fh.write(line + "\n")
        fh.write("\n\\end\\\n")


def read_arpa(path) -> NGramLm:
    """Parse an ARPA file with located errors.

    Requires the ``\\data\\`` header, contiguous ``\\k-grams:`` sections
    matching the declared counts, and the closing ``\\end\\``.
    """
    declared: dict[int, int] = {}
    probs: dict[tuple[str, ...], float] = {}
    bows: dict[tuple[str, ...], float] = {}
    section = None          # None, "data", or current n-gram order
    seen: Counter = Counter()
    ended = False

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if ended:
                raise FormatError("content after \\end\\", path=str(path), line=lineno)
            if line == "\\data\\":
                section = "data"
                continue
            if line == "\\end\\":
                ended = True
                continue
            if line.startswith("\\") and line.endswith("-grams:"):
                try:
                    k = int(line[1:-len("-grams:")])
                except ValueError:
                    raise FormatError(f"bad section header {line!r}",
                                      path=str(path), line=lineno) from None
                if k not in declared:
                    raise FormatError(f"section {line!r} not declared in \\data\\",
                                      path=str(path), line=lineno)
                section = k
                continue
            if section == "data":
                if not line.startswith("ngram "):
                    raise FormatError(f"unexpected line in \\data\\: {line!r}",
                                      path=str(path), line=lineno)
                try:
                    k_str, count_str = line[len("ngram "):].split("=")
                    declared[int(k_str)] = int(count_str)
                except ValueError:
                    raise FormatError(f"bad ngram count line {line!r}",
                                      path=str(path), line=lineno) from None
                continue
            if isinstance(section, int):
                fields = line.split()
                if len(fields) < section + 1:
                    raise FormatError(f"too few fields for a {section}-gram",
                                      path=str(path), line=lineno)
                if len(fields) > section + 2:
                    raise FormatError(f"too many fields for a {section}-gram",
                                      path=str(path), line=lineno)
                try:
                    p = float(fields[0])
                except ValueError:
                    raise FormatError(f"non-numeric probability {fields[0]!r}",
                                      path=str(path), line=lineno) from None
                gram = tuple(fields[1:section + 1])
                probs[gram] = p
                if len(fields) == section + 2:
                    try:
                        bows[gram] = float(fields[section + 1])
                    except ValueError:
                        raise FormatError(f"non-numeric backoff {fields[-1]!r}",
                                          path=str(path), line=lineno) from None
                seen[section] += 1
                continue
            raise FormatError(f"unexpected line {line!r} outside any section",
                              path=str(path), line=lineno)

    if not declared:
        raise FormatError("missing \\data\\ section", path=str(path), line=1)
    if not ended:
        raise FormatError("missing \\end\\", path=str(path))
    for k, n in declared.items():
        if seen[k] != n:
            raise FormatError(
                f"\\data\\ declares ngram {k}={n} but section lists {seen[k]}",
                path=str(path))
    order = max(declared)
    return NGramLm(order=order, probs=probs, bows=bows)
