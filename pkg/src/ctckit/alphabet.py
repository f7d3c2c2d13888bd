"""Label alphabets and the blank-collapsing squash function.

An :class:`Alphabet` is the blank-augmented label set the acoustic model
emits over. The blank token always sits at index 0; an optional space
symbol and an optional word-boundary convention drive word rendering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import FormatError, InvalidInputError

BLANK_SYMBOL = "<blk>"
SPACE_SYMBOL = "<sp>"

# Word-boundary conventions understood by render_words().
CONVENTION_SPACE = "space"
CONVENTION_CASE = "case"


@dataclass(frozen=True)
class Alphabet:
    """Ordered label set with blank pinned to index 0.

    Parameters
    ----------
    symbols : tuple of str
        Unique, non-empty label strings; ``symbols[0]`` must be the
        reserved blank token.
    word_convention : str or None
        ``"space"`` (words separated by the space symbol), ``"case"``
        (an uppercase character starts a new word), or None when the
        alphabet carries no notion of word boundaries.
    """

    symbols: tuple[str, ...]
    word_convention: str | None = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.symbols:
            raise InvalidInputError("alphabet must contain at least the blank symbol")
        if self.symbols[0] != BLANK_SYMBOL:
            raise InvalidInputError(
                f"alphabet symbol 0 must be {BLANK_SYMBOL!r}, got {self.symbols[0]!r}")
        index: dict[str, int] = {}
        for i, sym in enumerate(self.symbols):
            if not sym:
                raise InvalidInputError(f"alphabet symbol {i} is empty")
            if sym in index:
                raise InvalidInputError(f"duplicate alphabet symbol {sym!r}")
            index[sym] = i
        if self.word_convention not in (None, CONVENTION_SPACE, CONVENTION_CASE):
            raise InvalidInputError(
                f"unknown word convention {self.word_convention!r}")
        if self.word_convention == CONVENTION_SPACE and SPACE_SYMBOL not in index:
            raise InvalidInputError(
                f"space convention requires a {SPACE_SYMBOL!r} symbol")
        object.__setattr__(self, "_index", index)

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def blank_index(self) -> int:
        return 0

    @property
    def space_index(self) -> int | None:
        return self._index.get(SPACE_SYMBOL)

    def index_of(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise InvalidInputError(f"symbol {symbol!r} not in alphabet") from None

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def symbol(self, index: int) -> str:
        if not 0 <= index < len(self.symbols):
            raise InvalidInputError(f"label index {index} out of range")
        return self.symbols[index]

    def labels_to_text(self, labels) -> str:
        """Join label symbols, rendering the space symbol as ' '."""
        parts = []
        for k in labels:
            sym = self.symbol(k)
            parts.append(" " if sym == SPACE_SYMBOL else sym)
        return "".join(parts)

    def text_to_labels(self, text: str) -> tuple[int, ...]:
        """Map text to label indices; ' ' maps to the space symbol."""
        out = []
        for ch in text:
            sym = SPACE_SYMBOL if ch == " " else ch
            out.append(self.index_of(sym))
        return tuple(out)


def from_characters(chars: str, *, word_convention: str | None = None,
                    with_space: bool = False) -> Alphabet:
    """Build an alphabet from one character per label plus the blank."""
    symbols = [BLANK_SYMBOL]
    if with_space:
        symbols.append(SPACE_SYMBOL)
    symbols.extend(chars)
    return Alphabet(tuple(symbols), word_convention=word_convention)


def read_alphabet(path, *, word_convention: str | None = None) -> Alphabet:
    """Read an alphabet file: UTF-8, one symbol per line, line 1 = <blk>.

    When the file declares a ``<sp>`` symbol and no convention is given,
    the space convention is assumed.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    symbols = [ln for ln in lines if ln != ""]
    if not symbols:
        raise FormatError("empty alphabet file", path=str(path), line=1)
    if symbols[0] != BLANK_SYMBOL:
        raise FormatError(
            f"first symbol must be {BLANK_SYMBOL!r}, got {symbols[0]!r}",
            path=str(path), line=1)
    seen = set()
    for i, sym in enumerate(symbols):
        if sym in seen:
            raise FormatError(f"duplicate symbol {sym!r}", path=str(path), line=i + 1)
        seen.add(sym)
    if word_convention is None and SPACE_SYMBOL in seen:
        word_convention = CONVENTION_SPACE
    try:
        return Alphabet(tuple(symbols), word_convention=word_convention)
    except InvalidInputError as exc:
        raise FormatError(str(exc), path=str(path)) from exc


def write_alphabet(alphabet: Alphabet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sym in alphabet.symbols:
            fh.write(sym + "\n")


def squash(path_labels, alphabet: Alphabet) -> tuple[int, ...]:
    """Collapse a frame-level path into a transcription.

    Removes every blank and merges runs of identical consecutive labels
    into a single occurrence. Identical labels separated by a blank are
    kept distinct, which is what makes repeated characters expressible.
    """
    blank = alphabet.blank_index
    out: list[int] = []
    prev = blank
    for k in path_labels:
        if not 0 <= k < alphabet.size:
            raise InvalidInputError(f"path label {k} out of alphabet range")
        if k != blank and k != prev:
            out.append(k)
        prev = k
    return tuple(out)
