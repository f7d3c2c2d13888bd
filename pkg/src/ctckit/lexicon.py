"""Lexicon file parsing: WORD<TAB>unit1 unit2 ... per line."""

from __future__ import annotations

from dataclasses import dataclass

from .alphabet import Alphabet
from .errors import FormatError


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    units: tuple[str, ...]


def read_lexicon(path, alphabet: Alphabet | None = None) -> list[LexiconEntry]:
    """Parse a lexicon file; validates units against the alphabet if given.

    Homophones (same unit sequence, different words) and alternative
    pronunciations of one word are both allowed.
    """
    entries: list[LexiconEntry] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise FormatError("expected WORD<TAB>units", path=str(path), line=lineno)
            word, unit_part = line.split("\t", 1)
            units = tuple(unit_part.split())
            if not word or not units:
                raise FormatError("empty word or unit list", path=str(path), line=lineno)
            if alphabet is not None:
                for u in units:
                    if u not in alphabet or u == alphabet.symbols[0]:
                        raise FormatError(
                            f"word {word!r} uses unit {u!r} not in alphabet",
                            path=str(path), line=lineno)
            entries.append(LexiconEntry(word, units))
    if not entries:
        raise FormatError("lexicon is empty", path=str(path), line=1)
    return entries


def write_lexicon(entries, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(f"{e.word}\t{' '.join(e.units)}\n")
