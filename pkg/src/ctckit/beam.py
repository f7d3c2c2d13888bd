"""Character-LM-fused prefix beam search over CTC posteriors.

The search is breadth-first over frames. Every hypothesis is a distinct
transcription prefix carrying two acoustic masses: the log mass of all
consistent paths ending in blank and of those ending in the prefix's
last label. Blank and repeated-label extensions move acoustic mass
without touching the LM; appending a new character multiplies in the
LM probability and the insertion bonus exactly once. Because every
path that collapses to a prefix emits its characters in order, the LM
term is a deterministic function of the prefix, so the fused objective
factorizes per hypothesis as

    score = acoustic_mass + lm_weight * lm_log + emissions * log(bonus)

which is the quantity hypotheses are ranked and pruned by.

Space insertion proposes a space-appended copy of every hypothesis at
every frame. A copy's acoustic mass is its parent's mass unchanged
(split preserved); the space itself is LM-scored and bonused but
consumes no frames. A later copy of the same parent supersedes an
earlier one rather than merging with it: the parent's current mass
already contains everything the earlier copy could have evolved into,
so merging would count paths once per insertion time instead of once.
With the supersede rule the score of a spaced transcription is exactly
its LM term times the summed mass of all paths compatible with it,
where a space between two equal characters stands in for the otherwise
required separating blank.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .alphabet import SPACE_SYMBOL, Alphabet
from .errors import ConfigError, InvalidInputError
from .logmath import LOG_ZERO, log_add
from .posteriors import ScoreMatrix


@dataclass
class BeamConfig:
    """Knobs for the fused search.

    ``insertion_bonus`` is multiplicative per LM-scored character;
    ``lm_weight`` scales the LM log term (1.0 keeps the plain fused
    objective). ``prune_floor`` drops hypotheses whose combined score
    falls below it; the default keeps everything.
    """

    beam_width: int = 64
    insertion_bonus: float = 2.5
    lm_weight: float = 1.0
    space_insertion: bool = False
    prune_floor: float = LOG_ZERO

    def __post_init__(self):
        if self.beam_width < 1:
            raise InvalidInputError(f"beam width must be >= 1, got {self.beam_width}")
        if self.insertion_bonus <= 0:
            raise InvalidInputError("insertion bonus must be positive")
        if self.lm_weight < 0:
            raise InvalidInputError("lm weight must be nonnegative")


@dataclass
class Hypothesis:
    """One transcription prefix in the beam.

    ``log_p_blank``/``log_p_nonblank`` split the acoustic path mass by
    whether the path currently ends in blank. ``lm_log`` accumulates
    raw (unweighted) LM log probabilities over the ``emissions``
    LM-scored characters. ``score`` is filled in at ranking time.
    """

    labels: tuple[int, ...]
    log_p_blank: float
    log_p_nonblank: float
    lm_state: object
    lm_log: float
    emissions: int
    score: float = field(default=LOG_ZERO, compare=False)

    @property
    def acoustic_log(self) -> float:
        return log_add(self.log_p_blank, self.log_p_nonblank)

    def ranking_score(self, lm_weight: float, log_bonus: float) -> float:
        am = self.acoustic_log
        if am == LOG_ZERO:
            return LOG_ZERO
        return am + lm_weight * self.lm_log + self.emissions * log_bonus


@dataclass
class BeamResult:
    """Ranked hypotheses plus the alphabet their labels refer to.

    When space insertion runs against a space-free acoustic alphabet,
    ``alphabet`` gains a trailing ``<sp>`` symbol for the inserted
    spaces; otherwise it is the input alphabet unchanged.
    """

    hypotheses: list[Hypothesis]
    alphabet: Alphabet

    @property
    def best(self) -> Hypothesis:
        return self.hypotheses[0]


def beam_decode(post: ScoreMatrix, alphabet: Alphabet, lm,
                cfg: BeamConfig) -> BeamResult:
    """Run the fused prefix beam search and return ranked hypotheses."""
    if post.num_labels != alphabet.size:
        raise InvalidInputError(
            f"matrix has {post.num_labels} labels, alphabet has {alphabet.size}")

    space_label = None
    out_alphabet = alphabet
    if cfg.space_insertion:
        if not getattr(lm, "has_space", False):
            raise ConfigError("space insertion needs an LM with a space symbol")
        if alphabet.space_index is not None:
            raise ConfigError(
                "space insertion expects a space-free acoustic alphabet; "
                "this one already models spaces")
        space_label = alphabet.size
        out_alphabet = Alphabet(alphabet.symbols + (SPACE_SYMBOL,),
                                word_convention="space")

    log_bonus = math.log(cfg.insertion_bonus)
    k = post.num_labels
    blank = alphabet.blank_index

    beam: dict[tuple[int, ...], Hypothesis] = {
        (): Hypothesis((), 0.0, LOG_ZERO, lm.start_state(), 0.0, 0)
    }

    for t in range(post.num_frames):
        y = post.log_values[t]
        new: dict[tuple[int, ...], Hypothesis] = {}

        for hyp in beam.values():
            total = hyp.acoustic_log
            last = hyp.labels[-1] if hyp.labels else None

            # Blank extension: prefix unchanged, LM untouched.
            if total != LOG_ZERO:
                entry = _entry(new, hyp, hyp.labels)
                entry.log_p_blank = log_add(entry.log_p_blank, total + y[blank])

            # Run continuation: the last label repeats without a blank,
            # collapsing into the existing character. Not possible
            # through an inserted space, which ends the run.
            if last is not None and last != space_label \
                    and hyp.log_p_nonblank != LOG_ZERO:
                entry = _entry(new, hyp, hyp.labels)
                entry.log_p_nonblank = log_add(
                    entry.log_p_nonblank, hyp.log_p_nonblank + y[last])

            # New-character extensions: LM-scored and bonused once.
            for c in range(k):
                if c == blank:
                    continue
                if c == last:
                    base = hyp.log_p_blank  # repeat needs a separating blank
                else:
                    base = total
                if base == LOG_ZERO:
                    continue
                prefix = hyp.labels + (c,)
                entry = new.get(prefix)
                if entry is None:
                    entry = _extend(hyp, prefix, lm, _lm_token(alphabet, c))
                    new[prefix] = entry
                entry.log_p_nonblank = log_add(entry.log_p_nonblank, base + y[c])

        if space_label is not None:
            _space_step(new, lm, space_label)

        beam = _prune(new, cfg, log_bonus)
        if not beam:
            empty = Hypothesis((), LOG_ZERO, LOG_ZERO, lm.start_state(), 0.0, 0)
            empty.score = LOG_ZERO
            return BeamResult([empty], out_alphabet)

    ranked = sorted(beam.values(), key=lambda h: (-h.score, h.labels))
    return BeamResult(ranked, out_alphabet)


def _lm_token(alphabet: Alphabet, label: int) -> str:
    return alphabet.symbols[label]


def _entry(new: dict, hyp: Hypothesis, prefix: tuple[int, ...]) -> Hypothesis:
    entry = new.get(prefix)
    if entry is None:
        entry = Hypothesis(prefix, LOG_ZERO, LOG_ZERO,
                           hyp.lm_state, hyp.lm_log, hyp.emissions)
        new[prefix] = entry
    return entry


def _extend(hyp: Hypothesis, prefix: tuple[int, ...], lm, token: str) -> Hypothesis:
    lm_lp, lm_state = lm.score(hyp.lm_state, token)
    return Hypothesis(prefix, LOG_ZERO, LOG_ZERO,
                      lm_state, hyp.lm_log + lm_lp, hyp.emissions + 1)


def _space_step(new: dict, lm, space_label: int) -> None:
    """Propose a space-appended copy of every hypothesis.

    Copies carry the parent's acoustic mass unchanged and supersede any
    staler copy of the same prefix. Processing parents by ascending
    trailing-space count keeps chained copies consistent within one
    frame.
    """
    def trailing_spaces(prefix: tuple[int, ...]) -> int:
        n = 0
        for lab in reversed(prefix):
            if lab != space_label:
                break
            n += 1
        return n

    for prefix in sorted(new.keys(), key=lambda p: (trailing_spaces(p), p)):
        hyp = new[prefix]
        if hyp.acoustic_log == LOG_ZERO:
            continue
        lm_lp, lm_state = lm.score(hyp.lm_state, SPACE_SYMBOL)
        copy = Hypothesis(prefix + (space_label,),
                          hyp.log_p_blank, hyp.log_p_nonblank,
                          lm_state, hyp.lm_log + lm_lp, hyp.emissions + 1)
        new[copy.labels] = copy


def _prune(new: dict, cfg: BeamConfig, log_bonus: float
           ) -> dict[tuple[int, ...], Hypothesis]:
    for hyp in new.values():
        hyp.score = hyp.ranking_score(cfg.lm_weight, log_bonus)
    survivors = [h for h in new.values() if h.score >= cfg.prune_floor]
    survivors.sort(key=lambda h: (-h.score, h.labels))
    return {h.labels: h for h in survivors[:cfg.beam_width]}
