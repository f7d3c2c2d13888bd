"""Decoding-graph construction and time-synchronous Viterbi search.

The search graph is the composition of three transducers: a token graph
mapping blank-augmented label paths to their collapsed unit sequence, a
lexicon graph mapping unit sequences to words, and a grammar acceptor
encoding backoff n-gram word probabilities. Arc weights are negative
natural-log probabilities under the tropical semiring, so the decoder
finds the single best path (Viterbi); the token topology still admits
every path that collapses to a given transcription.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .alphabet import Alphabet
from .errors import GraphError, InvalidInputError
from .fst import EPSILON, EPSILON_SYMBOL, INF, Wfst, compose
from .lexicon import LexiconEntry
from .ngram import BOS, EOS, UNK, NGramLm
from .posteriors import PriorVector, ScoreMatrix

LN10 = math.log(10.0)


def token_fst(alphabet: Alphabet) -> Wfst:
    """Transducer from blank-augmented paths to collapsed unit strings.

    One hub state plus one state per unit. Entering a unit's state emits
    it once; staying consumes repeats silently; blanks return to the hub
    so that a blank-separated repeat is emitted again. Every state is
    final, so paths may end mid-run.
    """
    units = alphabet.symbols[1:]
    isymbols = (EPSILON_SYMBOL,) + alphabet.symbols
    osymbols = (EPSILON_SYMBOL,) + units
    fst = Wfst(isymbols, osymbols)

    blank_in = 1  # alphabet blank at input id 1
    hub = 0
    fst.set_final(hub, 0.0)
    unit_state = {}
    for u_idx in range(len(units)):
        s = fst.add_state()
        unit_state[u_idx] = s
        fst.set_final(s, 0.0)
    for u_idx, s in unit_state.items():
        in_lab = u_idx + 2          # +1 for <eps>, +1 for <blk>
        out_lab = u_idx + 1
        fst.add_arc(hub, in_lab, out_lab, 0.0, s)
        fst.add_arc(s, in_lab, EPSILON, 0.0, s)
        fst.add_arc(s, blank_in, EPSILON, 0.0, hub)
        for v_idx, sv in unit_state.items():
            if v_idx != u_idx:
                fst.add_arc(s, v_idx + 2, v_idx + 1, 0.0, sv)
    fst.add_arc(hub, blank_in, EPSILON, 0.0, hub)
    return fst


def lexicon_fst(entries: list[LexiconEntry], unit_symbols: tuple[str, ...]) -> Wfst:
    """Union of per-word unit chains with closure back to the hub.

    ``unit_symbols`` must be the token graph's output table. Homophones
    simply contribute parallel chains.
    """
    if not entries:
        raise GraphError("cannot build a lexicon graph from zero entries")
    unit_id = {sym: i for i, sym in enumerate(unit_symbols)}
    words = sorted({e.word for e in entries})
    osymbols = (EPSILON_SYMBOL,) + tuple(words)
    word_id = {w: i + 1 for i, w in enumerate(words)}

    fst = Wfst(unit_symbols, osymbols)
    hub = 0
    fst.set_final(hub, 0.0)
    for entry in entries:
        ids = []
        for u in entry.units:
            if u not in unit_id or u == EPSILON_SYMBOL:
                raise GraphError(
                    f"word {entry.word!r} uses unit {u!r} not in the unit table")
            ids.append(unit_id[u])
        state = hub
        for i, uid in enumerate(ids):
            nxt = fst.add_state()
            fst.add_arc(state, uid, word_id[entry.word] if i == 0 else EPSILON,
                        0.0, nxt)
            state = nxt
        fst.add_arc(state, EPSILON, EPSILON, 0.0, hub)
    return fst


def grammar_fst(lm: NGramLm, word_symbols: tuple[str, ...] | None = None) -> Wfst:
    """Backoff n-gram acceptor: one state per stored context.

    Word arcs carry -ln P; epsilon backoff arcs carry -ln of the backoff
    weight and drop the oldest context token. End-of-sentence
    probabilities become final weights; the start state is the ``<s>``
    context when the model has one.
    """
    if not lm.probs:
        raise GraphError("cannot build a grammar graph from an empty model")
    if word_symbols is None:
        real = sorted(w for w in lm.vocab if w not in (EOS, UNK))
        word_symbols = (EPSILON_SYMBOL,) + tuple(real)
    word_id = {w: i for i, w in enumerate(word_symbols) if i > 0}

    fst = Wfst(word_symbols, word_symbols)
    contexts: dict[tuple[str, ...], int] = {}

    def is_context(gram: tuple[str, ...]) -> bool:
        return gram == () or (len(gram) < lm.order and gram in lm.probs)

    def suffix_context(gram: tuple[str, ...]) -> tuple[str, ...]:
        while not is_context(gram):
            gram = gram[1:]
        return gram

    def state_for(ctx: tuple[str, ...]) -> int:
        idx = contexts.get(ctx)
        if idx is not None:
            return idx
        idx = 0 if not contexts else fst.add_state()
        contexts[ctx] = idx
        if ctx:
            # Backoff: forget the oldest token, pay the backoff weight.
            bow = lm.bows.get(ctx, 0.0)
            fst.add_arc(idx, EPSILON, EPSILON, -bow * LN10,
                        state_for(suffix_context(ctx[1:])))
        return idx

    state_for(())
    for gram in sorted(lm.probs):
        ctx = gram[:-1]
        word = gram[-1]
        if word == BOS:
            continue
        src = state_for(suffix_context(ctx)) if not is_context(ctx) else state_for(ctx)
        weight = -lm.probs[gram] * LN10
        if word == EOS:
            current = fst.final_weight(src)
            if weight < current:
                fst.set_final(src, weight)
            continue
        if word not in word_id:
            continue
        dst = state_for(suffix_context(gram))
        fst.add_arc(src, word_id[word], word_id[word], weight, dst)

    start_ctx = (BOS,) if lm.order > 1 and (BOS,) in lm.probs else ()
    fst.start = state_for(start_ctx)
    return fst


def build_decoding_graph(alphabet: Alphabet, entries: list[LexiconEntry],
                         lm: NGramLm) -> Wfst:
    """Compose token, lexicon, and grammar graphs and trim the result."""
    tok = token_fst(alphabet)
    lex = lexicon_fst(entries, tok.osymbols)
    gram = grammar_fst(lm, lex.osymbols)
    return compose(compose(tok, lex), gram)


@dataclass
class DecodeResult:
    words: list[str]
    cost: float
    warning: str | None = None


def wfst_decode(post: ScoreMatrix, prior: PriorVector, graph: Wfst,
                acoustic_scale: float = 1.0, beam_width: int | None = None,
                word_penalty: float = 0.0) -> DecodeResult:
    """Time-synchronous Viterbi beam search over the composed graph.

    Each frame, every surviving token relaxes along arcs consuming one
    input label at cost ``arc.weight - scale * (log p - log prior)``,
    then along input-epsilon arcs at zero acoustic cost. ``beam_width``
    of None keeps every token (exact search). ``word_penalty`` is added
    per emitted word.
    """
    k = post.num_labels
    if len(graph.isymbols) - 1 != k:
        raise InvalidInputError(
            f"graph expects {len(graph.isymbols) - 1} input labels, matrix has {k}")
    if prior.size != k:
        raise InvalidInputError(
            f"prior has {prior.size} entries, matrix has {k} labels")
    if beam_width is not None and beam_width < 1:
        raise InvalidInputError("beam width must be >= 1 or None")

    # token: (cost, backpointer); backpointer: (parent_token, olabel)
    active: dict[int, tuple[float, tuple | None]] = {graph.start: (0.0, None)}
    _epsilon_relax(graph, active, word_penalty)

    scaled = -acoustic_scale * (post.log_values - prior.log_values[None, :])

    for t in range(post.num_frames):
        frame_cost = scaled[t]
        nxt: dict[int, tuple[float, tuple | None]] = {}
        for state in sorted(active):
            cost, back = active[state]
            token = (cost, back)
            for arc in graph.arcs[state]:
                if arc.ilabel == EPSILON:
                    continue
                c = cost + arc.weight + frame_cost[arc.ilabel - 1]
                if arc.olabel != EPSILON:
                    c += word_penalty
                if math.isinf(c):
                    continue
                old = nxt.get(arc.nextstate)
                if old is None or c < old[0]:
                    nxt[arc.nextstate] = (c, (token, arc.olabel))
        # The beam applies to label-consuming tokens; the epsilon closure
        # is then taken unpruned so closure twins never compete.
        if beam_width is not None and len(nxt) > beam_width:
            order = sorted(nxt.items(), key=lambda kv: (kv[1][0], kv[0]))
            nxt = dict(order[:beam_width])
        _epsilon_relax(graph, nxt, word_penalty)
        if not nxt:
            return DecodeResult([], INF, warning="no surviving hypothesis")
        active = nxt

    best_cost = INF
    best_back = None
    for state in sorted(active):
        cost, back = active[state]
        fw = graph.final_weight(state)
        if fw == INF:
            continue
        total = cost + fw
        if total < best_cost:
            best_cost = total
            best_back = (cost, back)
    if best_back is None:
        return DecodeResult([], INF, warning="no hypothesis reached a final state")

    labels: list[int] = []
    token = best_back
    while token[1] is not None:
        parent, olabel = token[1]
        if olabel != EPSILON:
            labels.append(olabel)
        token = parent
    labels.reverse()
    words = [graph.osymbols[lab] for lab in labels]
    return DecodeResult(words, best_cost)


def _epsilon_relax(graph: Wfst, tokens: dict, word_penalty: float) -> None:
    """Relax input-epsilon arcs to a fixpoint (zero acoustic cost)."""
    queue = sorted(tokens)
    while queue:
        next_queue = []
        for state in queue:
            cost, back = tokens[state]
            token = (cost, back)
            for arc in graph.arcs[state]:
                if arc.ilabel != EPSILON:
                    continue
                c = cost + arc.weight
                if arc.olabel != EPSILON:
                    c += word_penalty
                if math.isinf(c):
                    continue
                old = tokens.get(arc.nextstate)
                if old is None or c < old[0]:
                    tokens[arc.nextstate] = (c, (token, arc.olabel))
                    next_queue.append(arc.nextstate)
        queue = sorted(set(next_queue))
