"""End-to-end toy pipeline: train LMs, build the graph, decode, score.

Runs entirely on a bundled synthetic corpus: posteriors are generated
from known transcripts with a seeded noise process, then decoded three
ways (greedy, LM-fused beam, graph search) and scored against the
references. Fully deterministic for a fixed seed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .alphabet import from_characters
from .beam import BeamConfig, beam_decode
from .charlm import bits_per_character, train_char_lm
from .graphs import build_decoding_graph, wfst_decode
from .greedy import greedy_decode, render_words
from .lexicon import LexiconEntry
from .metrics import (align_corpus, compare_report, format_comparison,
                      write_trans_file)
from .posteriors import estimate_priors, write_posteriors
from .synth import synthesize_posteriors
from .wordlm import train_word_lm

DEMO_SENTENCES = (
    "the ship sails at dawn",
    "the old ship waits in the harbor",
    "a storm hits the coast at night",
    "the crew waits for calm seas",
    "wind fills the white sails",
    "the captain reads the charts",
    "a light shines on the water",
    "the tide turns at dusk",
    "the crew sees land at dawn",
    "rain falls on the old harbor",
    "the captain calls the crew",
    "calm water shines at night",
    "the storm breaks before dawn",
    "a ship waits for the tide",
    "the charts show the coast",
    "land lies beyond the seas",
    "the white light fades at dusk",
    "the wind turns before night",
    "a calm dawn follows the storm",
    "the crew sails for home",
    "home lies beyond the water",
    "the harbor light calls the ship",
    "dusk falls on calm seas",
    "the coast shines in the rain",
    "the old captain sees the light",
    "night falls and the wind fades",
    "the tide breaks on the coast",
    "the sails fill before the storm",
    "a white ship sails for land",
    "the water turns dark at night",
    "dark clouds follow the ship",
    "the crew reads the dark sky",
    "the sky clears before dawn",
    "clouds hide the harbor light",
    "the calm sea shines like glass",
    "the captain waits for the wind",
)

DEMO_UTTERANCE_COUNT = 16
DEMO_SEED = 20_240_831


@dataclass
class DemoResult:
    report: dict
    table: str
    references: dict
    hypotheses: dict  # system name -> {utt: [words]}
    char_bpc: float


def run_demo(seed: int = DEMO_SEED, workdir: str | None = None,
             threads: int = 1) -> DemoResult:
    rng = np.random.default_rng(seed)
    chars = sorted({ch for line in DEMO_SENTENCES for ch in line if ch != " "})
    alphabet = from_characters("".join(chars), with_space=True,
                               word_convention="space")

    char_lm = train_char_lm(DEMO_SENTENCES, order=5)
    word_lm = train_word_lm(DEMO_SENTENCES, order=2)
    entries = [LexiconEntry(w, tuple(w))
               for w in sorted({w for line in DEMO_SENTENCES for w in line.split()})]
    graph = build_decoding_graph(alphabet, entries, word_lm)

    texts = list(DEMO_SENTENCES[:DEMO_UTTERANCE_COUNT])
    utt_ids = [f"utt{i:03d}" for i in range(len(texts))]
    posts = [synthesize_posteriors(text, alphabet, rng,
                                   corruption_rate=0.05,
                                   space_corruption_rate=0.09)
             for text in texts]

    priors = estimate_priors(posts)
    beam_cfg = BeamConfig(beam_width=8, insertion_bonus=2.5)

    def decode_one(post):
        hyp = {}
        hyp["greedy"] = render_words(greedy_decode(post, alphabet), alphabet)
        result = beam_decode(post, alphabet, char_lm, beam_cfg)
        hyp["beam"] = render_words(result.best.labels, result.alphabet)
        hyp["wfst"] = wfst_decode(post, priors, graph, acoustic_scale=0.8,
                                  beam_width=400).words
        return hyp

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            decoded = list(pool.map(decode_one, posts))
    else:
        decoded = [decode_one(p) for p in posts]

    references = {utt: text.split() for utt, text in zip(utt_ids, texts)}
    hypotheses = {
        system: {utt: decoded[i][system] for i, utt in enumerate(utt_ids)}
        for system in ("greedy", "beam", "wfst")
    }

    reports = {system: align_corpus(references, hyps)
               for system, hyps in hypotheses.items()}
    bpc = bits_per_character(char_lm, DEMO_SENTENCES)
    report = compare_report(reports, bonus=beam_cfg.insertion_bonus, bpc=bpc)
    table = format_comparison(report)

    if workdir:
        os.makedirs(workdir, exist_ok=True)
        write_trans_file(references, os.path.join(workdir, "ref.txt"))
        for system, hyps in hypotheses.items():
            write_trans_file(hyps, os.path.join(workdir, f"hyp_{system}.txt"))
        for utt, post in zip(utt_ids, posts):
            write_posteriors(post, os.path.join(workdir, f"{utt}.ctcp"))
        with open(os.path.join(workdir, "corpus.txt"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(DEMO_SENTENCES) + "\n")

    return DemoResult(report, table, references, hypotheses, bpc)
