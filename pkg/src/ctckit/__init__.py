"""ctckit: decoding toolkit for CTC acoustic-model posteriors.

Given per-frame posterior distributions over a blank-augmented label
alphabet, this package decodes transcriptions via greedy best-path
search, Viterbi search over a composed token/lexicon/grammar graph with
a word n-gram model, and character-LM-fused prefix beam search, and
ships the exact references and error-analysis tooling to compare them.
"""

from .alphabet import Alphabet, from_characters, read_alphabet, squash
from .beam import BeamConfig, BeamResult, Hypothesis, beam_decode
from .charlm import (CharNGramLm, FlatLm, UniformLm, bits_per_character,
                     train_char_lm)
from .exact import (brute_force_log_probability, enumerate_transcription_scores,
                    forward_log_probability, path_log_probability,
                    viterbi_log_probability)
from .external_lm import ExternalLmSession
from .fst import LogSemiring, TropicalSemiring, Wfst, compose, read_graph, write_graph
from .graphs import (build_decoding_graph, grammar_fst, lexicon_fst, token_fst,
                     wfst_decode)
from .greedy import greedy_decode, greedy_path, render_words
from .lexicon import LexiconEntry, read_lexicon
from .metrics import AlignmentReport, align, align_corpus, compare_report, oov_analysis
from .ngram import NGramLm, read_arpa, train_kneser_ney, write_arpa
from .posteriors import (PosteriorMatrix, PriorVector, ScoreMatrix,
                         apply_prior_scaling, estimate_priors, read_posteriors,
                         write_posteriors)
from .wordlm import perplexity, train_word_lm, vocabulary, word_score

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
