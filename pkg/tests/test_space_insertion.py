"""Space insertion: ranking against the exhaustive placement oracle."""

import math

import numpy as np
import pytest

from ctckit import (BeamConfig, FlatLm, PosteriorMatrix, beam_decode,
                    from_characters, render_words, train_char_lm)
from ctckit.errors import ConfigError

from conftest import random_posteriors
from reference import all_spacings, spaced_acoustic_mass, well_formed_spacing

EX = BeamConfig(beam_width=10 ** 6, insertion_bonus=2.5, space_insertion=True)


def lm_term(lm, labels, alphabet, space_label, bonus):
    state = lm.start_state()
    total = 0.0
    for lab in labels:
        token = "<sp>" if lab == space_label else alphabet.symbols[lab]
        logp, state = lm.score(state, token)
        total += logp
    return total + len(labels) * math.log(bonus)


class TestAgainstPlacementOracle:
    def test_every_well_formed_hypothesis_scores_exactly(self):
        alphabet = from_characters("hes")
        space = alphabet.size
        lm = train_char_lm(["he s", "se h", "h es"], order=3)
        for seed in (1, 2, 3):
            rng = np.random.default_rng(seed)
            m = random_posteriors(rng, 4, 4)
            result = beam_decode(m, alphabet, lm, EX)
            checked = 0
            for hyp in result.hypotheses:
                if not well_formed_spacing(hyp.labels, space):
                    continue
                am = spaced_acoustic_mass(hyp.labels, m, 0, space)
                want = am + lm_term(lm, hyp.labels, alphabet, space, 2.5)
                assert hyp.score == pytest.approx(want, abs=1e-9), hyp.labels
                checked += 1
            assert checked >= 5

    def test_ranking_of_placements_matches_oracle(self):
        # Posteriors spell "hes"; candidates are every single-space
        # placement over those three characters.
        alphabet = from_characters("hes")
        space = alphabet.size
        lm = train_char_lm(["he s", "he s", "she", "he is"], order=4)
        m = PosteriorMatrix.from_probs([
            [0.04, 0.90, 0.03, 0.03],   # h
            [0.04, 0.03, 0.90, 0.03],   # e
            [0.90, 0.04, 0.03, 0.03],   # blank
            [0.04, 0.03, 0.03, 0.90],   # s
        ])
        result = beam_decode(m, alphabet, lm, EX)
        decoder = {h.labels: h.score for h in result.hypotheses}
        chars = (1, 2, 3)
        candidates = [c for c in all_spacings(chars, space) if c in decoder]
        assert len(candidates) >= 6
        oracle = {}
        for cand in candidates:
            am = spaced_acoustic_mass(cand, m, 0, space)
            oracle[cand] = am + lm_term(lm, cand, alphabet, space, 2.5)
            assert decoder[cand] == pytest.approx(oracle[cand], abs=1e-9)
        assert (sorted(candidates, key=lambda c: -decoder[c])
                == sorted(candidates, key=lambda c: -oracle[c]))

    def test_lm_with_high_space_probability_inserts_spaces(self):
        alphabet = from_characters("hes")
        lm = train_char_lm(["he s", "he s", "he s"], order=4)
        m = PosteriorMatrix.from_probs([
            [0.04, 0.90, 0.03, 0.03],
            [0.04, 0.03, 0.90, 0.03],
            [0.90, 0.04, 0.03, 0.03],
            [0.04, 0.03, 0.03, 0.90],
        ])
        result = beam_decode(m, alphabet, lm,
                             BeamConfig(beam_width=32, insertion_bonus=2.5,
                                        space_insertion=True))
        words = render_words(result.best.labels, result.alphabet)
        assert words == ["he", "s"]


class TestGates:
    def test_epsilon_space_probability_never_displaces_original(self):
        # With P(space) tiny and bonus 1, the spaced copy always scores
        # below its parent, so a width-1 beam keeps the original.
        alphabet = from_characters("ab")

        class TinySpaceLm:
            has_space = True

            def start_state(self):
                return ()

            def score(self, state, token):
                return (math.log(1e-9) if token == "<sp>" else math.log(0.5)), ()

        rng = np.random.default_rng(9)
        m = random_posteriors(rng, 5, 3)
        cfg = BeamConfig(beam_width=1, insertion_bonus=1.0, space_insertion=True)
        result = beam_decode(m, alphabet, TinySpaceLm(), cfg)
        assert alphabet.size not in result.best.labels

    def test_off_is_identical_to_plain_decode(self):
        alphabet = from_characters("ab")
        lm = train_char_lm(["ab", "a b"], order=2)
        rng = np.random.default_rng(17)
        m = random_posteriors(rng, 5, 3)
        plain = beam_decode(m, alphabet, lm, BeamConfig(beam_width=8))
        gated = beam_decode(m, alphabet, lm,
                            BeamConfig(beam_width=8, space_insertion=False))
        assert [h.labels for h in plain.hypotheses] == \
            [h.labels for h in gated.hypotheses]
        assert plain.alphabet.symbols == gated.alphabet.symbols

    def test_lm_without_space_is_config_error(self):
        alphabet = from_characters("ab")
        lm = train_char_lm(["ab"], order=2)  # corpus has no spaces
        assert not lm.has_space
        rng = np.random.default_rng(2)
        with pytest.raises(ConfigError):
            beam_decode(random_posteriors(rng, 3, 3), alphabet, lm, EX)

    def test_acoustic_space_plus_insertion_is_config_error(self):
        alphabet = from_characters("ab", with_space=True)
        rng = np.random.default_rng(2)
        with pytest.raises(ConfigError):
            beam_decode(random_posteriors(rng, 3, 4), alphabet, FlatLm(), EX)

    def test_output_alphabet_gains_space(self):
        alphabet = from_characters("ab")
        lm = train_char_lm(["a b"], order=2)
        rng = np.random.default_rng(4)
        result = beam_decode(random_posteriors(rng, 3, 3), alphabet, lm, EX)
        assert result.alphabet.symbols == alphabet.symbols + ("<sp>",)
        assert result.alphabet.space_index == alphabet.size
