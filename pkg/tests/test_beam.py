"""LM-fused prefix beam search against the enumeration oracle."""

import math

import numpy as np
import pytest

from ctckit import (BeamConfig, FlatLm, PosteriorMatrix, UniformLm,
                    beam_decode, enumerate_transcription_scores,
                    forward_log_probability, from_characters, train_char_lm)
from ctckit.errors import InvalidInputError
from ctckit.logmath import LOG_ZERO

from conftest import random_instances

EXHAUSTIVE = BeamConfig(beam_width=10 ** 6, insertion_bonus=1.0)


def oracle_argmax(table):
    return min(table, key=lambda z: (-table[z], z))


class TestExactness:
    def test_flat_lm_unit_bonus_equals_oracle(self):
        for m, alphabet in random_instances(seed=21, count=80, max_t=5):
            table = enumerate_transcription_scores(m, alphabet)
            result = beam_decode(m, alphabet, FlatLm(), EXHAUSTIVE)
            assert result.best.labels == oracle_argmax(table)
            for hyp in result.hypotheses:
                assert hyp.score == pytest.approx(table[hyp.labels], abs=1e-9)

    def test_uniform_lm_with_cancelling_bonus(self):
        # A proper 1/K LM whose mass the bonus exactly cancels reduces
        # to the acoustic argmax as well.
        for m, alphabet in random_instances(seed=22, count=30, max_t=5):
            k = 8
            cfg = BeamConfig(beam_width=10 ** 6, insertion_bonus=float(k))
            table = enumerate_transcription_scores(m, alphabet)
            result = beam_decode(m, alphabet, UniformLm(k), cfg)
            assert result.best.labels == oracle_argmax(table)

    def test_stored_acoustic_mass_matches_forward(self):
        for m, alphabet in random_instances(seed=23, count=40, max_t=5):
            result = beam_decode(m, alphabet, FlatLm(), EXHAUSTIVE)
            for hyp in result.hypotheses[:10]:
                want = forward_log_probability(hyp.labels, m)
                assert hyp.acoustic_log == pytest.approx(want, abs=1e-8)


class TestPruningCounterexample:
    # Crafted so that the true best transcription gathers most of its
    # mass through a prefix that a width-2 beam discards at frame 1.
    ROWS = [[0.25, 0.33, 0.42], [0.02, 0.90, 0.08], [0.96, 0.02, 0.02]]

    def test_width_two_differs_from_exhaustive(self):
        m = PosteriorMatrix.from_probs(self.ROWS)
        alphabet = from_characters("ab")
        table = enumerate_transcription_scores(m, alphabet)
        exhaustive = beam_decode(m, alphabet, FlatLm(), EXHAUSTIVE)
        assert exhaustive.best.labels == oracle_argmax(table)
        narrow = beam_decode(
            m, alphabet, FlatLm(), BeamConfig(beam_width=2, insertion_bonus=1.0))
        assert narrow.best.labels != exhaustive.best.labels

    def test_wider_beam_never_scores_worse_here(self):
        # Not a theorem for beam search in general (an extra slot can
        # reroute merges downstream); asserted on this fixture and in
        # particular for the exhaustive limit.
        m = PosteriorMatrix.from_probs(self.ROWS)
        alphabet = from_characters("ab")
        scores = []
        for width in (1, 2, 4, 8, 64, 1024):
            cfg = BeamConfig(beam_width=width, insertion_bonus=1.0)
            scores.append(beam_decode(m, alphabet, FlatLm(), cfg).best.score)
        assert all(a <= b + 1e-12 for a, b in zip(scores, scores[1:]))
        assert scores[-1] == max(scores)


class TestScoreDecomposition:
    def test_score_rederives_from_fields(self):
        lm = train_char_lm(["ab", "ba", "aab"], order=3)
        cfg = BeamConfig(beam_width=32, insertion_bonus=2.5, lm_weight=0.7)
        for m, alphabet in random_instances(seed=31, count=25, max_t=5, max_k=3):
            result = beam_decode(m, alphabet, lm, cfg)
            for hyp in result.hypotheses:
                want = (hyp.acoustic_log + cfg.lm_weight * hyp.lm_log
                        + hyp.emissions * math.log(cfg.insertion_bonus))
                assert hyp.score == pytest.approx(want, abs=1e-8)
                assert hyp.emissions == len(hyp.labels)

    def test_prefixes_unique_in_nbest(self):
        lm = train_char_lm(["ab"], order=2)
        for m, alphabet in random_instances(seed=37, count=10, max_t=5, max_k=3):
            result = beam_decode(m, alphabet, lm, BeamConfig(beam_width=16))
            seen = [h.labels for h in result.hypotheses]
            assert len(seen) == len(set(seen))


class TestLmFlip:
    # Acoustic margin between "a" and "ab" is smaller than the margin a
    # trained LM provides for b following a.
    ROWS = [[0.02, 0.96, 0.02], [0.47, 0.04, 0.49]]

    def test_trained_lm_flips_toward_ab(self):
        m = PosteriorMatrix.from_probs(self.ROWS)
        alphabet = from_characters("ab")
        cfg = BeamConfig(beam_width=1000, insertion_bonus=2.5)
        uniform = beam_decode(m, alphabet, UniformLm(4), cfg)
        assert uniform.best.labels == (1,)
        lm = train_char_lm(["ab", "ab", "ab"], order=2)
        fused = beam_decode(m, alphabet, lm, cfg)
        assert fused.best.labels == (1, 2)

    def test_flip_verified_by_exhaustive_prefix_scoring(self):
        m = PosteriorMatrix.from_probs(self.ROWS)
        alphabet = from_characters("ab")
        lm = train_char_lm(["ab", "ab", "ab"], order=2)
        table = enumerate_transcription_scores(m, alphabet)
        log_bonus = math.log(2.5)

        def fused_score(z):
            state = lm.start_state()
            lm_log = 0.0
            for lab in z:
                logp, state = lm.score(state, alphabet.symbols[lab])
                lm_log += logp
            return table[z] + lm_log + len(z) * log_bonus

        want = min(table, key=lambda z: (-fused_score(z), z))
        got = beam_decode(m, alphabet, lm,
                          BeamConfig(beam_width=10 ** 6, insertion_bonus=2.5))
        assert got.best.labels == want == (1, 2)


class TestEdgeBehavior:
    def test_blank_dominant_empty_wins_for_small_bonus(self):
        m = PosteriorMatrix.from_probs([[0.9, 0.05, 0.05]] * 4)
        alphabet = from_characters("ab")
        lm = train_char_lm(["ab", "ba"], order=2)
        for bonus in (0.5, 1.0):
            cfg = BeamConfig(beam_width=10 ** 6, insertion_bonus=bonus)
            assert beam_decode(m, alphabet, lm, cfg).best.labels == ()

    def test_prune_floor_can_empty_the_beam(self):
        m = PosteriorMatrix.from_probs([[0.5, 0.3, 0.2]])
        alphabet = from_characters("ab")
        cfg = BeamConfig(beam_width=8, insertion_bonus=1.0, prune_floor=10.0)
        result = beam_decode(m, alphabet, FlatLm(), cfg)
        assert result.best.labels == ()
        assert result.best.score == LOG_ZERO

    def test_deterministic_across_runs(self):
        lm = train_char_lm(["abc", "cab"], order=3)
        rng = np.random.default_rng(55)
        m = PosteriorMatrix.from_probs(rng.dirichlet(np.ones(4), size=6))
        alphabet = from_characters("abc")
        cfg = BeamConfig(beam_width=6, insertion_bonus=2.5)
        first = beam_decode(m, alphabet, lm, cfg)
        for _ in range(3):
            again = beam_decode(m, alphabet, lm, cfg)
            assert [h.labels for h in again.hypotheses] == \
                [h.labels for h in first.hypotheses]
            assert [h.score for h in again.hypotheses] == \
                [h.score for h in first.hypotheses]

    def test_size_mismatch_rejected(self, fixture_matrix):
        with pytest.raises(InvalidInputError):
            beam_decode(fixture_matrix, from_characters("abc"), FlatLm(),
                        BeamConfig(beam_width=4))

    def test_bad_config_rejected(self):
        with pytest.raises(InvalidInputError):
            BeamConfig(beam_width=0)
        with pytest.raises(InvalidInputError):
            BeamConfig(insertion_bonus=0.0)
        with pytest.raises(InvalidInputError):
            BeamConfig(lm_weight=-1.0)
