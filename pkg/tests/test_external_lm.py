"""External LM sessions: protocol conformance, errors, handle hygiene."""

import math
import sys

import numpy as np
import pytest

from ctckit import (BeamConfig, ExternalLmSession, UniformLm, beam_decode,
                    from_characters)
from ctckit.errors import ProtocolError

from conftest import random_posteriors

UNIFORM_SERVER = [sys.executable, "-m", "ctckit.lm_server", "--uniform", "8"]


def test_uniform_server_matches_builtin():
    rng = np.random.default_rng(12)
    alphabet = from_characters("abc")
    post = random_posteriors(rng, 5, 4)
    cfg = BeamConfig(beam_width=50, insertion_bonus=2.0)
    builtin = beam_decode(post, alphabet, UniformLm(8), cfg)
    with ExternalLmSession(UNIFORM_SERVER, alphabet.size) as session:
        external = beam_decode(post, alphabet, session, cfg)
    assert [h.labels for h in external.hypotheses] == \
        [h.labels for h in builtin.hypotheses]
    for got, want in zip(external.hypotheses, builtin.hypotheses):
        assert got.score == pytest.approx(want.score, abs=1e-9)


def test_arpa_server_matches_builtin(tmp_path):
    from ctckit import train_char_lm, write_arpa
    lm = train_char_lm(["ab ba", "aab"], order=3)
    arpa = tmp_path / "char.arpa"
    write_arpa(lm.model, arpa)
    rng = np.random.default_rng(3)
    alphabet = from_characters("ab")
    post = random_posteriors(rng, 4, 3)
    cfg = BeamConfig(beam_width=100, insertion_bonus=2.5)
    builtin = beam_decode(post, alphabet, lm, cfg)
    server = [sys.executable, "-m", "ctckit.lm_server", "--arpa", str(arpa)]
    with ExternalLmSession(server, alphabet.size) as session:
        external = beam_decode(post, alphabet, session, cfg)
    assert [h.labels for h in external.hypotheses] == \
        [h.labels for h in builtin.hypotheses]
    for got, want in zip(external.hypotheses, builtin.hypotheses):
        # ARPA text carries 6 decimals in log10
        assert got.score == pytest.approx(want.score, abs=1e-4)


def test_handles_return_to_zero_after_close(tmp_path):
    report = tmp_path / "handles.txt"
    server = UNIFORM_SERVER + ["--handle-report", str(report)]
    session = ExternalLmSession(server, 8)
    state = session.start_state()
    states = [state]
    for i in range(1000):
        _, state = session.score(states[i % len(states)], "a")
        states.append(state)
    assert session.outstanding_handles == len(states)
    session.close()
    assert session.outstanding_handles == 0
    assert report.read_text().strip() == "0"


def test_malformed_response_aborts_with_line():
    bad_server = [sys.executable, "-c",
                  "print('WHAT IS THIS', flush=True); input()"]
    with pytest.raises(ProtocolError, match="WHAT IS THIS"):
        ExternalLmSession(bad_server, 4)


def test_err_response_aborts():
    server = [sys.executable, "-c", """
import sys
for line in sys.stdin:
    if line.startswith('INIT'):
        print('OK 0', flush=True)
    else:
        print('ERR no thanks', flush=True)
"""]
    session = ExternalLmSession(server, 4)
    with pytest.raises(ProtocolError, match="no thanks"):
        session.score(0, "a")


def test_process_exit_detected():
    server = [sys.executable, "-c",
              "print('OK 0', flush=True)"]  # answers INIT then exits
    session = ExternalLmSession(server, 4)
    with pytest.raises(ProtocolError):
        session.score(0, "a")


def test_timeout():
    server = [sys.executable, "-c", """
import sys, time
print('OK 0', flush=True)
time.sleep(60)
"""]
    session = ExternalLmSession(server, 4, timeout=0.3)
    with pytest.raises(ProtocolError, match="timed out"):
        session.score(0, "a")


def test_score_is_log10_converted_to_natural():
    with ExternalLmSession(UNIFORM_SERVER, 8) as session:
        logp, _ = session.score(session.start_state(), "a")
    assert logp == pytest.approx(math.log(1 / 8), abs=1e-7)
