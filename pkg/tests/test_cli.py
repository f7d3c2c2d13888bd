"""CLI pipelines: subcommand behavior, exit codes, determinism."""

import json
import subprocess
import sys

import numpy as np
import pytest

from ctckit import from_characters, write_posteriors
from ctckit.alphabet import write_alphabet
from ctckit.cli import main
from ctckit.lexicon import LexiconEntry, write_lexicon

CORPUS = ["ab a", "ab ab", "a ab", "a a b", "b ab a"]


def run_cli(args):
    proc = subprocess.run([sys.executable, "-m", "ctckit.cli", *args],
                          capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


@pytest.fixture
def workspace(tmp_path):
    alphabet = from_characters("ab", with_space=True, word_convention="space")
    write_alphabet(alphabet, tmp_path / "alphabet.txt")
    (tmp_path / "corpus.txt").write_text("\n".join(CORPUS) + "\n", encoding="utf-8")
    # space-terminated pronunciations keep word boundaries unambiguous
    write_lexicon([LexiconEntry("ab", ("a", "b", "<sp>")),
                   LexiconEntry("a", ("a", "<sp>")),
                   LexiconEntry("b", ("b", "<sp>"))], tmp_path / "lexicon.txt")
    rng = np.random.default_rng(13)
    for i, text in enumerate(["ab a ", "a b "]):
        from ctckit.synth import synthesize_posteriors
        post = synthesize_posteriors(text, alphabet, rng, corruption_rate=0.0)
        write_posteriors(post, tmp_path / f"utt{i}.ctcp")
    manifest = "".join(f"utt{i}\t{tmp_path}/utt{i}.ctcp\n" for i in range(2))
    (tmp_path / "manifest.txt").write_text(manifest, encoding="utf-8")
    return tmp_path


class TestDecodePipelines:
    def test_greedy_single_file(self, workspace, capsys):
        code = main(["decode", "greedy", "--post", str(workspace / "utt0.ctcp"),
                     "--alphabet", str(workspace / "alphabet.txt")])
        assert code == 0
        out = capsys.readouterr().out
        assert out == "utt0\tab a \n"  # trailing space symbol is rendered

    def test_greedy_manifest_word_convention(self, workspace, capsys):
        code = main(["decode", "greedy", "--manifest", str(workspace / "manifest.txt"),
                     "--alphabet", str(workspace / "alphabet.txt"),
                     "--word-convention", "space"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines == ["utt0\tab a", "utt1\ta b"]

    def test_beam_with_trained_charlm(self, workspace, capsys):
        assert main(["train-charlm", "--corpus", str(workspace / "corpus.txt"),
                     "--order", "3", "--out", str(workspace / "char.arpa")]) == 0
        code = main(["decode", "beam", "--manifest", str(workspace / "manifest.txt"),
                     "--alphabet", str(workspace / "alphabet.txt"),
                     "--charlm", str(workspace / "char.arpa"),
                     "--beam", "8", "--bonus", "2.5"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("utt0\t")

    def test_beam_nbest_format(self, workspace, capsys):
        code = main(["decode", "beam", "--post", str(workspace / "utt0.ctcp"),
                     "--alphabet", str(workspace / "alphabet.txt"),
                     "--beam", "4", "--nbest", "3"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 3
        for rank, line in enumerate(lines, start=1):
            fields = line.split("\t")
            assert fields[0] == "utt0"
            assert int(fields[1]) == rank
            float(fields[2])

    def test_wfst_pipeline(self, workspace, capsys):
        ws = workspace
        assert main(["train-wordlm", "--corpus", str(ws / "corpus.txt"),
                     "--order", "2", "--out", str(ws / "word.arpa")]) == 0
        assert main(["build-graph", "--alphabet", str(ws / "alphabet.txt"),
                     "--lexicon", str(ws / "lexicon.txt"),
                     "--arpa", str(ws / "word.arpa"),
                     "--out", str(ws / "graph.fst")]) == 0
        assert main(["estimate-priors", "--out", str(ws / "prior.txt"),
                     str(ws / "utt0.ctcp"), str(ws / "utt1.ctcp")]) == 0
        code = main(["decode", "wfst", "--manifest", str(ws / "manifest.txt"),
                     "--graph", str(ws / "graph.fst"),
                     "--prior", str(ws / "prior.txt")])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "utt0\tab a"
        assert lines[1] == "utt1\ta b"

    def test_score_seq_prints_logprob(self, workspace, capsys):
        code = main(["score-seq", "--post", str(workspace / "utt0.ctcp"),
                     "--alphabet", str(workspace / "alphabet.txt"),
                     "--seq", "ab a"])
        assert code == 0
        value = float(capsys.readouterr().out.strip())
        assert value < 0


class TestScoreCommand:
    def test_score_json(self, workspace, capsys):
        (workspace / "ref.txt").write_text("u1\ta b\nu2\tab\n", encoding="utf-8")
        (workspace / "hyp.txt").write_text("u1\ta b\nu2\ta\n", encoding="utf-8")
        code = main(["score", "--ref", str(workspace / "ref.txt"),
                     "--hyp", str(workspace / "hyp.txt"), "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["num_ref"] == 3
        assert payload["substitutions"] == 1
        assert payload["wer"] == pytest.approx(1 / 3)

    def test_score_with_vocab_and_per_utt(self, workspace, capsys):
        (workspace / "ref.txt").write_text("u1\ta b\n", encoding="utf-8")
        (workspace / "hyp.txt").write_text("u1\ta zzz\n", encoding="utf-8")
        (workspace / "vocab.txt").write_text("a\nb\n", encoding="utf-8")
        code = main(["score", "--ref", str(workspace / "ref.txt"),
                     "--hyp", str(workspace / "hyp.txt"),
                     "--vocab", str(workspace / "vocab.txt"),
                     "--per-utt", "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["oov_count"] == 1
        assert payload["oov_tokens"] == ["zzz"]
        assert payload["per_utt"]["u1"] == pytest.approx(0.5)


class TestExitCodes:
    def test_missing_file_is_3(self, workspace):
        code, _, err = run_cli(["decode", "greedy", "--post", "/nowhere.ctcp",
                                "--alphabet", str(workspace / "alphabet.txt")])
        assert code == 3
        assert err.startswith("missing-file:")

    def test_format_error_is_4_names_offset(self, workspace, tmp_path):
        bad = tmp_path / "bad.ctcp"
        bad.write_bytes(b"JUNKJUNKJUNKJUNKJUNK")
        code, _, err = run_cli(["decode", "greedy", "--post", str(bad),
                                "--alphabet", str(workspace / "alphabet.txt")])
        assert code == 4
        assert err.startswith("format-error:")
        assert "byte 0" in err

    def test_usage_error_is_2(self):
        code, _, _ = run_cli(["decode", "greedy", "--no-such-flag"])
        assert code == 2

    def test_invalid_input_is_5(self, workspace, tmp_path):
        small = from_characters("a")
        write_alphabet(small, tmp_path / "small.txt")
        code, _, err = run_cli(["decode", "greedy",
                                "--post", str(workspace / "utt0.ctcp"),
                                "--alphabet", str(tmp_path / "small.txt")])
        assert code == 5
        assert err.startswith("invalid-input:")

    def test_config_error_is_6(self, workspace):
        code, _, err = run_cli([
            "decode", "beam", "--post", str(workspace / "utt0.ctcp"),
            "--alphabet", str(workspace / "alphabet.txt"), "--space-insertion"])
        assert code == 6
        assert err.startswith("config-error:")


class TestDeterminism:
    def test_byte_identical_across_runs_and_threads(self, workspace):
        args = ["decode", "greedy", "--manifest", str(workspace / "manifest.txt"),
                "--alphabet", str(workspace / "alphabet.txt")]
        _, out1, _ = run_cli(args)
        _, out2, _ = run_cli(args)
        _, out4, _ = run_cli(["--threads", "4", *args])
        assert out1 == out2 == out4

    def test_demo_reproducible(self):
        code1, out1, _ = run_cli(["demo"])
        code2, out2, _ = run_cli(["--threads", "3", "demo"])
        assert code1 == code2 == 0
        assert out1 == out2
