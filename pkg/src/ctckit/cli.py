"""Command-line entry point: ``ctc <subcommand> ...``.

Decoders print one ``UTTID<TAB>transcription`` line per utterance, in
manifest order, and are byte-reproducible across runs and across
``--threads`` settings. Failures exit with a documented nonzero code
and a single machine-parsable ``error-class: message`` line on stderr:

  0 success           5 invalid-input / unsupported-operation
  1 internal error    6 config-error
  2 usage error       7 capacity-error
  3 missing-file      8 protocol-error (external LM)
  4 format-error      9 graph-error
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import demo as demo_mod
from .alphabet import read_alphabet
from .beam import BeamConfig, beam_decode
from .charlm import FlatLm, train_char_lm
from .errors import CtcError, FormatError, InvalidInputError
from .exact import forward_log_probability
from .external_lm import ExternalLmSession
from .fst import read_graph, write_graph
from .graphs import build_decoding_graph, wfst_decode
from .greedy import greedy_decode, render_words
from .lexicon import read_lexicon
from .metrics import align, align_corpus, oov_analysis, read_trans_file
from .ngram import read_arpa, write_arpa
from .posteriors import (estimate_priors, read_posteriors, read_priors,
                         write_priors)
from .wordlm import train_word_lm


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper()),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"missing-file: {exc}", file=sys.stderr)
        return 3
    except CtcError as exc:
        print(f"{exc.label}: {exc}", file=sys.stderr)
        return exc.exit_code


def _build_parser() -> argparse.ArgumentParser:
    import os
    parser = argparse.ArgumentParser(
        prog="ctc",
        description=__doc__ + "\nGlobal flags fall back to CTC_THREADS, "
                              "CTC_SEED, and CTC_LOG_LEVEL when set.",
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("CTC_THREADS", "1")),
                        help="utterance-level worker count (output unaffected)")
    parser.add_argument("--seed", type=int,
                        default=int(os.environ.get("CTC_SEED", demo_mod.DEMO_SEED)),
                        help="seed for synthetic data (demo)")
    parser.add_argument("--log-level",
                        default=os.environ.get("CTC_LOG_LEVEL", "warning"),
                        choices=["debug", "info", "warning", "error"])
    sub = parser.add_subparsers(dest="command", required=True)

    decode = sub.add_parser("decode", help="decode posterior files")
    dsub = decode.add_subparsers(dest="strategy", required=True)

    greedy_p = dsub.add_parser("greedy", help="per-frame argmax decoding")
    _add_input_flags(greedy_p)
    greedy_p.add_argument("--alphabet", required=True)
    greedy_p.add_argument("--word-convention", choices=["case", "space"])
    greedy_p.set_defaults(func=_cmd_greedy)

    beam_p = dsub.add_parser("beam", help="character-LM-fused prefix beam search")
    _add_input_flags(beam_p)
    beam_p.add_argument("--alphabet", required=True)
    lm_group = beam_p.add_mutually_exclusive_group()
    lm_group.add_argument("--charlm", help="ARPA character model")
    lm_group.add_argument("--external-lm", help="command serving the LM line protocol")
    beam_p.add_argument("--beam", type=int, default=64)
    beam_p.add_argument("--bonus", type=float, default=2.5)
    beam_p.add_argument("--lm-weight", type=float, default=1.0)
    beam_p.add_argument("--space-insertion", action="store_true")
    beam_p.add_argument("--nbest", type=int, default=1)
    beam_p.add_argument("--word-convention", choices=["case", "space"])
    beam_p.set_defaults(func=_cmd_beam)

    wfst_p = dsub.add_parser("wfst", help="Viterbi search over a decoding graph")
    _add_input_flags(wfst_p)
    wfst_p.add_argument("--graph", required=True)
    wfst_p.add_argument("--prior", required=True)
    wfst_p.add_argument("--acoustic-scale", type=float, default=1.0)
    wfst_p.add_argument("--beam", type=int, default=None)
    wfst_p.add_argument("--word-penalty", type=float, default=0.0)
    wfst_p.set_defaults(func=_cmd_wfst)

    tch = sub.add_parser("train-charlm", help="train the character n-gram")
    tch.add_argument("--corpus", required=True)
    tch.add_argument("--order", type=int, default=7)
    tch.add_argument("--discount", type=float, default=0.75)
    tch.add_argument("--max-chars", type=int, default=128)
    tch.add_argument("--out", required=True)
    tch.set_defaults(func=_cmd_train_charlm)

    twd = sub.add_parser("train-wordlm", help="train the word n-gram")
    twd.add_argument("--corpus", required=True)
    twd.add_argument("--order", type=int, default=3)
    twd.add_argument("--discount", type=float, default=0.75)
    twd.add_argument("--out", required=True)
    twd.set_defaults(func=_cmd_train_wordlm)

    bg = sub.add_parser("build-graph", help="compose token, lexicon, and grammar graphs")
    bg.add_argument("--alphabet", required=True)
    bg.add_argument("--lexicon", required=True)
    bg.add_argument("--arpa", required=True)
    bg.add_argument("--out", required=True)
    bg.set_defaults(func=_cmd_build_graph)

    sc = sub.add_parser("score", help="word error rate and error breakdown")
    sc.add_argument("--ref", required=True)
    sc.add_argument("--hyp", required=True)
    sc.add_argument("--vocab", help="training vocabulary for OOV analysis")
    sc.add_argument("--per-utt", action="store_true")
    sc.add_argument("--json", action="store_true")
    sc.set_defaults(func=_cmd_score)

    ss = sub.add_parser("score-seq", help="exact log P(sequence | posteriors)")
    ss.add_argument("--post", required=True)
    ss.add_argument("--alphabet", required=True)
    ss.add_argument("--seq", required=True, help="transcription text")
    ss.set_defaults(func=_cmd_score_seq)

    ep = sub.add_parser("estimate-priors", help="average posteriors into a prior file")
    ep.add_argument("--out", required=True)
    ep.add_argument("--manifest")
    ep.add_argument("posts", nargs="*")
    ep.set_defaults(func=_cmd_estimate_priors)

    dm = sub.add_parser("demo", help="end-to-end pipeline on the bundled toy corpus")
    dm.add_argument("--workdir", help="dump refs, hyps, and posteriors here")
    dm.set_defaults(func=_cmd_demo)

    return parser


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--post", help="single posterior file")
    group.add_argument("--manifest", help="UTTID<TAB>posterior-path lines")
    p.add_argument("--uttid", help="utterance id for --post (default: file stem)")


def _utterances(args) -> list[tuple[str, str]]:
    if args.post:
        utt = args.uttid or Path(args.post).stem
        return [(utt, args.post)]
    items = []
    with open(args.manifest, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise FormatError("expected UTTID<TAB>path",
                                  path=args.manifest, line=lineno)
            utt, path = line.split("\t", 1)
            items.append((utt, path))
    if not items:
        raise FormatError("manifest is empty", path=args.manifest, line=1)
    return items


def _run_pool(items, fn, threads: int) -> list:
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _emit(lines) -> None:
    out = sys.stdout
    for line in lines:
        out.write(line + "\n")


def _render(labels, alphabet, convention) -> str:
    if convention:
        return " ".join(render_words(labels, alphabet, convention))
    return alphabet.labels_to_text(labels)


def _cmd_greedy(args) -> int:
    alphabet = read_alphabet(args.alphabet)

    def decode(item):
        utt, path = item
        post = _load_posteriors(path, alphabet.size)
        labels = greedy_decode(post, alphabet)
        return f"{utt}\t{_render(labels, alphabet, args.word_convention)}"

    _emit(_run_pool(_utterances(args), decode, args.threads))
    return 0


def _cmd_beam(args) -> int:
    alphabet = read_alphabet(args.alphabet)
    cfg = BeamConfig(beam_width=args.beam, insertion_bonus=args.bonus,
                     lm_weight=args.lm_weight,
                     space_insertion=args.space_insertion)
    arpa_lm = None
    if args.charlm:
        from .charlm import CharNGramLm
        arpa_lm = CharNGramLm(read_arpa(args.charlm))

    def decode(item):
        utt, path = item
        post = _load_posteriors(path, alphabet.size)
        if args.external_lm:
            with ExternalLmSession(args.external_lm, alphabet.size) as lm:
                result = beam_decode(post, alphabet, lm, cfg)
        else:
            result = beam_decode(post, alphabet, arpa_lm or FlatLm(), cfg)
        if args.nbest <= 1:
            text = _render(result.best.labels, result.alphabet,
                           args.word_convention)
            return [f"{utt}\t{text}"]
        lines = []
        for rank, hyp in enumerate(result.hypotheses[:args.nbest], start=1):
            text = _render(hyp.labels, result.alphabet, args.word_convention)
            lines.append(f"{utt}\t{rank}\t{hyp.score:.6f}\t{text}")
        return lines

    for chunk in _run_pool(_utterances(args), decode, args.threads):
        _emit(chunk)
    return 0


def _cmd_wfst(args) -> int:
    graph = read_graph(args.graph)
    prior = read_priors(args.prior)

    def decode(item):
        utt, path = item
        post = _load_posteriors(path, len(graph.isymbols) - 1)
        result = wfst_decode(post, prior, graph,
                             acoustic_scale=args.acoustic_scale,
                             beam_width=args.beam,
                             word_penalty=args.word_penalty)
        if result.warning:
            logging.getLogger("ctc.wfst").warning("%s: %s", utt, result.warning)
        return f"{utt}\t{' '.join(result.words)}"

    _emit(_run_pool(_utterances(args), decode, args.threads))
    return 0


def _load_posteriors(path, expected_labels: int):
    post = read_posteriors(path)
    if post.num_labels != expected_labels:
        raise InvalidInputError(
            f"{path}: matrix has {post.num_labels} labels, expected {expected_labels}")
    return post


def _read_corpus(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def _cmd_train_charlm(args) -> int:
    lm = train_char_lm(_read_corpus(args.corpus), order=args.order,
                       discount=args.discount, max_chars=args.max_chars)
    write_arpa(lm.model, args.out)
    return 0


def _cmd_train_wordlm(args) -> int:
    lm = train_word_lm(_read_corpus(args.corpus), order=args.order,
                       discount=args.discount)
    write_arpa(lm, args.out)
    return 0


def _cmd_build_graph(args) -> int:
    alphabet = read_alphabet(args.alphabet)
    entries = read_lexicon(args.lexicon, alphabet)
    lm = read_arpa(args.arpa)
    graph = build_decoding_graph(alphabet, entries, lm)
    write_graph(graph, args.out)
    return 0


def _cmd_score(args) -> int:
    refs = read_trans_file(args.ref)
    hyps = read_trans_file(args.hyp)
    total = align_corpus(refs, hyps)
    payload = {
        "num_ref": total.num_ref,
        "wer": total.wer,
        "correct": total.correct,
        "substitutions": total.substitutions,
        "insertions": total.insertions,
        "deletions": total.deletions,
    }
    if args.vocab:
        with open(args.vocab, encoding="utf-8") as fh:
            vocab = {line.strip() for line in fh if line.strip()}
        all_hyp_tokens = [t for utt in sorted(hyps) for t in hyps[utt]]
        count, rate, tokens = oov_analysis(all_hyp_tokens, vocab)
        payload["oov_count"] = count
        payload["oov_rate"] = rate
        payload["oov_tokens"] = tokens
    per_utt = {}
    if args.per_utt:
        for utt in sorted(refs):
            per_utt[utt] = align(refs[utt], hyps.get(utt, [])).wer
        payload["per_utt"] = per_utt
    if args.json:
        import json
        _emit([json.dumps(payload, sort_keys=True)])
    else:
        lines = [f"WER {total.wer * 100:.2f}%  "
                 f"(N={total.num_ref} C={total.correct} S={total.substitutions} "
                 f"I={total.insertions} D={total.deletions})"]
        if "oov_count" in payload:
            lines.append(f"OOV {payload['oov_count']} tokens "
                         f"({payload['oov_rate'] * 100:.2f}%)")
        for utt, wer in per_utt.items():
            lines.append(f"{utt}\t{wer * 100:.2f}%")
        _emit(lines)
    return 0


def _cmd_score_seq(args) -> int:
    alphabet = read_alphabet(args.alphabet)
    post = _load_posteriors(args.post, alphabet.size)
    labels = alphabet.text_to_labels(args.seq)
    logp = forward_log_probability(labels, post)
    _emit([f"{float(logp)!r}"])
    return 0


def _cmd_estimate_priors(args) -> int:
    paths = list(args.posts)
    if args.manifest:
        paths.extend(path for _, path in _utterances(
            argparse.Namespace(post=None, manifest=args.manifest, uttid=None)))
    if not paths:
        raise InvalidInputError("no posterior files given")
    prior = estimate_priors(read_posteriors(p) for p in paths)
    write_priors(prior, args.out)
    return 0


def _cmd_demo(args) -> int:
    result = demo_mod.run_demo(seed=args.seed, workdir=args.workdir,
                               threads=args.threads)
    _emit([result.table])
    return 0


if __name__ == "__main__":
    sys.exit(main())
