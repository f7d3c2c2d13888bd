"""Word error rate, alignment breakdowns, OOV analysis, and reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class AlignmentReport:
    """Minimum-edit-distance alignment counts for one or more utterances."""

    num_ref: int = 0
    correct: int = 0
    substitutions: int = 0
    insertions: int = 0
    deletions: int = 0
    pairs: list = field(default_factory=list)  # (ref_token | None, hyp_token | None)

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def wer(self) -> float:
        if self.num_ref == 0:
            return 0.0 if self.errors == 0 else math.inf
        return self.errors / self.num_ref

    def rate(self, count: int) -> float:
        return count / self.num_ref if self.num_ref else 0.0

    def merge(self, other: "AlignmentReport") -> "AlignmentReport":
        return AlignmentReport(
            self.num_ref + other.num_ref,
            self.correct + other.correct,
            self.substitutions + other.substitutions,
            self.insertions + other.insertions,
            self.deletions + other.deletions,
            self.pairs + other.pairs)


def align(ref, hyp) -> AlignmentReport:
    """Unit-cost alignment of two token sequences.

    Ties prefer a substitution over an insertion-plus-deletion pair and
    are otherwise resolved leftmost-first, so counts are deterministic.
    """
    ref = list(ref)
    hyp = list(hyp)
    n, m = len(ref), len(hyp)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = dist[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1])
            dele = dist[i - 1][j] + 1
            ins = dist[i][j - 1] + 1
            dist[i][j] = min(sub, dele, ins)

    pairs = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            pairs.append((ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            pairs.append((ref[i - 1], None))
            i -= 1
        else:
            pairs.append((None, hyp[j - 1]))
            j -= 1
    pairs.reverse()

    report = AlignmentReport(num_ref=n, pairs=pairs)
    for r, h in pairs:
        if r is None:
            report.insertions += 1
        elif h is None:
            report.deletions += 1
        elif r == h:
            report.correct += 1
        else:
            report.substitutions += 1
    return report


def align_corpus(refs: dict, hyps: dict) -> AlignmentReport:
    """Align per-utterance token lists keyed by utterance id."""
    total = AlignmentReport()
    for utt in sorted(refs):
        total = total.merge(align(refs[utt], hyps.get(utt, [])))
    return total


def oov_analysis(hyp_tokens, vocabulary, lowercase: bool = False):
    """Tokens absent from the vocabulary, their count and rate."""
    vocab = {v.lower() for v in vocabulary} if lowercase else set(vocabulary)
    tokens = [t.lower() for t in hyp_tokens] if lowercase else list(hyp_tokens)
    oov = [t for t in tokens if t not in vocab]
    rate = len(oov) / len(tokens) if tokens else 0.0
    return len(oov), rate, sorted(set(oov))


def compare_report(reports: dict, bonus: float | None = None,
                   bpc: float | None = None) -> dict:
    """Machine-readable comparison across decoding systems.

    Includes log2 of the insertion bonus next to the LM's bits per
    character when both are supplied, so their correspondence can be
    read off the report.
    """
    if not reports:
        raise ValueError("need at least one system report")
    out: dict = {"systems": {}}
    for name, rep in reports.items():
        out["systems"][name] = {
            "num_ref": rep.num_ref,
            "wer": rep.wer,
            "insertion_rate": rep.rate(rep.insertions),
            "substitution_rate": rep.rate(rep.substitutions),
            "deletion_rate": rep.rate(rep.deletions),
        }
    if bonus is not None:
        out["log2_insertion_bonus"] = math.log2(bonus)
    if bpc is not None:
        out["lm_bits_per_character"] = bpc
    return out


def format_comparison(report: dict) -> str:
    """Fixed-width table for terminals; one row per system."""
    lines = [f"{'System':<14}{'WER':>8}{'Ins':>8}{'Sub':>8}{'Del':>8}"]
    for name, row in report["systems"].items():
        lines.append(
            f"{name:<14}{row['wer'] * 100:>7.2f}%"
            f"{row['insertion_rate'] * 100:>7.2f}%"
            f"{row['substitution_rate'] * 100:>7.2f}%"
            f"{row['deletion_rate'] * 100:>7.2f}%")
    if "log2_insertion_bonus" in report:
        lines.append(f"log2(insertion bonus) = {report['log2_insertion_bonus']:.4f}")
    if "lm_bits_per_character" in report:
        lines.append(f"LM bits per character = {report['lm_bits_per_character']:.4f}")
    return "\n".join(lines)


def read_trans_file(path) -> dict:
    """Read ``UTTID<TAB>token sequence`` lines into a dict."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" in line:
                utt, text = line.split("\t", 1)
            else:
                utt, text = line, ""
            out[utt] = text.split()
    return out


def write_trans_file(trans: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for utt in sorted(trans):
            tokens = trans[utt]
            text = " ".join(tokens) if not isinstance(tokens, str) else tokens
            fh.write(f"{utt}\t{text}\n")
