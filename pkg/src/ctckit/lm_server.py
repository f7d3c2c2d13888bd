"""Reference external-LM server speaking the ctckit line protocol.

Run as ``python -m ctckit.lm_server --uniform 32`` or with an ARPA
character model: ``python -m ctckit.lm_server --arpa model.arpa``.
Doubles as executable documentation of the protocol and as the test
double for external-LM integration.
"""

from __future__ import annotations

import argparse
import sys

from .charlm import SPACE_TOKEN
from .external_lm import REPLACEMENT_CHAR
from .ngram import read_arpa


def _char_to_token(char: str) -> str:
    if char == " ":
        return SPACE_TOKEN
    if char == REPLACEMENT_CHAR:
        return "<unk>"
    return char


def serve(stdin, stdout, uniform: int | None, arpa_path: str | None,
          handle_report: str | None = None) -> int:
    model = read_arpa(arpa_path) if arpa_path else None
    states: dict[int, tuple[str, ...]] = {}
    next_id = 0

    def alloc(context: tuple[str, ...]) -> int:
        nonlocal next_id
        handle = next_id
        next_id += 1
        states[handle] = context
        return handle

    for raw in stdin:
        fields = raw.split()
        if not fields:
            continue
        cmd = fields[0]
        try:
            if cmd == "INIT" and len(fields) == 2:
                int(fields[1])
                state0 = alloc(("<s>",))
                stdout.write(f"OK {state0}\n")
            elif cmd == "SCORE" and len(fields) == 3:
                context = states[int(fields[1])]
                token = _char_to_token(chr(int(fields[2], 16)))
                if model is not None:
                    log10p = model.log10_score(context, token)
                    next_ctx = (context + (model.normalize_token(token),))
                    next_ctx = next_ctx[-(model.order - 1):] if model.order > 1 else ()
                else:
                    import math
                    log10p = -math.log10(uniform)
                    next_ctx = ()
                stdout.write(f"OK {log10p!r} {alloc(next_ctx)}\n")
            elif cmd == "FREE" and len(fields) == 2:
                del states[int(fields[1])]
                stdout.write("OK\n")
            else:
                stdout.write(f"ERR unknown request {cmd}\n")
        except (KeyError, ValueError) as exc:
            stdout.write(f"ERR bad request: {exc}\n")
        stdout.flush()

    if handle_report:
        with open(handle_report, "w", encoding="utf-8") as fh:
            fh.write(f"{len(states)}\n")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--uniform", type=int, help="uniform LM over this many symbols")
    group.add_argument("--arpa", help="serve this ARPA character model")
    parser.add_argument("--handle-report", help="write live handle count here on exit")
    args = parser.parse_args(argv)
    return serve(sys.stdin, sys.stdout, args.uniform, args.arpa,
                 args.handle_report)


if __name__ == "__main__":
    sys.exit(main())
