"""Command-line surface wiring the pipeline end to end.

One session state file per subset; mutating subcommands persist it atomically
under an advisory lock.  Exit codes: 0 success or positive verdict, 1 negative
mathematical verdict (non-identity, not similar, inconclusive, failed
verification), 2 usage error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import contextmanager

from filelock import FileLock, Timeout

from wreathcert import condense, forcing, groups, marked, state, wreath
from wreathcert.errors import CapacityError, ConflictError, UsageError

DEFAULT_STATE = "wreathcert-state.json"

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3

LOCK_TIMEOUT = 10.0


@contextmanager
def _locked(path: str):
    lock = FileLock(path + ".lock")
    try:
        lock.acquire(timeout=LOCK_TIMEOUT)
    except Timeout:
        raise UsageError(f"state file {path} is locked by another process") from None
    try:
        yield
    finally:
        lock.release()


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wreathcert",
        description=(
            "Word problem, marked Cayley balls, and condensation certificates "
            "for wreath-product groups over lazily forced subsets."
        ),
    )
    parser.add_argument(
        "--state", default=DEFAULT_STATE, help="session state file (JSON)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a fresh session state")
    p.add_argument("--ambient", required=True, help="backend spec: free:k or zd:d")
    p.add_argument("--table", required=True, help="preset name (s3, d4, q8) or table file")
    p.add_argument("--gen-a", type=int, default=None, help="override the a generator index")
    p.add_argument("--gen-b", type=int, default=None, help="override the b generator index")
    p.add_argument("--ball-cap", type=int, default=None)
    p.add_argument("--translate-cap", type=int, default=None)
    p.add_argument("--force", action="store_true", help="overwrite an existing state file")

    p = sub.add_parser("validate-table", help="check every finite-group table axiom")
    p.add_argument("--table", default=None, help="preset or file; defaults to the session table")

    p = sub.add_parser("ball", help="enumerate an ambient ball")
    p.add_argument("--radius", type=int, required=True)

    p = sub.add_parser("wp", help="word problem for a marked word")
    p.add_argument("--word", required=True)
    p.add_argument("--window", type=int, default=None, help="also run the window oracle at this radius")

    p = sub.add_parser("snapshot", help="pin a whole ball and print its pattern")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--out", default=None, help="write the pattern to this JSON file")

    p = sub.add_parser("realize", help="realize a membership pattern on a fresh translate")
    p.add_argument("--side", choices=("L", "R"), required=True)
    p.add_argument("--pattern", required=True, help="pattern JSON file")

    p = sub.add_parser("transitivity", help="move one pattern neighborhood across another")
    p.add_argument("--su", required=True, help="source pattern JSON file")
    p.add_argument("--tv", required=True, help="target pattern JSON file")
    p.add_argument("--side", choices=("L", "R"), default="L")

    p = sub.add_parser("markedball", help="build and print a marked Cayley ball")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--translate", default=None, help="ambient element text for a translate marking")
    p.add_argument("--out", default=None, help="write the ball dump to this file")

    p = sub.add_parser("similar", help="compare radius-r balls of two sessions")
    p.add_argument("--other", required=True, help="second session state file")
    p.add_argument("--radius", type=int, required=True)

    p = sub.add_parser("distinguish", help="search for a point separating two sessions")
    p.add_argument("--other", required=True, help="second session state file")
    p.add_argument("--radius", type=int, required=True, help="search radius")

    p = sub.add_parser("certify", help="emit a condensation certificate")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--out", required=True, help="certificate output file")

    p = sub.add_parser("verify", help="re-check a certificate against the state file")
    p.add_argument("--cert", required=True)
    return parser


def run(argv: list[str]) -> int:
    args = _parser().parse_args(argv)
    handler = _HANDLERS[args.command]
    return handler(args)


def main() -> None:
    try:
        code = run(sys.argv[1:])
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except ConflictError as exc:
        print(f"conflict: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        code = EXIT_CAPACITY
    sys.exit(code)


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------


def _cmd_init(args) -> int:
    if os.path.exists(args.state) and not args.force:
        raise UsageError(f"state file {args.state} exists; use --force to overwrite")
    ball_cap, translate_cap = state.default_caps()
    config = state.SessionConfig(
        ambient=args.ambient,
        table_source=state.table_source_from_arg(args.table),
        gen_a=args.gen_a,
        gen_b=args.gen_b,
        ball_cap=args.ball_cap if args.ball_cap is not None else ball_cap,
        translate_cap=args.translate_cap
        if args.translate_cap is not None
        else translate_cap,
    )
    session = state.Session.create(config)
    diagnostic = groups.validate_table(session.table)
    if diagnostic is not None:
        raise UsageError(f"table rejected: {diagnostic}")
    with _locked(args.state):
        state.save_session(args.state, session)
    print(f"initialized {args.state}: ambient {session.backend.name}, "
          f"table {session.table.name} (order {session.table.order})")
    return EXIT_OK


def _cmd_validate_table(args) -> int:
    if args.table is not None:
        config = state.SessionConfig("free:2", state.table_source_from_arg(args.table))
        table = config.build_table()
    else:
        table = state.load_session(args.state).table
    diagnostic = groups.validate_table(table)
    if diagnostic is None:
        print("ok")
        return EXIT_OK
    print(diagnostic)
    return EXIT_NEGATIVE


def _cmd_ball(args) -> int:
    session = state.load_session(args.state)
    spec = groups.ball(session.backend, args.radius, cap=session.config.ball_cap)
    print(f"radius {spec.radius} size {len(spec.elements)}")
    for g in spec.elements:
        print(session.backend.format(g))
    return EXIT_OK


def _cmd_wp(args) -> int:
    with _locked(args.state):
        session = state.load_session(args.state)
        backend = session.backend
        word = wreath.parse_word(backend, args.word)
        verdict = wreath.is_identity_generic(backend, session.table, session.subset, word)
        if verdict.identity:
            print("identity")
        elif verdict.witness_tail is not None:
            print(f"non-identity (tail {backend.format(verdict.witness_tail)})")
        else:
            print(f"non-identity (witness point {backend.format(verdict.witness_point)})")
        if args.window is not None:
            wv = wreath.is_identity_window(
                backend,
                session.table,
                session.subset,
                word,
                args.window,
                ball_cap=session.config.ball_cap,
            )
            if wv.identity_up_to_window:
                print(f"window({args.window}): no violation")
            elif wv.witness_tail is not None:
                print(f"window({args.window}): tail {backend.format(wv.witness_tail)}")
            else:
                print(f"window({args.window}): violation at {backend.format(wv.violation)}")
        state.save_session(args.state, session)
    return EXIT_OK if verdict.identity else EXIT_NEGATIVE


def _cmd_snapshot(args) -> int:
    with _locked(args.state):
        session = state.load_session(args.state)
        pattern = session.subset.snapshot(args.radius)
        state.save_session(args.state, session)
    print(f"window {len(pattern.window)} members {len(pattern.members)}")
    for x in pattern.members:
        print(session.backend.format(x))
    if args.out:
        state.save_pattern(args.out, session.backend, pattern)
    return EXIT_OK


def _cmd_realize(args) -> int:
    with _locked(args.state):
        session = state.load_session(args.state)
        pattern = state.load_pattern(args.pattern, session.backend)
        if args.side == "L":
            witness = session.subset.realize_left(pattern)
        else:
            witness = session.subset.realize_right(pattern)
        state.save_session(args.state, session)
    print(session.backend.format(witness))
    return EXIT_OK


def _cmd_transitivity(args) -> int:
    session = state.load_session(args.state)
    backend = session.backend
    source = state.load_pattern(args.su, backend)
    target = state.load_pattern(args.tv, backend)
    witness = forcing.transitivity_witness(backend, source, target, args.side)
    ok, reason = forcing.check_transitivity_witness(backend, source, target, witness)
    print(f"shift {backend.format(witness.shift)}")
    print(f"mixed window {len(witness.mixed.window)} members "
          f"{[backend.format(x) for x in witness.mixed.members]}")
    print("identities ok" if ok else f"identities FAILED: {reason}")
    return EXIT_OK if ok else EXIT_NEGATIVE


def _cmd_markedball(args) -> int:
    with _locked(args.state):
        session = state.load_session(args.state)
        backend = session.backend
        translate = backend.parse(args.translate) if args.translate else None
        spec = condense.xi(session.subset, session.table, translate=translate)
        ball = marked.build_ball(spec, args.radius)
        state.save_session(args.state, session)
    dump = ball.dump(backend)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dump)
        print(f"{len(ball.vertices)} vertices -> {args.out}")
    else:
        sys.stdout.write(dump)
    return EXIT_OK


def _cmd_similar(args) -> int:
    with _locked(args.state), _locked(args.other):
        s1 = state.load_session(args.state)
        s2 = state.load_session(args.other)
        if s1.backend.name != s2.backend.name:
            raise UsageError("the two sessions use different ambient backends")
        b1 = marked.build_ball(condense.xi(s1.subset, s1.table), args.radius)
        b2 = marked.build_ball(condense.xi(s2.subset, s2.table), args.radius)
        similar = marked.r_similar(b1, b2)
        state.save_session(args.state, s1)
        state.save_session(args.other, s2)
    print("similar" if similar else "not similar")
    return EXIT_OK if similar else EXIT_NEGATIVE


def _cmd_distinguish(args) -> int:
    with _locked(args.state), _locked(args.other):
        s1 = state.load_session(args.state)
        s2 = state.load_session(args.other)
        if s1.backend.name != s2.backend.name:
            raise UsageError("the two sessions use different ambient backends")
        witness = condense.distinguish(
            condense.xi(s1.subset, s1.table),
            condense.xi(s2.subset, s2.table),
            args.radius,
        )
        state.save_session(args.state, s1)
        state.save_session(args.other, s2)
    if witness is None:
        print("inconclusive")
        return EXIT_NEGATIVE
    backend = s1.backend
    print(f"point {backend.format(witness.point)} ({witness.side} session)")
    print(f"word {wreath.format_word(backend, witness.word)}")
    return EXIT_OK


def _cmd_certify(args) -> int:
    with _locked(args.state):
        session = state.load_session(args.state)
        cert = condense.certify_condensed(session.subset, session.table, args.radius)
        state.save_session(args.state, session)
        state.save_certificate(args.out, session.backend, cert)
    backend = session.backend
    print(f"radius {cert.radius}")
    print(f"shift {backend.format(cert.shift)}")
    print(f"agreement window {len(cert.agreement.window)}")
    print(f"witness point {backend.format(cert.witness.point)}")
    print(f"certificate -> {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    session = state.load_session(args.state)
    cert = condense.certificate_from_dict(
        session.backend, state.load_certificate_dict(args.cert)
    )
    failure = condense.verify_certificate(session.subset, session.table, cert)
    if failure is None:
        print("verified")
        return EXIT_OK
    print(f"verification failed: {failure}")
    return EXIT_NEGATIVE


_HANDLERS = {
    "init": _cmd_init,
    "validate-table": _cmd_validate_table,
    "ball": _cmd_ball,
    "wp": _cmd_wp,
    "snapshot": _cmd_snapshot,
    "realize": _cmd_realize,
    "transitivity": _cmd_transitivity,
    "markedball": _cmd_markedball,
    "similar": _cmd_similar,
    "distinguish": _cmd_distinguish,
    "certify": _cmd_certify,
    "verify": _cmd_verify,
}


if __name__ == "__main__":
    main()
