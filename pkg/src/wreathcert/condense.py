"""Condensation certificates: distinct marked copies inside a prescribed ball.

A certificate packages, for one forced subset S and radius r: a translate
h != identity, the membership pattern shared by S and hS over the 4r-ball, a
distinctness witness separating the two markings, and canonical dumps of both
radius-r balls.  Together these verify that the translate marking is a
different point of the space of marked groups lying inside the radius-r
neighborhood of the base marking.
"""

from __future__ import annotations

from dataclasses import dataclass

from wreathcert import __version__
from wreathcert.errors import UsageError
from wreathcert.forcing import ForcedSubset, Pattern, TranslatedSubset
from wreathcert.groups import Backend, Element, FiniteGroupTable
from wreathcert.marked import MarkedSpec, build_ball, r_similar
from wreathcert.wreath import (
    MarkedWord,
    ambient_word,
    format_word,
    is_identity_window,
    parse_word,
    word_inverse,
)


def xi(
    subset: ForcedSubset,
    table: FiniteGroupTable,
    translate: Element | None = None,
) -> MarkedSpec:
    """Marked spec of the subset, or of its left translate by ``translate``."""
    backend = subset.backend
    if translate is None:
        return MarkedSpec(backend, table, subset)
    return MarkedSpec(backend, table, TranslatedSubset(subset, translate))


def commutator_word(backend: Backend, s: Element) -> MarkedWord:
    """The word s^-1 b s a s^-1 b^-1 s a^-1 spelled in the marked generators.

    Its conjugated b-factors cancel in every class sum, so the word is the
    identity exactly when s lies outside the subset; when s is inside, the
    evaluation at the identity point is the non-trivial commutator of the
    table generators.
    """
    n = backend.rank
    a_gen = ((n, 1),)
    a_inv = ((n, -1),)
    b_gen = ((n + 1, 1),)
    b_inv = ((n + 1, -1),)
    s_word = ambient_word(backend, s)
    s_inv = word_inverse(s_word)
    return s_inv + b_gen + s_word + a_gen + s_inv + b_inv + s_word + a_inv


@dataclass(frozen=True)
class DistinctnessWitness:
    """A point with opposite membership in two subsets, plus the separating word."""

    point: Element
    side: str  # "first" or "second": which spec contains the point
    word: MarkedWord


def distinguish(
    spec1: MarkedSpec, spec2: MarkedSpec, search_radius: int
) -> DistinctnessWitness | None:
    """Scan the ball for a membership difference and build the separating word.

    Returns None (inconclusive) when the two oracles agree on the whole
    search ball; that is not evidence the subsets are equal.
    """
    backend = spec1.backend
    if spec1.arity != spec2.arity:
        raise UsageError("marked specs have different arities")
    for s in backend.ball(search_radius):
        in1 = spec1.member(s)
        in2 = spec2.member(s)
        if in1 == in2:
            continue
        word = commutator_word(backend, s)
        v1 = spec1.verdict(word)
        v2 = spec2.verdict(word)
        if v1.identity == v2.identity:
            raise AssertionError("separating word failed to separate the verdicts")
        side = "first" if in1 else "second"
        containing = spec1 if in1 else spec2
        window = is_identity_window(
            containing.backend,
            containing.table,
            containing.subset,
            word,
            backend.length(s) + 2,
        )
        if window.identity_up_to_window:
            raise AssertionError("window oracle failed to confirm the witness")
        return DistinctnessWitness(s, side, word)
    return None


@dataclass(frozen=True)
class CondensationCertificate:
    """Verifiable witness that the translate marking is a distinct point of the
    radius-r neighborhood of the base marking."""

    radius: int
    shift: Element
    agreement: Pattern
    witness: DistinctnessWitness
    ball_digests: tuple[str, str]
    tool_version: str


def certify_condensed(
    subset: ForcedSubset, table: FiniteGroupTable, radius: int
) -> CondensationCertificate:
    """Produce a certificate for one radius on a growing forced subset.

    Steps: snapshot the 4r-ball; realize a fresh translate h whose shifted
    subset matches that snapshot exactly; inject one distinctness point far
    outside every pinned window; build both radius-r balls and require
    similarity; separate the markings at the injected point.
    """
    if radius < 1:
        raise UsageError("certificates need radius >= 1")
    backend = subset.backend
    agreement = subset.snapshot(4 * radius)
    shift = subset.realize_left(agreement)

    point = None
    for p in backend.iter_from(None):
        sp = backend.mul(shift, p)
        if subset.peek(p) is None and subset.peek(sp) is None:
            if backend.length(sp) > 4 * radius:
                point = p
                break
    subset.pin(point, True)
    s = backend.mul(shift, point)
    subset.pin(s, False)

    spec_base = xi(subset, table)
    spec_shift = xi(subset, table, translate=shift)
    ball_base = build_ball(spec_base, radius)
    ball_shift = build_ball(spec_shift, radius)
    if not r_similar(ball_base, ball_shift):
        raise AssertionError("agreement window failed to force similar balls")

    word = commutator_word(backend, s)
    v_base = spec_base.verdict(word)
    v_shift = spec_shift.verdict(word)
    if v_base.identity == v_shift.identity:
        raise AssertionError("distinctness witness failed to separate the markings")
    witness = DistinctnessWitness(s, "second", word)
    return CondensationCertificate(
        radius,
        shift,
        agreement,
        witness,
        (ball_base.dump(backend), ball_shift.dump(backend)),
        __version__,
    )


def verify_certificate(
    subset: ForcedSubset, table: FiniteGroupTable, cert: CondensationCertificate
) -> str | None:
    """Re-run every certificate invariant from scratch; None means verified.

    The caller passes a freshly replayed subset (from the session state file);
    verification reads and pins in memory but persists nothing.
    """
    backend = subset.backend
    if cert.shift == backend.identity:
        return "h is identity"
    ball = backend.ball(4 * cert.radius, cap=subset.ball_cap)
    if tuple(ball) != cert.agreement.window:
        return "agreement window is not the 4r-ball"
    members = set(cert.agreement.members)
    translated = TranslatedSubset(subset, cert.shift)
    for f in cert.agreement.window:
        want = f in members
        if subset.query(f) != want:
            return f"agreement mismatch at {backend.format(f)}"
        if translated.query(f) != want:
            return f"translate agreement mismatch at {backend.format(f)}"
    spec_base = xi(subset, table)
    spec_shift = xi(subset, table, translate=cert.shift)
    ball_base = build_ball(spec_base, cert.radius)
    ball_shift = build_ball(spec_shift, cert.radius)
    if not r_similar(ball_base, ball_shift):
        return "rebuilt balls are not similar"
    digests = (ball_base.dump(backend), ball_shift.dump(backend))
    if digests != cert.ball_digests:
        return "ball digest mismatch"
    s = cert.witness.point
    if subset.query(s) or not translated.query(s):
        return "witness point is not a membership difference"
    v_base = spec_base.verdict(cert.witness.word)
    v_shift = spec_shift.verdict(cert.witness.word)
    if v_base.identity == v_shift.identity:
        return "witness word does not separate the markings"
    return None


# ---------------------------------------------------------------------------
# Certificate file format
# ---------------------------------------------------------------------------


def certificate_to_dict(backend: Backend, cert: CondensationCertificate) -> dict:
    fmt = backend.format
    members = set(cert.agreement.members)
    return {
        "r": cert.radius,
        "h": fmt(cert.shift),
        "agreement": [[fmt(f), f in members] for f in cert.agreement.window],
        "witness": {
            "s": fmt(cert.witness.point),
            "side": cert.witness.side,
            "word": format_word(backend, cert.witness.word),
        },
        "ball_digest": list(cert.ball_digests),
        "tool_version": cert.tool_version,
    }


def certificate_from_dict(backend: Backend, data: dict) -> CondensationCertificate:
    try:
        radius = int(data["r"])
        shift = backend.parse(data["h"])
        window = []
        members = []
        for text, flag in data["agreement"]:
            f = backend.parse(text)
            window.append(f)
            if flag:
                members.append(f)
        witness = DistinctnessWitness(
            backend.parse(data["witness"]["s"]),
            data["witness"]["side"],
            parse_word(backend, data["witness"]["word"]),
        )
        digests = tuple(data["ball_digest"])
        tool_version = data["tool_version"]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed certificate: {exc}") from exc
    return CondensationCertificate(
        radius,
        shift,
        Pattern(tuple(members), tuple(window)),
        witness,
        digests,
        tool_version,
    )
