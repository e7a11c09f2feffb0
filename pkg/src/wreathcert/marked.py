"""Radius-r portraits of marked groups and the r-similarity test.

A marked spec fixes the ambient backend, the finite table, and a subset
oracle; its group is generated by the ambient generators plus the two
function-part generators, marked in that order.  The radius-r ball is the
rooted deterministic labeled graph on the elements of marked length <= r,
built by BFS with oracle-driven vertex merging.  Two balls are r-similar
exactly when their canonical forms are equal: a rooted deterministic labeled
graph admits at most one base- and label-preserving isomorphism, so equality
after canonical BFS ordering decides similarity in linear time.  The direct
word-enumeration test is kept as a debug oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from wreathcert.errors import CapacityError, UsageError
from wreathcert.forcing import FrozenSubset, SubsetOracle
from wreathcert.groups import Backend, Element, FiniteGroupTable
from wreathcert.wreath import (
    MarkedWord,
    Verdict,
    arity,
    format_word,
    is_identity_frozen,
    is_identity_generic,
    iter_reduced_words,
    letter_token,
    word_concat,
    word_inverse,
)

OUT = -1

DEFAULT_VERTEX_CAP = 200_000


@dataclass(eq=False)
class MarkedSpec:
    """A marked group presented through its backend, table, and subset oracle.

    Forced subsets (and their translates) get the generic oracle; frozen
    finite-stage subsets get the exact finite-support decision.
    """

    backend: Backend
    table: FiniteGroupTable
    subset: SubsetOracle
    _verdicts: dict = field(default_factory=dict, repr=False)

    @property
    def arity(self) -> int:
        return arity(self.backend)

    def member(self, x: Element) -> bool:
        return self.subset.member(x)

    def verdict(self, word: MarkedWord) -> Verdict:
        """Word-problem verdict, memoized per word.

        Pins are append-only, so memoized verdicts stay valid as the subset
        grows.
        """
        v = self._verdicts.get(word)
        if v is None:
            if isinstance(self.subset, FrozenSubset):
                v = is_identity_frozen(self.backend, self.table, self.subset, word)
            else:
                v = is_identity_generic(self.backend, self.table, self.subset, word)
            self._verdicts[word] = v
        return v

    def equal(self, w1: MarkedWord, w2: MarkedWord) -> bool:
        return self.verdict(word_concat(w1, word_inverse(w2))).identity


@dataclass(frozen=True)
class MarkedBall:
    """Canonical radius-r ball: shortlex vertex words and a full edge table.

    ``edges[v]`` lists, for the 2*arity directed letters in global letter
    order, the target vertex index or OUT when the edge leaves the ball.
    """

    radius: int
    arity: int
    vertices: tuple[MarkedWord, ...]
    edges: tuple[tuple[int, ...], ...]

    def dump(self, backend: Backend) -> str:
        lines = []
        for i, w in enumerate(self.vertices):
            lines.append(f"{i} {format_word(backend, w)}")
        for i, row in enumerate(self.edges):
            for t, target in enumerate(row):
                sym, exp = t // 2, -1 if t % 2 else 1
                tok = letter_token(backend, (sym, exp))
                lines.append(f"{i} {tok} {'OUT' if target == OUT else target}")
        return "\n".join(lines) + "\n"


def build_ball(
    spec: MarkedSpec, radius: int, vertex_cap: int = DEFAULT_VERTEX_CAP
) -> MarkedBall:
    """BFS over marked words, merging vertices through the generic oracle.

    Vertices are represented by their shortlex-least words; a candidate word
    is compared only against vertices with the same ambient tail, since a
    differing tail already separates elements.
    """
    if radius < 0:
        raise UsageError("ball radius must be >= 0")
    backend = spec.backend
    k = spec.arity
    tokens = [(sym, exp) for sym in range(k) for exp in (1, -1)]
    n = backend.rank

    vertices: list[MarkedWord] = [()]
    word_index: dict[MarkedWord, int] = {(): 0}
    tails: list[Element] = [backend.identity]
    by_tail: dict = {backend.identity: [0]}
    edges: list[list[int]] = []

    vi = 0
    while vi < len(vertices):
        word = vertices[vi]
        depth = len(word)
        row = []
        for sym, exp in tokens:
            if word and word[-1] == (sym, -exp):
                row.append(word_index[word[:-1]])
                continue
            cand = word + ((sym, exp),)
            if sym < n:
                tail = backend.mul(tails[vi], backend.generator_power(sym, exp))
            else:
                tail = tails[vi]
            target = None
            for ui in by_tail.get(tail, ()):
                if spec.equal(cand, vertices[ui]):
                    target = ui
                    break
            if target is None:
                if depth + 1 <= radius:
                    target = len(vertices)
                    if target >= vertex_cap:
                        raise CapacityError(
                            f"marked ball exceeded the vertex cap {vertex_cap}"
                        )
                    vertices.append(cand)
                    word_index[cand] = target
                    tails.append(tail)
                    by_tail.setdefault(tail, []).append(target)
                else:
                    target = OUT
            row.append(target)
        edges.append(row)
        vi += 1

    ball = MarkedBall(radius, k, tuple(vertices), tuple(tuple(r) for r in edges))
    _check_ball(ball)
    return ball


def _check_ball(ball: MarkedBall) -> None:
    """Typed invariants: determinism is structural; check inverse coherence."""
    for vi, row in enumerate(ball.edges):
        for t, target in enumerate(row):
            if target == OUT:
                continue
            back = ball.edges[target][t ^ 1]
            if back != vi:
                raise AssertionError(
                    f"inverse-edge coherence fails at vertex {vi}, letter {t}"
                )


def r_similar(b1: MarkedBall, b2: MarkedBall) -> bool:
    """Label- and base-preserving isomorphism of two balls, by canonical equality."""
    if b1.arity != b2.arity:
        raise UsageError(f"arity mismatch: {b1.arity} vs {b2.arity}")
    if b1.radius != b2.radius:
        raise UsageError(f"radius mismatch: {b1.radius} vs {b2.radius}")
    return b1.vertices == b2.vertices and b1.edges == b2.edges


def similarity_debug(
    spec1: MarkedSpec, spec2: MarkedSpec, radius: int
) -> MarkedWord | None:
    """Shortlex-first word of length <= 2r with differing identity verdicts.

    Direct enumeration over all freely reduced words; the sufficient test
    behind the ball comparison, kept as an independent debug oracle.
    """
    if spec1.arity != spec2.arity:
        raise UsageError(f"arity mismatch: {spec1.arity} vs {spec2.arity}")
    for word in iter_reduced_words(spec1.backend, 2 * radius):
        if spec1.verdict(word).identity != spec2.verdict(word).identity:
            return word
    return None
