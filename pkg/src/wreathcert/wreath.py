"""Words over the marked generators and the two word-problem oracles.

The marked alphabet for a rank-n ambient backend has n+2 symbols: the ambient
generators x1..xn, then the delta function at the identity with value a, then
the indicator function of the forced subset with value b.  A word is a tuple
of (symbol, exponent) letters with exponent +-1.

Every word is rewritten into a collected form: an ordered list of conjugated
generator factors (conjugator, kind, exponent) times an ambient tail, where
the conjugator of each factor is the product of the ambient letters preceding
it.  Pointwise evaluation of the collected form in the function part drives
both oracles: the generic oracle decides identity from the tail, the class
sums of equal-conjugator b-factors, and evaluation at the a-factor
conjugator points; the window oracle instead brute-forces every point of a
ball and is used to cross-validate the generic one.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

from wreathcert import _kernel
from wreathcert.errors import CapacityError, UsageError
from wreathcert.forcing import (
    FrozenSubset,
    GenericSubset,
    Pattern,
    SubsetOracle,
)
from wreathcert.groups import Backend, Element, FiniteGroupTable, fin_power

Letter = tuple[int, int]
MarkedWord = tuple[Letter, ...]

A_KIND = 0
B_KIND = 1

WITNESS_POOL_LIMIT = 8


# ---------------------------------------------------------------------------
# Word plumbing
# ---------------------------------------------------------------------------


def arity(backend: Backend) -> int:
    return backend.rank + 2


def letter_token(backend: Backend, letter: Letter) -> str:
    sym, exp = letter
    n = backend.rank
    if sym < n:
        name = f"x{sym + 1}"
    elif sym == n:
        name = "a"
    elif sym == n + 1:
        name = "b"
    else:
        raise UsageError(f"letter symbol {sym} out of range")
    return name + ("^-1" if exp < 0 else "")


def format_word(backend: Backend, word: MarkedWord) -> str:
    if not word:
        return "e"
    return " ".join(letter_token(backend, l) for l in word)


def parse_word(backend: Backend, text: str) -> MarkedWord:
    """Parse the word grammar; errors carry the 1-based token position."""
    text = text.strip()
    if text == "e" or not text:
        return ()
    n = backend.rank
    out = []
    for pos, tok in enumerate(text.split(), start=1):
        name, caret, suffix = tok.partition("^")
        if caret and suffix != "-1":
            raise UsageError(f"token {pos}: bad exponent in {tok!r} (only ^-1 allowed)")
        exp = -1 if caret else 1
        if name == "a":
            sym = n
        elif name == "b":
            sym = n + 1
        elif name.startswith("x") and name[1:].isdigit():
            idx = int(name[1:])
            if not 1 <= idx <= n:
                raise UsageError(
                    f"token {pos}: generator index in {tok!r} out of range 1..{n}"
                )
            sym = idx - 1
        else:
            raise UsageError(f"token {pos}: unknown token {tok!r}")
        out.append((sym, exp))
    return tuple(out)


def token_index(letter: Letter) -> int:
    """Position of a directed letter in the global order x1 < x1^-1 < ... < b^-1."""
    sym, exp = letter
    return 2 * sym + (0 if exp > 0 else 1)


def word_sort_key(word: MarkedWord) -> tuple:
    return (len(word), tuple(token_index(l) for l in word))


def word_inverse(word: MarkedWord) -> MarkedWord:
    return tuple((sym, -exp) for sym, exp in reversed(word))


def word_concat(w1: MarkedWord, w2: MarkedWord) -> MarkedWord:
    return w1 + w2


def word_append_reduced(word: list, letter: Letter) -> None:
    """Append a letter to a freely reduced word held as a list, cancelling."""
    sym, exp = letter
    if word and word[-1] == (sym, -exp):
        word.pop()
    else:
        word.append(letter)


def reduce_word(word: MarkedWord) -> MarkedWord:
    out: list = []
    for letter in word:
        word_append_reduced(out, letter)
    return tuple(out)


def ambient_word(backend: Backend, g: Element) -> MarkedWord:
    """Spell an ambient element in the marked generators (its canonical geodesic)."""
    _, letters = backend.sort_key(g) if backend.kind == "zd" else (None, g)
    return tuple((c // 2, -1 if c & 1 else 1) for c in letters)


def word_from_collected(backend: Backend, cf: CollectedForm) -> MarkedWord:
    """Spell a collected form back out letter by letter (conjugated powers, then tail)."""
    n = backend.rank
    letters: list[Letter] = []
    for conj, kind, exp in cf.factors:
        sym = n if kind == A_KIND else n + 1
        conj_word = ambient_word(backend, conj)
        letters.extend(conj_word)
        letters.extend([(sym, 1 if exp > 0 else -1)] * abs(exp))
        letters.extend(word_inverse(conj_word))
    letters.extend(ambient_word(backend, cf.tail))
    return tuple(letters)


def iter_reduced_words(backend: Backend, max_len: int) -> Iterator[MarkedWord]:
    """All freely reduced marked words of length <= max_len, shortlex order."""
    k = arity(backend)
    tokens = [(sym, exp) for sym in range(k) for exp in (1, -1)]
    yield ()
    level: list[MarkedWord] = [()]
    for _ in range(max_len):
        nxt = []
        for w in level:
            last = w[-1] if w else None
            for sym, exp in tokens:
                if last == (sym, -exp):
                    continue
                w2 = w + ((sym, exp),)
                nxt.append(w2)
                yield w2
        level = nxt


# ---------------------------------------------------------------------------
# Collected form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CollectedForm:
    """Factors (conjugator, kind, exponent) in word order, times an ambient tail."""

    factors: tuple[tuple[Element, int, int], ...]
    tail: Element


def collect(backend: Backend, word: MarkedWord) -> CollectedForm:
    """Rewrite a marked word as conjugated generator powers times its tail.

    Consecutive factors with equal conjugator and kind merge; zero exponents
    drop (and the merge cascades across the dropped factor).
    """
    n = backend.rank
    mul = backend.mul
    prefix = backend.identity
    factors: list = []
    for sym, exp in word:
        if sym < n:
            prefix = mul(prefix, backend.generator_power(sym, exp))
            continue
        kind = A_KIND if sym == n else B_KIND
        if factors and factors[-1][0] == prefix and factors[-1][1] == kind:
            conj, k, old = factors.pop()
            if old + exp != 0:
                factors.append((conj, k, old + exp))
        else:
            factors.append((prefix, kind, exp))
    return CollectedForm(tuple(factors), prefix)


@dataclass(frozen=True)
class FactorClass:
    """B-factors sharing one conjugator, with their exponent sum."""

    conjugator: Element
    members: tuple[int, ...]
    exponent_sum: int


@dataclass(frozen=True)
class ClassPartition:
    classes: tuple[FactorClass, ...]


def partition_classes(cf: CollectedForm) -> ClassPartition:
    """Partition the b-factors by conjugator equality, in first-occurrence order."""
    by_conj: dict = {}
    order: list = []
    b_ordinal = 0
    for conj, kind, exp in cf.factors:
        if kind != B_KIND:
            continue
        if conj not in by_conj:
            by_conj[conj] = [[], 0]
            order.append(conj)
        by_conj[conj][0].append(b_ordinal)
        by_conj[conj][1] += exp
        b_ordinal += 1
    return ClassPartition(
        tuple(
            FactorClass(c, tuple(by_conj[c][0]), by_conj[c][1]) for c in order
        )
    )


# ---------------------------------------------------------------------------
# Pointwise evaluation
# ---------------------------------------------------------------------------


def evaluate_at(
    backend: Backend,
    table: FiniteGroupTable,
    oracle: SubsetOracle,
    cf: CollectedForm,
    h: Element,
) -> int:
    """Value of the function part at the point h, as a table element index.

    An a-factor conjugated by u contributes at h = u only; a b-factor
    conjugated by v contributes where v^-1 h lies in the subset, querying (and
    for forced subsets thereby pinning) the oracle.  Contributions multiply
    left to right in factor order.
    """
    mul = backend.mul
    inv = backend.inv
    acc = table.identity
    for conj, kind, exp in cf.factors:
        if kind == A_KIND:
            if conj != h:
                continue
            gen = table.gen_a
        else:
            if not oracle.member(mul(inv(conj), h)):
                continue
            gen = table.gen_b
        acc = table.mul[acc][fin_power(table, gen, exp)]
    return acc


# ---------------------------------------------------------------------------
# Generic oracle (exact over forced subsets)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    """Generic word-problem verdict; non-identity carries a concrete witness."""

    identity: bool
    witness_point: Element | None = None
    witness_tail: Element | None = None


def is_identity_generic(
    backend: Backend,
    table: FiniteGroupTable,
    subset: GenericSubset,
    word: MarkedWord,
) -> Verdict:
    """Decide whether a marked word is the identity over a forced subset.

    Identity holds iff the tail is trivial, every class exponent sum of the
    b-factors powers the table generator b to the identity, and the full form
    evaluates to the identity at every distinct a-factor conjugator point.
    A violated class sum is witnessed by realizing a firing pattern that
    isolates that class (reusing pinned-true points when one already works).
    """
    if not hasattr(subset, "realize_right"):
        raise UsageError("the generic oracle needs a forced subset (or a translate)")
    cf = collect(backend, word)
    if cf.tail != backend.identity:
        return Verdict(False, witness_tail=cf.tail)
    part = partition_classes(cf)
    a_points: list = []
    seen = set()
    for conj, kind, _ in cf.factors:
        if kind == A_KIND and conj not in seen:
            seen.add(conj)
            a_points.append(conj)
    for idx, cls in enumerate(part.classes):
        if fin_power(table, table.gen_b, cls.exponent_sum) != table.identity:
            h = _class_sum_witness(backend, table, subset, cf, part, idx, a_points)
            return Verdict(False, witness_point=h)
    for u in a_points:
        if evaluate_at(backend, table, subset, cf, u) != table.identity:
            return Verdict(False, witness_point=u)
    return Verdict(True)


def _class_sum_witness(
    backend: Backend,
    table: FiniteGroupTable,
    subset: GenericSubset,
    cf: CollectedForm,
    part: ClassPartition,
    class_idx: int,
    a_points: list,
) -> Element:
    """A point where the form provably evaluates away from the identity.

    Pinned-true points are tried first; when none separates, a firing pattern
    isolating the violated class is realized on demand: the translate makes
    exactly that class's b-factors fire while avoiding the a-factor points.
    """
    ident = table.identity
    for p in subset.iter_true_points(WITNESS_POOL_LIMIT):
        if evaluate_at(backend, table, subset, cf, p) != ident:
            return p
    inv = backend.inv
    reps = [cls.conjugator for cls in part.classes]
    pattern = Pattern.of(
        backend,
        [inv(part.classes[class_idx].conjugator)],
        [inv(v) for v in reps],
    )
    avoid = set(a_points)
    for g in subset.find_realizations("R", pattern):
        h = inv(g)
        if h not in avoid and evaluate_at(backend, table, subset, cf, h) != ident:
            return h
    while True:
        g = subset.realize_right(pattern)
        h = inv(g)
        if h not in avoid and evaluate_at(backend, table, subset, cf, h) != ident:
            return h


def elements_equal(
    backend: Backend,
    table: FiniteGroupTable,
    subset: GenericSubset,
    w1: MarkedWord,
    w2: MarkedWord,
) -> bool:
    return is_identity_generic(
        backend, table, subset, word_concat(w1, word_inverse(w2))
    ).identity


def firing_candidates(
    backend: Backend, cf: CollectedForm, oracle: SubsetOracle
) -> list:
    """Every point where some factor can fire, shortlex sorted.

    Outside this set all a-factors miss and all b-factors see points off the
    listed trues, so the function part is the identity there.
    """
    mul = backend.mul
    candidates = set()
    for conj, kind, _ in cf.factors:
        if kind == A_KIND:
            candidates.add(conj)
        else:
            for s in oracle.iter_true_points():
                candidates.add(mul(conj, s))
    return sorted(candidates, key=backend.sort_key)


def is_identity_frozen(
    backend: Backend,
    table: FiniteGroupTable,
    frozen: FrozenSubset,
    word: MarkedWord,
) -> Verdict:
    """Exact word-problem verdict over an explicitly finite subset.

    The function part of any word is supported inside its firing candidates,
    so checking the tail and evaluating at those finitely many points decides
    identity outright (no genericity needed).
    """
    cf = collect(backend, word)
    if cf.tail != backend.identity:
        return Verdict(False, witness_tail=cf.tail)
    for p in firing_candidates(backend, cf, frozen):
        if evaluate_at(backend, table, frozen, cf, p) != table.identity:
            return Verdict(False, witness_point=p)
    return Verdict(True)


# ---------------------------------------------------------------------------
# Window oracle (brute force over a ball)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WindowVerdict:
    """Brute-force verdict: a violating point or tail is conclusive,
    identity-up-to-window is not a proof of identity."""

    violation: Element | None = None
    witness_tail: Element | None = None

    @property
    def identity_up_to_window(self) -> bool:
        return self.violation is None and self.witness_tail is None


def is_identity_window(
    backend: Backend,
    table: FiniteGroupTable,
    oracle: SubsetOracle,
    word: MarkedWord,
    radius: int,
    ball_cap: int | None = None,
) -> WindowVerdict:
    """Check the tail, then evaluate the collected form at every ball point.

    The subset is read at its current finite stage (pinned trues, default
    False elsewhere), keeping this oracle read-only and independent of the
    class-sum criterion.  A violation is conclusive at any radius; the
    identity-up-to-window answer gets weaker as the radius shrinks.
    """
    if radius < 0:
        raise UsageError("window radius must be >= 0")
    cf = collect(backend, word)
    if cf.tail != backend.identity:
        return WindowVerdict(witness_tail=cf.tail)
    if not cf.factors:
        return WindowVerdict()
    stage = oracle if isinstance(oracle, FrozenSubset) else oracle.freeze()
    if ball_cap is not None and backend.ball_size(radius) > ball_cap:
        raise CapacityError(
            f"window ball of radius {radius} has {backend.ball_size(radius)} "
            f"elements, over the cap {ball_cap}"
        )
    factors = [
        (
            backend.inv(conj),
            kind,
            fin_power(table, table.gen_a if kind == A_KIND else table.gen_b, exp),
        )
        for conj, kind, exp in cf.factors
    ]
    if backend.kind == "free":
        hit = _kernel.free_window_scan(
            backend.n_letters,
            radius,
            factors,
            stage.true_set(),
            table.mul_flat,
            table.order,
            table.identity,
        )
        return WindowVerdict(violation=hit)
    ident = table.identity
    for h in backend.ball(radius):
        acc = ident
        for vinv, kind, contrib in factors:
            x = backend.mul(vinv, h)
            fires = x == backend.identity if kind == A_KIND else stage.member(x)
            if fires:
                acc = table.mul[acc][contrib]
        if acc != ident:
            return WindowVerdict(violation=h)
    return WindowVerdict()


# ---------------------------------------------------------------------------
# Pinned windows of function-part elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WindowElement:
    """A wreath element at finite resolution: the function part restricted to
    the ball of ``radius`` (only non-identity values stored) plus the ambient
    tail.  Values are complete for the oracle stage they were built against."""

    values: tuple[tuple[Element, int], ...]
    tail: Element
    radius: int

    @cached_property
    def value_map(self) -> dict:
        return dict(self.values)

    def value_at(self, table: FiniteGroupTable, p: Element) -> int:
        return self.value_map.get(p, table.identity)


def _window_from_points(backend, table, points, tail, radius) -> WindowElement:
    vals = [
        (p, v)
        for p, v in sorted(points.items(), key=lambda pv: backend.sort_key(pv[0]))
        if v != table.identity and backend.length(p) <= radius
    ]
    return WindowElement(tuple(vals), tail, radius)


def function_window(
    backend: Backend,
    table: FiniteGroupTable,
    oracle: SubsetOracle,
    cf: CollectedForm,
    radius: int,
) -> WindowElement:
    """Window of a collected form: candidate firing points are the a-factor
    conjugators and the b-conjugator translates of the pinned-true points."""
    points = {
        p: evaluate_at(backend, table, oracle, cf, p)
        for p in firing_candidates(backend, cf, oracle)
        if backend.length(p) <= radius
    }
    return _window_from_points(backend, table, points, cf.tail, radius)


def letter_window(
    backend: Backend,
    table: FiniteGroupTable,
    oracle: SubsetOracle,
    letter: Letter,
    radius: int,
) -> WindowElement:
    return function_window(backend, table, oracle, collect(backend, (letter,)), radius)


def window_mul(
    backend: Backend, table: FiniteGroupTable, x: WindowElement, y: WindowElement
) -> WindowElement:
    """Wreath multiplication of windows; the certified radius shrinks by the
    length of the left tail."""
    mul = backend.mul
    tail = mul(x.tail, y.tail)
    radius = min(x.radius, y.radius - backend.length(x.tail))
    ti = backend.inv(x.tail)
    pts = {p for p, _ in x.values} | {mul(x.tail, q) for q, _ in y.values}
    points = {}
    for p in pts:
        if backend.length(p) > radius:
            continue
        points[p] = table.mul[x.value_at(table, p)][y.value_at(table, mul(ti, p))]
    return _window_from_points(backend, table, points, tail, radius)


def window_conjugate(
    backend: Backend, table: FiniteGroupTable, x: WindowElement, h: Element
) -> WindowElement:
    """Window of h * x * h^-1; the function part shifts by h."""
    mul = backend.mul
    radius = x.radius - backend.length(h)
    tail = mul(h, mul(x.tail, backend.inv(h)))
    points = {mul(h, p): v for p, v in x.values}
    return _window_from_points(backend, table, points, tail, radius)


def word_window(
    backend: Backend,
    table: FiniteGroupTable,
    oracle: SubsetOracle,
    word: MarkedWord,
    letter_radius: int,
) -> WindowElement:
    """Letter-by-letter product of the letter windows of a word."""
    out = WindowElement((), backend.identity, letter_radius)
    for letter in word:
        out = window_mul(
            backend, table, out, letter_window(backend, table, oracle, letter, letter_radius)
        )
    return out


def windows_agree(
    backend: Backend, x: WindowElement, y: WindowElement, radius: int
) -> bool:
    """Equality of two windows on the ball of the given radius (tails too)."""
    if x.radius < radius or y.radius < radius:
        raise UsageError("windows are not certified out to the comparison radius")
    if x.tail != y.tail:
        return False
    clip_x = {p: v for p, v in x.values if backend.length(p) <= radius}
    clip_y = {p: v for p, v in y.values if backend.length(p) <= radius}
    return clip_x == clip_y
