"""Lazily forced subsets of the ambient group.

A ForcedSubset starts empty and acquires membership bits on demand: reads pin
the queried point to False, pattern realizations pin fresh translated windows
so that a requested finite intersection pattern holds exactly.  Pins are
append-only, so every answer the subset ever gives stays valid under all
later extensions.  All choices are deterministic (shortlex-least admissible),
making every run replayable bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from wreathcert.errors import CapacityError, ConflictError, UsageError
from wreathcert.groups import Backend, Element

DEFAULT_TRANSLATE_CAP = 64
DEFAULT_BALL_CAP = 2_000_000


@dataclass(frozen=True)
class Pattern:
    """A finite membership requirement: the subset meets ``window`` in ``members``."""

    members: tuple
    window: tuple

    @classmethod
    def of(cls, backend: Backend, members, window) -> "Pattern":
        wset = set(window)
        mset = set(members)
        if not mset <= wset:
            raise UsageError("pattern members must lie inside the window")
        key = backend.sort_key
        return cls(tuple(sorted(mset, key=key)), tuple(sorted(wset, key=key)))

    def window_radius(self, backend: Backend) -> int:
        return max((backend.length(f) for f in self.window), default=0)


@dataclass(frozen=True)
class Realization:
    """A fulfilled density requirement: pattern, side (L/R), and witness translate."""

    side: str
    pattern: Pattern
    witness: Element


class ForcedSubset:
    """Append-only pinned subset with deterministic on-demand realizations."""

    def __init__(
        self,
        backend: Backend,
        *,
        translate_cap: int = DEFAULT_TRANSLATE_CAP,
        ball_cap: int = DEFAULT_BALL_CAP,
    ):
        self.backend = backend
        self.translate_cap = translate_cap
        self.ball_cap = ball_cap
        self._pins: dict = {}
        self._true_points: list = []
        self.realizations: list[Realization] = []
        self._used: set = set()
        self._resume: dict = {}
        self._len_counts: dict[int, int] = {}
        self.frontier = 0

    # -- membership ---------------------------------------------------------

    def query(self, h: Element) -> bool:
        """Membership with pin-on-read: unseen points are pinned False."""
        val = self._pins.get(h)
        if val is None:
            self._set_pin(h, False)
            return False
        return val

    member = query

    def peek(self, h: Element) -> bool | None:
        """Pinned value without pinning; None if undetermined."""
        return self._pins.get(h)

    def _set_pin(self, h: Element, value: bool) -> None:
        self._pins[h] = value
        if value:
            self._true_points.append(h)
        n = self.backend.length(h)
        self._len_counts[n] = self._len_counts.get(n, 0) + 1
        if n > self.frontier:
            self.frontier = n

    def pin(self, h: Element, value: bool) -> None:
        old = self._pins.get(h)
        if old is None:
            self._set_pin(h, value)
        elif old != value:
            raise ConflictError(
                f"{self.backend.format(h)} is already pinned {old}, cannot re-pin {value}"
            )

    def pin_window(self, pattern: Pattern) -> None:
        members = set(pattern.members)
        for f in pattern.window:
            old = self._pins.get(f)
            if old is not None and old != (f in members):
                raise ConflictError(
                    f"{self.backend.format(f)} is already pinned {old}, "
                    f"conflicting with the requested pattern"
                )
        for f in pattern.window:
            self.pin(f, f in members)

    def snapshot(self, n: int) -> Pattern:
        """Pin every element of the radius-n ball and return the induced pattern."""
        if n < 0:
            raise UsageError("snapshot radius must be >= 0")
        window = self.backend.ball(n, cap=self.ball_cap)
        members = tuple(h for h in window if self.query(h))
        return Pattern(members, tuple(window))

    # -- realization --------------------------------------------------------

    def realize_left(self, pattern: Pattern) -> Element:
        """Fresh h != identity with (h . subset) meeting the window exactly in members."""
        return self._realize("L", pattern)

    def realize_right(self, pattern: Pattern) -> Element:
        """Fresh g != identity with (subset . g) meeting the window exactly in members."""
        return self._realize("R", pattern)

    def _pinned_ball_radius(self) -> int:
        """Largest m with the whole radius-m ball pinned."""
        total = 0
        m = 0
        while True:
            total += self._len_counts.get(m, 0)
            if total < self.backend.ball_size(m):
                return m - 1
            m += 1

    def _candidate_stream(self, side: str, pattern: Pattern) -> Iterator:
        """Shortlex candidates, skipping a provably inadmissible prefix.

        Every affected point of a candidate h sits at distance d(h, f) from
        some window point f, and all points of the pinned ball are pinned, so
        candidates whose whole window distance range is inside that ball can
        be skipped without changing which translate is the least admissible.
        """
        backend = self.backend
        window = pattern.window
        pb = self._pinned_ball_radius()
        rad = pattern.window_radius(backend)
        if not window:
            jump = 1
        elif len(window) == backend.ball_size(rad):
            jump = pb + rad + 1
        else:
            minlen = min(backend.length(f) for f in window)
            jump = max(1, pb - minlen + 1)
        resume = self._resume.get((side, window))
        if resume is not None and backend.length(resume) >= jump:
            return backend.iter_from(resume)
        return backend.iter_from_length(jump)

    def _realize(self, side: str, pattern: Pattern) -> Element:
        backend = self.backend
        window = pattern.window
        wset = set(window)
        members = set(pattern.members)
        identity = backend.identity
        key = (side, window)
        for h in self._candidate_stream(side, pattern):
            if backend.length(h) > self.translate_cap:
                raise CapacityError(
                    f"no admissible translate of length <= {self.translate_cap} "
                    f"for a window of {len(window)} points"
                )
            if h == identity or h in self._used:
                continue
            hi = backend.inv(h)
            if side == "L":
                affected = [backend.mul(hi, f) for f in window]
            else:
                affected = [backend.mul(f, hi) for f in window]
            if any(x in self._pins or x in wset for x in affected):
                continue
            for f, x in zip(window, affected):
                self._set_pin(x, f in members)
            self.realizations.append(Realization(side, pattern, h))
            self._used.add(h)
            self._resume[key] = h
            return h
        raise AssertionError("unreachable: iter_from is unbounded")

    def find_realizations(self, side: str, pattern: Pattern) -> list:
        return [r.witness for r in self.realizations if r.side == side and r.pattern == pattern]

    def restore_realization(self, rec: Realization) -> None:
        """Re-attach a replayed log entry whose pins are already present."""
        self.realizations.append(rec)
        self._used.add(rec.witness)
        self._resume[(rec.side, rec.pattern.window)] = rec.witness

    def verify_realization(self, rec: Realization) -> bool:
        """Re-check a logged realization through query alone."""
        backend = self.backend
        wi = backend.inv(rec.witness)
        members = set(rec.pattern.members)
        for f in rec.pattern.window:
            x = backend.mul(wi, f) if rec.side == "L" else backend.mul(f, wi)
            if self.query(x) != (f in members):
                return False
        return True

    # -- views --------------------------------------------------------------

    def iter_true_points(self, limit: int | None = None) -> Iterator:
        pts = self._true_points
        return iter(pts[:limit] if limit is not None else pts)

    def freeze(self) -> "FrozenSubset":
        """Immutable view of the current stage: pinned trues, default False."""
        return FrozenSubset(tuple(self._true_points))

    def pin_items(self) -> Iterator[tuple[Element, bool]]:
        return iter(self._pins.items())

    @property
    def pin_count(self) -> int:
        return len(self._pins)

    @property
    def true_count(self) -> int:
        return len(self._true_points)


class FrozenSubset:
    """Fixed finite-stage membership oracle: listed trues, everything else False."""

    def __init__(self, trues: tuple):
        self._true_points = tuple(trues)
        self._set = frozenset(trues)

    def member(self, h: Element) -> bool:
        return h in self._set

    def iter_true_points(self, limit: int | None = None) -> Iterator:
        pts = self._true_points
        return iter(pts[:limit] if limit is not None else pts)

    def true_set(self) -> frozenset:
        return self._set


class TranslatedSubset:
    """Left translate (shift . base) of a forced subset, sharing its pins.

    Membership of x is answered as base membership of shift^-1 x, and right
    realizations are delegated through the same translation, so the translate
    inherits the base's on-demand genericity.
    """

    def __init__(self, base: ForcedSubset, shift: Element):
        self.base = base
        self.shift = shift
        self.backend = base.backend
        self._shift_inv = base.backend.inv(shift)

    def query(self, h: Element) -> bool:
        return self.base.query(self.backend.mul(self._shift_inv, h))

    member = query

    def _translated(self, pattern: Pattern) -> Pattern:
        mul = self.backend.mul
        si = self._shift_inv
        return Pattern.of(
            self.backend,
            [mul(si, x) for x in pattern.members],
            [mul(si, x) for x in pattern.window],
        )

    def realize_right(self, pattern: Pattern) -> Element:
        return self.base.realize_right(self._translated(pattern))

    def find_realizations(self, side: str, pattern: Pattern) -> list:
        if side != "R":
            raise UsageError("translated subsets only delegate right realizations")
        return self.base.find_realizations(side, self._translated(pattern))

    def iter_true_points(self, limit: int | None = None) -> Iterator:
        mul = self.backend.mul
        shift = self.shift
        out = (mul(shift, s) for s in self.base.iter_true_points())
        if limit is None:
            return out
        return iter([x for _, x in zip(range(limit), out)])

    def freeze(self) -> FrozenSubset:
        return FrozenSubset(tuple(self.iter_true_points()))


SubsetOracle = Union[ForcedSubset, TranslatedSubset, FrozenSubset]
GenericSubset = Union[ForcedSubset, TranslatedSubset]


# ---------------------------------------------------------------------------
# Topological transitivity witnesses (pure pattern computation)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransitivityWitness:
    """Translate h moving one pattern neighborhood across another.

    ``mixed`` describes, on the union of the two (translated) windows, a
    subset lying in both neighborhoods: its shift by h matches the source
    pattern and it matches the target pattern directly.
    """

    side: str
    shift: Element
    mixed: Pattern


def transitivity_witness(
    backend: Backend, source: Pattern, target: Pattern, side: str = "L"
) -> TransitivityWitness:
    """Shortlex-least h whose translate of the source window misses the target window."""
    if side not in ("L", "R"):
        raise UsageError("side must be 'L' or 'R'")
    mul = backend.mul
    tset = set(target.window)
    shift = None
    for h in backend.iter_from(None):
        if side == "L":
            moved = [mul(h, f) for f in source.window]
        else:
            moved = [mul(f, h) for f in source.window]
        if not any(x in tset for x in moved):
            shift = h
            break
    if side == "L":
        members = [mul(shift, x) for x in source.members] + list(target.members)
        window = [mul(shift, x) for x in source.window] + list(target.window)
    else:
        members = [mul(x, shift) for x in source.members] + list(target.members)
        window = [mul(x, shift) for x in source.window] + list(target.window)
    witness = TransitivityWitness(side, shift, Pattern.of(backend, members, window))
    ok, reason = check_transitivity_witness(backend, source, target, witness)
    if not ok:
        raise AssertionError(f"transitivity witness failed its own check: {reason}")
    return witness


def check_transitivity_witness(
    backend: Backend, source: Pattern, target: Pattern, witness: TransitivityWitness
) -> tuple[bool, str]:
    """Re-verify the disjointness and both membership identities on the supports."""
    mul = backend.mul
    h = witness.shift
    mixed = set(witness.mixed.members)
    tset = set(target.window)
    if witness.side == "L":
        moved_members = [mul(h, x) for x in source.members]
        pulled = lambda x: mul(h, x)  # noqa: E731
    else:
        moved_members = [mul(x, h) for x in source.members]
        pulled = lambda x: mul(x, h)  # noqa: E731
    if any(x in tset for x in moved_members):
        return False, "translated members meet the target window"
    for x in source.window:
        if (pulled(x) in mixed) != (x in set(source.members)):
            return False, f"source identity fails at {backend.format(x)}"
    for x in target.window:
        if (x in mixed) != (x in set(target.members)):
            return False, f"target identity fails at {backend.format(x)}"
    return True, ""
