"""Ambient-group backends and finite multiplication tables.

Two ambient backends are supported: free groups of rank k >= 2 ("free:k")
and free abelian groups Z^d ("zd:d").  Both have canonical element forms
with decidable equality and enumerable balls.  The finite group sits in an
explicit multiplication table with a distinguished non-commuting pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Union

from wreathcert import _kernel
from wreathcert.errors import CapacityError, UsageError

Element = Union[bytes, tuple]

MAX_TABLE_ORDER = 64


# ---------------------------------------------------------------------------
# Ambient backends
# ---------------------------------------------------------------------------


class FreeBackend:
    """Free group of rank k; elements are freely reduced words (bytes)."""

    kind = "free"

    def __init__(self, rank: int):
        if rank < 2:
            raise UsageError(f"free backend needs rank >= 2, got {rank}")
        self.rank = rank
        self.n_letters = 2 * rank
        self.identity: bytes = b""
        self._tokens = [
            f"x{i // 2 + 1}" + ("^-1" if i & 1 else "") for i in range(self.n_letters)
        ]
        self._token_codes = {tok: c for c, tok in enumerate(self._tokens)}

    @property
    def name(self) -> str:
        return f"free:{self.rank}"

    def mul(self, g: bytes, h: bytes) -> bytes:
        return _kernel.free_mul(g, h)

    def inv(self, g: bytes) -> bytes:
        return _kernel.free_inv(g)

    def length(self, g: bytes) -> int:
        return len(g)

    def sort_key(self, g: bytes) -> tuple:
        return (len(g), g)

    def generator(self, i: int) -> bytes:
        if not 0 <= i < self.rank:
            raise UsageError(f"generator index {i} out of range for {self.name}")
        return bytes((2 * i,))

    def generator_power(self, i: int, exp: int) -> bytes:
        g = self.generator(i)
        return g if exp > 0 else self.inv(g)

    def ball_size(self, n: int) -> int:
        if n == 0:
            return 1
        q = self.n_letters - 1
        return 1 + self.n_letters * (q**n - 1) // (q - 1)

    def ball(self, n: int, cap: int | None = None) -> list[bytes]:
        if n < 0:
            raise UsageError("ball radius must be >= 0")
        if cap is not None and self.ball_size(n) > cap:
            raise CapacityError(
                f"ball of radius {n} in {self.name} has {self.ball_size(n)} "
                f"elements, over the cap {cap}"
            )
        return _kernel.free_ball(self.n_letters, n)

    def iter_from(self, after: bytes | None) -> Iterator[bytes]:
        """Shortlex stream of all elements strictly after ``after``."""
        w = after if after is not None else None
        while True:
            w = self.identity if w is None else _kernel.shortlex_next(w, self.n_letters)
            yield w

    def iter_from_length(self, n: int) -> Iterator[bytes]:
        """Shortlex stream starting at the least element of length n."""
        if n <= 0:
            return self.iter_from(None)
        w = bytes(n)  # x1 repeated n times is the least reduced word of its length
        return self._iter_at(w)

    def _iter_at(self, w: bytes) -> Iterator[bytes]:
        while True:
            yield w
            w = _kernel.shortlex_next(w, self.n_letters)

    def parse(self, text: str) -> bytes:
        text = text.strip()
        if text == "e":
            return b""
        codes = self._token_codes
        buf = bytearray()
        for tok in text.split():
            c = codes.get(tok)
            if c is None:
                raise UsageError(f"bad {self.name} element token {tok!r}")
            if buf and buf[-1] == c ^ 1:
                buf.pop()
            else:
                buf.append(c)
        return bytes(buf)

    def format(self, g: bytes) -> str:
        if not g:
            return "e"
        tokens = self._tokens
        return " ".join(tokens[c] for c in g)


class ZdBackend:
    """Free abelian group Z^d; elements are integer d-tuples."""

    kind = "zd"

    def __init__(self, rank: int):
        if rank < 1:
            raise UsageError(f"zd backend needs rank >= 1, got {rank}")
        self.rank = rank
        self.identity: tuple = (0,) * rank

    @property
    def name(self) -> str:
        return f"zd:{self.rank}"

    def mul(self, g: tuple, h: tuple) -> tuple:
        return tuple(a + b for a, b in zip(g, h))

    def inv(self, g: tuple) -> tuple:
        return tuple(-a for a in g)

    def length(self, g: tuple) -> int:
        return sum(abs(a) for a in g)

    def sort_key(self, g: tuple) -> tuple:
        # Shortlex via the lex-least geodesic: letters sorted by code, and the
        # letters of coordinate i (x_{i+1} or its inverse) all share one code.
        letters = []
        for i, a in enumerate(g):
            if a > 0:
                letters.extend([2 * i] * a)
            elif a < 0:
                letters.extend([2 * i + 1] * (-a))
        return (len(letters), tuple(letters))

    def generator(self, i: int) -> tuple:
        if not 0 <= i < self.rank:
            raise UsageError(f"generator index {i} out of range for {self.name}")
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def generator_power(self, i: int, exp: int) -> tuple:
        g = self.generator(i)
        return g if exp > 0 else self.inv(g)

    def ball_size(self, n: int) -> int:
        d = self.rank
        return sum(2**k * math.comb(d, k) * math.comb(n, k) for k in range(min(d, n) + 1))

    def ball(self, n: int, cap: int | None = None) -> list[tuple]:
        if n < 0:
            raise UsageError("ball radius must be >= 0")
        if cap is not None and self.ball_size(n) > cap:
            raise CapacityError(
                f"ball of radius {n} in {self.name} has {self.ball_size(n)} "
                f"elements, over the cap {cap}"
            )
        out: list[tuple] = []

        def rec(prefix: tuple, budget: int):
            if len(prefix) == self.rank:
                out.append(prefix)
                return
            for a in range(-budget, budget + 1):
                rec(prefix + (a,), budget - abs(a))

        rec((), n)
        out.sort(key=self.sort_key)
        return out

    def iter_from(self, after: tuple | None) -> Iterator[tuple]:
        radius = 0
        started = after is None
        after_key = None if started else self.sort_key(after)
        if after is not None:
            radius = self.length(after)
        while True:
            for g in self.ball(radius):
                if self.length(g) != radius:
                    continue
                if not started:
                    if self.sort_key(g) > after_key:
                        started = True
                    else:
                        continue
                yield g
            radius += 1

    def iter_from_length(self, n: int) -> Iterator[tuple]:
        radius = max(n, 0)
        while True:
            for g in self.ball(radius):
                if self.length(g) == radius:
                    yield g
            radius += 1

    def parse(self, text: str) -> tuple:
        return _parse_ambient(self, text)

    def format(self, g: tuple) -> str:
        if g == self.identity:
            return "e"
        return "(" + ",".join(str(a) for a in g) + ")"


Backend = Union[FreeBackend, ZdBackend]


def make_backend(spec: str) -> Backend:
    """Build a backend from a spec string like ``free:2`` or ``zd:3``."""
    kind, sep, arg = spec.partition(":")
    if not sep or not arg.isdigit():
        raise UsageError(f"bad backend spec {spec!r}; expected free:k or zd:d")
    rank = int(arg)
    if kind == "free":
        return FreeBackend(rank)
    if kind == "zd":
        return ZdBackend(rank)
    raise UsageError(f"unknown backend kind {kind!r}")


def _parse_ambient(backend: ZdBackend, text: str) -> tuple:
    text = text.strip()
    if text == "e":
        return backend.identity
    if not (text.startswith("(") and text.endswith(")")):
        raise UsageError(f"bad {backend.name} element {text!r}")
    try:
        parts = tuple(int(p) for p in text[1:-1].split(","))
    except ValueError as exc:
        raise UsageError(f"bad {backend.name} element {text!r}") from exc
    if len(parts) != backend.rank:
        raise UsageError(
            f"element {text!r} has {len(parts)} coordinates, expected {backend.rank}"
        )
    return parts


# ---------------------------------------------------------------------------
# Ball specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BallSpec:
    """All ambient elements of word length <= radius, shortlex sorted."""

    radius: int
    elements: tuple


def ball(backend: Backend, n: int, cap: int | None = None) -> BallSpec:
    return BallSpec(n, tuple(backend.ball(n, cap=cap)))


# ---------------------------------------------------------------------------
# Finite group tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteGroupTable:
    """A finite group as an explicit table, with a non-commuting pair.

    ``mul[g][h]`` means "g then h" (row is the left factor); this convention
    is fixed here and used everywhere.
    """

    order: int
    mul: tuple[tuple[int, ...], ...]
    inv: tuple[int, ...]
    identity: int
    gen_a: int
    gen_b: int
    name: str = "table"

    @cached_property
    def mul_flat(self) -> tuple[int, ...]:
        return tuple(v for row in self.mul for v in row)


def fin_power(table: FiniteGroupTable, g: int, e: int) -> int:
    """g^e by repeated table multiplication; negative e through inverses."""
    if e < 0:
        g = table.inv[g]
        e = -e
    acc = table.identity
    for _ in range(e):
        acc = table.mul[acc][g]
    return acc


def element_order(table: FiniteGroupTable, g: int) -> int:
    acc = table.mul[table.identity][g]
    n = 1
    while acc != table.identity:
        acc = table.mul[acc][g]
        n += 1
    return n


def validate_table(table: FiniteGroupTable) -> str | None:
    """Return None when every table axiom holds, else the first diagnostic."""
    n = table.order
    if n <= 0 or n > MAX_TABLE_ORDER:
        return f"order {n} outside 1..{MAX_TABLE_ORDER}"
    if len(table.mul) != n or any(len(row) != n for row in table.mul):
        return "multiplication table is not order x order"
    for row in table.mul:
        for v in row:
            if not 0 <= v < n:
                return f"table entry {v} out of range"
    if len(table.inv) != n or any(not 0 <= v < n for v in table.inv):
        return "inverse table malformed"
    e = table.identity
    if not 0 <= e < n:
        return f"identity index {e} out of range"
    for g in range(n):
        if table.mul[e][g] != g or table.mul[g][e] != g:
            return f"identity fails at element {g}"
    for g in range(n):
        if table.mul[g][table.inv[g]] != e or table.mul[table.inv[g]][g] != e:
            return f"inverse fails at element {g}"
    for x in range(n):
        for y in range(n):
            xy = table.mul[x][y]
            for z in range(n):
                if table.mul[xy][z] != table.mul[x][table.mul[y][z]]:
                    return f"associativity fails at triple ({x}, {y}, {z})"
    if not 0 <= table.gen_a < n or not 0 <= table.gen_b < n:
        return "generator index out of range"
    if all(
        table.mul[x][y] == table.mul[y][x] for x in range(n) for y in range(n)
    ):
        return "abelian"
    a, b = table.gen_a, table.gen_b
    if table.mul[a][b] == table.mul[b][a]:
        return f"chosen generators {a} and {b} commute"
    return None


def _perm_table(perms: list[tuple[int, ...]], a: tuple[int, ...], b: tuple[int, ...], name: str) -> FiniteGroupTable:
    perms = sorted(perms)
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    npts = len(perms[0])
    ident = tuple(range(npts))

    def then(p, q):  # apply p first, then q
        return tuple(q[p[i]] for i in range(npts))

    mul = tuple(tuple(index[then(p, q)] for q in perms) for p in perms)
    inv = []
    for p in perms:
        ip = [0] * npts
        for i, v in enumerate(p):
            ip[v] = i
        inv.append(index[tuple(ip)])
    return FiniteGroupTable(
        order=n,
        mul=mul,
        inv=tuple(inv),
        identity=index[ident],
        gen_a=index[a],
        gen_b=index[b],
        name=name,
    )


def _closure(gens: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    npts = len(gens[0])
    ident = tuple(range(npts))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(g[p[i]] for i in range(npts))
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return sorted(seen)


def _s3_table() -> FiniteGroupTable:
    a = (1, 0, 2)  # swap the first two points
    b = (0, 2, 1)  # swap the last two points
    return _perm_table(_closure([a, b]), a, b, "s3")


def _d4_table() -> FiniteGroupTable:
    r = (1, 2, 3, 0)  # quarter turn of the square
    s = (0, 3, 2, 1)  # reflection fixing corner 0
    return _perm_table(_closure([r, s]), r, s, "d4")


def _q8_table() -> FiniteGroupTable:
    # Elements 1, -1, i, -i, j, -j, k, -k encoded as (axis, sign):
    # axis 0 is the scalar, axes 1..3 are i, j, k.
    names = [(0, 1), (0, -1), (1, 1), (1, -1), (2, 1), (2, -1), (3, 1), (3, -1)]
    index = {v: i for i, v in enumerate(names)}

    def qmul(x, y):
        (ax, sx), (ay, sy) = x, y
        s = sx * sy
        if ax == 0:
            return (ay, s)
        if ay == 0:
            return (ax, s)
        if ax == ay:
            return (0, -s)
        # i*j=k, j*k=i, k*i=j and the reversed products flip sign
        rules = {(1, 2): (3, 1), (2, 3): (1, 1), (3, 1): (2, 1),
                 (2, 1): (3, -1), (3, 2): (1, -1), (1, 3): (2, -1)}
        az, sz = rules[(ax, ay)]
        return (az, s * sz)

    mul = tuple(
        tuple(index[qmul(x, y)] for y in names) for x in names
    )
    inv = []
    for x in names:
        for i, y in enumerate(names):
            if qmul(x, y) == (0, 1):
                inv.append(i)
                break
    return FiniteGroupTable(
        order=8,
        mul=mul,
        inv=tuple(inv),
        identity=index[(0, 1)],
        gen_a=index[(1, 1)],
        gen_b=index[(2, 1)],
        name="q8",
    )


_PRESETS = {"s3": _s3_table, "d4": _d4_table, "q8": _q8_table}


def preset_table(name: str) -> FiniteGroupTable:
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise UsageError(
            f"unknown table preset {name!r}; have {sorted(_PRESETS)}"
        ) from None
    return builder()


def preset_names() -> list[str]:
    return sorted(_PRESETS)


# ---------------------------------------------------------------------------
# Table text format: "order k", k rows, then "id i", "a j", "b l"
# ---------------------------------------------------------------------------


def parse_table_text(text: str, name: str = "table") -> FiniteGroupTable:
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    try:
        head = lines[0].split()
        if head[0] != "order":
            raise UsageError("table file must start with 'order k'")
        n = int(head[1])
        rows = tuple(tuple(int(v) for v in lines[1 + i].split()) for i in range(n))
        tail = dict(ln.split() for ln in lines[1 + n : 4 + n])
        ident, a, b = int(tail["id"]), int(tail["a"]), int(tail["b"])
    except (IndexError, KeyError, ValueError) as exc:
        raise UsageError(f"malformed table file: {exc}") from exc
    inv = []
    for g in range(n):
        found = next((h for h in range(n) if rows[g][h] == ident == rows[h][g]), None)
        if found is None:
            raise UsageError(f"element {g} has no two-sided inverse")
        inv.append(found)
    return FiniteGroupTable(
        order=n, mul=rows, inv=tuple(inv), identity=ident, gen_a=a, gen_b=b, name=name
    )


def format_table_text(table: FiniteGroupTable) -> str:
    lines = [f"order {table.order}"]
    for row in table.mul:
        lines.append(" ".join(str(v) for v in row))
    lines.append(f"id {table.identity}")
    lines.append(f"a {table.gen_a}")
    lines.append(f"b {table.gen_b}")
    return "\n".join(lines) + "\n"
