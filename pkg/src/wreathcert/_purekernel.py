"""Pure-Python hot kernels for free-group words.

Elements of a free group of rank k are freely reduced words stored as
``bytes``: letter code 2*i is the i-th generator, 2*i+1 its inverse, so the
inverse of a letter c is c ^ 1 and byte order equals the global letter order
(x1 < x1^-1 < x2 < x2^-1 < ...).  Shortlex order on elements is therefore
(len(w), w).

A compiled twin of this module lives in ``_speedups.pyx``; both expose the
same functions and must return bit-identical results.
"""

from __future__ import annotations

IMPL = "pure"


def free_mul(a: bytes, b: bytes) -> bytes:
    """Product of two reduced words, cancelling at the junction."""
    i = len(a)
    j = 0
    nb = len(b)
    while i > 0 and j < nb and a[i - 1] == b[j] ^ 1:
        i -= 1
        j += 1
    return a[:i] + b[j:]


def free_inv(a: bytes) -> bytes:
    return bytes(c ^ 1 for c in reversed(a))


def free_ball(n_letters: int, radius: int) -> list[bytes]:
    """All reduced words of length <= radius, in shortlex order."""
    out = [b""]
    level = [b""]
    for _ in range(radius):
        nxt = []
        for w in level:
            last = w[-1] if w else -1
            for c in range(n_letters):
                if c ^ 1 == last:
                    continue
                nxt.append(w + bytes((c,)))
        out.extend(nxt)
        level = nxt
    return out


def shortlex_next(w: bytes, n_letters: int) -> bytes:
    """Successor of a reduced word in the shortlex stream over all lengths."""
    buf = bytearray(w)
    n = len(buf)
    i = n - 1
    while i >= 0:
        prev = buf[i - 1] if i > 0 else -1
        c = buf[i] + 1
        if prev >= 0 and c == prev ^ 1:
            c += 1
        if c < n_letters:
            buf[i] = c
            for j in range(i + 1, n):
                p = buf[j - 1]
                buf[j] = 1 if p ^ 1 == 0 else 0
            return bytes(buf)
        i -= 1
    out = bytearray(n + 1)
    for j in range(1, n + 1):
        p = out[j - 1]
        out[j] = 1 if p ^ 1 == 0 else 0
    return bytes(out)


def free_window_scan(
    n_letters: int,
    radius: int,
    factors: list[tuple[bytes, int, int]],
    trues: frozenset[bytes],
    mul_flat: tuple[int, ...],
    order: int,
    id_idx: int,
) -> bytes | None:
    """Pointwise evaluation of a collected form over the whole ball.

    ``factors`` holds (conjugator_inverse, kind, contribution) triples in word
    order; kind 0 fires only at the single point equal to the conjugator, kind
    1 fires where conjugator_inverse * h lies in ``trues``.  Returns the
    shortlex-first point whose ordered product of fired contributions is not
    the identity, or None if the whole ball evaluates to the identity.

    Points where no factor can fire evaluate to the identity, so levels and
    factors are skipped exactly when the reduced-length bound rules firing
    out; the scan is still an independent pointwise check of every ball point.
    """
    maxtrue = max((len(t) for t in trues), default=-1)
    points = [(free_inv(vinv), contrib) for vinv, _, contrib in factors]
    for lvl in range(radius + 1):
        live = []
        for fi, (vinv, kind, contrib) in enumerate(factors):
            if kind == 0:
                if len(vinv) == lvl:
                    live.append((fi, 0, points[fi][0], contrib))
            else:
                if abs(lvl - len(vinv)) <= maxtrue:
                    live.append((fi, 1, vinv, contrib))
        if not live:
            continue
        if lvl == 0:
            level_words = [b""]
        else:
            level_words = _level_words(n_letters, lvl)
        for h in level_words:
            acc = id_idx
            fired = False
            for _, kind, v, contrib in live:
                if kind == 0:
                    if h != v:
                        continue
                else:
                    x = free_mul(v, h)
                    if len(x) > maxtrue or x not in trues:
                        continue
                acc = mul_flat[acc * order + contrib]
                fired = True
            if fired and acc != id_idx:
                return h
    return None


def _level_words(n_letters: int, lvl: int):
    level = [bytes((c,)) for c in range(n_letters)]
    for _ in range(lvl - 1):
        nxt = []
        for w in level:
            last = w[-1]
            for c in range(n_letters):
                if c ^ 1 == last:
                    continue
                nxt.append(w + bytes((c,)))
        level = nxt
    return level


def free_mul_many(g: bytes, words: list[bytes]) -> list[bytes]:
    """Left-translate a list of reduced words by g."""
    return [free_mul(g, w) for w in words]
