# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _purekernel; same functions, bit-identical results."""

from cpython.bytes cimport PyBytes_FromStringAndSize
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy

IMPL = "compiled"


def free_mul(bytes a, bytes b):
    cdef const unsigned char* pa = a
    cdef const unsigned char* pb = b
    cdef Py_ssize_t i = len(a)
    cdef Py_ssize_t j = 0
    cdef Py_ssize_t nb = len(b)
    while i > 0 and j < nb and pa[i - 1] == (pb[j] ^ 1):
        i -= 1
        j += 1
    if j == 0:
        if i == len(a):
            return a + b
        return a[:i] + b
    if i == 0:
        return b[j:]
    return a[:i] + b[j:]


def free_inv(bytes a):
    cdef Py_ssize_t n = len(a)
    cdef const unsigned char* pa = a
    cdef bytes out = PyBytes_FromStringAndSize(NULL, n)
    cdef unsigned char* po = <unsigned char*> out
    cdef Py_ssize_t i
    for i in range(n):
        po[i] = pa[n - 1 - i] ^ 1
    return out


def free_ball(int n_letters, int radius):
    cdef list out = [b""]
    cdef list level = [b""]
    cdef list nxt
    cdef bytes w, w2
    cdef int last, c, depth
    cdef Py_ssize_t lw
    for depth in range(radius):
        nxt = []
        for w in level:
            lw = len(w)
            last = (<const unsigned char*> w)[lw - 1] if lw > 0 else -1
            for c in range(n_letters):
                if (c ^ 1) == last:
                    continue
                w2 = PyBytes_FromStringAndSize(NULL, lw + 1)
                if lw > 0:
                    memcpy(<void*> (<char*> w2), <const void*> (<const char*> w), lw)
                (<unsigned char*> w2)[lw] = <unsigned char> c
                nxt.append(w2)
        out.extend(nxt)
        level = nxt
    return out


def shortlex_next(bytes w, int n_letters):
    cdef Py_ssize_t n = len(w)
    cdef bytearray buf = bytearray(w)
    cdef Py_ssize_t i = n - 1
    cdef int prev, c, j, p
    while i >= 0:
        prev = buf[i - 1] if i > 0 else -1
        c = buf[i] + 1
        if prev >= 0 and c == (prev ^ 1):
            c += 1
        if c < n_letters:
            buf[i] = c
            for j in range(i + 1, n):
                p = buf[j - 1]
                buf[j] = 1 if (p ^ 1) == 0 else 0
            return bytes(buf)
        i -= 1
    out = bytearray(n + 1)
    for j in range(1, n + 1):
        p = out[j - 1]
        out[j] = 1 if (p ^ 1) == 0 else 0
    return bytes(out)


def free_window_scan(
    int n_letters,
    int radius,
    list factors,
    object trues,
    tuple mul_flat,
    int order,
    int id_idx,
):
    """Level-ordered scan of the whole ball with per-factor incremental words.

    Matches the pure kernel: returns the shortlex-first point where the
    ordered product of fired contributions is not the identity, else None.
    """
    cdef int nf = len(factors)
    cdef int R = radius
    cdef int maxtrue = -1
    cdef Py_ssize_t tl
    for t in trues:
        tl = len(<bytes> t)
        if tl > maxtrue:
            maxtrue = <int> tl

    cdef int mf[4096]
    cdef int i
    if order * order > 4096:
        raise ValueError("table order too large for the compiled scan")
    for i in range(order * order):
        mf[i] = mul_flat[i]

    # Flat factor storage
    cdef int* kind = <int*> malloc(nf * sizeof(int))
    cdef int* contrib = <int*> malloc(nf * sizeof(int))
    cdef int* vlen = <int*> malloc(nf * sizeof(int))
    cdef int* off = <int*> malloc(nf * sizeof(int))
    cdef int* cur = <int*> malloc(nf * sizeof(int))
    cdef int* lens = <int*> malloc(nf * (R + 2) * sizeof(int))
    cdef unsigned char* saved = <unsigned char*> malloc(nf * (R + 2) or 1)
    cdef int total = 0
    cdef bytes vb
    for i in range(nf):
        vb = factors[i][0]
        vlen[i] = <int> len(vb)
        off[i] = total
        total += vlen[i] + R + 2
    cdef unsigned char* fbuf = <unsigned char*> malloc(total or 1)
    cdef unsigned char* hbuf = <unsigned char*> malloc(R + 1 or 1)
    cdef int* ch = <int*> malloc((R + 1) * sizeof(int))
    cdef int lvl, d, c, prev, L0, acc, fired, j, k
    cdef int live
    cdef bytes x
    cdef object result = None

    try:
        for i in range(nf):
            vb = factors[i][0]
            kind[i] = factors[i][1]
            contrib[i] = factors[i][2]
            if vlen[i] > 0:
                memcpy(fbuf + off[i], <const char*> vb, vlen[i])
            cur[i] = vlen[i]

        for lvl in range(R + 1):
            live = 0
            for i in range(nf):
                if kind[i] == 0:
                    if vlen[i] == lvl:
                        live = 1
                elif maxtrue >= 0:
                    if (lvl - vlen[i] if lvl >= vlen[i] else vlen[i] - lvl) <= maxtrue:
                        live = 1
            if not live:
                continue
            if lvl == 0:
                acc = id_idx
                fired = 0
                for j in range(nf):
                    L0 = cur[j]
                    if kind[j] == 0:
                        if L0 != 0:
                            continue
                    else:
                        if L0 > maxtrue:
                            continue
                        x = PyBytes_FromStringAndSize(<char*> (fbuf + off[j]), L0)
                        if x not in trues:
                            continue
                    acc = mf[acc * order + contrib[j]]
                    fired = 1
                if fired and acc != id_idx:
                    return b""
                continue

            d = 0
            ch[0] = -1
            while True:
                c = ch[d]
                if c >= 0:
                    # undo the letter currently at depth d
                    for j in range(nf):
                        L0 = lens[j * (R + 2) + d]
                        if cur[j] == L0 + 1:
                            fbuf[off[j] + L0] = saved[j * (R + 2) + d]
                        cur[j] = L0
                prev = hbuf[d - 1] if d > 0 else -1
                c += 1
                if prev >= 0 and c == (prev ^ 1):
                    c += 1
                if c >= n_letters:
                    ch[d] = -1
                    d -= 1
                    if d < 0:
                        break
                    continue
                ch[d] = c
                hbuf[d] = <unsigned char> c
                for j in range(nf):
                    L0 = cur[j]
                    lens[j * (R + 2) + d] = L0
                    if L0 > 0 and fbuf[off[j] + L0 - 1] == (c ^ 1):
                        cur[j] = L0 - 1
                    else:
                        saved[j * (R + 2) + d] = fbuf[off[j] + L0]
                        fbuf[off[j] + L0] = <unsigned char> c
                        cur[j] = L0 + 1
                if d + 1 == lvl:
                    acc = id_idx
                    fired = 0
                    for j in range(nf):
                        L0 = cur[j]
                        if kind[j] == 0:
                            if L0 != 0:
                                continue
                        else:
                            if L0 > maxtrue:
                                continue
                            x = PyBytes_FromStringAndSize(<char*> (fbuf + off[j]), L0)
                            if x not in trues:
                                continue
                        acc = mf[acc * order + contrib[j]]
                        fired = 1
                    if fired and acc != id_idx:
                        result = PyBytes_FromStringAndSize(<char*> hbuf, lvl)
                        return result
                else:
                    d += 1
                    ch[d] = -1
    finally:
        free(kind)
        free(contrib)
        free(vlen)
        free(off)
        free(cur)
        free(lens)
        free(saved)
        free(fbuf)
        free(hbuf)
        free(ch)

    return None


def free_mul_many(bytes g, list words):
    cdef list out = []
    cdef bytes w
    for w in words:
        out.append(free_mul(g, w))
    return out
