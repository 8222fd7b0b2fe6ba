# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled monomial kernels; same contract as ``_kernels_py``."""


def merge_odd(tuple a, tuple b):
    cdef Py_ssize_t na = len(a), nb = len(b), i = 0, j = 0
    cdef long swaps = 0
    cdef list out
    cdef object ka, kb
    if nb == 0:
        return 1, a
    if na == 0:
        return 1, b
    out = []
    while i < na and j < nb:
        ka = (<object>a[i]).key
        kb = (<object>b[j]).key
        if ka < kb:
            out.append(a[i])
            i += 1
        elif kb < ka:
            out.append(b[j])
            swaps += na - i
            j += 1
        else:
            return 0, None
    while i < na:
        out.append(a[i])
        i += 1
    while j < nb:
        out.append(b[j])
        j += 1
    return (-1 if swaps & 1 else 1), tuple(out)


def sort_odd(seq):
    cdef list items = list(seq)
    cdef Py_ssize_t n = len(items), i, j
    cdef long swaps = 0
    cdef object cur, kc, kj
    for i in range(1, n):
        cur = items[i]
        kc = cur.key
        j = i - 1
        while j >= 0:
            kj = items[j].key
            if kc < kj:
                items[j + 1] = items[j]
                swaps += 1
                j -= 1
            elif kc == kj:
                return 0, None
            else:
                break
        items[j + 1] = cur
    return (-1 if swaps & 1 else 1), tuple(items)


def merge_powers(tuple a, tuple b):
    cdef Py_ssize_t na = len(a), nb = len(b), i = 0, j = 0
    cdef list out
    cdef object xa, xb, ka, kb, pa, pb, p
    if nb == 0:
        return a
    if na == 0:
        return b
    out = []
    while i < na and j < nb:
        xa, pa = a[i]
        xb, pb = b[j]
        ka = xa.key
        kb = xb.key
        if ka < kb:
            out.append(a[i])
            i += 1
        elif kb < ka:
            out.append(b[j])
            j += 1
        else:
            p = pa + pb
            if p:
                out.append((xa, p))
            i += 1
            j += 1
    while i < na:
        out.append(a[i])
        i += 1
    while j < nb:
        out.append(b[j])
        j += 1
    return tuple(out)
