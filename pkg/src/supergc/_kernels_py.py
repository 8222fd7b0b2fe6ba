"""Pure-Python monomial kernels.

Odd parts are tuples of atoms sorted by ``atom.key``; bosonic parts are
tuples of ``(atom, power)`` pairs sorted the same way.  ``_kernels.pyx``
mirrors these functions one for one.
"""


def merge_odd(a, b):
    """Return ``(sign, merged)`` for the product ``a*b`` of two sorted odd parts.

    ``sign`` is 0 (and ``merged`` None) when an atom repeats.
    """
    if not b:
        return 1, a
    if not a:
        return 1, b
    na = len(a)
    nb = len(b)
    i = j = 0
    swaps = 0
    out = []
    while i < na and j < nb:
        ka = a[i].key
        kb = b[j].key
        if ka < kb:
            out.append(a[i])
            i += 1
        elif kb < ka:
            out.append(b[j])
            swaps += na - i
            j += 1
        else:
            return 0, None
    if i < na:
        out.extend(a[i:])
    if j < nb:
        out.extend(b[j:])
    return (-1 if swaps & 1 else 1), tuple(out)


def sort_odd(seq):
    """Sort a sequence of odd atoms, returning ``(sign, sorted)``.

    ``sign`` is 0 when two entries coincide.
    """
    items = list(seq)
    n = len(items)
    swaps = 0
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


def merge_powers(a, b):
    """Merge two sorted ``(atom, power)`` tuples, adding powers; drops zeros."""
    if not b:
        return a
    if not a:
        return b
    na = len(a)
    nb = len(b)
    i = j = 0
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
    if i < na:
        out.extend(a[i:])
    if j < nb:
        out.extend(b[j:])
    return tuple(out)
