"""Compare the compiled and pure-Python monomial kernels, then time a few workloads.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import random
import time

from supergc import _kernels_py
from supergc.expr import ODD, Atom, COORD


def _atoms(n):
    return [Atom(COORD, f"t{i:03d}", ODD) for i in range(n)]


def _cases(rng, atoms, n):
    out = []
    for _ in range(n):
        a = tuple(sorted(rng.sample(atoms, rng.randint(0, 6)), key=lambda x: x.key))
        b = tuple(sorted(rng.sample(atoms, rng.randint(0, 6)), key=lambda x: x.key))
        out.append((a, b))
    return out


def _time(fn, cases, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        for a, b in cases:
            fn(a, b)
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--cases", type=int, default=20000)
    args = ap.parse_args()
    rng = random.Random(0)
    cases = _cases(rng, _atoms(40), args.cases)
    rows = [("python merge_odd", _time(_kernels_py.merge_odd, cases, args.repeat))]
    try:
        from supergc import _kernels
    except ImportError:
        print("compiled kernels not built; showing the fallback only")
    else:
        for a, b in cases[:2000]:
            assert _kernels.merge_odd(a, b) == _kernels_py.merge_odd(a, b)
        rows.append(("cython merge_odd", _time(_kernels.merge_odd, cases, args.repeat)))
    for name, t in rows:
        print(f"{name:20s} {t * 1e3:9.2f} ms for {len(cases)} products")

    from supergc.liesuper import _algebra as algebra
    from supergc.scenario import check, load
    t = time.perf_counter()
    for n in ("bosonic", "fermionic", "fermionic-constf"):
        algebra.cache_clear()
        algebra(n).jacobi_residuals()
    print(f"{'tables + Jacobi':20s} {(time.perf_counter() - t) * 1e3:9.2f} ms")
    t = time.perf_counter()
    check(load("example3"), 1)
    print(f"{'verify example3':20s} {(time.perf_counter() - t) * 1e3:9.2f} ms")


if __name__ == "__main__":
    main()
