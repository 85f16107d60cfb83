"""Compiled vs pure-Python kernel timings.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times the two string-algebra kernels directly on the same inputs, then a full
Lie closure in a subprocess per backend (the backend is chosen at import).
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

from spinwn import _kernels_py
from spinwn.fermion import build_generator, seed_generators

try:
    from spinwn import _kernels as _compiled
except ImportError:
    _compiled = None

CLOSURE_SNIPPET = (
    "import time; from spinwn.kernels import BACKEND; from spinwn.lie import family_basis; "
    "t = time.perf_counter(); b = family_basis('{family}'); "
    "print(BACKEND, b.dim, time.perf_counter() - t)"
)


def kernel_inputs():
    g = build_generator("int1", (0, 1, 2, 3))
    seeds = [s.expr for s in seed_generators("int0")]
    x = (g * g).terms
    y = (seeds[0] * seeds[1] + seeds[2]).terms
    return x, y, g.terms


def time_kernels(repeat: int) -> list[tuple[str, str, float]]:
    x, y, g = kernel_inputs()
    rows = []
    for name, mod in (("python", _kernels_py), ("compiled", _compiled)):
        if mod is None:
            continue
        for fn, args in (("mul_terms", (x, y)), ("commutator_terms", (g, x))):
            f = getattr(mod, fn)
            t = min(timeit.repeat(lambda: f(*args), number=5, repeat=repeat)) / 5
            rows.append((name, fn, t))
    return rows


def time_closure(family: str) -> list[str]:
    out = []
    for pure in ("0", "1"):
        env = dict(os.environ, SPINWN_PURE_PYTHON=pure)
        r = subprocess.run([sys.executable, "-c", CLOSURE_SNIPPET.format(family=family)],
                           env=env, capture_output=True, text=True, check=True)
        out.append(r.stdout.strip())
    return out


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--family", default="int0")
    args = p.parse_args(argv)
    if _compiled is None:
        print("compiled extension not built; only the fallback is timed")
    rows = time_kernels(args.repeat)
    print(f"{'backend':<10} {'kernel':<18} {'seconds':>12}")
    for name, fn, t in rows:
        print(f"{name:<10} {fn:<18} {t:12.6f}")
    by = {(n, f): t for n, f, t in rows}
    for fn in ("mul_terms", "commutator_terms"):
        if ("compiled", fn) in by:
            print(f"speedup {fn}: {by[('python', fn)] / by[('compiled', fn)]:.1f}x")
    print(f"closure of {args.family} (backend, dim, seconds):")
    for line in time_closure(args.family):
        print("  " + line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
