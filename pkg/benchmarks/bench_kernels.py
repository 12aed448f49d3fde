"""Compare the compiled and pure-Python kernels on truncated products.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--cap 30] [--dim 2]
"""

from __future__ import annotations

import argparse
import random
import timeit

from gmpy2 import mpq

from germsum import kernels
from germsum.mseries import exponents_upto


def dense_terms(dim: int, cap: int, seed: int) -> dict:
    rng = random.Random(seed)
    return {e: mpq(rng.randint(-9, 9) or 1, rng.randint(1, 5)) for e in exponents_upto(dim, cap)}


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--cap", type=int, default=30)
    ap.add_argument("--dim", type=int, nargs="+", default=[1, 2, 3])
    args = ap.parse_args(argv)

    names = ["python"]
    try:
        kernels.backend("cython")
        names.insert(0, "cython")
    except ImportError:
        print("compiled kernels not built; timing the Python fallback only")
    print(f"{'dim':>3} {'cap':>4} {'terms':>6} " + " ".join(f"{n:>10}" for n in names) + "   speedup")
    for dim in args.dim:
        cap = args.cap if dim < 3 else min(args.cap, 16)
        a, b = dense_terms(dim, cap, 1), dense_terms(dim, cap, 2)
        times = {}
        ref = None
        for name in names:
            mod = kernels.backend(name)
            out = mod.mul_terms(a, b, dim, cap)
            if ref is None:
                ref = out
            elif out != ref:
                raise SystemExit(f"backends disagree at dim={dim}")
            times[name] = min(timeit.repeat(lambda: mod.mul_terms(a, b, dim, cap), number=1, repeat=args.repeat))
        speed = times["python"] / times["cython"] if "cython" in times else 1.0
        cols = " ".join(f"{times[n]:>9.4f}s" for n in names)
        print(f"{dim:>3} {cap:>4} {len(a):>6} {cols}   {speed:6.1f}x")


if __name__ == "__main__":
    main()
