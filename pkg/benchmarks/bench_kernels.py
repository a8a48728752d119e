"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from picard_cycles import _pykernels

try:
    from picard_cycles import _ckernels
except ImportError:
    _ckernels = None

CASES = {
    "representation_counts a^2+ab+2b^2, v <= 2e4": ("representation_counts", (1, 1, 2, 0, 0, 1, 20_000)),
    "lemma46_sweep Z/3^4": ("lemma46_sweep", (81, 3, 22 % 81, 23 % 81)),
    "eval_series 400 terms x 200 points": (
        "eval_series",
        (np.random.default_rng(0).normal(size=400).tolist(),
         [complex(x, 0.8) for x in np.linspace(-0.5, 0.5, 200)]),
    ),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    else:
        print("compiled extension not built; timing the Python backend only")
    print(f"{'case':<46}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, (fn, fargs) in CASES.items():
        times = {}
        for b, mod in backends.items():
            f = getattr(mod, fn)
            times[b] = min(timeit.repeat(lambda: f(*fargs), number=1, repeat=args.repeat))
        row = f"{name:<46}" + "".join(f"{t:>11.4f}s" for t in times.values())
        if len(times) == 2:
            row += f"{times['python'] / times['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
