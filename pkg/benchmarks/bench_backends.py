"""Time the compiled lattice kernel against the numpy fallback.

    python3 benchmarks/bench_backends.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from nnkop import _backend, _fallback
from nnkop.experiments import speckle_image
from nnkop.imaging import model_image, rescale_image

try:
    from nnkop import _kernels
except ImportError:
    _kernels = None


CASES = [
    ("model 256x256, n=5", lambda img: model_image(img, 5)),
    ("rescale 128->256, n=15", lambda img: rescale_image(img[:128, :128], 2, 15)),
    ("rescale 256->512, n=30", lambda img: rescale_image(img, 2, 30)),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    img = speckle_image((256, 256), seed=0)
    backends = [("python", _fallback.apply_separable)]
    if _kernels is not None:
        backends.insert(0, ("cython", _kernels.apply_separable))
    else:
        print("compiled extension not built; timing the fallback only")
    print(f"{'case':28s}" + "".join(f"{name:>12s}" for name, _ in backends) + "   identical")
    for label, run in CASES:
        row, outs = [], []
        for _, impl in backends:
            _backend.apply_separable = impl
            t, out = best_of(lambda: run(img), args.repeat)
            row.append(t)
            outs.append(out[1])
        same = all(np.array_equal(outs[0], o) for o in outs[1:])
        print(f"{label:28s}" + "".join(f"{t:11.4f}s" for t in row) + f"   {same}")


if __name__ == "__main__":
    main()
