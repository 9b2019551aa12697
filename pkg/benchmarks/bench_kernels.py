"""Time the numba kernels against their pure-numpy counterparts.

    python benchmarks/bench_kernels.py [--width 1024 --height 768 --repeat 5]

Kernel timings call both implementations directly; the end-to-end line runs
one ``hv3d_frame`` in a subprocess per backend (``HV3D_DISABLE_NUMBA``).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hv3d import kernels
from hv3d._accel import HAVE_NUMBA
from hv3d.metrics2d import gaussian_kernel_1d

E2E = """
import time, numpy as np
from hv3d.quality import hv3d_frame
from hv3d.videoio import Frame, Plane, StereoFrame
r = np.random.default_rng(0)
w, h = {w}, {h}
def frame(y):
    c = np.full((h // 2, w // 2), 128.0)
    return Frame(Plane(y), Plane(c), Plane(c))
tex = r.random((h, w + 4)) * 255
ref = StereoFrame(frame(tex[:, :w]), frame(tex[:, 4:w + 4]))
dist = StereoFrame(frame(tex[:, :w] + r.normal(0, 5, (h, w))), frame(tex[:, 4:w + 4]))
hv3d_frame(ref, dist)  # warm-up (JIT compile / cache load)
t = time.perf_counter()
hv3d_frame(ref, dist)
print(time.perf_counter() - t)
"""


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--width", type=int, default=1024)
    ap.add_argument("--height", type=int, default=768)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-e2e", action="store_true", help="skip the end-to-end comparison")
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        sys.exit("numba is not installed; install the 'fast' extra to compare backends")

    r = np.random.default_rng(0)
    w, h = args.width, args.height
    left = r.random((h, w)) * 255
    right = np.roll(left, -4, axis=1)
    k = gaussian_kernel_1d(11, 1.5)
    n_blocks = (h // 8) * (w // 8)
    bx = r.random((n_blocks, 64)) * 255
    by = bx + r.normal(0, 8, bx.shape)

    cases = [
        ("filter_valid 11x11", lambda: kernels.filter_valid_numpy(left, k),
         lambda: kernels.filter_valid_numba(left, k)),
        ("sad disparity +/-64", lambda: kernels.sad_block_disparity_numpy(left, right, 8, 64),
         lambda: kernels.sad_block_disparity_numba(left, right, 8, 64)),
        (f"block ssim x{n_blocks}", lambda: kernels.block_ssim_numpy(bx, by, 6.5025, 58.5225),
         lambda: kernels.block_ssim_numba(bx, by, 6.5025, 58.5225)),
    ]
    print(f"plane {w}x{h}, best of {args.repeat}")
    print(f"{'kernel':<24}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for name, f_np, f_nb in cases:
        f_nb()  # compile outside the timing
        t_np, t_nb = best(f_np, args.repeat), best(f_nb, args.repeat)
        print(f"{name:<24}{t_np:>10.4f}{t_nb:>10.4f}{t_np / t_nb:>8.1f}x")

    if not args.no_e2e:
        times = {}
        for backend, flag in (("numpy", "1"), ("numba", "0")):
            env = dict(os.environ, HV3D_DISABLE_NUMBA=flag)
            out = subprocess.run([sys.executable, "-c", E2E.format(w=w, h=h)], env=env,
                                 capture_output=True, text=True, check=True)
            times[backend] = float(out.stdout.strip())
        print(f"{'hv3d_frame end-to-end':<24}{times['numpy']:>10.4f}{times['numba']:>10.4f}"
              f"{times['numpy'] / times['numba']:>8.1f}x")


if __name__ == "__main__":
    main()
