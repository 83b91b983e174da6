"""Benchmark the two convolution backends and a full training step.

Run:  python benchmarks/bench_kernels.py
The kernel backend of the *current process* is fixed at import, so this
script benchmarks both implementation functions directly and then times
one end-to-end training step per backend in subprocesses.
"""

import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from semdiff import kernels  # noqa: E402

CASES = [
    ("enc 16x16", (16, 32, 16, 16), 32),
    ("enc 8x8", (16, 64, 8, 8), 64),
    ("dec concat 16x16", (16, 96, 16, 16), 32),
    ("desk32 32x32", (16, 64, 32, 32), 64),
    ("desk32 16x16 wide", (16, 128, 16, 16), 128),
]


def bench(fn, *args, repeat=20):
    fn(*args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat * 1e3


def bench_kernels():
    if not kernels._HAVE_NUMBA:
        print("numba not importable; kernel comparison skipped")
        return
    print(f"{'case':20s} {'GFLOP':>7s} {'numba ms':>9s} {'numpy ms':>9s} "
          f"{'numba GF/s':>11s} {'numpy GF/s':>11s}")
    for name, xs, co in CASES:
        x = np.random.rand(*xs).astype(np.float32)
        w = np.random.rand(co, xs[1], 3, 3).astype(np.float32)
        b = np.zeros(co, dtype=np.float32)
        out = np.empty((xs[0], co, xs[2], xs[3]), dtype=np.float32)
        flop = 2 * xs[0] * co * xs[1] * xs[2] * xs[3] * 9 / 1e9
        t_nb = bench(kernels._nb_conv3x3_fwd, x, w, b, out)
        t_np = bench(kernels._np_conv3x3_fwd, x, w, b)
        print(f"{name:20s} {flop:7.3f} {t_nb:9.2f} {t_np:9.2f} "
              f"{flop / t_nb * 1e3:11.1f} {flop / t_np * 1e3:11.1f}")

        g = out.copy()
        t_nb = bench(kernels._nb_conv3x3_dw, g, x, np.empty_like(w))
        t_np = bench(kernels._np_conv3x3_dw, g, x)
        print(f"{name + ' (dw)':20s} {flop:7.3f} {t_nb:9.2f} {t_np:9.2f} "
              f"{flop / t_nb * 1e3:11.1f} {flop / t_np * 1e3:11.1f}")


TRAIN_SNIPPET = r"""
import time
import numpy as np
from semdiff.unet import ModelConfig, UNet
from semdiff.trainer import AdamW, TrainConfig, train_step
from semdiff.dataset import SceneSpec, generate_scene
from semdiff.kernels import active_backend

cfg = ModelConfig(image_size=16, base_channels=32, channel_multipliers=(1, 2, 2),
                  attention_resolutions=(8, 4), head_channels=16,
                  spade_hidden_channels=32, num_classes=8)
model = UNet(cfg, seed=0)
spec = SceneSpec(image_size=16, num_classes=8)
layout, img, _ = generate_scene(spec, 1)
tc = TrainConfig(batch_size=16, total_steps=10)
opt = AdamW(model.named_params(), 1e-4)
rng = np.random.default_rng(0)
batch = ([layout] * 16, [img] * 16)
for _ in range(2):
    train_step(model, opt, batch, tc.build_schedule(), tc, rng)
t0 = time.time()
n = 8
for _ in range(n):
    train_step(model, opt, batch, tc.build_schedule(), tc, rng)
print(f"  {active_backend():5s}: {(time.time() - t0) / n * 1e3:7.0f} ms / train step")
"""


def bench_train_step():
    print("\nfull train step (16x16 preset, batch 16):")
    for backend in ("numpy", "numba"):
        env = dict(os.environ, SEMDIFF_KERNELS=backend)
        subprocess.run([sys.executable, "-c", TRAIN_SNIPPET], env=env, check=True)


if __name__ == "__main__":
    print(f"active backend for this process: {kernels.active_backend()}")
    bench_kernels()
    bench_train_step()
