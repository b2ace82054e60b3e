"""Compare the numba kernels with the pure-numpy fallbacks.

Each mode runs in its own interpreter because the backend is chosen from
VIPURSUIT_DISABLE_NUMBA at import time.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from vipursuit import _jit, geo, rl
from vipursuit.cli import bundled_text
from vipursuit.engine import run
from vipursuit.scenario import parse_scenario

repeat = int(sys.argv[1])


def best(fn):
    fn()  # warm up, includes compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


rng = np.random.default_rng(0)
n = 200_000
lon = rng.uniform(-3, 3, n)
lat = rng.uniform(-1.5, 1.5, n)
v = rng.normal(size=(n, 3)) * 1e5

cost = rl.CostParams.scaled(1e-4, 0.01)
cfg = rl.LearnerConfig(normalize=True)
samples = [(rng.normal(size=3) * 1e4, rng.normal(), rng.normal(size=3) * 1e4) for _ in range(20_000)]


def learner_steps():
    lr = rl.Learner.create(cfg, cost, seed=1)
    for s in samples:
        rl.run_learner_step(lr, s)


scenario = parse_scenario(bundled_text("scenario1.toml"))

out = {
    "numba": _jit.USE_NUMBA,
    "enu_batch_200k": best(lambda: geo.ecef_to_enu_batch(v, lon, lat)),
    "learner_20k_steps": best(learner_steps),
    "scenario1_run": best(lambda: run(scenario)),
}
print(json.dumps(out))
"""


def measure(disable: bool, repeat: int) -> dict:
    env = dict(os.environ, VIPURSUIT_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast = measure(False, args.repeat)
    slow = measure(True, args.repeat)
    if not fast["numba"]:
        print("numba unavailable; both columns use the numpy fallback")
    print(f"{'benchmark':<22}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for key in ("enu_batch_200k", "learner_20k_steps", "scenario1_run"):
        a, b = fast[key], slow[key]
        print(f"{key:<22}{a:>12.4f}{b:>12.4f}{b / a:>9.2f}x")


if __name__ == "__main__":
    main()
