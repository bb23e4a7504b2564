"""Locate the missing second preimages for negative-w1 targets."""
import math
import time

import numpy as np

import scratch_pinchuk12 as v3

TARGETS = [
    (-95.337677, 19.888210),
    (-87.132382, 112.450945),
    (-50.120171, -71.585748),
]


def extended_columns() -> np.ndarray:
    parts = [
        -np.logspace(12.0, 6.0, 4_000),
        -np.logspace(6.0, -15.0, 30_000),
        np.logspace(-15.0, 12.0, 30_000),
    ]
    xs = np.unique(np.concatenate(parts))
    return xs[xs != 0.0]


XS = extended_columns()
print(f"{XS.size} extended columns")

for w1, w2 in TARGETS:
    t0 = time.time()
    pts, ncand = v3.fiber_sweep(w1, w2, XS)
    print(f"w=({w1:.6f},{w2:.6f}) -> {len(pts)} preimages "
          f"({ncand} flips) dt={time.time() - t0:.1f}s")
    for (x, y, res) in pts:
        print(f"    ({x:.10g}, {y:.10g}) res={res:.2e}")

# Root-count anatomy for the first failing target: where do real branches
# live, and what q-range does each link segment cover?
w1, w2 = TARGETS[0]
R = v3._column_roots(XS, w1)
counts = np.sum(np.isfinite(R), axis=1)
changes = np.flatnonzero(np.diff(counts) != 0)
print(f"\nroot-count changes for w1={w1}: {changes.size}")
prev = 0
segs = []
for idx in changes:
    segs.append((XS[prev], XS[idx], counts[idx]))
    prev = idx + 1
segs.append((XS[prev], XS[-1], counts[-1]))
for lo, hi, c in segs:
    print(f"  x in [{lo:.4g}, {hi:.4g}]: {c} real roots")
