"""Locate the zeros of the shifted Pinchuk map by grid scan + Newton."""
import math

import numpy as np

from planarham.corpus import builtin
from planarham.expr import compile_jet_pair, eval_grid

pmap = builtin("pinchuk200", enable_extended=True)
jet = compile_jet_pair(pmap.f1, pmap.f2)

for half in (60.0, 20.0):
    n = 1500
    xs = np.linspace(-half, half, n)
    ys = np.linspace(-half, half, n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    with np.errstate(all="ignore"):
        f1 = eval_grid(pmap.f1, gx, gy)
        f2 = eval_grid(pmap.f2, gx, gy)
        ham = 0.5 * (f1 * f1 + f2 * f2)
    ham = np.where(np.isfinite(ham), ham, np.inf)
    # local minima below a loose threshold
    c = ham[1:-1, 1:-1]
    mins = ((c <= ham[:-2, 1:-1]) & (c <= ham[2:, 1:-1])
            & (c <= ham[1:-1, :-2]) & (c <= ham[1:-1, 2:]) & (c < 1e4))
    idx = np.argwhere(mins)
    print(f"box +-{half}: {len(idx)} candidate minima")
    roots = []
    for i, j in idx:
        x, y = xs[i + 1], ys[j + 1]
        ok = True
        for _ in range(80):
            v1, dx1, dy1, v2, dx2, dy2 = jet(x, y)
            det = dx1 * dy2 - dy1 * dx2
            if det == 0 or not all(map(math.isfinite, (v1, v2, det))):
                ok = False
                break
            sx = (v1 * dy2 - v2 * dy1) / det
            sy = (v2 * dx1 - v1 * dx2) / det
            x, y = x - sx, y - sy
            if math.hypot(sx, sy) < 1e-13 * (1 + math.hypot(x, y)):
                break
        if not ok:
            continue
        v1, dx1, dy1, v2, dx2, dy2 = jet(x, y)
        if math.hypot(v1, v2) < 1e-8:
            if not any(math.hypot(x - a, y - b) < 1e-6 for a, b in roots):
                roots.append((x, y))
    for x, y in sorted(roots):
        v1, dx1, dy1, v2, dx2, dy2 = jet(x, y)
        det = dx1 * dy2 - dy1 * dx2
        print(f"  zero at ({x:.12g}, {y:.12g})  |f|={math.hypot(v1, v2):.2e}  det={det:.6g}")
