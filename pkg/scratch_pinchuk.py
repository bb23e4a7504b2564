"""Dev verification of the Pinchuk fixture facts (to be frozen)."""
import math
import random

import numpy as np

from planarham.corpus import PINCHUK_SEARCH_BOX, builtin, pinchuk_curve
from planarham.centers import search_zeros
from planarham.expr import compile_jet_pair
from planarham.field import Box, sample

pmap = builtin("pinchuk200", enable_extended=True)
jet = compile_jet_pair(pmap.f1, pmap.f2)

# fact 0: curve crossings of the y axis (unshifted map coordinates)
print("curve P(1), Q(1):", pinchuk_curve(1.0))
print("curve P(-1), Q(-1):", pinchuk_curve(-1.0))

# fact 1: jacobian positivity at random points
rng = random.Random(42)
mindet = math.inf
for _ in range(2000):
    x = rng.uniform(-60, 60)
    y = rng.uniform(-60, 60)
    v1, dx1, dy1, v2, dx2, dy2 = jet(x, y)
    det = dx1 * dy2 - dy1 * dx2
    mindet = min(mindet, det)
print("min det over 2000 random points in [-60,60]^2:", mindet)

# fact 2: zeros of the shifted map
for grid in (32, 48, 64):
    recs, stats = search_zeros(pmap, PINCHUK_SEARCH_BOX, grid_n=grid)
    print(f"grid {grid}: {len(recs)} zeros:",
          [(round(r.location[0], 6), round(r.location[1], 6), round(r.det_df, 3))
           for r in recs], "degenerate:", stats.degenerate_points[:3])
