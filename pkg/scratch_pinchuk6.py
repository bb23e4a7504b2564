"""Pinchuk batch: Jacobians, curve distance, z2 closure, z1 Newton basin."""
import math
import time

import numpy as np

from planarham.centers import find_zeros
from planarham.corpus import builtin, pinchuk_curve
from planarham.expr import compile_jet_pair
from planarham.field import Box, PlanarMap
from planarham.trace import AngleBudget, integrate_orbit, level_start_point

Z1 = (-2532.442447630816, -0.0003838953061841223)
Z2 = (-0.22922839788848523, -16.99370700917979)

base = builtin("pinchuk200", enable_extended=True)
jet = compile_jet_pair(base.f1, base.f2)

print("== A: Jacobians")
for name, z in (("z1", Z1), ("z2", Z2)):
    f1, f1x, f1y, f2, f2x, f2y = jet(*z)
    J = np.array([[f1x, f1y], [f2x, f2y]])
    sv = np.linalg.svd(J, compute_uv=False)
    print(f"{name}: Df={J.tolist()} det={np.linalg.det(J):.6g} "
          f"sv={sv} cond={sv[0] / sv[1]:.3g}")

print("== B: distance from origin to shifted curve")
# D(s) = P(s)^2 + (Q(s) - 200)^2, minimize via roots of D'
Pc = np.array([1.0, 0.0, -1.0])                     # s^2 - 1
Qc = np.array([-75.0, 86.25, -29.0, 58.5, 0.0, -40.75 - 200.0])
D = np.polyadd(np.polymul(Pc, Pc), np.polymul(Qc, Qc))
Dp = np.polyder(D)
roots = np.roots(Dp)
best = None
for r in roots:
    if abs(r.imag) < 1e-9:
        s = r.real
        d = math.hypot(*pinchuk_curve(s))
        d = math.hypot(pinchuk_curve(s)[0], pinchuk_curve(s)[1] - 200.0)
        if best is None or d < best[1]:
            best = (s, d)
print(f"min dist at s={best[0]:.6f}: r={best[1]:.6f}, ell_small={best[1]**2 / 2:.6f}")

print("== C: z2 closure probes in giant box")
giant = PlanarMap(f1=base.f1, f2=base.f2, name="pinchuk-giant",
                  domain=Box(-2e6, 2e6, -2e6, 2e6))
for h in (40.0, 100.0, 2000.0, 21000.0):
    t0 = time.time()
    start = level_start_point(giant, Z2, h)
    tr = integrate_orbit(giant, start, center=Z2,
                         budget=AngleBudget(max_winding=2, max_steps=2_000_000))
    xs = [p[0] for p in tr.points]
    ys = [p[1] for p in tr.points]
    per = getattr(tr.outcome, "period", None)
    hh = [hv for hv in ( (jet(*p)[0]**2 + jet(*p)[3]**2) / 2 for p in tr.points[::100] )]
    drift = max(abs(v - h) for v in hh) / h
    print(f"h={h}: {tr.outcome.kind} pts={len(tr.points)} period={per} "
          f"x=[{min(xs):.5g},{max(xs):.5g}] y=[{min(ys):.5g},{max(ys):.5g}] "
          f"drift={drift:.2e} dt={time.time() - t0:.2f}s")

print("== D: z1 Newton basin / find_zeros trials")
def newton(x, y, iters=80):
    for _ in range(iters):
        try:
            f1, f1x, f1y, f2, f2x, f2y = jet(x, y)
        except (OverflowError, ArithmeticError):
            return None
        det = f1x * f2y - f1y * f2x
        if det == 0.0 or not math.isfinite(det):
            return None
        dx = (f1 * f2y - f2 * f1y) / det
        dy = (f2 * f1x - f1 * f2x) / det
        x, y = x - dx, y - dy
        if math.hypot(dx, dy) < 1e-13 * (1.0 + math.hypot(x, y)):
            return (x, y)
    return None

for (ox, oy) in ((0.5, 0.0), (5.0, 0.0), (40.0, 0.0), (0.0, 0.001),
                 (0.0, 0.01), (0.0, 0.1), (0.0, 1.0), (10.0, 0.01),
                 (-60.0, -0.003), (100.0, 0.03)):
    seed = (Z1[0] + ox, Z1[1] + oy)
    got = newton(*seed)
    tag = "-> z1" if got and math.hypot(got[0] - Z1[0], got[1] - Z1[1]) < 1e-6 else f"-> {got}"
    print(f"seed offset ({ox},{oy}): {tag}")

for grid in (48, 96, 192):
    t0 = time.time()
    box = Box(-2600.0, 10.0, -20.0, 5.0)
    recs = find_zeros(base, box=box, grid_n=grid)
    locs = [(round(r.location[0], 4), round(r.location[1], 6)) for r in recs]
    print(f"find_zeros grid={grid}: {len(recs)} zeros {locs} dt={time.time() - t0:.2f}s")
