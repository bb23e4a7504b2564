"""Extent scaling of z2 orbits and feasibility of the h=19000 closure."""
import time

from planarham.corpus import builtin
from planarham.field import Box, PlanarMap
from planarham.trace import AngleBudget, integrate_orbit, level_start_point

Z2 = (-0.22922839788848523, -16.99370700917979)

base = builtin("pinchuk200", enable_extended=True)
huge = PlanarMap(f1=base.f1, f2=base.f2, name="pinchuk-huge",
                 domain=Box(-1e14, 1e14, -1e14, 1e14))

for h, rtol in ((100.0, 1e-9), (100.0, 1e-6), (1000.0, 1e-6),
                (19000.0, 1e-6), (21000.0, 1e-6)):
    t0 = time.time()
    start = level_start_point(huge, Z2, h)
    tr = integrate_orbit(huge, start, center=Z2, rtol=rtol, atol=1e-9,
                         budget=AngleBudget(max_winding=2, max_steps=8_000_000))
    xs = [p[0] for p in tr.points]
    ys = [p[1] for p in tr.points]
    per = getattr(tr.outcome, "period", None)
    print(f"h={h} rtol={rtol}: {tr.outcome.kind} pts={len(tr.points)} "
          f"period={per} x=[{min(xs):.5g},{max(xs):.5g}] "
          f"y=[{min(ys):.5g},{max(ys):.5g}] dt={time.time() - t0:.2f}s",
          flush=True)
