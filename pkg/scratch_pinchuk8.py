"""Instrument the h=19000 closure miss: log every section crossing."""
import math

import planarham.trace as trace
from planarham.corpus import builtin
from planarham.expr import compile_jet_pair
from planarham.field import Box, PlanarMap
from planarham.trace import AngleBudget, integrate_orbit, level_start_point

Z2 = (-0.22922839788848523, -16.99370700917979)

base = builtin("pinchuk200", enable_extended=True)
huge = PlanarMap(f1=base.f1, f2=base.f2, name="pinchuk-huge",
                 domain=Box(-1e14, 1e14, -1e14, 1e14))
jet = compile_jet_pair(base.f1, base.f2)

h = 19000.0
start = level_start_point(huge, Z2, h)
print("start:", start, "dist from z2:", math.hypot(start[0] - Z2[0], start[1] - Z2[1]))

orig_refine = trace._refine_return
events = []

def logged_refine(flow, section, p0, t0, h_step, rtol, atol):
    hit = orig_refine(flow, section, p0, t0, h_step, rtol, atol)
    if hit is None:
        events.append((t0, p0, None, None, None))
    else:
        t_hit, p_hit = hit
        d = math.hypot(p_hit[0] - start[0], p_hit[1] - start[1])
        v1, _, _, v2, _, _ = jet(*p_hit)
        events.append((t0, p0, p_hit, d, 0.5 * (v1 * v1 + v2 * v2) - h))
    return hit

trace._refine_return = logged_refine
tr = integrate_orbit(huge, start, center=Z2, rtol=1e-6, atol=1e-9,
                     budget=AngleBudget(max_winding=2, max_steps=8_000_000))
trace._refine_return = orig_refine

print("outcome:", tr.outcome.kind, "pts:", len(tr.points))
print("theta sweep / 2pi:", (tr.thetas[-1] - tr.thetas[0]) / (2 * math.pi))
print(f"{len(events)} refine calls:")
for t0, p0, p_hit, d, dh in events[:20]:
    if p_hit is None:
        print(f"  t={t0:.6g} p_prev=({p0[0]:.6g},{p0[1]:.6g}) -> None")
    else:
        print(f"  t={t0:.6g} p_prev=({p0[0]:.6g},{p0[1]:.6g}) -> "
              f"hit=({p_hit[0]:.10g},{p_hit[1]:.10g}) |hit-start|={d:.3e} H-h={dh:.3e}")

# where does the orbit cross the horizontal line y = start_y with x > cx?
cx = Z2[0]
sy = start[1]
crossings = []
pts = tr.points
for (xa, ya), (xb, yb) in zip(pts, pts[1:]):
    if (ya - sy) * (yb - sy) < 0 and max(xa, xb) > cx:
        s = (sy - ya) / (yb - ya)
        crossings.append((xa + s * (xb - xa), "down" if yb < ya else "up"))
print(f"{len(crossings)} raw line crossings with x > cx:")
for xc, direction in crossings[:16]:
    print(f"  x={xc:.8g} going {direction}")
