"""Characterize the two Pinchuk centers: det, orbit extent vs level."""
import math

from planarham.corpus import builtin
from planarham.expr import compile_jet_pair
from planarham.field import Box, PlanarMap, sample
from planarham.trace import AngleBudget, integrate_orbit, level_start_point

Z1 = (-2532.442447630816, -0.0003838953061841223)
Z2 = (-0.22922839788848523, -16.99370700917979)

base = builtin("pinchuk200", enable_extended=True)
jet = compile_jet_pair(base.f1, base.f2)

for name, z in (("z1", Z1), ("z2", Z2)):
    s = sample(base, z)
    print(f"{name} {z}: |f|={math.hypot(*s.f_value):.2e} det={s.det:.6g} "
          f"period_guess={2 * math.pi / abs(s.det):.4g}")

# huge working window so escape means something
wide = PlanarMap(f1=base.f1, f2=base.f2, name="pinchuk-wide",
                 domain=Box(-80000.0, 80000.0, -80000.0, 80000.0))

for name, z in (("z1", Z1), ("z2", Z2)):
    print(f"--- orbits around {name} {z}")
    for h in (1.0, 100.0, 2000.0, 19000.0):
        try:
            start = level_start_point(wide, z, h)
        except Exception as exc:
            print(f"  h={h}: start failed: {exc}")
            continue
        tr = integrate_orbit(wide, start, center=z,
                             budget=AngleBudget(max_winding=2,
                                                max_steps=400000))
        xs = [p[0] for p in tr.points]
        ys = [p[1] for p in tr.points]
        print(f"  h={h}: outcome={tr.outcome.kind} pts={len(tr.points)} "
              f"x=[{min(xs):.4g},{max(xs):.4g}] y=[{min(ys):.4g},{max(ys):.4g}]")
