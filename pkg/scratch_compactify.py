import math
import time

from planarham.compactify import (build_compactification, classify_sectors,
                                  compactification_for_map, conti_verdict,
                                  infinite_singularities)
from planarham.corpus import builtin
from planarham.expr import Poly2, parse_expr, to_poly

ex2 = builtin("example2")
ident = builtin("identity")
ex1 = builtin("example1")

cf2 = compactification_for_map(ex2)
print("ex2 degree:", cf2.degree)
print("P:", cf2.p.as_dict())
print("Q:", cf2.q.as_dict())
print("u1 udot:", cf2.u1[0].as_dict())
print("u1 vdot:", cf2.u1[1].as_dict())
print("u2 udot:", cf2.u2[0].as_dict())
print("u2 vdot:", cf2.u2[1].as_dict())
print("v1 == u1:", cf2.v1 == cf2.u1, " v2 == u2:", cf2.v2 == cf2.u2)
print("equator g:", cf2.equator_poly.as_dict())

sings = infinite_singularities(cf2)
for s in sings:
    print(f"  root theta={s.theta!r} chart={s.chart} u={s.u!r} "
          f"res={s.residual:.2e} degenerate_root={s.degenerate_root}")

for s in sings:
    t0 = time.perf_counter()
    c = classify_sectors(cf2, s)
    dt = time.perf_counter() - t0
    from collections import Counter
    print(f"theta={s.theta:.6f}: {c.classification} conf={c.confidence:.3f} "
          f"fates={dict(Counter(c.evidence))} [{dt:.2f}s]")

cfi = compactification_for_map(ident)
print("\nidentity degree:", cfi.degree)
print("identity u1:", cfi.u1[0].as_dict(), cfi.u1[1].as_dict())
print("identity u2:", cfi.u2[0].as_dict(), cfi.u2[1].as_dict())
print("identity g:", cfi.equator_poly.as_dict())
print("identity sings:", infinite_singularities(cfi))

# double-well control: H = ((x^2-1)^2 + y^2)/2, center pair, compact levels
dw = to_poly(parse_expr("0.5*((x^2 - 1)^2 + y^2)"))
cfd = build_compactification(dw)
print("\ndouble-well degree:", cfd.degree)
print("double-well g:", cfd.equator_poly.as_dict())
sd = infinite_singularities(cfd)
for s in sd:
    print("  ", s.theta, s.chart, s.u, s.degenerate_root)
    t0 = time.perf_counter()
    c = classify_sectors(cfd, s)
    from collections import Counter
    print("   ->", c.classification, f"{c.confidence:.3f}",
          dict(Counter(c.evidence)), f"[{time.perf_counter()-t0:.2f}s]")

print("\nex1 hpoly:", compactification_for_map(ex1))
