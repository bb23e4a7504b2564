"""Dissect the quartic-in-y structure at the missed preimage columns."""
import numpy as np

import scratch_pinchuk12 as v12

np.set_printoptions(precision=10, suppress=False)

CASES = [
    (-95.337677, 19.888210, -1.45442375587821e-05),
    (150.159755, -31.626128, -5.74577913223861e-06),
]

for w1, w2, x0 in CASES:
    print(f"\n=== w=({w1},{w2}), missed x0={x0:.12g} ===")
    for x in (x0 * 1.02, x0, x0 * 0.98):
        cs = [np.polyval(v12._CK[k], x) for k in range(5)]
        cs[0] -= w1
        quart = np.array([cs[4], cs[3], cs[2], cs[1], cs[0]])
        rr = np.roots(quart)
        print(f"  x={x:.10g}: np.roots ->")
        for r in sorted(rr, key=lambda z: z.real):
            yv = r.real
            qv = v12._q200(x, yv) - w2 if abs(r.imag) < 1e-3 * abs(r) else None
            print(f"    {r:.8g}  " + (f"qtilde={qv:.6g}" if qv is not None else "(complex)"))
    # what does the production extractor see?
    xs = np.array([x0 * 1.02, x0, x0 * 0.98])
    R = v12._column_roots(xs, w1)
    print(f"  _column_roots:\n{R}")
    with np.errstate(all="ignore"):
        Q = v12._q200(xs[:, None], R) - w2
    print(f"  qtilde on extracted roots:\n{Q}")
