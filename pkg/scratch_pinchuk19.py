"""Validate the eliminant-table fiber counter against all targets."""
from fractions import Fraction
import json
import math
import time

import numpy as np

from planarham.corpus import builtin, pinchuk_curve
from planarham.expr import compile_jet_pair, to_poly

base = builtin("pinchuk200", enable_extended=True)
JET = compile_jet_pair(base.f1, base.f2)
P_POLY = to_poly(base.f1)

_DEG_X_P = max(i for _, i, _ in P_POLY.terms)
_CK = []
for k in range(5):
    arr = np.zeros(_DEG_X_P + 1)
    for c, i, j in P_POLY.terms:
        if j == k:
            arr[_DEG_X_P - i] = c
    _CK.append(arr)

with open("scratch_eliminant.json") as fh:
    raw = json.load(fh)
ELIM = []
for kx in range(7):
    mons = []
    for key, (pn, pd) in raw[str(kx)].items():
        i, j = key.split(",")
        mons.append((int(i), int(j), Fraction(int(pn), int(pd))))
    ELIM.append(tuple(mons))

# sanity: print A_0 and A_6 shapes
print("A_0 monomials:", [(i, j, str(c)) for i, j, c in ELIM[0]])


def elim_values(w1: float, w2: float):
    """Exact evaluation of the sextic coefficients at a target point."""
    u = Fraction(w1)
    v = Fraction(w2) + 200
    out = []
    for mons in ELIM:
        acc = Fraction(0)
        for i, j, c in mons:
            acc += c * u**i * v**j
        out.append(float(acc))
    return out  # [A_0, ..., A_6]


def _quartic_y(x0: float, w1: float):
    cs = [float(np.polyval(_CK[k], x0)) for k in range(5)]
    cs[0] -= w1
    c4, c0 = cs[4], cs[0]
    if c4 == 0.0:
        return []
    lam = (abs(c0) / abs(c4)) ** 0.25 if c0 != 0.0 else 1.0
    scaled = [cs[k] * lam**k / (c4 * lam**4) for k in range(5)]
    rr = np.roots(scaled[::-1])
    return [float(r.real) * lam for r in rr
            if abs(r.imag) <= 1e-6 * (1.0 + abs(r.real))]


def _newton2(x, y, w1, w2, iters=60):
    for _ in range(iters):
        try:
            v1, ax, ay, v2, bx, by = JET(x, y)
        except (OverflowError, ArithmeticError):
            return None
        r1, r2 = v1 - w1, v2 - w2
        det = ax * by - ay * bx
        if det == 0.0 or not math.isfinite(det):
            return None
        dx = (r1 * by - r2 * ay) / det
        dy = (r2 * ax - r1 * bx) / det
        x, y = x - dx, y - dy
        if not (math.isfinite(x) and math.isfinite(y)):
            return None
        if math.hypot(dx, dy) <= 1e-13 * (1.0 + math.hypot(x, y)):
            break
    else:
        return None
    try:
        v1, _, _, v2, _, _ = JET(x, y)
    except (OverflowError, ArithmeticError):
        return None
    res = math.hypot(v1 - w1, v2 - w2)
    if res <= 1e-4 * (1.0 + math.hypot(w1, w2)):
        return (x, y, res)
    return None


def fiber(w1: float, w2: float):
    A = elim_values(w1, w2)
    scale = max(abs(c) for c in A)
    cands = []
    if scale == 0.0:
        return []
    coeffs = [A[6], A[5], A[4], A[3], A[2], A[1], A[0]]
    while coeffs and abs(coeffs[0]) <= 1e-13 * scale:
        coeffs.pop(0)
    if len(coeffs) > 1:
        for r in np.roots(coeffs):
            if abs(r.imag) <= 1e-6 * (1.0 + abs(r.real)):
                cands.append(float(r.real))
    cands.append(0.0)
    found = []
    for x0 in cands:
        if x0 == 0.0:
            ys = [w1]
        else:
            ys = _quartic_y(x0, w1)
        for y0 in ys:
            got = _newton2(x0, y0, w1, w2)
            if got is not None:
                found.append(got)
    uniq = []
    for (x, y, res) in sorted(found):
        if not any(math.hypot(x - u, y - v) <= 1e-6 * (1.0 + math.hypot(x, y))
                   for (u, v, _) in uniq):
            uniq.append((x, y, res))
    return uniq


targets = [
    ("zeros", (0.0, 0.0)),
    ("seed1", (55.269915, 115.442685)),
    ("seed2", (-95.337677, 19.888210)),
    ("seed3", (-87.132382, 112.450945)),
    ("seed4", (55.763983, -37.823536)),
    ("seed5", (-50.120171, -71.585748)),
    ("curve s=-1", (0.0, 8.0)),
    ("curve s=0.5", (-0.75, -226.703125)),
    ("curve s=2", (3.0, -1258.75)),
    ("missed (0,-200)", (0.0, -200.0)),
    ("missed (-1,-240.75)", (-1.0, -240.75)),
    ("probe (-10,0)", (-10.0, 0.0)),
    ("probe (150,-32)", (150.159755, -31.626128)),
    ("probe (5,-300)", (5.0, -300.0)),
    ("probe (-1000,-200)", (-1000.0, -200.0)),
    ("probe on-line x=0", (3.0, 50.0 * 3.0 - 191.75)),
]

t_all = time.time()
for label, (w1, w2) in targets:
    t0 = time.time()
    pts = fiber(w1, w2)
    A = elim_values(w1, w2)
    print(f"{label}: w=({w1:.6f},{w2:.6f}) -> {len(pts)} preimages "
          f"A6={A[6]:.3e} dt={time.time() - t0:.2f}s")
    for (x, y, res) in pts:
        print(f"    ({x:.12g}, {y:.12g}) res={res:.2e}")
print(f"total {time.time() - t_all:.1f}s")
