"""Find ALL solutions of p=0, q=200 by sweeping the p=0 branches."""
import math

import numpy as np

from planarham.corpus import builtin
from planarham.expr import compile_jet_pair, to_poly

pmap = builtin("pinchuk200", enable_extended=True)
pp = to_poly(pmap.f1)
qq = to_poly(pmap.f2)          # already shifted: q - 200
jet = compile_jet_pair(pmap.f1, pmap.f2)
print("deg p:", pp.degree(), " deg q:", qq.degree())

deg_y = max(j for _, i, j in pp.terms)
print("deg of p in y:", deg_y)


def p_y_coeffs(x: float) -> np.ndarray:
    c = np.zeros(deg_y + 1)
    for coeff, i, j in pp.terms:
        c[j] += coeff * x**i
    return c[::-1]              # np.roots wants high-to-low


def newton2(x: float, y: float):
    try:
        return _newton2(x, y)
    except OverflowError:
        return None


def _newton2(x: float, y: float):
    for _ in range(100):
        v1, dx1, dy1, v2, dx2, dy2 = jet(x, y)
        det = dx1 * dy2 - dy1 * dx2
        if det == 0 or not all(map(math.isfinite, (v1, v2, det))):
            return None
        sx = (v1 * dy2 - v2 * dy1) / det
        sy = (v2 * dx1 - v1 * dx2) / det
        x, y = x - sx, y - sy
        if math.hypot(sx, sy) < 1e-14 * (1 + math.hypot(x, y)):
            break
    v1, _, _, v2, _, _ = jet(x, y)
    if math.hypot(v1, v2) < 1e-7:
        return (x, y)
    return None


# collect (x, y, q) samples on p = 0
xs = np.concatenate([
    -np.geomspace(1e-4, 2000.0, 4000)[::-1],
    np.geomspace(1e-4, 2000.0, 4000),
])
samples = []            # per x: list of (y, qval)
for x in xs:
    coeffs = p_y_coeffs(x)
    if abs(coeffs[0]) < 1e-300:
        coeffs = coeffs[1:]
    roots = np.roots(coeffs)
    ys = sorted(float(r.real) for r in roots if abs(r.imag) < 1e-9 * (1 + abs(r)))
    row = [(y, qq.eval(x, y)) for y in ys]
    samples.append((float(x), row))

# bracket q = 0 (shifted) sign changes between neighbouring x, matching
# branches by nearest y
found = {}
for (x0, row0), (x1, row1) in zip(samples, samples[1:]):
    for y0, q0 in row0:
        if not row1 or not math.isfinite(q0):
            continue
        y1, q1 = min(row1, key=lambda r: abs(r[0] - y0))
        if abs(y1 - y0) > 0.5 * (1 + abs(y0)) or not math.isfinite(q1):
            continue
        if q0 == 0.0 or (q0 < 0) != (q1 < 0):
            z = newton2(0.5 * (x0 + x1), 0.5 * (y0 + y1))
            if z is not None:
                key = (round(z[0], 8), round(z[1], 8))
                found.setdefault(key, z)

for (kx, ky), (x, y) in sorted(found.items()):
    v1, dx1, dy1, v2, dx2, dy2 = jet(x, y)
    det = dx1 * dy2 - dy1 * dx2
    print(f"zero ({x:.12g}, {y:.12g})  |f|={math.hypot(v1, v2):.2e}  det={det:.6g}")
