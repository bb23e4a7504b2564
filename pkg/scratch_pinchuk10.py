"""Prototype: fiber counting for the shifted Pinchuk map by a quartic-in-y
branch sweep over x.  Validated against the exact w=(0,0) answer."""
import math
import time

import numpy as np

from planarham.corpus import builtin, pinchuk_curve
from planarham.expr import compile_jet_pair, to_poly

base = builtin("pinchuk200", enable_extended=True)
P_POLY = to_poly(base.f1)
Q_POLY = to_poly(base.f2)          # already includes the -200 shift
JET = compile_jet_pair(base.f1, base.f2)

assert P_POLY is not None and Q_POLY is not None
DEG_Y_P = max(j for _, _, j in P_POLY.terms)
assert DEG_Y_P == 4

# y-coefficient polynomials of p, as np.polyval arrays (highest x power first)
_DEG_X_P = max(i for _, i, _ in P_POLY.terms)
_CK = []
for k in range(5):
    arr = np.zeros(_DEG_X_P + 1)
    for c, i, j in P_POLY.terms:
        if j == k:
            arr[_DEG_X_P - i] = c
    _CK.append(arr)


def _real_roots_per_column(xs: np.ndarray, w1: float) -> list[np.ndarray]:
    """Real y roots of p(x, y) = w1 for each x, via batched companions."""
    n = xs.size
    C = np.stack([np.polyval(_CK[k], xs) for k in range(5)])
    C[0] -= w1
    lead = C[4]
    ok = np.abs(lead) > 1e-280
    comp = np.zeros((n, 4, 4))
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(4):
            comp[:, 0, k] = -C[3 - k] / lead
    comp[:, 1, 0] = comp[:, 2, 1] = comp[:, 3, 2] = 1.0
    roots = np.full((n, 4), np.nan + 0j, dtype=complex)
    chunk = 50_000
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        sel = ok[lo:hi]
        if sel.any():
            sub = comp[lo:hi][sel]
            good = np.isfinite(sub).all(axis=(1, 2))
            vals = np.full((sub.shape[0], 4), np.nan + 0j, dtype=complex)
            if good.any():
                vals[good] = np.linalg.eigvals(sub[good])
            block = roots[lo:hi]
            block[sel] = vals
            roots[lo:hi] = block
    out = []
    for i in range(n):
        r = roots[i]
        r = r[np.isfinite(r)]
        re = r.real[np.abs(r.imag) <= 1e-7 * (1.0 + np.abs(r.real))]
        re = re[np.abs(re) < 1e16]
        out.append(np.sort(re))
    return out


def _newton2(x: float, y: float, w1: float, w2: float, iters: int = 80):
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
        if math.hypot(dx, dy) <= 1e-12 * (1.0 + math.hypot(x, y)):
            break
    try:
        v1, _, _, v2, _, _ = JET(x, y)
    except (OverflowError, ArithmeticError):
        return None
    if math.hypot(v1 - w1, v2 - w2) <= 1e-6 * (1.0 + math.hypot(w1, w2)):
        return (x, y)
    return None


def fiber_sweep(w1: float, w2: float, xs: np.ndarray) -> list[tuple[float, float]]:
    cols = _real_roots_per_column(xs, w1)
    found: list[tuple[float, float]] = []
    for i in range(len(xs) - 1):
        ra, rb = cols[i], cols[i + 1]
        if ra.size == 0 or rb.size == 0:
            continue
        qa = Q_POLY.eval(xs[i], ra) - w2
        qb = Q_POLY.eval(xs[i + 1], rb) - w2
        for a_idx in range(ra.size):
            b_idx = int(np.argmin(np.abs(rb - ra[a_idx])))
            if abs(rb[b_idx] - ra[a_idx]) > 0.5 * (1.0 + abs(ra[a_idx]) + abs(rb[b_idx])):
                continue
            if not (np.isfinite(qa[a_idx]) and np.isfinite(qb[b_idx])):
                continue
            if qa[a_idx] == 0.0 or qa[a_idx] * qb[b_idx] < 0.0:
                got = _newton2(0.5 * (xs[i] + xs[i + 1]),
                               0.5 * (ra[a_idx] + rb[b_idx]), w1, w2)
                if got is not None:
                    found.append(got)
    # dedupe
    uniq: list[tuple[float, float]] = []
    for (x, y) in found:
        if not any(math.hypot(x - u, y - v) <= 1e-5 * (1.0 + math.hypot(x, y))
                   for (u, v) in uniq):
            uniq.append((x, y))
    return sorted(uniq)


def default_columns() -> np.ndarray:
    parts = [
        np.linspace(-1.0e6, -3000.0, 30_000),
        np.linspace(-3000.0, 100.0, 60_000),
        -np.logspace(math.log10(3000.0), -9.0, 60_000),
        np.logspace(-9.0, 4.0, 20_000),
        np.linspace(-2600.0, -2460.0, 30_000),
    ]
    xs = np.unique(np.concatenate(parts))
    return xs[xs != 0.0]


XS = default_columns()
print(f"{XS.size} columns")

t0 = time.time()
zeros = fiber_sweep(0.0, 0.0, XS)
print(f"w=(0,0): {len(zeros)} roots dt={time.time() - t0:.1f}s")
for z in zeros:
    v = JET(*z)
    print(f"  ({z[0]:.12g}, {z[1]:.12g}) |f|={math.hypot(v[0], v[3]):.2e} "
          f"det={v[1] * v[5] - v[2] * v[4]:.6g}")

# five seeded points in the ball, away from the curve
rng = np.random.default_rng(2026)
svals = np.linspace(-3.0, 3.0, 20001)
curve = np.array([(*pinchuk_curve(s),) for s in svals])
curve[:, 1] -= 200.0

def curve_dist(w):
    return float(np.min(np.hypot(curve[:, 0] - w[0], curve[:, 1] - w[1])))

seeds = []
while len(seeds) < 5:
    ang = rng.uniform(0.0, 2.0 * math.pi)
    rad = 160.0 * math.sqrt(rng.uniform())
    w = (rad * math.cos(ang), rad * math.sin(ang))
    if curve_dist(w) >= 5.0:
        seeds.append(w)

for w in seeds:
    t0 = time.time()
    pts = fiber_sweep(w[0], w[1], XS)
    print(f"w=({w[0]:.6f},{w[1]:.6f}) d_curve={curve_dist(w):.2f}: "
          f"{len(pts)} preimages dt={time.time() - t0:.1f}s")
    for z in pts:
        print(f"    ({z[0]:.8g}, {z[1]:.8g})")

for s in (-1.0, 0.5, 2.0):
    ps, qs = pinchuk_curve(s)
    w = (ps, qs - 200.0)
    pts = fiber_sweep(w[0], w[1], XS)
    print(f"curve s={s}: w=({w[0]:.4f},{w[1]:.4f}): {len(pts)} preimages")
    for z in pts:
        print(f"    ({z[0]:.8g}, {z[1]:.8g})")

for w in ((0.0, -200.0), (-1.0, -243.75)):
    pts = fiber_sweep(w[0], w[1], XS)
    print(f"missed w={w}: {len(pts)} preimages")
    for z in pts:
        print(f"    ({z[0]:.8g}, {z[1]:.8g})")
