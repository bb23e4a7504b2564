"""Fiber sweep v3: branch bisection between columns before 2-D polish."""
import math
import time

import numpy as np

from planarham.corpus import builtin, pinchuk_curve
from planarham.expr import compile_jet_pair, to_poly

base = builtin("pinchuk200", enable_extended=True)
P_POLY = to_poly(base.f1)
JET = compile_jet_pair(base.f1, base.f2)

_DEG_X_P = max(i for _, i, _ in P_POLY.terms)
_CK = []
for k in range(5):
    arr = np.zeros(_DEG_X_P + 1)
    for c, i, j in P_POLY.terms:
        if j == k:
            arr[_DEG_X_P - i] = c
    _CK.append(arr)


def _q200(x, y):
    t = x * y - 1.0
    xi = x * t + 1.0
    h = t * xi
    f = xi * xi * (t * t + y)
    return (-t * t - 6.0 * t * h * (h + 1.0) - 170.0 * f * h
            - 91.0 * h * h - 195.0 * f * h * h - 69.0 * h ** 3
            - 75.0 * f * h ** 3 - 18.75 * h ** 4) - 200.0


def _column_roots(xs: np.ndarray, w1: float) -> np.ndarray:
    n = xs.size
    C = np.stack([np.polyval(_CK[k], xs) for k in range(5)])
    C[0] -= w1
    c4, c0 = C[4], C[0]
    ok = (c4 != 0.0) & np.isfinite(C).all(axis=0)
    lam = np.ones(n)
    nz = ok & (c0 != 0.0)
    lam[nz] = (np.abs(c0[nz]) / np.abs(c4[nz])) ** 0.25
    denom = c4 * lam ** 4
    comp = np.zeros((n, 4, 4))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(4):
            comp[:, 0, 3 - k] = -(C[k] * lam ** k) / denom
    comp[:, 1, 0] = comp[:, 2, 1] = comp[:, 3, 2] = 1.0
    ok &= np.isfinite(comp).all(axis=(1, 2))
    roots = np.full((n, 4), np.nan, dtype=float)
    idx = np.flatnonzero(ok)
    for lo in range(0, idx.size, 50_000):
        sel = idx[lo:lo + 50_000]
        vals = np.linalg.eigvals(comp[sel])
        real = np.abs(vals.imag) <= 1e-7 * (1.0 + np.abs(vals.real))
        got = np.where(real, vals.real, np.nan) * lam[sel, None]
        roots[sel] = np.sort(got, axis=1)
    return roots


def _y_on_branch(x: float, y0: float, w1: float):
    """Polish y so p(x, y) = w1, staying on the branch through y0."""
    y = y0
    for _ in range(30):
        try:
            v1, _, py, _, _, _ = JET(x, y)
        except (OverflowError, ArithmeticError):
            return None
        if py == 0.0 or not math.isfinite(py):
            return None
        step = (v1 - w1) / py
        y -= step
        if abs(step) <= 1e-14 * (1.0 + abs(y)):
            return y
    return y


def _qtilde(x: float, y: float, w2: float):
    try:
        _, _, _, v2, _, _ = JET(x, y)
    except (OverflowError, ArithmeticError):
        return None
    return v2 - w2


def _branch_bisect(xa, ya, xb, yb, w1, w2):
    """Bisect the branch crossing of q between columns a and b."""
    ya = _y_on_branch(xa, ya, w1)
    yb = _y_on_branch(xb, yb, w1)
    if ya is None or yb is None:
        return None
    sa = _qtilde(xa, ya, w2)
    sb = _qtilde(xb, yb, w2)
    if sa is None or sb is None or not (math.isfinite(sa) and math.isfinite(sb)):
        return None
    if sa == 0.0:
        return xa, ya
    if sb == 0.0:
        return xb, yb
    if sa * sb > 0.0:
        return None
    for _ in range(80):
        xm = 0.5 * (xa + xb)
        ym = _y_on_branch(xm, 0.5 * (ya + yb), w1)
        if ym is None:
            return None
        sm = _qtilde(xm, ym, w2)
        if sm is None or not math.isfinite(sm) or sm == 0.0:
            return xm, ym
        if sa * sm < 0.0:
            xb, yb, sb = xm, ym, sm
        else:
            xa, ya, sa = xm, ym, sm
        if abs(xb - xa) <= 1e-15 * (1.0 + abs(xa)):
            break
    return 0.5 * (xa + xb), 0.5 * (ya + yb)


def _newton2(x: float, y: float, w1: float, w2: float, iters: int = 60):
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


def default_columns() -> np.ndarray:
    parts = [
        -np.logspace(math.log10(2600.0), -9.0, 25_000),
        np.logspace(-9.0, 4.0, 8_000),
        np.linspace(-2560.0, -2500.0, 12_000),
        np.linspace(-2600.0, -2450.0, 4_000),
        np.linspace(-1.0e6, -2600.0, 8_000),
        np.linspace(-2450.0, 20.0, 12_000),
    ]
    xs = np.unique(np.concatenate(parts))
    return xs[xs != 0.0]


def fiber_sweep(w1: float, w2: float, xs: np.ndarray):
    R = _column_roots(xs, w1)
    with np.errstate(all="ignore"):
        Q = _q200(xs[:, None], R) - w2
    ra, rb = R[:-1], R[1:]
    qa, qb = Q[:-1], Q[1:]
    D = np.abs(ra[:, :, None] - rb[:, None, :])
    D = np.where(np.isnan(D), np.inf, D)
    j = np.argmin(D, axis=2)
    gap = np.take_along_axis(D, j[:, :, None], axis=2)[:, :, 0]
    rb_m = np.take_along_axis(rb, j, axis=1)
    qb_m = np.take_along_axis(qb, j, axis=1)
    okpair = (np.isfinite(qa) & np.isfinite(qb_m)
              & (gap <= 0.02 * (1.0 + np.abs(ra) + np.abs(rb_m))))
    flip = okpair & ((qa == 0.0) | (qa * qb_m < 0.0))
    rows, cols = np.nonzero(flip)
    found = []
    for i, a in zip(rows, cols):
        seed = _branch_bisect(xs[i], ra[i, a], xs[i + 1], rb_m[i, a], w1, w2)
        if seed is None:
            continue
        got = _newton2(seed[0], seed[1], w1, w2)
        if got is not None:
            found.append(got)
    uniq = []
    for (x, y, res) in sorted(found):
        if not any(math.hypot(x - u, y - v) <= 1e-5 * (1.0 + math.hypot(x, y))
                   for (u, v, _) in uniq):
            uniq.append((x, y, res))
    return uniq, len(rows)


XS = default_columns()
print(f"{XS.size} columns")

targets = [("w=(0,0) [zeros]", (0.0, 0.0))]
rng = np.random.default_rng(2026)
svals = np.linspace(-3.0, 3.0, 20001)
curve = np.array([pinchuk_curve(s) for s in svals])
curve[:, 1] -= 200.0

def curve_dist(w):
    return float(np.min(np.hypot(curve[:, 0] - w[0], curve[:, 1] - w[1])))

while len(targets) < 6:
    ang = rng.uniform(0.0, 2.0 * math.pi)
    rad = 160.0 * math.sqrt(rng.uniform())
    w = (rad * math.cos(ang), rad * math.sin(ang))
    if curve_dist(w) >= 5.0:
        targets.append((f"seed d={curve_dist(w):.1f}", w))

for s in (-1.0, 0.5, 2.0):
    ps, qs = pinchuk_curve(s)
    targets.append((f"curve s={s}", (ps, qs - 200.0)))
targets.append(("missed (0,-200)", (0.0, -200.0)))
targets.append(("missed (-1,-240.75)", (-1.0, -240.75)))

t_all = time.time()
for label, w in targets:
    t0 = time.time()
    pts, ncand = fiber_sweep(w[0], w[1], XS)
    print(f"{label}: w=({w[0]:.6f},{w[1]:.6f}) -> {len(pts)} preimages "
          f"({ncand} flips) dt={time.time() - t0:.1f}s")
    for (x, y, res) in pts:
        print(f"    ({x:.10g}, {y:.10g}) res={res:.2e}")
print(f"total {time.time() - t_all:.1f}s")
