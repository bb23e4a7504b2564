"""Row sweep: solve p(x, y) = w1 as degree-6 poly in x per row y."""
import math
import time

import numpy as np

from planarham.corpus import builtin
from planarham.expr import compile_jet_pair, to_poly

base = builtin("pinchuk200", enable_extended=True)
P_POLY = to_poly(base.f1)
JET = compile_jet_pair(base.f1, base.f2)

_DEG_Y_P = max(j for _, _, j in P_POLY.terms)
_CKX = []
for k in range(7):
    arr = np.zeros(_DEG_Y_P + 1)
    for c, i, j in P_POLY.terms:
        if i == k:
            arr[_DEG_Y_P - j] = c
    _CKX.append(arr)


def _row_roots(ys: np.ndarray, w1: float) -> np.ndarray:
    n = ys.size
    C = np.stack([np.polyval(_CKX[k], ys) for k in range(7)])
    C[0] -= w1
    c6, c0 = C[6], C[0]
    ok = (c6 != 0.0) & np.isfinite(C).all(axis=0)
    lam = np.ones(n)
    nz = ok & (c0 != 0.0)
    lam[nz] = (np.abs(c0[nz]) / np.abs(c6[nz])) ** (1.0 / 6.0)
    denom = c6 * lam ** 6
    comp = np.zeros((n, 6, 6))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(6):
            comp[:, 0, 5 - k] = -(C[k] * lam ** k) / denom
    for r in range(1, 6):
        comp[:, r, r - 1] = 1.0
    ok &= np.isfinite(comp).all(axis=(1, 2))
    roots = np.full((n, 6), np.nan, dtype=float)
    idx = np.flatnonzero(ok)
    for lo in range(0, idx.size, 50_000):
        sel = idx[lo:lo + 50_000]
        vals = np.linalg.eigvals(comp[sel])
        real = np.abs(vals.imag) <= 1e-7 * (1.0 + np.abs(vals.real))
        got = np.where(real, vals.real, np.nan) * lam[sel, None]
        roots[sel] = np.sort(got, axis=1)
    return roots


def _q200(x, y):
    t = x * y - 1.0
    xi = x * t + 1.0
    h = t * xi
    f = xi * xi * (t * t + y)
    return (-t * t - 6.0 * t * h * (h + 1.0) - 170.0 * f * h
            - 91.0 * h * h - 195.0 * f * h * h - 69.0 * h ** 3
            - 75.0 * f * h ** 3 - 18.75 * h ** 4) - 200.0


def _x_on_branch(y: float, x0: float, w1: float):
    x = x0
    for _ in range(30):
        try:
            v1, px, _, _, _, _ = JET(x, y)
        except (OverflowError, ArithmeticError):
            return None
        if px == 0.0 or not math.isfinite(px):
            return None
        step = (v1 - w1) / px
        x -= step
        if abs(step) <= 1e-14 * (1.0 + abs(x)):
            return x
    return x


def _qtilde(x: float, y: float, w2: float):
    try:
        _, _, _, v2, _, _ = JET(x, y)
    except (OverflowError, ArithmeticError):
        return None
    return v2 - w2


def _branch_bisect_row(ya, xa, yb, xb, w1, w2):
    xa = _x_on_branch(ya, xa, w1)
    xb = _x_on_branch(yb, xb, w1)
    if xa is None or xb is None:
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
        ym = 0.5 * (ya + yb)
        xm = _x_on_branch(ym, 0.5 * (xa + xb), w1)
        if xm is None:
            return None
        sm = _qtilde(xm, ym, w2)
        if sm is None or not math.isfinite(sm) or sm == 0.0:
            return xm, ym
        if sa * sm < 0.0:
            yb, xb, sb = ym, xm, sm
        else:
            ya, xa, sa = ym, xm, sm
        if abs(yb - ya) <= 1e-15 * (1.0 + abs(ya)):
            break
    return 0.5 * (xa + xb), 0.5 * (ya + yb)


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


def default_rows() -> np.ndarray:
    parts = [
        -np.logspace(12.0, -9.0, 30_000),
        np.logspace(-9.0, 6.0, 12_000),
        np.linspace(-20_000.0, 20.0, 12_000),
        np.linspace(-20.0, -16.0, 4_000),
    ]
    ys = np.unique(np.concatenate(parts))
    return ys[ys != 0.0]


def row_sweep(w1: float, w2: float, ys: np.ndarray):
    R = _row_roots(ys, w1)
    with np.errstate(all="ignore"):
        Q = _q200(R, ys[:, None]) - w2
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
        seed = _branch_bisect_row(ys[i], ra[i, a], ys[i + 1], rb_m[i, a], w1, w2)
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


if __name__ == "__main__":
    YS = default_rows()
    print(f"{YS.size} rows")
    targets = [
        ("zeros", (0.0, 0.0)),
        ("seed1", (-95.337677, 19.888210)),
        ("seed2", (-87.132382, 112.450945)),
        ("seed3", (-50.120171, -71.585748)),
        ("missed-a", (0.0, -200.0)),
        ("missed-b", (-1.0, -240.75)),
    ]
    for label, (w1, w2) in targets:
        t0 = time.time()
        pts, ncand = row_sweep(w1, w2, YS)
        print(f"{label}: w=({w1:.6f},{w2:.6f}) -> {len(pts)} preimages "
              f"({ncand} flips) dt={time.time() - t0:.1f}s")
        for (x, y, res) in pts:
            print(f"    ({x:.10g}, {y:.10g}) res={res:.2e}")
