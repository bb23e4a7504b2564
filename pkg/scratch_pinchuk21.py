"""Exact verification: far-probe resultant counts, ulp-level root checks,
and A_6 vanishing identically on the curve."""
from fractions import Fraction
import math
import time

import sympy as sp

import scratch_pinchuk20 as v20
from planarham.corpus import builtin
from planarham.expr import to_poly

x, y = sp.symbols("x y")
t = x * y - 1
xi = x * t + 1
h = t * xi
f = xi**2 * (t**2 + y)
p = sp.expand(f + h)
q = sp.expand(-t**2 - 6 * t * h * (h + 1) - 170 * f * h - 91 * h**2
              - 195 * f * h**2 - 69 * h**3 - 75 * f * h**3
              - sp.Rational(75, 4) * h**4)

print("== exact resultant counts for far probes ==")
for w1f, w2f in [(-1000.0, -200.0), (2000.0, 500.0)]:
    w1 = sp.Rational(Fraction(w1f))
    w2 = sp.Rational(Fraction(w2f)) + 200
    P1 = sp.Poly(p - w1, y, domain="QQ[x]")
    P2 = sp.Poly(q - w2, y, domain="QQ[x]")
    R = sp.Poly(sp.resultant(P1, P2), x, domain="QQ")
    coeffs = R.all_coeffs()
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    roots = sp.Poly(coeffs, x, domain="QQ").real_roots()
    print(f"w=({w1f},{w2f}): {len(roots)} real x-roots:",
          [f"{float(r.evalf(25)):.12g}" for r in roots])

print("\n== exact ulp-level residuals at deep float roots ==")
base = builtin("pinchuk200", enable_extended=True)
PT = to_poly(base.f1).terms
QT = to_poly(base.f2).terms


def exact_val(terms, xf, yf):
    xq, yq = Fraction(xf), Fraction(yf)
    return sum(Fraction(c) * xq**i * yq**j for c, i, j in terms)


def ulp_check(label, xf, yf, w1, w2):
    rp = exact_val(PT, xf, yf) - Fraction(w1)
    rq = exact_val(QT, xf, yf) - Fraction(w2)
    v1, ax, ay, v2, bx, by = v20.JET(xf, yf)
    jnorm = max(abs(ax) + abs(ay), abs(bx) + abs(by))
    dstep = max(math.ulp(abs(xf)), math.ulp(abs(yf)))
    bound = jnorm * dstep
    rn = math.hypot(float(rp), float(rq))
    print(f"  {label}: exact |r|={rn:.3e}, ulp-move bound={bound:.3e}, "
          f"ratio={rn / bound:.2f}")


deep = [
    ("seed2 tail", -1.45442375588e-05, -4739890387.71,
     -95.337677, 19.888210),
    ("seed3 tail", -1.74329169852e-05, -3300044940.56,
     -87.132382, 112.450945),
    ("probe150 tail", -5.74577913224e-06, -30240307093.9,
     150.159755, -31.626128),
    ("probe-1000 tail", -1.3072332357e-07, -5.85332041559e+13,
     -1000.0, -200.0),
]
for item in deep:
    ulp_check(*item)

print("\n== A_6 vanishes identically on the curve (exact rational s) ==")


def curve_exact(s: Fraction):
    P = s**2 - 1
    Q = (Fraction(-75) * s**5 + Fraction(345, 4) * s**4 - 29 * s**3
         + Fraction(117, 2) * s**2 - Fraction(163, 4))
    return P, Q - 200


for sv in (Fraction(1, 3), Fraction(-7, 2), Fraction(9, 4)):
    w1q, w2q = curve_exact(sv)
    u, v = w1q, w2q + 200
    a6 = sum(c * u**i * v**j for i, j, c in v20.ELIM[6])
    print(f"  s={sv}: A_6 = {a6}")

print("\n== missing far target: why does (2000,500) stop at 1? ==")
A = v20.elim_values(2000.0, 500.0)
print("  A:", [f"{a:.6e}" for a in A])
import numpy as np
coeffs = [A[6], A[5], A[4], A[3], A[2], A[1], A[0]]
rr = np.roots(coeffs)
print("  sextic roots:", [f"{r:.6g}" for r in rr])
for r in rr:
    x0 = float(r.real)
    if abs(r.imag) > 1e-3 * (1 + abs(r.real)):
        continue
    ys = v20._quartic_y(x0, 2000.0)
    print(f"  x0={x0:.6g}: quartic ys={[f'{yv:.6g}' for yv in ys]}")
    for y0 in ys:
        got = v20._newton2(x0, y0, 2000.0, 500.0)
        print(f"    newton from y0={y0:.6g}: {got}")
