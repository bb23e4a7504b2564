"""Exact fiber counts via resultants over QQ (dev-side sympy)."""
from fractions import Fraction
import time

import sympy as sp

x, y = sp.symbols("x y")

t = x * y - 1
xi = x * t + 1
h = t * xi
f = xi**2 * (t**2 + y)
p = sp.expand(f + h)
q = sp.expand(-t**2 - 6 * t * h * (h + 1) - 170 * f * h - 91 * h**2
              - 195 * f * h**2 - 69 * h**3 - 75 * f * h**3
              - sp.Rational(75, 4) * h**4)

TARGETS = [
    ("seed-neg", (-95.337677, 19.888210)),
    ("seed-right", (150.159755, -31.626128)),
    ("probe(-10,0)", (-10.0, 0.0)),
    ("zeros", (0.0, 0.0)),
]

for label, (w1f, w2f) in TARGETS:
    w1 = sp.Rational(Fraction(w1f))
    w2 = sp.Rational(Fraction(w2f)) + 200
    t0 = time.time()
    P1 = sp.Poly(p - w1, y, domain="QQ[x]")
    P2 = sp.Poly(q - w2, y, domain="QQ[x]")
    R = sp.resultant(P1, P2)
    Rp = sp.Poly(R, x, domain="QQ")
    # strip the extraneous x^k factor (leading y-coefficients vanish at x=0)
    coeffs = Rp.all_coeffs()
    k = 0
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
        k += 1
    Rp = sp.Poly(coeffs, x, domain="QQ")
    print(f"{label}: resultant degree {Rp.degree()} after stripping x^{k} "
          f"({time.time() - t0:.1f}s)", flush=True)
    t0 = time.time()
    roots = Rp.real_roots()
    print(f"  {len(roots)} real roots of Res_y/x^{k} "
          f"({time.time() - t0:.1f}s)", flush=True)
    for r in roots:
        print(f"    x ~ {float(r.evalf(30)):.15g}", flush=True)
