"""Exact elimination: all solutions of p = 0, q = 200 via resultants."""
import math

import sympy as sp

from planarham.corpus import builtin
from planarham.expr import compile_jet_pair, to_poly

pmap = builtin("pinchuk200", enable_extended=True)
pp = to_poly(pmap.f1)
qq = to_poly(pmap.f2)
jet = compile_jet_pair(pmap.f1, pmap.f2)

x, y = sp.symbols("x y")


def to_sympy(poly):
    return sp.Add(*[sp.Rational(c) * x**i * y**j for c, i, j in poly.terms])


P = sp.Poly(to_sympy(pp), x, y)
Q = sp.Poly(to_sympy(qq), x, y)
print("built polys", P.total_degree(), Q.total_degree())

R = sp.resultant(P.as_expr(), Q.as_expr(), y)
Rp = sp.Poly(R, x)
print("resultant degree in x:", Rp.degree())

roots_x = sp.Poly(R, x).real_roots()
print("real x roots:", len(roots_x))
sols = []
for rx in roots_x:
    rxf = float(rx.evalf(30))
    # all y with p(rx, y) = 0, then filter q = 200
    py = sp.Poly(P.as_expr().subs(x, sp.Rational(rx.evalf(40)).limit_denominator(10**30)), y)
    for ry in py.real_roots():
        ryf = float(ry.evalf(30))
        v1, _, _, v2, _, _ = jet(rxf, ryf)
        if math.hypot(v1, v2) < 1e-3:
            sols.append((rxf, ryf, math.hypot(v1, v2)))
for s in sols:
    print("candidate:", s)
