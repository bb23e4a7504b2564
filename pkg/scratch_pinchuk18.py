"""Symbolic eliminant S(x; w1, w2) = Res_y(p - w1, q - w2) / x^54."""
import json
import time

import sympy as sp

x, y, u, v = sp.symbols("x y u v")

t = x * y - 1
xi = x * t + 1
h = t * xi
f = xi**2 * (t**2 + y)
p = sp.expand(f + h)
q = sp.expand(-t**2 - 6 * t * h * (h + 1) - 170 * f * h - 91 * h**2
              - 195 * f * h**2 - 69 * h**3 - 75 * f * h**3
              - sp.Rational(75, 4) * h**4)

t0 = time.time()
P1 = sp.Poly(p - u, y, domain="QQ[x,u,v]")
P2 = sp.Poly(q - v, y, domain="QQ[x,u,v]")
R = sp.resultant(P1, P2)
print(f"resultant computed in {time.time() - t0:.1f}s", flush=True)

t0 = time.time()
Rp = sp.Poly(sp.expand(R), x, u, v, domain="QQ")
# strip x^54
terms = Rp.terms()
kmin = min(mon[0] for mon, _ in terms)
print(f"min x power: {kmin}", flush=True)
table = {}
for (kx, ku, kv), c in terms:
    table.setdefault(kx - kmin, {})[(ku, kv)] = c
print(f"x-degrees present: {sorted(table)} ({time.time() - t0:.1f}s)", flush=True)

for kx in sorted(table):
    mons = table[kx]
    degs = [(i, j) for i, j in mons]
    print(f"A_{kx}: {len(mons)} monomials, deg_u <= {max(i for i, _ in degs)}, "
          f"deg_v <= {max(j for _, j in degs)}")

# largest integer magnitude in the table
worst = 0
for mons in table.values():
    for c in mons.values():
        pq = sp.Rational(c)
        worst = max(worst, abs(pq.p), pq.q)
print(f"largest integer in table: {worst} (~1e{len(str(worst)) - 1})")

out = {
    str(kx): {f"{i},{j}": [str(sp.Rational(c).p), str(sp.Rational(c).q)]
              for (i, j), c in mons.items()}
    for kx, mons in table.items()
}
with open("scratch_eliminant.json", "w") as fh:
    json.dump(out, fh, indent=0)
print("table saved to scratch_eliminant.json")
