import time
import xml.etree.ElementTree as ET

from planarham.annulus import build_annulus_report
from planarham.centers import find_zeros
from planarham.compactify import (compactification_for_map, classify_sectors,
                                  infinite_singularities)
from planarham.corpus import builtin
from planarham.field import Box
from planarham.render import (disc_portrait, disc_portrait_for_map,
                              plane_portrait, scene_to_svg)

ex1 = builtin("example1")
ex3 = builtin("example3")
ident = builtin("identity")

t0 = time.perf_counter()
centers1 = find_zeros(ex1, Box(-3, 3, -3, 3), grid_n=24)
rep1 = build_annulus_report(ex1, centers1[0], h_max=1.0, tol=1e-6,
                            box=Box(-3, 3, -3, 3))
scene1 = plane_portrait(ex1, centers1, [rep1], [0.1, 0.3, 0.5, 0.8],
                        box=Box(-3, 3, -3, 3))
svg1 = scene_to_svg(scene1)
print(f"ex1 portrait: {len(scene1.layers)} layers, warnings={scene1.warnings},"
      f" {time.perf_counter()-t0:.2f}s, svg {len(svg1)} bytes")
roles = {}
for lay in scene1.layers:
    roles[lay.role] = roles.get(lay.role, 0) + 1
print("  roles:", roles)
ET.fromstring(svg1)
print("  XML parses ok")
with open("/tmp/ex1.svg", "w") as fh:
    fh.write(svg1)

t0 = time.perf_counter()
centers3 = find_zeros(ex3, Box(-3, 3, -8, 8), grid_n=32)
scene3 = plane_portrait(ex3, centers3, [], [0.1, 0.3, 0.5, 0.8],
                        box=Box(-3, 3, -8, 8))
print(f"ex3 portrait: {len(scene3.layers)} layers, "
      f"{time.perf_counter()-t0:.2f}s, centers={len(centers3)}")
ET.fromstring(scene_to_svg(scene3))
with open("/tmp/ex3.svg", "w") as fh:
    fh.write(scene_to_svg(scene3))

ci = find_zeros(ident, Box(-2, 2, -2, 2), grid_n=16)
si = plane_portrait(ident, ci, [], [0.5], box=Box(-2, 2, -2, 2))
polylines = [l for l in si.layers if l.role == "level"]
print(f"identity single level: {len(polylines)} level polylines")
import math
for pl in polylines:
    rr = [math.hypot(x, y) for x, y in pl.points]
    print(f"  radius range [{min(rr):.6f}, {max(rr):.6f}] closed={pl.closed} n={len(pl.points)}")

# empty-scene warning
s_empty = plane_portrait(ident, [], [], [500.0], box=Box(-2, 2, -2, 2))
print("empty warnings:", s_empty.warnings, "layers:", len(s_empty.layers))

# disc portrait for example2
t0 = time.perf_counter()
ex2 = builtin("example2")
cf2 = compactification_for_map(ex2)
sings = [classify_sectors(cf2, s) for s in infinite_singularities(cf2)]
sd = disc_portrait(cf2, sings)
svgd = scene_to_svg(sd)
ET.fromstring(svgd)
print(f"ex2 disc: {len(sd.layers)} layers, {time.perf_counter()-t0:.2f}s, "
      f"svg {len(svgd)} bytes")
with open("/tmp/ex2_disc.svg", "w") as fh:
    fh.write(svgd)

# identity disc
cfi = compactification_for_map(ident)
sdi = disc_portrait(cfi, [])
ET.fromstring(scene_to_svg(sdi))
print(f"identity disc: {len(sdi.layers)} layers")

# refusal for example1/3
print("refusal:", disc_portrait_for_map(ex3, compactification_for_map(ex3), []))
print("determinism:", scene_to_svg(sd) == svgd)
