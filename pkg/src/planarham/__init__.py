"""Centers, period annuli and injectivity certificates for planar maps.

A smooth map f = (f1, f2) on a plane domain induces the Hamiltonian
H = (f1^2 + f2^2)/2 and the area-preserving field (-H_y, H_x).  Zeros of
f are centers of that field, the surrounding period annulus measures how
far f stays injective, and for polynomial H the behaviour at infinity
separates maps whose image is the whole plane from maps onto a disc.
"""

from .expr import parse_expr, print_expr, Expr, Poly2, to_poly
from .field import PlanarMap, Box, load_map_spec

__all__ = [
    "parse_expr",
    "print_expr",
    "Expr",
    "Poly2",
    "to_poly",
    "PlanarMap",
    "Box",
    "load_map_spec",
]

__version__ = "0.1.0"
