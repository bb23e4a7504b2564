"""Hamiltonian structure of a planar map.

A map f = (f1, f2) induces H = (f1^2 + f2^2)/2 and the area-preserving
field (-H_y, H_x), both evaluated here through the first-order jet of f
(chain rule), never by differentiating a composed H expression.  That
keeps a single code path with exact partials and needs no second
derivatives anywhere.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

from .expr import (
    DomainError,
    Expr,
    OVERFLOW_LIMIT,
    Poly2,
    compile_jet_pair,
    located_domain_error,
    parse_expr,
    to_poly,
)

ZERO_TOL = 1e-10
DEGENERATE_TOL = 1e-8


@dataclass(frozen=True)
class Box:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"empty box: {self}")

    def contains(self, p: tuple[float, float]) -> bool:
        x, y = p
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def diameter(self) -> float:
        return math.hypot(self.xmax - self.xmin, self.ymax - self.ymin)

    def center(self) -> tuple[float, float]:
        return (0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))

    def exit_side(self, p: tuple[float, float]) -> str | None:
        """Name of the first violated side, None if p is inside."""
        x, y = p
        if x < self.xmin:
            return "xmin"
        if x > self.xmax:
            return "xmax"
        if y < self.ymin:
            return "ymin"
        if y > self.ymax:
            return "ymax"
        return None

    def intersect(self, other: "Box") -> "Box":
        return Box(max(self.xmin, other.xmin), min(self.xmax, other.xmax),
                   max(self.ymin, other.ymin), min(self.ymax, other.ymax))


# An unbounded domain is handled as this working window plus explicit
# escape events; a finite window is the honest numerical stand-in for
# "any open connected set".
PLANE_BOX = Box(-20.0, 20.0, -20.0, 20.0)


@dataclass(frozen=True)
class PlanarMap:
    """The input map f = (f1, f2) with an optional declared Hamiltonian.

    ``domain=None`` means the whole plane (working window
    :data:`PLANE_BOX` with escape detection).  ``declared_hamiltonian``
    exists for maps like x/sqrt(1+x^2) whose H is polynomial even though
    f is not; it must pass :func:`validate_hamiltonian`.
    """

    f1: Expr
    f2: Expr
    domain: Box | None = None
    declared_hamiltonian: Poly2 | None = None
    name: str = ""

    def working_box(self) -> Box:
        return self.domain if self.domain is not None else PLANE_BOX

    def is_plane_domain(self) -> bool:
        return self.domain is None


class OverflowEvent(ArithmeticError):
    """An intermediate magnitude exceeded the overflow guard."""

    def __init__(self, point: tuple[float, float], magnitude: float):
        super().__init__(f"overflow (|value| ~ {magnitude:.3g}) at {point}")
        self.point = point
        self.magnitude = magnitude


@dataclass(frozen=True)
class FieldSample:
    point: tuple[float, float]
    f_value: tuple[float, float]
    jacobian: tuple[tuple[float, float], tuple[float, float]]
    det: float
    hamiltonian: float
    field: tuple[float, float]

    def grad_h(self) -> tuple[float, float]:
        """Gradient of H; the field is this rotated a quarter turn."""
        (dx1, dy1), (dx2, dy2) = self.jacobian
        v1, v2 = self.f_value
        return (v1 * dx1 + v2 * dx2, v1 * dy1 + v2 * dy2)


def sample(pmap: PlanarMap, p: tuple[float, float]) -> FieldSample:
    """Evaluate f, Df, H and the Hamiltonian field at one point.

    Raises :class:`~planarham.expr.DomainError` (locating the offending
    subexpression) when evaluation leaves the real domain, and
    :class:`OverflowEvent` when any magnitude passes 1e150.
    """
    jet = compile_jet_pair(pmap.f1, pmap.f2)
    x, y = p
    try:
        v1, dx1, dy1, v2, dx2, dy2 = jet(x, y)
    except OverflowError:
        raise OverflowEvent(p, math.inf) from None
    except (ValueError, ZeroDivisionError):
        raise located_domain_error(pmap.f1, pmap.f2, p) from None
    worst = max(abs(v1), abs(dx1), abs(dy1), abs(v2), abs(dx2), abs(dy2))
    if not math.isfinite(worst) or worst > OVERFLOW_LIMIT:
        raise OverflowEvent(p, worst)
    h = 0.5 * (v1 * v1 + v2 * v2)
    return FieldSample(
        point=(x, y),
        f_value=(v1, v2),
        jacobian=((dx1, dy1), (dx2, dy2)),
        det=dx1 * dy2 - dx2 * dy1,
        hamiltonian=h,
        field=(-(v1 * dy1 + v2 * dy2), v1 * dx1 + v2 * dx2),
    )


@dataclass(frozen=True)
class Linearization:
    matrix: tuple[tuple[float, float], tuple[float, float]]
    trace: float
    det: float
    eigenvalues: tuple[complex, complex]


def linearization_at(pmap: PlanarMap, z: tuple[float, float],
                     zero_tol: float = ZERO_TOL) -> Linearization:
    """Linear part of the Hamiltonian field at a zero of f.

    The matrix is assembled from first partials of f only; its trace is
    zero by construction and its determinant is (det Df)^2, so the
    eigenvalues are the purely imaginary pair +-i|det Df|.
    """
    s = sample(pmap, z)
    if math.hypot(*s.f_value) > zero_tol:
        raise ValueError(f"not a zero of the map: |f{z}| = {math.hypot(*s.f_value):.3g}")
    if s.det == 0.0:
        raise ValueError(f"degenerate Jacobian at {z}")
    (dx1, dy1), (dx2, dy2) = s.jacobian
    m00 = -(dx1 * dy1 + dx2 * dy2)
    m01 = -(dy1 * dy1 + dy2 * dy2)
    m10 = dx1 * dx1 + dx2 * dx2
    m11 = -m00  # trace exactly zero
    omega = abs(s.det)
    return Linearization(
        matrix=((m00, m01), (m10, m11)),
        trace=m00 + m11,
        det=m00 * m11 - m01 * m10,
        eigenvalues=(complex(0.0, omega), complex(0.0, -omega)),
    )


@dataclass(frozen=True)
class HamiltonianValidation:
    ok: bool
    worst_point: tuple[float, float]
    worst_residual: float
    n_checked: int
    n_skipped: int


class ValidationInconclusive(RuntimeError):
    """Too many grid points left the expression domain to decide."""


def validate_hamiltonian(pmap: PlanarMap, grid_n: int = 50) -> HamiltonianValidation:
    """Check the declared polynomial against (f1^2+f2^2)/2 on a grid.

    The grid covers domain intersected with [-3,3]^2; a point passes when
    the residual is within 1e-8*(1+|H|).  Domain errors skip the point;
    more than 20% skipped raises :class:`ValidationInconclusive`.
    """
    if pmap.declared_hamiltonian is None:
        raise ValueError("no declared Hamiltonian to validate")
    box = pmap.working_box().intersect(Box(-3.0, 3.0, -3.0, 3.0))
    poly = pmap.declared_hamiltonian
    worst_res = -1.0
    worst_pt = (math.nan, math.nan)
    skipped = 0
    checked = 0
    for i in range(grid_n):
        x = box.xmin + (box.xmax - box.xmin) * i / (grid_n - 1)
        for j in range(grid_n):
            y = box.ymin + (box.ymax - box.ymin) * j / (grid_n - 1)
            try:
                s = sample(pmap, (x, y))
            except (DomainError, OverflowEvent):
                skipped += 1
                continue
            checked += 1
            res = abs(poly.eval(x, y) - s.hamiltonian) / (1.0 + abs(s.hamiltonian))
            if res > worst_res:
                worst_res = res
                worst_pt = (x, y)
    total = grid_n * grid_n
    if skipped > 0.2 * total:
        raise ValidationInconclusive(
            f"{skipped}/{total} grid points skipped on domain errors")
    return HamiltonianValidation(
        ok=worst_res <= 1e-8,
        worst_point=worst_pt,
        worst_residual=worst_res,
        n_checked=checked,
        n_skipped=skipped,
    )


def effective_hamiltonian_poly(pmap: PlanarMap) -> Poly2 | None:
    """Polynomial form of H when one exists, else None.

    Prefers a validated declared Hamiltonian; otherwise builds
    (f1^2 + f2^2)/2 when both components are structurally polynomial.
    """
    if pmap.declared_hamiltonian is not None:
        if validate_hamiltonian(pmap).ok:
            return pmap.declared_hamiltonian
    p1 = to_poly(pmap.f1)
    p2 = to_poly(pmap.f2)
    if p1 is None or p2 is None:
        return None
    return (p1 * p1 + p2 * p2).scale(0.5)


def jacobian_sign_change(pmap: PlanarMap, box: Box | None = None,
                         grid_n: int = 40) -> tuple[tuple[float, float], tuple[float, float]] | None:
    """Hypothesis check for det Df != 0: look for a sign change.

    Samples det Df on a deterministic grid (offset half a cell so
    symmetric zero lines are not sampled exactly) and returns a witness
    pair (point with det > 0, point with det < 0), or None when every
    usable sample has one sign.
    """
    box = box if box is not None else pmap.working_box()
    pos = neg = None
    for i in range(grid_n):
        x = box.xmin + (box.xmax - box.xmin) * (i + 0.5) / grid_n
        for j in range(grid_n):
            y = box.ymin + (box.ymax - box.ymin) * (j + 0.5) / grid_n
            try:
                d = sample(pmap, (x, y)).det
            except (DomainError, OverflowEvent):
                continue
            if d > 0 and pos is None:
                pos = (x, y)
            elif d < 0 and neg is None:
                neg = (x, y)
            if pos is not None and neg is not None:
                return (pos, neg)
    return None


# ===== Map-spec files ===== #


class MapSpecError(ValueError):
    pass


_LINE_RE = re.compile(r'^\s*([A-Za-z_][A-Za-z_0-9]*)\s*=\s*"([^"]*)"\s*(?:#.*)?$')
_BOX_RE = re.compile(
    r"^box\(\s*(-?[\d.eE+]+)\s*,\s*(-?[\d.eE+]+)\s*,\s*(-?[\d.eE+]+)\s*,\s*(-?[\d.eE+]+)\s*\)$"
)

_KNOWN_KEYS = {"name", "f1", "f2", "domain", "hamiltonian"}


def _parse_domain(text: str) -> Box | None:
    if text == "plane":
        return None
    m = _BOX_RE.match(text)
    if m is None:
        raise MapSpecError(f'domain must be "plane" or "box(xmin, xmax, ymin, ymax)", got {text!r}')
    return Box(*(float(g) for g in m.groups()))


def load_map_spec(path: str | Path) -> PlanarMap:
    """Read a map from a key = "value" file.

    Recognised keys: name, f1, f2 (required), domain ("plane" or
    "box(xmin, xmax, ymin, ymax)"), hamiltonian (expression that must be
    structurally polynomial and match (f1^2+f2^2)/2 numerically).
    Lines starting with # and blank lines are ignored.
    """
    path = Path(path)
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE_RE.match(raw)
        if m is None:
            raise MapSpecError(f"{path.name}:{lineno}: expected key = \"value\", got {raw!r}")
        key, value = m.group(1), m.group(2)
        if key not in _KNOWN_KEYS:
            raise MapSpecError(f"{path.name}:{lineno}: unknown key {key!r}")
        if key in fields:
            raise MapSpecError(f"{path.name}:{lineno}: duplicate key {key!r}")
        fields[key] = value
    for required in ("f1", "f2"):
        if required not in fields:
            raise MapSpecError(f"{path.name}: missing required key {required!r}")
    domain = _parse_domain(fields.get("domain", "plane"))
    declared = None
    if "hamiltonian" in fields:
        hpoly = to_poly(parse_expr(fields["hamiltonian"]))
        if hpoly is None:
            raise MapSpecError(f"{path.name}: declared hamiltonian is not a polynomial expression")
        declared = hpoly
    pmap = PlanarMap(
        f1=parse_expr(fields["f1"]),
        f2=parse_expr(fields["f2"]),
        domain=domain,
        declared_hamiltonian=declared,
        name=fields.get("name", path.stem),
    )
    if declared is not None:
        result = validate_hamiltonian(pmap)
        if not result.ok:
            raise MapSpecError(
                f"{path.name}: declared hamiltonian mismatch, residual "
                f"{result.worst_residual:.3g} at {result.worst_point}")
    return pmap


def eigenvalue_pair_residual(lin: Linearization) -> float:
    """How far the eigenvalues are from an exact conjugate pure-imaginary pair."""
    l1, l2 = lin.eigenvalues
    return max(abs(l1 + l2), abs(l1.real), abs(l2.real))
