"""Embedded Dormand-Prince 5(4) step for planar autonomous systems.

Specialised to two scalar state variables (plain floats, no arrays):
orbit tracing spends nearly all its time here and tuple-of-float
arithmetic is several times faster than tiny numpy vectors.  The first
stage reuses the last stage of the previous accepted step (FSAL).
"""

from __future__ import annotations

import math
from typing import Callable

Rhs = Callable[[float, float], tuple[float, float]]

# Butcher tableau, Dormand & Prince RK5(4)7M
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth-order minus embedded fourth-order weights
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                          -17253 / 339200, 22 / 525, -1 / 40)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class RhsError(Exception):
    """Wraps evaluation failures so the driver can classify them."""

    def __init__(self, cause: BaseException):
        super().__init__(str(cause))
        self.cause = cause


def dp5_step(rhs: Rhs, x: float, y: float, f1x: float, f1y: float, h: float):
    """One trial step from (x, y) with k1 = (f1x, f1y) already evaluated.

    Returns (x5, y5, err_x, err_y, k7x, k7y): the fifth-order estimate,
    the embedded error components, and the derivative at the new point
    (valid as next step's k1 only if the step is accepted).
    """
    k2x, k2y = rhs(x + h * A21 * f1x, y + h * A21 * f1y)
    k3x, k3y = rhs(x + h * (A31 * f1x + A32 * k2x), y + h * (A31 * f1y + A32 * k2y))
    k4x, k4y = rhs(x + h * (A41 * f1x + A42 * k2x + A43 * k3x),
                   y + h * (A41 * f1y + A42 * k2y + A43 * k3y))
    k5x, k5y = rhs(x + h * (A51 * f1x + A52 * k2x + A53 * k3x + A54 * k4x),
                   y + h * (A51 * f1y + A52 * k2y + A53 * k3y + A54 * k4y))
    k6x, k6y = rhs(x + h * (A61 * f1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
                   y + h * (A61 * f1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y))
    x5 = x + h * (B1 * f1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
    y5 = y + h * (B1 * f1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
    k7x, k7y = rhs(x5, y5)
    err_x = h * (E1 * f1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
    err_y = h * (E1 * f1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
    return x5, y5, err_x, err_y, k7x, k7y


def error_norm(err_x: float, err_y: float, x0: float, y0: float,
               x1: float, y1: float, rtol: float, atol: float) -> float:
    """Scaled RMS error; a step is acceptable when this is <= 1."""
    sc_x = atol + rtol * max(abs(x0), abs(x1))
    sc_y = atol + rtol * max(abs(y0), abs(y1))
    rx = err_x / sc_x
    ry = err_y / sc_y
    return math.sqrt(0.5 * (rx * rx + ry * ry))


def step_factor(enorm: float) -> float:
    """Step-size multiplier from the scaled error (fifth-order formula)."""
    if enorm == 0.0:
        return MAX_FACTOR
    return min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * enorm ** -0.2))


def hermite(y0: float, d0: float, y1: float, d1: float, h: float, s: float) -> float:
    """Cubic Hermite value at fraction s of a step of width h."""
    s2 = s * s
    s3 = s2 * s
    return ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0
            + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1)
