"""Geometry of the achievable (e, t) region for the triangle model.

Only the pieces with explicit formulas are implemented: the upper boundary
e^(3/2), the line segment t = 0 for e <= 1/2, the lower envelope e(2e - 1)
with its touch points e_k = k/(k+1), and the Erdos-Renyi curve t = e^3.
The exact scalloped lower boundary between touch points has no closed form
here, so the strip between the envelope and the true boundary is treated as
feasible ("unresolved") by classify().
"""

from __future__ import annotations

import enum

from .errors import ValueOutOfRange

CURVE_TOL = 1e-12


class RegionClass(enum.Enum):
    ABOVE_ER = "Above_ER"
    ON_ER = "On_ER"
    BELOW_ER = "Below_ER"
    OUTSIDE_UPPER = "OutsideUpper"
    BELOW_ENVELOPE = "BelowEnvelope"


def _check_unit(x, name):
    if not (0.0 <= x <= 1.0):
        raise ValueOutOfRange(f"{name}={x} outside [0,1]")


def upper_boundary(e) -> float:
    _check_unit(e, "e")
    return e ** 1.5


def lower_envelope(e) -> float:
    """max(0, e(2e-1)): exact for e <= 1/2 and at touch points, else a lower bound."""
    _check_unit(e, "e")
    return max(0.0, e * (2.0 * e - 1.0))


def er_curve(e) -> float:
    _check_unit(e, "e")
    return e ** 3


def touch_point(k) -> float:
    """e_k = k/(k+1), where the scalloped boundary meets the envelope."""
    if k < 1:
        raise ValueOutOfRange("touch point index must be >= 1")
    return k / (k + 1.0)


def classify(e, t, tol=CURVE_TOL) -> RegionClass:
    _check_unit(e, "e")
    _check_unit(t, "t")
    if t > upper_boundary(e) + tol:
        return RegionClass.OUTSIDE_UPPER
    if t < lower_envelope(e) - tol:
        return RegionClass.BELOW_ENVELOPE
    cube = er_curve(e)
    if t > cube + tol:
        return RegionClass.ABOVE_ER
    if t < cube - tol:
        return RegionClass.BELOW_ER
    return RegionClass.ON_ER


def boundary_table(samples) -> list:
    """Rows (e, upper, er, envelope) at uniform e for the CLI region command."""
    if samples < 2:
        raise ValueOutOfRange("need at least 2 samples")
    rows = []
    for i in range(samples):
        e = i / (samples - 1)
        rows.append((e, upper_boundary(e), er_curve(e), lower_envelope(e)))
    return rows
