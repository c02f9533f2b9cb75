"""Two-trader Edgeworth box with a purchase tax.

Trader A is measured from the bottom-left origin, trader C from the
top-right, so a box point (x, y) gives A the holding (x, y) and C the
holding (X - x, Y - y). With a purchase tax at rate r a taxed trade can
only end where C's contour gradient h and A's gradient g satisfy
h / g = (1 + r)**2 (A sells good 1) or g / h = (1 + r)**2 (A sells good 2).
These two revised contract curves bound a lens around the ordinary
contract curve from which no positive-price equilibrium exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import DomainError, Holding, MonetaryPolicy, PricePair, Scenario, Trader, contour_gradient

SIDES = ("below_diagonal", "above_diagonal")
BISECT_TOL = 1e-10


@dataclass(frozen=True)
class BoxPoint:
    x: float
    y: float
    X: float
    Y: float

    def __post_init__(self):
        if not (0 <= self.x <= self.X and 0 <= self.y <= self.Y):
            raise DomainError(f"({self.x}, {self.y}) lies outside the {self.X} x {self.Y} box")

    @property
    def interior(self) -> bool:
        return 0 < self.x < self.X and 0 < self.y < self.Y

    @property
    def g(self) -> float:
        return contour_gradient(Holding(self.x, self.y))

    @property
    def h(self) -> float:
        return contour_gradient(Holding(self.X - self.x, self.Y - self.y))


@dataclass(frozen=True)
class RevisedCurve:
    side: str
    r: float
    points: tuple[BoxPoint, ...]

    def rows(self):
        for pt in self.points:
            yield pt.x, pt.y, pt.g, pt.h


def _ratio(side: str, r: float) -> float:
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    wedge = (1 + r) ** 2
    return wedge if side == "below_diagonal" else 1 / wedge


def _log_gap(x, y, X, Y, ratio):
    # log(h/g) - log(ratio); strictly decreasing in y on (0, Y)
    return 0.5 * (np.log(Y - y) - np.log(X - x) - np.log(y) + np.log(x)) - math.log(ratio)


def _trace_columns(xs: np.ndarray, X: float, Y: float, ratio: float) -> np.ndarray:
    lo = np.zeros_like(xs)
    hi = np.full_like(xs, Y)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        with np.errstate(divide="ignore"):
            pos = _log_gap(xs, mid, X, Y, ratio) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.max(hi - lo) < BISECT_TOL:
            break
    return 0.5 * (lo + hi)


def curve_y(x: float, X: float, Y: float, ratio: float) -> float:
    """Box height at column ``x`` where h/g equals ``ratio``."""
    if not 0 < x < X:
        raise DomainError("column must lie strictly inside the box")
    return float(_trace_columns(np.array([float(x)]), X, Y, ratio)[0])


def _columns(X: float, samples: int) -> np.ndarray:
    return X * (np.arange(samples) + 0.5) / samples


def contract_curve(totals: tuple[float, float], samples: int = 500) -> list[BoxPoint]:
    """Pareto-efficient points, where both contours share a tangent."""
    X, Y = totals
    xs = _columns(X, samples)
    ys = _trace_columns(xs, X, Y, 1.0)
    return [BoxPoint(float(a), float(b), X, Y) for a, b in zip(xs, ys)]


def revised_contract_curve(totals: tuple[float, float], r: float, side: str,
                           samples: int = 500) -> RevisedCurve:
    if r <= 0:
        raise DomainError("a revised curve needs r > 0")
    X, Y = totals
    xs = _columns(X, samples)
    ys = _trace_columns(xs, X, Y, _ratio(side, r))
    return RevisedCurve(side, r, tuple(BoxPoint(float(a), float(b), X, Y) for a, b in zip(xs, ys)))


def _side_of(start: BoxPoint) -> str | None:
    diag = start.Y * start.x / start.X
    if start.y < diag:
        return "below_diagonal"
    if start.y > diag:
        return "above_diagonal"
    return None


def theorem1_solve(start: BoxPoint, r: float, n: float, side: str | None = None):
    """Equilibrium point F and token prices for a two-trader start ``S``.

    ``F`` lies on the revised curve for ``side`` (by default the side of
    the contract curve that ``S`` is on) and on the line through ``S`` whose
    slope is minus the geometric mean of the two contour gradients at F.
    Returns ``(F, prices)`` or None when no such point exists.
    """
    if r <= 0 or n <= 0:
        raise DomainError("need r > 0 and n > 0")
    if not start.interior:
        raise DomainError("start must lie strictly inside the box")
    side = side or _side_of(start)
    if side is None:
        return None
    X, Y = start.X, start.Y
    ratio = _ratio(side, r)
    s1, s2 = start.x, start.y

    def gap(x: float) -> float:
        y = curve_y(x, X, Y, ratio)
        pt = BoxPoint(x, y, X, Y)
        return (y - s2) + math.sqrt(pt.g * pt.h) * (x - s1)

    at_start = curve_y(s1, X, Y, ratio) - s2
    if side == "below_diagonal":
        if not at_start > 0:
            return None
        lo, hi = X * 1e-12, s1
    else:
        if not at_start < 0:
            return None
        lo, hi = s1, X * (1 - 1e-12)
    f1 = brentq(gap, lo, hi, xtol=BISECT_TOL, rtol=4 * np.finfo(float).eps)
    F = BoxPoint(f1, curve_y(f1, X, Y, ratio), X, Y)
    prices = PricePair(n / (r * abs(s1 - F.x)), n / (r * abs(F.y - s2)))
    return F, prices


def corollary_check(F: BoxPoint, S: BoxPoint, prices: PricePair, r: float, n: float,
                    atol: float = 1e-9) -> bool:
    """Each trader's receipts equal its outlay and its tax bill equals n."""
    received = prices.p * abs(S.x - F.x)
    paid = prices.q * abs(F.y - S.y)
    scale = max(1.0, received)
    return abs(received - paid) <= atol * scale and abs(r * received - n) <= atol * max(1.0, n)


def lens_contains(start: BoxPoint, r: float) -> bool:
    """True when neither revised curve offers an equilibrium from ``start``."""
    # the lens does not depend on the token grant; any n > 0 will do
    return all(theorem1_solve(start, r, 1.0, side) is None for side in SIDES)


def two_trader_scenario(start: BoxPoint, r: float, n: float) -> Scenario:
    traders = (Trader("A", start.x, start.y), Trader("C", start.X - start.x, start.Y - start.y))
    return Scenario(traders, MonetaryPolicy(n, r))


def lens_grid(totals: tuple[float, float], r: float, resolution: int = 50):
    """Rows ``(x, y, in_lens)`` over interior start points."""
    X, Y = totals
    xs = _columns(X, resolution)
    ys = _columns(Y, resolution)
    for x in xs:
        for y in ys:
            yield float(x), float(y), lens_contains(BoxPoint(float(x), float(y), X, Y), r)
