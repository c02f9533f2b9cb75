"""A single trader's optimal trade at given prices.

With square-root utility the contour through (x, y) has slope -sqrt(y/x),
so the tangency point on any budget line of slope -g lies on the ray
y = g**2 x. Each of the three budget faces gives one such candidate; two
corners complete the list, and a fixed sequence of comparisons with the
endowment picks the winner.

:func:`best_response` is the scalar path (pure ``math``, a few microseconds
per call). :func:`demand_arrays` evaluates the same rule over numpy arrays
and is what the equilibrium grid scans use. :func:`brute_force_best_response`
is an independent grid oracle that only looks at the subset constraints.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import (
    DomainError,
    Holding,
    MonetaryPolicy,
    PricePair,
    Trader,
    subset_constraint_values,
    utility,
)


class Strategy(str, enum.Enum):
    D = "D"      # sell good 1, buy good 2
    E = "E"      # buy both goods out of the token grant
    F = "F"      # sell good 2, buy good 1
    DE = "DE"    # buy only good 2, sell nothing
    EF = "EF"    # buy only good 1, sell nothing
    NONE = "NONE"


# integer codes used by the vectorized path
STRATEGY_CODES = (Strategy.D, Strategy.F, Strategy.DE, Strategy.EF, Strategy.E, Strategy.NONE)


@dataclass(frozen=True)
class TradeOutcome:
    holdings: Holding
    strategy: Strategy


def _effective(prices: PricePair, policy: MonetaryPolicy) -> tuple[float, float, float]:
    """Seller-side prices and buyer markup equivalent to ``policy``.

    A sales tax at rate sigma on gross price P leaves the seller (1 - sigma) P
    while the buyer pays P, which is a purchase tax of sigma / (1 - sigma)
    on the seller's price.
    """
    if not (prices.p > 0 and prices.q > 0):
        raise DomainError("prices must be positive")
    if policy.mode == "purchase":
        return prices.p, prices.q, policy.r
    keep = 1.0 - policy.r
    return prices.p * keep, prices.q * keep, policy.r / keep


def _face(s, t, p, q, r, n, which):
    if which == "E":
        g = p / q
        w = ((1 + r) * (p * s + q * t) + n) / ((1 + r) * (p + q))
    elif which == "D":
        g = p / ((1 + r) * q)
        w = (p * s + (1 + r) * q * t + n) / (p + (1 + r) * q)
    elif which == "F":
        g = (1 + r) * p / q
        w = ((1 + r) * p * s + q * t + n) / ((1 + r) * p + q)
    else:
        raise ValueError(f"unknown face {which!r}")
    return w / g, g * w


def candidate_point(trader: Trader, prices: PricePair, policy: MonetaryPolicy, which: str) -> Holding:
    """Tangency of the utility contour with budget face D, E or F alone."""
    p, q, r = _effective(prices, policy)
    u, v = _face(trader.s, trader.t, p, q, r, policy.n, str(getattr(which, "value", which)))
    return Holding(u, v)


def corner_point(trader: Trader, prices: PricePair, policy: MonetaryPolicy, which: str) -> Holding:
    """Vertex where the token grant is spent on one good with nothing sold."""
    p, q, r = _effective(prices, policy)
    which = str(getattr(which, "value", which))
    if which == "DE":
        return Holding(trader.s, trader.t + policy.n / ((1 + r) * q))
    if which == "EF":
        return Holding(trader.s + policy.n / ((1 + r) * p), trader.t)
    raise ValueError(f"unknown corner {which!r}")


def best_response(trader: Trader, prices: PricePair, policy: MonetaryPolicy) -> TradeOutcome:
    p, q, r = _effective(prices, policy)
    s, t, n = trader.s, trader.t, policy.n
    u_d, v_d = _face(s, t, p, q, r, n, "D")
    if u_d < s:
        return TradeOutcome(Holding(u_d, v_d), Strategy.D)
    u_f, v_f = _face(s, t, p, q, r, n, "F")
    if v_f < t:
        return TradeOutcome(Holding(u_f, v_f), Strategy.F)
    u_e, v_e = _face(s, t, p, q, r, n, "E")
    if u_e < s:
        h, label = Holding(s, t + n / ((1 + r) * q)), Strategy.DE
    elif v_e < t:
        h, label = Holding(s + n / ((1 + r) * p), t), Strategy.EF
    else:
        h, label = Holding(u_e, v_e), Strategy.E
    if n == 0 and h.x == s and h.y == t:
        label = Strategy.NONE
    return TradeOutcome(h, label)


def demand_arrays(s, t, p, q, r, n):
    """Vectorized best response: returns final holdings and strategy codes.

    All arguments broadcast. ``r`` is the purchase-equivalent markup and
    ``p``, ``q`` seller-side prices (see :func:`_effective`). Codes index
    :data:`STRATEGY_CODES`.
    """
    s, t, p, q, r, n = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s, t, p, q, r, n)))
    u_d, v_d = _face(s, t, p, q, r, n, "D")
    u_f, v_f = _face(s, t, p, q, r, n, "F")
    u_e, v_e = _face(s, t, p, q, r, n, "E")
    conds = [u_d < s, v_f < t, u_e < s, v_e < t]
    x = np.select(conds, [u_d, u_f, s, s + n / ((1 + r) * p)], u_e)
    y = np.select(conds, [v_d, v_f, t + n / ((1 + r) * q), t], v_e)
    code = np.select(conds, [0, 1, 2, 3], 4)
    code = np.where((n == 0) & (x == s) & (y == t), 5, code)
    return x, y, code


def holding_bounds(trader: Trader, prices: PricePair, policy: MonetaryPolicy,
                   money: float | None = None) -> tuple[float, float]:
    """Largest reachable amount of each good, selling all of the other."""
    p, q, r = _effective(prices, policy)
    m = policy.n if money is None else money
    x_hi = trader.s + (m + q * trader.t) / ((1 + r) * p)
    y_hi = trader.t + (m + p * trader.s) / ((1 + r) * q)
    return x_hi, y_hi


def subset_slack(trader: Trader, prices: PricePair, policy: MonetaryPolicy):
    """Feasibility slack built only from the subset constraints."""
    price = (prices.p, prices.q)

    def slack(x, y):
        deltas = np.stack([x - trader.s, y - trader.t], axis=-1)
        return policy.n - subset_constraint_values(deltas, price, policy).max(axis=0)

    return slack


def _frontier(slack, fixed, axis, hi, iters=80):
    # largest free coordinate keeping slack >= 0, by bisection; nan if none
    lo_v = np.zeros_like(fixed)
    hi_v = np.full_like(fixed, hi)

    def ok(other):
        return slack(fixed, other) >= 0 if axis == 0 else slack(other, fixed) >= 0

    base_ok = ok(lo_v)
    for _ in range(iters):
        mid = 0.5 * (lo_v + hi_v)
        good = ok(mid)
        lo_v = np.where(good, mid, lo_v)
        hi_v = np.where(good, hi_v, mid)
    return np.where(base_ok, lo_v, np.nan)


def _grid_argmax(slack, hi_fixed, hi_free, axis, n_grid):
    fixed = np.linspace(0.0, hi_fixed, n_grid)
    free = _frontier(slack, fixed, axis, hi_free)
    with np.errstate(invalid="ignore"):
        util = np.where(np.isnan(free), -np.inf, np.sqrt(fixed) + np.sqrt(np.nan_to_num(free)))
    i = int(np.argmax(util))
    if not np.isfinite(util[i]):
        raise DomainError("budget set is empty")
    pt = (fixed[i], free[i]) if axis == 0 else (free[i], fixed[i])
    return Holding(*pt)


def brute_force_best_response(trader: Trader, prices: PricePair, policy: MonetaryPolicy,
                              grid_resolution: int = 2000,
                              slack: Callable | None = None, money: float | None = None) -> Holding:
    """Grid oracle for :func:`best_response`.

    For every grid value of one good the largest feasible amount of the
    other is found by bisection on the feasibility test, and utility is
    maximised over the grid. Doing this once along each axis pins both
    coordinates to within one grid step of the optimum (utility along the
    budget frontier is concave in either coordinate). The returned point
    takes x from the x-axis pass and y from the y-axis pass.
    """
    if grid_resolution < 100:
        raise ValueError("grid_resolution must be at least 100")
    if slack is None:
        slack = subset_slack(trader, prices, policy)
    x_hi, y_hi = holding_bounds(trader, prices, policy, money)
    x_hi, y_hi = x_hi * (1 + 1e-12), y_hi * (1 + 1e-12)
    by_x = _grid_argmax(slack, x_hi, y_hi, 0, grid_resolution)
    by_y = _grid_argmax(slack, y_hi, x_hi, 1, grid_resolution)
    return Holding(by_x.x, by_y.y)


def oracle_grid_steps(trader: Trader, prices: PricePair, policy: MonetaryPolicy,
                      grid_resolution: int, money: float | None = None) -> tuple[float, float]:
    x_hi, y_hi = holding_bounds(trader, prices, policy, money)
    return x_hi / (grid_resolution - 1), y_hi / (grid_resolution - 1)

