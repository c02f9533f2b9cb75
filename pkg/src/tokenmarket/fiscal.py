"""Poll tax and a government that spends the proceeds on one good.

Each trader starts the day with ``n - poll_tax`` crowns. When that is
negative buying both goods is impossible, and the "buy both" face of the
budget set is replaced by a "sell both" face, p dx + q dy = n - poll_tax,
whose ends are the two sell-only-one-good corners. The government is a
price taker that spends its whole revenue, tax included, on its good.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .demand import Strategy, TradeOutcome, _effective, _face, best_response, demand_arrays
from .model import BalanceSheet, DomainError, Holding, MonetaryPolicy, PricePair, Scenario, Trader


@dataclass(frozen=True)
class GovernmentAgent:
    revenue: float
    spend_good: int = 1

    def demand(self, prices: PricePair, policy: MonetaryPolicy) -> Holding:
        """Units bought; the government holds nothing to start with."""
        p, q, r = _effective(prices, policy)
        price = p if self.spend_good == 1 else q
        units = self.revenue / ((1 + r) * price)
        return Holding(units, 0.0) if self.spend_good == 1 else Holding(0.0, units)

    def balance_sheet(self, prices: PricePair, policy: MonetaryPolicy) -> BalanceSheet:
        h = self.demand(prices, policy)
        goods = (-prices.p * h.x, -prices.q * h.y)
        tax = -policy.r * -sum(goods) if policy.mode == "purchase" else 0.0
        return BalanceSheet(initial=0.0, goods=goods, tax=tax, poll_tax=self.revenue)


def government_for(scenario: Scenario) -> GovernmentAgent | None:
    if scenario.fiscal is None:
        return None
    return GovernmentAgent(scenario.fiscal.poll_tax * scenario.k, scenario.fiscal.spend_good)


def _money_policy(policy: MonetaryPolicy, money: float) -> MonetaryPolicy:
    return MonetaryPolicy(money, policy.r, policy.mode)


def fiscal_best_response(trader: Trader, prices: PricePair, policy: MonetaryPolicy,
                         poll_tax: float) -> TradeOutcome:
    m = policy.n - poll_tax
    if m >= 0:
        return best_response(trader, prices, _money_policy(policy, m))
    p, q, r = _effective(prices, policy)
    s, t = trader.s, trader.t
    if p * s + q * t + m < 0:
        raise DomainError(f"trader {trader.id} cannot pay the poll tax at these prices")
    u_d, v_d = _face(s, t, p, q, r, m, "D")
    if v_d >= t:
        return TradeOutcome(Holding(u_d, v_d), Strategy.D)
    u_f, v_f = _face(s, t, p, q, r, m, "F")
    if u_f >= s:
        return TradeOutcome(Holding(u_f, v_f), Strategy.F)
    u_e, v_e = _sell_both(s, t, p, q, m)
    if v_e > t:
        return TradeOutcome(Holding(s + m / p, t), Strategy.DE)
    if u_e > s:
        return TradeOutcome(Holding(s, t + m / q), Strategy.EF)
    return TradeOutcome(Holding(u_e, v_e), Strategy.E)


def _sell_both(s, t, p, q, m):
    g = p / q
    w = (p * s + q * t + m) / (p + q)
    return w / g, g * w


def fiscal_demand_arrays(s, t, p, q, r, m):
    """Vectorized :func:`fiscal_best_response` on effective prices.

    Returns ``(x, y, code, infeasible)``; rows with ``m >= 0`` fall back to
    the ordinary algorithm with token grant ``m``.
    """
    s, t, p, q, r, m = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s, t, p, q, r, m)))
    x0, y0, code0 = demand_arrays(s, t, p, q, r, np.maximum(m, 0.0))
    u_d, v_d = _face(s, t, p, q, r, m, "D")
    u_f, v_f = _face(s, t, p, q, r, m, "F")
    u_e, v_e = _sell_both(s, t, p, q, m)
    conds = [v_d >= t, u_f >= s, v_e > t, u_e > s]
    x1 = np.select(conds, [u_d, u_f, s + m / p, s], u_e)
    y1 = np.select(conds, [v_d, v_f, t, t + m / q], v_e)
    code1 = np.select(conds, [0, 1, 2, 3], 4)
    neg = m < 0
    infeasible = neg & (p * s + q * t + m < 0)
    return np.where(neg, x1, x0), np.where(neg, y1, y0), np.where(neg, code1, code0), infeasible


def money_slack(trader: Trader, prices: PricePair, policy: MonetaryPolicy, poll_tax: float):
    """End-of-day crowns left after the poll tax, for the grid oracle."""
    p, q, r = _effective(prices, policy)
    m = policy.n - poll_tax

    def slack(x, y):
        dx, dy = x - trader.s, y - trader.t
        cost = p * dx * np.where(dx > 0, 1 + r, 1.0) + q * dy * np.where(dy > 0, 1 + r, 1.0)
        return m - cost

    return slack


def fiscal_solve(scenario: Scenario, config=None):
    """Market-clearing prices with the government as an extra buyer."""
    from .equilibrium import SolverConfig, solve_equilibrium

    if scenario.fiscal is None:
        raise DomainError("scenario has no fiscal policy")
    return solve_equilibrium(scenario, config or SolverConfig())
