"""Day-one payment flows for an equilibrium trade plan.

Every trader starts with ``n`` crowns. Whenever a trader spends ``b``
crowns, ``b / (1 + r)`` goes to the sellers of the goods it buys and
``b r / (1 + r)`` to the bank. Who buys from whom follows the equilibrium
trade plan: a buyer's goods money is split across the goods it buys by
equilibrium value, and a good's receipts across its sellers the same way.

In debit mode no balance may go negative, so sellers take turns spending
everything they have, and the flows form a geometric series. In credit mode
each trader spends its whole day's total at once, running an overdraft
until its own sales come in.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .equilibrium import outcomes_at
from .model import ATOL, DomainError, PricePair, Scenario, balance_sheet

BANK = "bank"


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Transfer:
    round: int
    payer: str
    payee: str
    amount: float
    kind: str  # "goods" or "tax"


@dataclass(frozen=True)
class Ledger:
    initial: dict[str, float]
    history: tuple[Transfer, ...]
    prices: PricePair
    mode: str
    #: lowest and highest balance reached by each agent during the day
    min_balance: dict[str, float] = field(default_factory=dict)
    max_balance: dict[str, float] = field(default_factory=dict)

    @property
    def balances(self) -> dict[str, float]:
        bal = dict(self.initial)
        for tr in self.history:
            bal[tr.payer] -= tr.amount
            bal[tr.payee] += tr.amount
        return bal

    def totals(self) -> dict[str, dict[str, float]]:
        """Cumulative goods spend, goods receipts and tax per agent."""
        out = {a: {"goods_spent": 0.0, "goods_received": 0.0, "tax": 0.0} for a in self.initial}
        for tr in self.history:
            if tr.kind == "tax":
                out[tr.payer]["tax"] += tr.amount
            else:
                out[tr.payer]["goods_spent"] += tr.amount
                out[tr.payee]["goods_received"] += tr.amount
        return out

    def round_spends(self) -> list[float]:
        spends: dict[int, float] = {}
        for tr in self.history:
            spends[tr.round] = spends.get(tr.round, 0.0) + tr.amount
        return [spends[k] for k in sorted(spends)]

    def without(self, index: int) -> "Ledger":
        history = self.history[:index] + self.history[index + 1:]
        return Ledger(self.initial, history, self.prices, self.mode, self.min_balance, self.max_balance)


@dataclass(frozen=True)
class _Plan:
    ids: tuple[str, ...]
    routing: np.ndarray   # routing[i, j]: share of i's goods money paid to j
    sellers: tuple[int, ...]
    spenders: tuple[int, ...]  # non-sellers first, then sellers, in scenario order


def _plan(scenario: Scenario, prices: PricePair) -> _Plan:
    if scenario.policy.mode != "purchase" or scenario.fiscal is not None:
        raise DomainError("settlement is modelled for a plain purchase tax only")
    outcomes = outcomes_at(scenario, prices)
    k = scenario.k
    price = np.array([prices.p, prices.q])
    delta = np.array([[o.holdings.x - tr.s, o.holdings.y - tr.t]
                      for tr, o in zip(scenario.traders, outcomes)])
    # sub-atol trades are rounding noise from the solver
    scale = ATOL * max(1.0, float(np.abs(scenario.endowments).max()))
    delta = np.where(np.abs(delta) > scale, delta, 0.0)
    bought = np.maximum(delta, 0) * price
    sold = np.maximum(-delta, 0) * price
    routing = np.zeros((k, k))
    for i in range(k):
        if bought[i].sum() == 0:
            continue
        for good in range(2):
            if bought[i, good] == 0 or sold[:, good].sum() == 0:
                continue
            share = bought[i, good] / bought[i].sum()
            routing[i] += share * sold[:, good] / sold[:, good].sum()
    sellers = tuple(i for i in range(k) if sold[i].sum() > 0)
    buyers = [i for i in range(k) if bought[i].sum() > 0]
    spenders = tuple([i for i in buyers if i not in sellers] + [i for i in buyers if i in sellers])
    return _Plan(tuple(tr.id for tr in scenario.traders), routing, sellers, spenders)


def _pay(history, bal, rnd, plan, i, amount, r):
    goods = amount / (1 + r)
    payer = plan.ids[i]
    for j in np.flatnonzero(plan.routing[i]):
        value = float(goods * plan.routing[i, j])
        history.append(Transfer(rnd, payer, plan.ids[j], value, "goods"))
        bal[plan.ids[j]] += value
    tax = float(amount - goods)
    if tax > 0:
        history.append(Transfer(rnd, payer, BANK, tax, "tax"))
        bal[BANK] += tax
    bal[payer] -= amount


def _track(bal, low, high):
    for a, v in bal.items():
        low[a] = min(low[a], v)
        high[a] = max(high[a], v)


def _initial(scenario: Scenario) -> dict[str, float]:
    init = {tr.id: scenario.policy.n for tr in scenario.traders}
    init[BANK] = 0.0
    return init


def simulate_debit(scenario: Scenario, prices: PricePair, max_rounds: int = 10000,
                   tolerance: float = 1e-12) -> Ledger:
    """Spend-everything rounds with no overdraft.

    Round 1 lets every buyer spend in turn (pure buyers first); later rounds
    cycle through the sellers until a round moves less than ``tolerance``.
    With no tax nothing ever returns to the bank and money circulates
    forever, so a single round of spending the grant is simulated.
    """
    r = scenario.policy.r
    plan = _plan(scenario, prices)
    init = _initial(scenario)
    bal = dict(init)
    history: list[Transfer] = []
    low, high = dict(init), dict(init)
    order = plan.spenders
    rnd = 1
    while True:
        spent = 0.0
        for i in order:
            amount = bal[plan.ids[i]]
            if r == 0:
                amount = min(amount, scenario.policy.n)
            if amount <= 0:
                continue
            _pay(history, bal, rnd, plan, i, amount, r)
            spent += amount
            _track(bal, low, high)
        if r == 0 or spent < tolerance:
            break
        if rnd >= max_rounds:
            raise ConvergenceError(f"round spend still {spent:g} after {max_rounds} rounds")
        rnd += 1
        order = tuple(i for i in plan.spenders if i in plan.sellers)
    return Ledger(init, tuple(history), prices, "debit", low, high)


def _day_totals(scenario: Scenario, plan: _Plan) -> np.ndarray:
    # total gross spend G solves G_i = n + sum_j G_j routing[j, i] / (1 + r)
    # for sellers; pure buyers spend just n
    k = scenario.k
    r = scenario.policy.r
    n = scenario.policy.n
    spends = np.zeros(k, dtype=bool)
    spends[list(plan.spenders)] = True
    A = np.eye(k) - plan.routing.T / (1 + r)
    b = np.where(spends, n, 0.0)
    # non-spenders keep whatever they receive
    A[~spends] = 0.0
    A[~spends, ~spends] = 1.0
    return np.linalg.solve(A, b) * spends


def simulate_credit(scenario: Scenario, prices: PricePair) -> Ledger:
    """One lump payment per trader, overdrafts allowed."""
    r = scenario.policy.r
    if r == 0:
        raise ConvergenceError("day totals are unbounded without a tax")
    plan = _plan(scenario, prices)
    totals = _day_totals(scenario, plan)
    init = _initial(scenario)
    bal = dict(init)
    low, high = dict(init), dict(init)
    history: list[Transfer] = []
    for i in plan.spenders:
        _pay(history, bal, 1, plan, i, float(totals[i]), r)
        _track(bal, low, high)
    return Ledger(init, tuple(history), prices, "credit", low, high)


def clearing_check(ledger: Ledger, scenario: Scenario, atol: float = 1e-6) -> bool:
    """All traders end at zero, the bank holds k n, and flows match equilibrium."""
    bal = ledger.balances
    k, n = scenario.k, scenario.policy.n
    if any(abs(bal[tr.id]) > atol for tr in scenario.traders):
        return False
    if abs(bal[BANK] - k * n) > atol:
        return False
    tot = ledger.totals()
    for tr, o in zip(scenario.traders, outcomes_at(scenario, ledger.prices)):
        eq = balance_sheet(tr, o.holdings, ledger.prices, scenario.policy)
        got = tot[tr.id]
        if (abs(got["goods_received"] - eq.sales) > atol
                or abs(got["goods_spent"] + eq.purchases) > atol
                or abs(got["tax"] + eq.tax) > atol):
            return False
    return True
