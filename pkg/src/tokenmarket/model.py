"""Problem data, utility, budget feasibility and balance-sheet reporting.

All types are frozen dataclasses; every function here is pure.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ATOL = 1e-9
TAX_MODES = ("purchase", "sales")


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class InfiniteGradientError(DomainError):
    """The contour through a point with x = 0 is vertical."""


@dataclass(frozen=True)
class Trader:
    id: str
    s: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.s) and math.isfinite(self.t)):
            raise DomainError(f"trader {self.id}: endowment must be finite")
        if self.s < 0 or self.t < 0:
            raise DomainError(f"trader {self.id}: endowment must be non-negative")
        if self.s == 0 and self.t == 0:
            raise DomainError(f"trader {self.id}: empty endowment")


@dataclass(frozen=True)
class MonetaryPolicy:
    n: float = 0.0
    r: float = 0.0
    mode: str = "purchase"

    def __post_init__(self):
        if not (self.n >= 0 and math.isfinite(self.n)):
            raise DomainError("token grant n must be finite and >= 0")
        if not (self.r >= 0 and math.isfinite(self.r)):
            raise DomainError("tax rate r must be finite and >= 0")
        if self.mode not in TAX_MODES:
            raise DomainError(f"tax mode must be one of {TAX_MODES}")
        if self.mode == "sales" and self.r >= 1:
            raise DomainError("a sales tax rate must be below 1")

    def buyer_factor(self) -> float:
        """Ratio of what a buyer pays to what a seller keeps."""
        if self.mode == "purchase":
            return 1.0 + self.r
        return 1.0 / (1.0 - self.r)


@dataclass(frozen=True)
class FiscalPolicy:
    poll_tax: float
    spend_good: int = 1

    def __post_init__(self):
        if not (self.poll_tax >= 0 and math.isfinite(self.poll_tax)):
            raise DomainError("poll tax must be finite and >= 0")
        if self.spend_good not in (1, 2):
            raise DomainError("spend_good must be 1 or 2")


@dataclass(frozen=True)
class Scenario:
    traders: tuple[Trader, ...]
    policy: MonetaryPolicy = field(default_factory=MonetaryPolicy)
    fiscal: FiscalPolicy | None = None

    def __post_init__(self):
        object.__setattr__(self, "traders", tuple(self.traders))
        if len(self.traders) < 2:
            raise DomainError("a scenario needs at least 2 traders")
        ids = [tr.id for tr in self.traders]
        if len(set(ids)) != len(ids):
            raise DomainError("trader ids must be unique")

    @property
    def k(self) -> int:
        return len(self.traders)

    @property
    def endowments(self) -> np.ndarray:
        return np.array([[tr.s, tr.t] for tr in self.traders], dtype=float)

    def with_policy(self, **changes) -> "Scenario":
        old = self.policy
        policy = MonetaryPolicy(
            n=changes.get("n", old.n), r=changes.get("r", old.r), mode=changes.get("mode", old.mode)
        )
        return Scenario(self.traders, policy, self.fiscal)


@dataclass(frozen=True)
class PricePair:
    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0 and math.isfinite(self.p) and math.isfinite(self.q)):
            raise DomainError(f"prices must be positive and finite, got ({self.p}, {self.q})")

    def scaled(self, factor: float) -> "PricePair":
        return PricePair(self.p * factor, self.q * factor)


@dataclass(frozen=True)
class Holding:
    x: float
    y: float


@dataclass(frozen=True)
class BalanceSheet:
    """Crown flows of one agent over a trading day.

    ``goods`` holds the signed crown flow for each good (positive when the
    agent sells it). Taxes are negative, as in a printed balance sheet; a
    government's poll-tax receipts are positive.
    """

    initial: float
    goods: tuple[float, float]
    tax: float
    poll_tax: float = 0.0

    @property
    def sales(self) -> float:
        return sum(v for v in self.goods if v > 0)

    @property
    def purchases(self) -> float:
        return sum(v for v in self.goods if v < 0)

    @property
    def final(self) -> float:
        return self.initial + self.sales + self.purchases + self.poll_tax + self.tax


def utility(h: Holding) -> float:
    if h.x < 0 or h.y < 0:
        raise DomainError(f"utility undefined for negative holding {h}")
    return math.sqrt(h.x) + math.sqrt(h.y)


def contour_gradient(h: Holding) -> float:
    """Magnitude g of the contour slope through ``h`` (so y = g**2 * x)."""
    if h.x < 0 or h.y < 0:
        raise DomainError(f"gradient undefined for negative holding {h}")
    if h.x == 0:
        raise InfiniteGradientError("contour is vertical at x = 0")
    return math.sqrt(h.y / h.x)


def _check_prices(prices: Sequence[float]) -> np.ndarray:
    prices = np.asarray(prices, dtype=float)
    if np.any(~(prices > 0)):
        raise DomainError("prices must be positive")
    return prices


def subset_constraint_values(deltas, prices, policy: MonetaryPolicy) -> np.ndarray:
    """Left-hand sides of the 2**k - 1 subset constraints.

    ``deltas`` may carry leading batch axes; the last axis indexes goods.
    Row ``j`` of the result corresponds to the j-th non-empty subset S of
    goods treated as bought: goods in S pay the purchase tax, the rest trade
    at the bare price. In sales mode the roles swap: goods outside S are
    sold and the seller keeps only the net-of-tax share.
    """
    prices = _check_prices(prices)
    deltas = np.asarray(deltas, dtype=float)
    k = prices.shape[0]
    if deltas.shape[-1] != k:
        raise DomainError("deltas and prices must have the same length")
    value = deltas * prices
    rows = []
    for size in range(1, k + 1):
        for subset in itertools.combinations(range(k), size):
            phi = np.zeros(k)
            phi[list(subset)] = 1.0
            if policy.mode == "purchase":
                weights = 1.0 + phi * policy.r
            else:
                weights = 1.0 - (1.0 - phi) * policy.r
            rows.append((value * weights).sum(axis=-1))
    return np.stack(rows)


def budget_feasible(deltas: Sequence[float], prices: Sequence[float], policy: MonetaryPolicy,
                    atol: float = ATOL) -> bool:
    """True iff a trade plan satisfies every subset constraint ``<= n``.

    Works for any number of goods. ``atol`` is scaled by the size of the
    trade so that points computed on a constraint line count as feasible.
    """
    deltas = np.asarray(deltas, dtype=float)
    if not np.all(np.isfinite(deltas)):
        raise DomainError("deltas must be finite")
    lhs = subset_constraint_values(deltas, prices, policy)
    scale = max(1.0, policy.n, float(np.abs(deltas * np.asarray(prices)).sum()))
    return bool(np.all(lhs <= policy.n + atol * scale))


def balance_sheet(trader: Trader, holding: Holding, prices: PricePair, policy: MonetaryPolicy,
                  poll_tax: float = 0.0) -> BalanceSheet:
    """Crown flows that take ``trader`` from its endowment to ``holding``."""
    price = (prices.p, prices.q)
    delta = (holding.x - trader.s, holding.y - trader.t)
    goods = tuple(-pr * d for pr, d in zip(price, delta))
    bought = -sum(v for v in goods if v < 0)
    sold = sum(v for v in goods if v > 0)
    if policy.mode == "purchase":
        tax = -policy.r * bought
    else:
        tax = -policy.r * sold
    return BalanceSheet(initial=policy.n, goods=goods, tax=tax, poll_tax=-poll_tax)


@dataclass(frozen=True)
class ReportRow:
    id: str
    wealth_start: float
    wealth_end: float
    utility_start: float
    utility_end: float


def wealth_and_utility_report(scenario: Scenario, holdings: Sequence[Holding]) -> list[ReportRow]:
    """Total units held and utility for each trader before and after trade."""
    rows = []
    for tr, h in zip(scenario.traders, holdings, strict=True):
        start = Holding(tr.s, tr.t)
        rows.append(ReportRow(tr.id, tr.s + tr.t, h.x + h.y, utility(start), utility(h)))
    return rows
