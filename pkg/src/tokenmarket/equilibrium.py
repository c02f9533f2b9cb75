"""Excess demand, market-clearing prices and existence classification.

Prices are found by minimising z1**2 + z2**2: a coarse scan over a price
rectangle, then Nelder-Mead in log-prices from the best few cells. Excess
demand is only piecewise smooth (traders switch strategy across price
space), so no derivatives are used. The token market is left out of the
objective because Walras' law makes it redundant; its excess is reported
as a diagnostic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .demand import TradeOutcome, best_response, demand_arrays
from .fiscal import GovernmentAgent, fiscal_best_response, fiscal_demand_arrays, government_for
from .model import BalanceSheet, DomainError, PricePair, Scenario, balance_sheet


class ConfigError(ValueError):
    pass


class EquilibriumError(RuntimeError):
    pass


class Status(str, enum.Enum):
    FOUND = "found"
    NONE_DETECTED = "none_detected"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class SolverConfig:
    p_bounds: tuple[float, float] = (0.1, 10.0)
    q_bounds: tuple[float, float] = (0.1, 10.0)
    resolution: int = 256
    tol: float = 1e-10
    divergence: tuple[float, float] = (1e-4, 1e4)
    restarts: int = 5
    max_iter: int = 4000

    def __post_init__(self):
        for lo, hi in (self.p_bounds, self.q_bounds, self.divergence):
            if not (0 < lo < hi and math.isfinite(hi)):
                raise ConfigError(f"bounds must satisfy 0 < lo < hi, got ({lo}, {hi})")
        if self.resolution < 1:
            raise ConfigError("grid resolution must be at least 1")
        if not self.tol > 0:
            raise ConfigError("tolerance must be positive")
        if self.restarts < 1:
            raise ConfigError("need at least one polish start")

    def scaled(self, factor: float) -> "SolverConfig":
        return replace(
            self,
            p_bounds=(self.p_bounds[0] * factor, self.p_bounds[1] * factor),
            q_bounds=(self.q_bounds[0] * factor, self.q_bounds[1] * factor),
            divergence=(self.divergence[0] * factor, self.divergence[1] * factor),
        )


@dataclass(frozen=True)
class ExcessDemand:
    z1: float
    z2: float
    zm: float

    @property
    def residual(self) -> float:
        return math.hypot(self.z1, self.z2)


@dataclass(frozen=True)
class EquilibriumResult:
    prices: PricePair
    outcomes: tuple[TradeOutcome, ...]
    residual: float
    status: Status
    excess: ExcessDemand
    ray: bool = False
    government: GovernmentAgent | None = None
    starts_tried: int = field(default=0, compare=False)

    @property
    def found(self) -> bool:
        return self.status is Status.FOUND


def _effective_arrays(scenario: Scenario, p, q):
    pol = scenario.policy
    if pol.mode == "purchase":
        return p, q, pol.r
    keep = 1.0 - pol.r
    return p * keep, q * keep, pol.r / keep


def excess_demand_arrays(scenario: Scenario, p, q):
    """Excess demands on arrays of prices; nan where some trader cannot pay.

    Returns ``(z1, z2, zm)`` with the shape of ``np.broadcast(p, q)``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(~(p > 0)) or np.any(~(q > 0)):
        raise DomainError("prices must be positive")
    pe, qe, re = _effective_arrays(scenario, p, q)
    pol = scenario.policy
    e = scenario.endowments
    shape = np.broadcast(p, q).shape
    s = e[:, 0].reshape((-1,) + (1,) * len(shape))
    t = e[:, 1].reshape((-1,) + (1,) * len(shape))
    gov = government_for(scenario)
    if gov is None:
        x, y, _ = demand_arrays(s, t, pe, qe, re, pol.n)
        bad = np.zeros(shape, dtype=bool)
    else:
        x, y, _, infeasible = fiscal_demand_arrays(s, t, pe, qe, re, pol.n - scenario.fiscal.poll_tax)
        bad = infeasible.any(axis=0)
    dx, dy = x - s, y - t
    z1 = dx.sum(axis=0)
    z2 = dy.sum(axis=0)
    if pol.mode == "purchase":
        taxed = np.maximum(dx, 0) * pe + np.maximum(dy, 0) * qe
    else:
        taxed = np.maximum(-dx, 0) * pe + np.maximum(-dy, 0) * qe
    tax = re * taxed.sum(axis=0)
    if gov is not None:
        price = pe if gov.spend_good == 1 else qe
        units = gov.revenue / ((1 + re) * price)
        if gov.spend_good == 1:
            z1 = z1 + units
        else:
            z2 = z2 + units
        # the buyer's tax in purchase mode, the seller's in sales mode: same amount
        tax = tax + re * units * price
    zm = tax - scenario.k * pol.n
    nan = np.where(bad, np.nan, 0.0)
    return z1 + nan, z2 + nan, zm + nan


def excess_demand(scenario: Scenario, prices: PricePair) -> ExcessDemand:
    z1, z2, zm = excess_demand_arrays(scenario, prices.p, prices.q)
    if np.isnan(z1):
        raise DomainError("a trader cannot pay the poll tax at these prices")
    return ExcessDemand(float(z1), float(z2), float(zm))


def outcomes_at(scenario: Scenario, prices: PricePair) -> tuple[TradeOutcome, ...]:
    if scenario.fiscal is None:
        return tuple(best_response(tr, prices, scenario.policy) for tr in scenario.traders)
    poll = scenario.fiscal.poll_tax
    return tuple(fiscal_best_response(tr, prices, scenario.policy, poll) for tr in scenario.traders)


def balance_sheets(scenario: Scenario, result: EquilibriumResult) -> list[BalanceSheet]:
    """Per-trader sheets, with the government's appended when present."""
    poll = scenario.fiscal.poll_tax if scenario.fiscal else 0.0
    sheets = [
        balance_sheet(tr, o.holdings, result.prices, scenario.policy, poll)
        for tr, o in zip(scenario.traders, result.outcomes)
    ]
    if result.government is not None:
        sheets.append(result.government.balance_sheet(result.prices, scenario.policy))
    return sheets


def _homogeneous(scenario: Scenario) -> bool:
    # with no tokens and no crown-denominated levy only relative prices matter
    return scenario.policy.n == 0 and (scenario.fiscal is None or scenario.fiscal.poll_tax == 0)


def _objective(scenario: Scenario):
    def f(logp: float, logq: float) -> float:
        if abs(logp) > 60 or abs(logq) > 60:
            return math.inf
        z1, z2, _ = excess_demand_arrays(scenario, math.exp(logp), math.exp(logq))
        val = float(z1 * z1 + z2 * z2)
        return math.inf if math.isnan(val) else val
    return f


def _polish(fun, x0, step, config: SolverConfig):
    """Nelder-Mead from ``x0``; returns (x, f, diverged)."""
    lo, hi = math.log(config.divergence[0]), math.log(config.divergence[1])
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    state = {"diverged": False}

    def cb(intermediate_result):
        if np.any(intermediate_result.x < lo) or np.any(intermediate_result.x > hi):
            state["diverged"] = True
            raise StopIteration

    x, fx = x0, fun(x0)
    # restarting NM from its own answer with a shrinking simplex recovers the
    # last digits that a single run loses to simplex collapse
    for _ in range(6):
        simplex = np.vstack([x] + [x + step * np.eye(dim)[i] for i in range(dim)])
        res = minimize(fun, x, method="Nelder-Mead", callback=cb,
                       options={"initial_simplex": simplex, "xatol": 1e-14, "fatol": 0.0,
                                "maxiter": config.max_iter, "maxfev": 2 * config.max_iter})
        if state["diverged"]:
            return res.x, float(res.fun), True
        improved = res.fun < fx
        if improved:
            x, fx = res.x, float(res.fun)
        if fx == 0 or not improved:
            break
        step = max(min(step, 10 * float(np.max(np.abs(res.final_simplex[0][1:] - res.final_simplex[0][0])))), 1e-12)
    return x, fx, False


def solve_equilibrium(scenario: Scenario, config: SolverConfig | None = None) -> EquilibriumResult:
    config = config or SolverConfig()
    obj = _objective(scenario)
    ray = _homogeneous(scenario)
    n_grid = config.resolution
    ps = np.linspace(*config.p_bounds, n_grid)
    if ray:
        z1, z2, _ = excess_demand_arrays(scenario, ps, 1.0)
        grid_obj = z1 ** 2 + z2 ** 2
        cells = [(math.log(ps[i]),) for i in np.argsort(np.nan_to_num(grid_obj, nan=np.inf), kind="stable")]
        fun = lambda v: obj(v[0], 0.0)  # noqa: E731
        step = math.log(config.p_bounds[1] / config.p_bounds[0]) / max(n_grid - 1, 1)
    else:
        qs = np.linspace(*config.q_bounds, n_grid)
        P, Q = np.meshgrid(ps, qs, indexing="ij")
        z1, z2, _ = excess_demand_arrays(scenario, P, Q)
        grid_obj = np.nan_to_num(z1 ** 2 + z2 ** 2, nan=np.inf).ravel()
        order = np.argsort(grid_obj, kind="stable")
        cells = [(math.log(P.flat[i]), math.log(Q.flat[i])) for i in order]
        fun = lambda v: obj(v[0], v[1])  # noqa: E731
        step = max(math.log(config.p_bounds[1] / config.p_bounds[0]),
                   math.log(config.q_bounds[1] / config.q_bounds[0])) / max(n_grid - 1, 1)
    if not cells or not np.isfinite(np.min(grid_obj)):
        raise ConfigError("no grid point gives a finite excess demand")
    step = max(step, 1e-3)

    best = None
    tried = 0
    all_diverged = True
    for cell in cells[: config.restarts]:
        tried += 1
        x, fx, diverged = _polish(fun, cell, step, config)
        all_diverged &= diverged
        if best is None or (not diverged and (best[2] or fx < best[1])):
            best = (x, fx, diverged)
        if not diverged and fx <= config.tol:
            break
    x, fx, diverged = best
    if ray:
        prices = PricePair(math.exp(x[0]), 1.0)
    else:
        prices = PricePair(*(min(max(math.exp(v), 1e-300), 1e300) for v in x))
    if not diverged and fx <= config.tol:
        status = Status.FOUND
    elif all_diverged:
        status = Status.DIVERGED
    else:
        status = Status.NONE_DETECTED
    try:
        excess = excess_demand(scenario, prices)
        outcomes = outcomes_at(scenario, prices)
    except DomainError:
        excess = ExcessDemand(math.nan, math.nan, math.nan)
        outcomes = ()
    return EquilibriumResult(
        prices=prices,
        outcomes=outcomes,
        residual=excess.residual,
        status=status,
        excess=excess,
        ray=ray,
        government=government_for(scenario),
        starts_tried=tried,
    )


@dataclass(frozen=True)
class ContourGrid:
    p: np.ndarray
    q: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    zm: np.ndarray

    def rows(self):
        for vals in zip(self.p.ravel(), self.q.ravel(), self.z1.ravel(), self.z2.ravel(), self.zm.ravel()):
            yield tuple(float(v) for v in vals)


def contour_grid(scenario: Scenario, price_rect, resolution: int) -> ContourGrid:
    """Excess demands on a ``resolution x resolution`` price grid.

    ``price_rect`` is ``(p_lo, p_hi, q_lo, q_hi)``. Arrays are indexed
    ``[i_p, i_q]``.
    """
    p_lo, p_hi, q_lo, q_hi = price_rect
    if not (p_lo > 0 and q_lo > 0 and p_hi >= p_lo and q_hi >= q_lo):
        raise DomainError("price rectangle must lie in the positive quadrant")
    P, Q = np.meshgrid(np.linspace(p_lo, p_hi, resolution), np.linspace(q_lo, q_hi, resolution), indexing="ij")
    z1, z2, zm = excess_demand_arrays(scenario, P, Q)
    return ContourGrid(P, Q, z1, z2, zm)


def _allocations(result: EquilibriumResult) -> np.ndarray:
    return np.array([[o.holdings.x, o.holdings.y] for o in result.outcomes])


def _require_found(result: EquilibriumResult):
    if not result.found:
        raise EquilibriumError(f"base scenario is unsolved (status {result.status.value})")


def price_scaling_check(scenario: Scenario, factor: float, config: SolverConfig | None = None,
                        rtol: float = 1e-6, atol: float = 1e-6) -> bool:
    """Scaling the token grant by ``factor`` scales prices and nothing else."""
    config = config or SolverConfig()
    base = solve_equilibrium(scenario, config)
    _require_found(base)
    scaled = solve_equilibrium(scenario.with_policy(n=scenario.policy.n * factor), config.scaled(factor))
    if not scaled.found:
        return False
    ok_p = math.isclose(scaled.prices.p, factor * base.prices.p, rel_tol=rtol)
    ok_q = math.isclose(scaled.prices.q, factor * base.prices.q, rel_tol=rtol)
    return ok_p and ok_q and bool(np.allclose(_allocations(scaled), _allocations(base), rtol=0, atol=atol))


def sales_tax_equivalence_check(scenario: Scenario, config: SolverConfig | None = None,
                                rtol: float = 1e-6, atol: float = 1e-6) -> bool:
    """A sales tax of r/(1+r) gives the allocations of a purchase tax of r.

    Sales-mode prices are gross of tax, so they should equal (1 + r) times
    the purchase-mode prices.
    """
    pol = scenario.policy
    if pol.mode != "purchase":
        raise DomainError("scenario must use a purchase tax")
    if pol.r == 0:
        return True
    config = config or SolverConfig()
    base = solve_equilibrium(scenario, config)
    _require_found(base)
    sales = solve_equilibrium(scenario.with_policy(r=pol.r / (1 + pol.r), mode="sales"), config)
    if not sales.found:
        return False
    gross = base.prices.scaled(1 + pol.r)
    ok_p = math.isclose(sales.prices.p, gross.p, rel_tol=rtol) and math.isclose(sales.prices.q, gross.q, rel_tol=rtol)
    return ok_p and bool(np.allclose(_allocations(sales), _allocations(base), rtol=0, atol=atol))
