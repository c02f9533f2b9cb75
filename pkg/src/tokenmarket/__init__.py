"""Equilibrium tools for a pure-exchange economy run on tokens and a purchase tax."""
from .demand import (
    Strategy,
    TradeOutcome,
    best_response,
    brute_force_best_response,
    candidate_point,
    corner_point,
)
from .edgeworth import (
    BoxPoint,
    RevisedCurve,
    contract_curve,
    corollary_check,
    lens_contains,
    revised_contract_curve,
    theorem1_solve,
)
from .equilibrium import (
    EquilibriumResult,
    ExcessDemand,
    SolverConfig,
    Status,
    contour_grid,
    excess_demand,
    price_scaling_check,
    sales_tax_equivalence_check,
    solve_equilibrium,
)
from .fiscal import GovernmentAgent, fiscal_best_response, fiscal_solve
from .model import (
    BalanceSheet,
    DomainError,
    FiscalPolicy,
    Holding,
    InfiniteGradientError,
    MonetaryPolicy,
    PricePair,
    Scenario,
    Trader,
    balance_sheet,
    budget_feasible,
    contour_gradient,
    utility,
    wealth_and_utility_report,
)
from .scenarios import bundled, load_scenario
from .settlement import Ledger, clearing_check, simulate_credit, simulate_debit

__version__ = "0.1.0"
