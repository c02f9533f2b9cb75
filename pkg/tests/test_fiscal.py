import numpy as np
import pytest

from tokenmarket import (
    DomainError,
    FiscalPolicy,
    GovernmentAgent,
    MonetaryPolicy,
    PricePair,
    Scenario,
    Strategy,
    Trader,
    best_response,
    brute_force_best_response,
    fiscal_best_response,
    fiscal_solve,
    solve_equilibrium,
    utility,
)
from tokenmarket.demand import oracle_grid_steps
from tokenmarket.equilibrium import balance_sheets
from tokenmarket.fiscal import money_slack

from .conftest import A, B, C

POLICY = MonetaryPolicy(6, 0.2)


@pytest.fixture(scope="module")
def fiscal_scenario():
    return Scenario((A, B, C), POLICY, FiscalPolicy(12, 1))


@pytest.fixture(scope="module")
def solved(fiscal_scenario):
    return fiscal_solve(fiscal_scenario)


def test_fiscal_prices(solved):
    assert solved.found
    assert solved.prices.p == pytest.approx(1.661, abs=0.005)
    assert solved.prices.q == pytest.approx(1.466, abs=0.005)


def test_fiscal_balance_sheets(fiscal_scenario, solved):
    sheets = balance_sheets(fiscal_scenario, solved)
    expected = {
        "initial": [6, 6, 6, 0],
        "apples": [48.55, 6.00, -24.55, -30.00],
        "pears": [-35.45, 0, 35.45, 0],
        "poll": [-12, -12, -12, 36],
        "tax": [-7.09, 0, -4.91, -6.00],
    }
    got = {
        "initial": [s.initial for s in sheets],
        "apples": [s.goods[0] for s in sheets],
        "pears": [s.goods[1] for s in sheets],
        "poll": [s.poll_tax for s in sheets],
        "tax": [s.tax for s in sheets],
    }
    for row, vals in expected.items():
        assert got[row] == pytest.approx(vals, abs=0.01), row
    assert [s.final for s in sheets] == pytest.approx([0, 0, 0, 0], abs=1e-6)


def test_b_sells_only_apples(solved):
    out = solved.outcomes[1]
    assert out.strategy is Strategy.DE
    assert out.holdings.y == 50 and out.holdings.x < 50
    assert solved.prices.p * (50 - out.holdings.x) == pytest.approx(6, abs=1e-6)


def test_goods_and_tokens_conserved(fiscal_scenario, solved):
    gov = solved.government.demand(solved.prices, POLICY)
    held = np.array([[o.holdings.x, o.holdings.y] for o in solved.outcomes]).sum(axis=0)
    assert held + [gov.x, gov.y] == pytest.approx(fiscal_scenario.endowments.sum(axis=0), abs=1e-6)
    sheets = balance_sheets(fiscal_scenario, solved)
    assert -sum(s.tax for s in sheets) == pytest.approx(18, abs=1e-6)
    assert sum(s.poll_tax for s in sheets) == pytest.approx(0, abs=1e-12)


def test_zero_poll_tax_reduces_to_plain_model():
    plain = Scenario((A, B, C), POLICY)
    levied = Scenario((A, B, C), POLICY, FiscalPolicy(0, 1))
    a, b = solve_equilibrium(plain), solve_equilibrium(levied)
    assert (b.prices.p, b.prices.q) == pytest.approx((a.prices.p, a.prices.q), rel=1e-9)
    for tr in (A, B, C):
        x = fiscal_best_response(tr, PricePair(1.7, 2.3), POLICY, 0).holdings
        y = best_response(tr, PricePair(1.7, 2.3), POLICY).holdings
        assert x == y


def test_small_poll_tax_keeps_buy_both_face():
    out = fiscal_best_response(B, PricePair(2, 2), POLICY, 3)
    ref = best_response(B, PricePair(2, 2), MonetaryPolicy(3, 0.2)).holdings
    assert out.holdings == ref


def test_poll_tax_beyond_means_is_rejected():
    with pytest.raises(DomainError):
        fiscal_best_response(Trader("P", 1, 1), PricePair(1, 1), POLICY, 20)


def test_government_agent():
    gov = GovernmentAgent(36, 1)
    h = gov.demand(PricePair(1.5, 2), POLICY)
    assert h.x * 1.5 * 1.2 == pytest.approx(36) and h.y == 0
    sheet = gov.balance_sheet(PricePair(1.5, 2), POLICY)
    assert sheet.final == pytest.approx(0)
    pears = GovernmentAgent(36, 2).demand(PricePair(1.5, 2), POLICY)
    assert pears.x == 0 and pears.y * 2 * 1.2 == pytest.approx(36)


def test_pear_spending_government_clears():
    sc = Scenario((A, B, C), POLICY, FiscalPolicy(12, 2))
    res = fiscal_solve(sc)
    assert res.found
    assert all(s.final == pytest.approx(0, abs=1e-6) for s in balance_sheets(sc, res))


def test_fiscal_solve_needs_fiscal_block():
    with pytest.raises(DomainError):
        fiscal_solve(Scenario((A, B, C), POLICY))


def test_oracle_agreement_with_poll_tax():
    rng = np.random.default_rng(21)
    checked = 0
    while checked < 300:
        s, t = rng.uniform(1, 100, 2)
        tr = Trader("R", float(s), float(t))
        prices = PricePair(*rng.uniform(0.5, 4, 2))
        pol = MonetaryPolicy(float(rng.uniform(0, 10)), float(rng.uniform(0, 0.5)))
        poll = float(rng.uniform(pol.n, pol.n + 40))
        m = pol.n - poll
        if prices.p * s + prices.q * t + m <= 1:
            continue
        out = fiscal_best_response(tr, prices, pol, poll).holdings
        slack = money_slack(tr, prices, pol, poll)
        bf = brute_force_best_response(tr, prices, pol, 400, slack=slack, money=m)
        hx, hy = oracle_grid_steps(tr, prices, pol, 400, money=m)
        assert abs(out.x - bf.x) <= hx * (1 + 1e-9)
        assert abs(out.y - bf.y) <= hy * (1 + 1e-9)
        assert slack(out.x, out.y) == pytest.approx(0, abs=1e-9 * max(1, abs(m) + prices.p * s + prices.q * t))
        checked += 1


def test_sell_both_face_used_when_balanced():
    # equal endowments at unit prices: paying the levy by selling some of each
    out = fiscal_best_response(Trader("E", 50, 50), PricePair(1, 1), MonetaryPolicy(0, 0.2), 10)
    assert out.strategy is Strategy.E
    assert (out.holdings.x, out.holdings.y) == pytest.approx((45, 45))
    assert utility(out.holdings) == pytest.approx(2 * 45 ** 0.5)
