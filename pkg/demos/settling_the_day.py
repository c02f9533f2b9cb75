"""
Settling the day's payments
===========================

With debit cards nobody may go overdrawn, so A and C pass crowns back and
forth in shrinking rounds. With credit, one lump payment each does the
same job at the cost of a temporary debt.
"""

from tokenmarket import bundled, clearing_check, simulate_credit, simulate_debit, solve_equilibrium

scenario = bundled("example2")
prices = solve_equilibrium(scenario).prices

debit = simulate_debit(scenario, prices)
spends = debit.round_spends()
print(f"{len(spends)} rounds; first three spend {[round(s, 3) for s in spends[:3]]}")
print("A spent", debit.totals()["A"]["goods_spent"], "=", 455 / 11)
print("bank holds", debit.balances["bank"])

credit = simulate_credit(scenario, prices)
print("A's deepest overdraft", credit.min_balance["A"])
print("both ledgers clear:", clearing_check(debit, scenario), clearing_check(credit, scenario))
