"""
A poll tax spent on apples
==========================

Each trader owes 12 crowns but holds only 6, so everyone must sell
something. The government spends the 36 crowns it collects on apples.
"""

from tokenmarket import bundled, fiscal_solve
from tokenmarket.equilibrium import balance_sheets

scenario = bundled("fiscal")
res = fiscal_solve(scenario)
print(res.prices)

ids = [tr.id for tr in scenario.traders] + ["G"]
for who, sheet in zip(ids, balance_sheets(scenario, res)):
    print(f"{who}: apples {sheet.goods[0]:7.2f}  pears {sheet.goods[1]:7.2f}  "
          f"poll {sheet.poll_tax:7.2f}  tax {sheet.tax:6.2f}")

for tr, out in zip(scenario.traders, res.outcomes):
    print(tr.id, out.strategy.value)
