"""
Finding market-clearing prices
==============================

A coarse grid over (p, q) locates the region where both goods markets
nearly clear; Nelder-Mead in log-prices then polishes the best cells.
"""

import numpy as np

from tokenmarket import SolverConfig, bundled, contour_grid, solve_equilibrium
from tokenmarket.equilibrium import balance_sheets

scenario = bundled("example2")

# excess demand on a small grid around the answer
grid = contour_grid(scenario, (1.8, 2.4, 1.8, 2.4), 7)
print("sign of apple excess demand (rows p, columns q):")
print(np.sign(grid.z1).astype(int))

res = solve_equilibrium(scenario, SolverConfig())
print(res.status.value, res.prices, f"residual {res.residual:.1e}")
for tr, sheet in zip(scenario.traders, balance_sheets(scenario, res)):
    print(tr.id, [round(v, 2) for v in sheet.goods], round(sheet.tax, 2))

# the tax recovers exactly the crowns handed out
print("total tax", -sum(s.tax for s in balance_sheets(scenario, res)))

# doubling the grant doubles prices and changes nothing real
double = solve_equilibrium(scenario.with_policy(n=12), SolverConfig().scaled(2))
print("n = 12:", double.prices)

# equal endowments: nobody needs to trade, so nothing soaks up the tax money
print("no-eq:", solve_equilibrium(bundled("no-eq")).status.value)
