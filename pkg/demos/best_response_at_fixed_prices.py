"""
Best responses at fixed prices
==============================

Three traders hold apples and pears and are each given 6 crowns. Every
purchase carries a 20% tax payable in crowns. At prices p = q = 2 each
trader picks the best point of a kinked budget set.
"""

from tokenmarket import MonetaryPolicy, PricePair, Trader, balance_sheet, best_response

traders = [Trader("A", 90, 30), Trader("B", 50, 50), Trader("C", 10, 70)]
policy = MonetaryPolicy(n=6, r=0.2)
prices = PricePair(2, 2)

for tr in traders:
    out = best_response(tr, prices, policy)
    sheet = balance_sheet(tr, out.holdings, prices, policy)
    print(f"{tr.id}: face {out.strategy.value:<2}  apples {out.holdings.x - tr.s:+7.2f}  "
          f"pears {out.holdings.y - tr.t:+7.2f}  tax {sheet.tax:6.2f}")

# apples are over-demanded and pears over-supplied, so these prices are not
# an equilibrium
