"""
Two traders in a box
====================

With two traders the equilibrium can be found geometrically: it lies on a
revised contract curve where the two contour gradients differ by the
square of (1 + r). Starts close to the ordinary contract curve fall in a
lens where no equilibrium exists.
"""

import numpy as np

from tokenmarket import BoxPoint, corollary_check, lens_contains, revised_contract_curve, theorem1_solve

S = BoxPoint(90, 30, 100, 100)
F, prices = theorem1_solve(S, r=0.2, n=6)
print(f"F = ({F.x:.2f}, {F.y:.2f}), gradients {F.g:.3f} and {F.h:.3f}")
print(prices, corollary_check(F, S, prices, 0.2, 6))

curve = revised_contract_curve((100, 100), 0.2, "below_diagonal", samples=5)
for x, y, g, h in curve.rows():
    print(f"  x={x:5.1f}  y={y:6.2f}  h/g={h / g:.3f}")

# share of a coarse grid of starts that sits inside the lens
xs = np.linspace(5, 95, 19)
for r in (0.05, 0.1, 0.2):
    inside = np.mean([lens_contains(BoxPoint(x, y, 100, 100), r) for x in xs for y in xs])
    print(f"r = {r}: {inside:.1%} of starts have no equilibrium")
