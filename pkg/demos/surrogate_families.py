"""The global utility structures side by side.

Prints the five rank-based surrogate weight families for seven ranks, then
samples the continuous risk-preference densities and their Arrow-Pratt
coefficients so the risk attitudes are visible at a glance.
"""

import numpy as np

from gopa import UtilityStructure, surrogate_weights, target_density

SIZE = 7

print(f"surrogate weight vectors, {SIZE} ranks")
header = "rank  " + "".join(f"{kind:>10s}" for kind in ("rs", "ref", "rr", "sr", "roc"))
print(header)
vectors = {kind: surrogate_weights(kind, SIZE) for kind in ("rs", "ref", "rr", "sr", "roc")}
for r in range(SIZE):
    row = f"{r + 1:4d}  " + "".join(f"{vectors[k][r]:10.4f}" for k in vectors)
    print(row)

densities = {
    "neutral": UtilityStructure(kind="neutral"),
    "hara(2,1,1.5)": UtilityStructure(kind="hara", alpha=2.0, beta=1.0, gamma=1.5),
    "crra(1,0.5)": UtilityStructure(kind="crra", alpha=1.0, gamma=0.5),
    "cara(0.6)": UtilityStructure(kind="cara", a=0.6),
    "cara(-0.4)": UtilityStructure(kind="cara", a=-0.4),
    "sshape(1)": UtilityStructure(kind="sshape", steepness=1.0),
}

xs = np.linspace(0.5, SIZE - 0.5, 7)
print(f"\ndensity values v(x) on [0, {SIZE}]  (x = {np.round(xs, 2).tolist()})")
for name, st in densities.items():
    d = target_density(st, SIZE)
    print(f"{name:14s}", np.round(d.value(xs), 4))

print("\nrisk coefficient -d/dx ln v(x) at x = 2 and x = 5")
for name, st in densities.items():
    d = target_density(st, SIZE)
    print(f"{name:14s}  {d.risk_coefficient(2.0):8.4f}  {d.risk_coefficient(5.0):8.4f}")

print("\npositive coefficient = risk averse, negative = risk seeking, zero = neutral")
