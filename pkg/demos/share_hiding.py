"""Show, by exact counting, that two shares of a masked secret reveal nothing.

Over F_5 with two noise coefficients, every secret value induces the exact
same joint distribution on any two shares: 25 noise assignments, each share
pair appearing once.  One extra share (three points for degree two) breaks
the spell, which is exactly why recovery needs t+1 uploads.
"""

from collections import Counter
from itertools import product

from swiftagg import FieldSpec, build_polynomial, share_for

field = FieldSpec(5)
points = (1, 2)

print("joint distribution of shares at points (1, 2), degree-2 masking, p=5")
for secret in range(5):
    counts = Counter()
    for z1, z2 in product(range(5), repeat=2):
        poly = build_polynomial(
            field.vector([secret]), [field.vector([z1]), field.vector([z2])], 2
        )
        counts[tuple(share_for(poly, a).values[0] for a in points)] += 1
    uniform = all(c == 1 for c in counts.values()) and len(counts) == 25
    print(f"  secret={secret}: {len(counts)} share pairs, all equally likely: {uniform}")

print()
print("with three points the distributions differ across secrets:")
distros = []
for secret in (0, 1):
    counts = Counter()
    for z1, z2 in product(range(5), repeat=2):
        poly = build_polynomial(
            field.vector([secret]), [field.vector([z1]), field.vector([z2])], 2
        )
        counts[tuple(share_for(poly, a).values[0] for a in (1, 2, 3))] += 1
    distros.append(counts)
print("  secret 0 vs secret 1 identical:", distros[0] == distros[1])
