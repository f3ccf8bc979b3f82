"""Members are forced to look random; blowups of members are not.

Run: python3 demos/quasirandom_demo.py
"""
from fractions import Fraction

from ptlab import BUILTIN_PROPERTY as P
from ptlab import blowup, is_delta_quasirandom, is_member, member_quasirandomness_audit, phi_value
from ptlab.experiments import find_member
from ptlab.quasirandom import blowup_part_witness

audit = member_quasirandomness_audit(P, 32, samples=40, seed=1)
print(f"{audit.found} members among 40 samples of G(32, 1/2); all checks hold: {audit.all_ok}")
print(f"largest min-gamma * sqrt(n): {audit.max_gamma_sqrt_n:.3f}")

base, _ = find_member(P, 16, seed=0)
big, parts = blowup(base, 16)
print(f"blowup: {big.n} vertices, member: {is_member(P, big)}, phi = {float(phi_value(big)):.4f}")
u, v = blowup_part_witness(big, parts, Fraction(1, 16))
print(f"two parts of size {len(u)} span {int(big.matrix[u][:, v].sum())} of {len(u) * len(v)} pairs")

# at 12 vertices delta-quasirandomness is a strong demand; expect a witness here
small = find_member(P, 12, seed=4)[0]
print("exact check on a 12-vertex member at delta = 1/3:", is_delta_quasirandom(small, Fraction(1, 3)).verdict)
