"""Membership in the weighted 4-vertex density property.

A graph is a member when z(G) = sum_H w_H p(H, G) is at most 5/16.  The same
test can be phrased through edge and 4-cycle densities as phi(G) <= 0.

Run: python3 demos/membership_demo.py
"""
from fractions import Fraction

from ptlab import BUILTIN_PROPERTY as P
from ptlab import is_member, named_graph, nonmember_gap, phi_value, random_graph, z_value
from ptlab.property_pi import integerize, labeled_members

for name in ("P4", "C4", "K4", "K13c"):
    g = named_graph(name)
    z = z_value(P, g)
    print(f"{name:5s} z = {str(z):6s} phi = {str(phi_value(g)):6s} member = {is_member(P, g)}")

print("gap of C4 above the threshold:", nonmember_gap(P, named_graph("C4")))
ip = integerize(P)
print(f"integer form: scale {ip.scale}, threshold {ip.b_int}")

for n in (4, 5, 6):
    m = labeled_members(P, n)
    print(f"n = {n}: {int(m.sum())} of {m.size} labeled graphs are members")

g = random_graph(30, 3)
z, phi = z_value(P, g), phi_value(g)
print("random 30-vertex graph: phi == 2z - 5/8 ->", phi == 2 * z - Fraction(5, 8))
