"""Simulated testers: the weight-rejecting POT and a canonical tester.

Run: python3 demos/testers_demo.py
"""
from ptlab import BUILTIN_PROPERTY as P
from ptlab import Four, TesterSpec, pot_from_property, random_graph, z_value
from ptlab.tester_sim import canonical_acceptance_estimate, pot_rejection_estimate

pot = pot_from_property(P)
print("acceptance constant c =", pot.c)
g = random_graph(30, 11)
est = pot_rejection_estimate(pot, g, 100_000, seed=5)
print(f"exact rejection z = {float(z_value(P, g)):.4f}, simulated {est.value:.4f} +- {est.stderr:.4f}")

t = TesterSpec.from_classes(4, [Four.C4, Four.K4], "reject C4 or K4")
est = canonical_acceptance_estimate(t, g, 100_000, seed=6)
print(f"canonical tester: exact {float(t.acceptance_probability(g)):.4f}, simulated {est.value:.4f}")
