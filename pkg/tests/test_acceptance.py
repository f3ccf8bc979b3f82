"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py``; a summary section lists one
PASS/FAIL line per criterion.
"""

import math
import time
from fractions import Fraction

import pytest

from conftest import class_representatives, random_corpus
from ptlab.density import (
    ClassFamily,
    falling,
    four_profile,
    hom_density_c4,
    hom_density_k2,
    kst_defect,
)
from ptlab.experiments import config_from_json, run_experiment
from ptlab.graph_core import CLASS4_TABLE, Four, Graph, blowup, graph_classes, named_graph, random_graph
from ptlab.property_pi import (
    BUILTIN_PROPERTY,
    labeled_members,
    nonmember_gap,
    phi_value,
    z_average_check,
    z_value,
)
from ptlab.seeding import derive_seed, rng_for
from ptlab.tester_sim import TesterSpec as Spec, canonical_acceptance_estimate

P = BUILTIN_PROPERTY
B = Fraction(5, 16)


@pytest.fixture(scope="module")
def corpus_values():
    rows = []
    for g in class_representatives() + random_corpus():
        prof = four_profile(g)
        rows.append((g, z_value(P, g, prof), phi_value(g, prof), prof))
    return rows


def failures(items):
    return f"{len(items)} failures" if items else ""


def test_01_phi_z_identity(corpus_values, verdict):
    bad = [g for g, z, phi, _ in corpus_values if phi != 2 * z - Fraction(5, 8)]
    verdict(1, f"phi = 2z - 5/8 exactly on {len(corpus_values)} graphs", not bad, failures(bad))


def test_02_membership_characterization(corpus_values, verdict):
    bad = [g for g, z, phi, _ in corpus_values if (z <= B) != (phi <= 0)]
    members = sum(z <= B for _, z, _, _ in corpus_values)
    verdict(2, f"z <= 5/16 iff phi <= 0 ({members} members)", not bad, failures(bad))


def _oracle_members_n4():
    """Count members among the 64 labeled graphs by class lookup and the weight table."""
    weights = P.four_weights()
    return sum(weights[int(CLASS4_TABLE[mask])] <= B for mask in range(64))


def test_03_membership_probability(verdict):
    t0 = time.perf_counter()
    ok, parts = True, []
    for n in (4, 5, 6):
        members = labeled_members(P, n)
        frac = Fraction(int(members.sum()), members.size)
        ok &= frac >= Fraction(1, 2 * n**4)
        parts.append(f"n={n}: {frac}")
    oracle = _oracle_members_n4()
    ok &= oracle == int(labeled_members(P, 4).sum())
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    verdict(3, "labeled member fraction >= 1/(2n^4), n = 4, 5, 6", ok, "; ".join(parts) + f"; oracle {oracle}/64; {elapsed:.1f}s")


def test_04_integrality(corpus_values, verdict):
    bad = []
    for g, z, phi, _ in corpus_values:
        if (phi * falling(g.n, 4)).denominator != 1:
            bad.append(g)
        elif z > B and phi < Fraction(1, g.n**4):
            bad.append(g)
    verdict(4, "phi * n(n-1)(n-2)(n-3) integral; non-members have phi >= 1/n^4", not bad, failures(bad))


def test_05_nonmember_gap(verdict):
    bad, checked = [], 0
    for n in range(4, 8):
        bound = Fraction(1, 48 * math.comb(n, 4))
        for code in graph_classes(n):
            g = Graph.from_mask(code, n)
            if z_value(P, g) > B:
                checked += 1
                if nonmember_gap(P, g) < bound:
                    bad.append(g)
    verdict(5, f"z - 5/16 >= 1/(48 binom(n,4)) on every non-member class, n <= 7 ({checked} classes)", not bad, failures(bad))


def test_06_z_averaging(verdict):
    rng = rng_for(606)
    bad, pairs = [], 0
    for i in range(20):
        n = int(rng.integers(4, 13))
        g = random_graph(n, derive_seed(606, i))
        for u in range(4, n + 1):
            pairs += 1
            z, mean = z_average_check(P, g, u)
            if z != mean:
                bad.append((n, u))
    verdict(6, f"z(G) equals the mean of z(G[U]) exactly ({pairs} graph/size pairs)", not bad, failures(bad))


def test_07_pot_calibration(verdict):
    t0 = time.perf_counter()
    rep = run_experiment(config_from_json("pot-calibration", {"graphs": 20, "n": 30, "trials": 100_000, "sigmas": 4.0}, seed=7))
    elapsed = time.perf_counter() - t0
    ok = rep["verdict"] == "pass" and elapsed < 60
    worst = rep["empirical"]["max_deviation_sigmas"]
    verdict(7, "POT rejection frequency within 4 sigma of z(G), 20 graphs n = 30, 1e5 runs", ok, f"max {worst:.2f} sigma; {elapsed:.1f}s")


def test_08_canonical_calibration(verdict):
    rng = rng_for(808)
    g = random_graph(20, 808)
    prof = four_profile(g)
    worst, ok = 0.0, True
    for i in range(10):
        fam = [c for c in Four if rng.random() < 0.5]
        t = Spec.from_classes(4, fam)
        exact = 1 - sum((prof.density(c) for c in fam), Fraction(0))
        ok &= t.acceptance_probability(g) == exact
        est = canonical_acceptance_estimate(t, g, 100_000, derive_seed(808, i))
        sigma = math.sqrt(float(exact) * (1 - float(exact)) / est.trials)
        dev = abs(est.value - float(exact))
        ok &= dev <= 4 * sigma if sigma else dev == 0
        worst = max(worst, dev / sigma if sigma else 0.0)
    verdict(8, "canonical tester acceptance within 4 sigma of 1 - p(F,G), s = 4, 10 families", ok, f"max {worst:.2f} sigma")


@pytest.mark.parametrize("n", [16, 32])
def test_09_member_quasirandomness(n, verdict):
    rep = run_experiment(config_from_json("member-quasirandom", {"n": n, "samples": 120, "min_members": 30, "max_gamma_sqrt_n": 10.0}, seed=9))
    emp = rep["empirical"]
    detail = f"{emp['members_found']} members, {emp['cgw_pass']} pass at sqrt(8/n), max min-gamma*sqrt(n) {emp['max_min_gamma_sqrt_n']:.3f}"
    verdict(9, f"member density chain and C4 bound exact, CGW window, n = {n}", rep["verdict"] == "pass", detail)


def test_10_kst_sanity(corpus_values, verdict):
    extra = [random_graph(n, derive_seed(1010, n)) for n in (60, 100, 150, 200)]
    extra += [named_graph(x) for x in ("K4", "K4c", "D4", "D4c", "P3", "P3c", "C4", "C4c", "K13", "K13c", "P4", "Kn(12)", "En(12)", "Cn(12)")]
    extra += [blowup(random_graph(m, m), k)[0] for m, k in ((8, 4), (16, 8), (12, 10))]
    graphs = [(g, prof) for g, _, _, prof in corpus_values] + [(g, four_profile(g)) for g in extra]
    bad, worst = [], Fraction(0)
    for g, prof in graphs:
        if hom_density_c4(g) < hom_density_k2(g) ** 4:
            bad.append(g)
        nd = g.n * kst_defect(g, prof)
        worst = max(worst, nd)
        if nd > 10:
            bad.append(g)
    verdict(10, f"t(C4) >= t(K2)^4 and n*defect <= 10 on {len(graphs)} graphs", not bad, f"max n*defect {float(worst):.3f}")


def test_11_blowup_farness(verdict):
    rep = run_experiment(config_from_json("blowup-farness", {"m": 16, "k": 16, "delta": "1/16"}, seed=11))
    ok = rep["verdict"] == "pass" and rep["analytic"]["n"] == 256
    verdict(11, "blowup x16 of a 16-vertex member: non-member, phi > 0, part witness at 1/16, integer bound", ok,
            f"phi {rep['empirical']['blowup_phi']}")


def test_12_indistinguishability(verdict):
    rep = run_experiment(config_from_json("indistinguishability", {"m": 64, "k": 8, "s": 4, "trials": 100_000}, seed=12))
    checks = rep["checks"]
    ok = checks["blowup_bound"] and checks["collision_bound"]
    emp = rep["empirical"]
    verdict(12, "p(F, blowup) <= p(F, G) + 6/64 + 5 se; multi-hit <= 6/64 + 4 sigma", ok,
            f"{emp['p_F_blowup']:.4f} vs {emp['p_F_base']:.4f}; multi-hit {emp['multi_hit_frequency']:.4f}")


def test_13_rho_concentration(verdict):
    rep = run_experiment(config_from_json("rho-concentration", {"n": 100, "graphs": 100, "tolerance": 0.1, "min_within": 99}, seed=13))
    emp = rep["empirical"]
    verdict(13, "|p(F,G) - rho| <= 0.1 for >= 99 of 100 samples, n = 100", rep["verdict"] == "pass",
            f"{emp['within_tolerance']}/100 within; rho {rep['analytic']['rho']}")


def test_14_fast_census(verdict):
    t0 = time.perf_counter()
    graphs = [random_graph(n, derive_seed(1414 + n, i)) for n in (10, 20, 40, 60) for i in range(100)]
    named = [named_graph(x) for x in ("K4", "K4c", "D4", "D4c", "P3", "P3c", "C4", "C4c", "K13", "K13c", "P4")]
    graphs += named + [blowup(h, k)[0] for h in named for k in (2, 3, 5)]
    bad = [g for g in graphs if four_profile(g, "fast") != four_profile(g, "reference")]
    elapsed = time.perf_counter() - t0
    verdict(14, f"fast census equals reference on {len(graphs)} graphs", not bad and elapsed < 120, f"{elapsed:.1f}s")


def test_15_double_sampling(verdict):
    rep = run_experiment(config_from_json("double-sampling", {"s": 3, "m": 16, "k": 16, "subsamples": 1000, "alpha": 0.001}, seed=11))
    checks = rep["checks"]
    ok = checks["member_fraction_small"] and checks["marginal_gof"] and checks["marginal_two_sample"]
    emp = rep["empirical"]
    verdict(15, "member fraction of 81-vertex subsamples <= 0.1; marginal chi-squared at 0.001", ok,
            f"fraction {emp['member_subsample_fraction']:.3f}; gof p {emp['marginal']['gof_pvalue']:.3f}; two-sample p {emp['marginal']['two_sample_pvalue']:.3f}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
