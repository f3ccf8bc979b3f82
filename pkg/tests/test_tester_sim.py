import math
from fractions import Fraction

import numpy as np
import pytest

from ptlab.density import ClassFamily, four_profile
from ptlab.experiments import find_member
from ptlab.graph_core import Four, graph_classes, named_graph, random_graph
from ptlab.property_pi import BUILTIN_PROPERTY, PotSpec, pot_from_property, z_value
from ptlab.seeding import rng_for
from ptlab.tester_sim import (
    SequenceVerdict,
    TesterSpec as Spec,
    amplify,
    blowup_farness_inequality,
    canonical_acceptance_estimate,
    direct_sequence,
    double_sampling,
    double_sampling_marginal_test,
    good_rate,
    indistinguishability_experiment,
    pot_acceptances,
    pot_rejection_estimate,
    run_canonical,
    run_pot,
    subsample_membership,
)

POT = pot_from_property(BUILTIN_PROPERTY)


def test_run_pot_k4_always_rejects():
    assert not any(run_pot(POT, named_graph("K4"), s).accepted for s in range(50))
    with pytest.raises(ValueError):
        run_pot(POT, named_graph("Kn(3)"), 0)


def test_run_pot_replayable():
    g = random_graph(20, 1)
    assert run_pot(POT, g, 77) == run_pot(POT, g, 77)
    assert len(set(run_pot(POT, g, 77).sampled_vertices)) == 4


def test_pot_empty_graph_rejects_half():
    g = named_graph("En(60)")
    est = pot_rejection_estimate(POT, g, 40000, 3)
    assert abs(est.value - 0.5) <= 4 * est.stderr


def test_pot_calibration_n30():
    for i in range(3):
        g = random_graph(30, 100 + i)
        z = float(z_value(BUILTIN_PROPERTY, g))
        est = pot_rejection_estimate(POT, g, 100_000, i)
        assert abs(est.value - z) <= 4 * math.sqrt(z * (1 - z) / 100_000)


def test_pot_relabeling_invariance():
    g = random_graph(15, 2)
    perm = list(rng_for(1).permutation(15))
    assert POT.acceptance_probability(g.relabel(perm)) == POT.acceptance_probability(g)


def test_pot_thread_independent(monkeypatch):
    g = random_graph(25, 4)
    monkeypatch.setenv("PTLAB_THREADS", "1")
    a = pot_acceptances(POT, g, 20000, 9)
    monkeypatch.setenv("PTLAB_THREADS", "3")
    assert pot_acceptances(POT, g, 20000, 9) == a


# amplification -------------------------------------------------------------


def synthetic_pot(accept):
    """A POT rejecting every sample with probability 1 - accept."""
    codes = {c: 1 - Fraction(accept) for c in graph_classes(4)}
    return PotSpec(4, codes, Fraction(3, 4), f=lambda eps: Fraction(1, 5))


def test_amplify_thresholds():
    good = amplify(synthetic_pot(Fraction(3, 4)), 0.1, kappa=8)
    assert good.repetitions == 200
    assert good.acceptance_probability(Fraction(3, 4)) >= 2 / 3
    assert good.acceptance_probability(Fraction(3, 4) - Fraction(1, 5)) <= 1 / 3
    g = random_graph(10, 0)
    est = good.acceptance_frequency(g, 3000, 1)
    assert est.value >= 2 / 3
    bad = amplify(synthetic_pot(Fraction(11, 20)), 0.1, kappa=8)
    est = bad.acceptance_frequency(g, 3000, 2)
    assert est.value <= 1 / 3
    assert abs(est.value - bad.acceptance_probability(Fraction(11, 20))) <= 4 * est.stderr + 1e-9


def test_amplify_t_is_one_for_small_kappa():
    amp = amplify(synthetic_pot(Fraction(3, 4)), 0.1, kappa=Fraction(1, 25))
    assert amp.repetitions == 1
    assert isinstance(amp.run(random_graph(8, 0), 0).accepted, bool)


def test_amplify_errors():
    with pytest.raises(ValueError):
        amplify(POT, 0.1)
    zero = PotSpec(4, {}, Fraction(1), f=lambda eps: 0)
    with pytest.raises(ValueError):
        amplify(zero, 0.1)


# canonical testers -----------------------------------------------------------


def test_canonical_trivial_families():
    g = random_graph(12, 0)
    assert all(run_canonical(Spec.from_classes(4, []), g, s).accepted for s in range(30))
    everything = Spec.from_classes(4, list(Four))
    assert not any(run_canonical(everything, g, s).accepted for s in range(30))
    with pytest.raises(ValueError):
        run_canonical(everything, named_graph("Kn(3)"), 0)


def test_canonical_calibration_s4_n20():
    rng = rng_for(11)
    g = random_graph(20, 5)
    prof = four_profile(g)
    for _ in range(5):
        fam = [c for c in Four if rng.random() < 0.5]
        t = Spec.from_classes(4, fam)
        exact = 1 - sum((prof.density(c) for c in fam), Fraction(0))
        assert t.acceptance_probability(g) == exact
        est = canonical_acceptance_estimate(t, g, 50000, int(rng.integers(1 << 30)))
        assert abs(est.value - float(exact)) <= 4 * max(est.stderr, 1e-12)


def test_canonical_isomorphism_invariance():
    g = random_graph(14, 3)
    perm = list(rng_for(2).permutation(14))
    t = Spec.from_classes(5, [c for i, c in enumerate(graph_classes(5)) if i % 3 == 0])
    assert t.acceptance_probability(g) == t.acceptance_probability(g.relabel(perm))
    h = random_graph(5, 9)
    assert t.accepts(h) == t.accepts(h.relabel([4, 2, 0, 1, 3]))


def test_predicate_tester():
    t = Spec.from_predicate(9, lambda h: h.m > 18)
    g = random_graph(11, 0)
    est = canonical_acceptance_estimate(t, g, 20000, 0)
    assert abs(est.value - float(t.acceptance_probability(g))) <= 4 * est.stderr + 1e-12


# double sampling -------------------------------------------------------------


def test_sequence_verdict():
    assert SequenceVerdict.from_blocks([True, False, True]).good
    assert not SequenceVerdict.from_blocks([True, False, False]).good
    assert SequenceVerdict.from_blocks([True, False]).good


def test_double_sampling_trivial():
    g = random_graph(20, 1)
    yes = Spec.from_classes(2, [])
    no = Spec.from_classes(2, graph_classes(2))
    for seed in range(20):
        v, u = double_sampling(yes, g, seed)
        assert v.good and len(u) == 16 and len(set(u)) == 16
        assert not double_sampling(no, g, seed)[0].good
        assert direct_sequence(yes, g, seed).good
    with pytest.raises(ValueError):
        double_sampling(yes, random_graph(15, 0), 0)


def test_good_rate_views_agree():
    g = random_graph(40, 6)
    t = Spec.from_classes(2, [named_graph("Kn(2)")])
    a = good_rate(t, g, 40000, 1, via_u=True)
    b = good_rate(t, g, 40000, 2, via_u=False)
    assert abs(a.value - b.value) <= 4 * math.hypot(a.stderr, b.stderr)


def test_marginal_chi_squared():
    res = double_sampling_marginal_test(16, 2, 60000, 3)
    assert res["cells"] == math.comb(16, 4)
    assert res["gof_pvalue"] > 0.001 and res["two_sample_pvalue"] > 0.001 and res["vertex_pvalue"] > 0.001


def test_subsample_membership_of_member_pool():
    g = random_graph(40, 0)
    est = subsample_membership(BUILTIN_PROPERTY, g, 40, 3, 0)
    assert est.point in (0, 1)


# indistinguishability ---------------------------------------------------------


def test_blowup_farness_inequality():
    assert all(blowup_farness_inequality(m, k) for m in range(10, 70) for k in (1, 4, 8, 16))
    assert not blowup_farness_inequality(1, 4)


def test_indistinguishability_k1_equal():
    g, _ = find_member(BUILTIN_PROPERTY, 20, 0)
    rep = indistinguishability_experiment(g, 1, [Four.P4, Four.C4], 4, 20000, 5)
    assert rep["empirical"]["multi_hit_frequency"] == 0
    assert rep["empirical"]["p_F_blowup"] == rep["empirical"]["p_F_base"] or rep["passed"]
    assert rep["blowup"]["is_member"] is True


def test_indistinguishability_conditional_law():
    g, _ = find_member(BUILTIN_PROPERTY, 20, 2)
    fam = ClassFamily(4, [Four.P4, Four.K13, Four.D4c])
    rep = indistinguishability_experiment(g, 10, fam, 4, 100_000, 8)
    assert rep["checks"]["conditional_law"] and rep["checks"]["collision_bound"]
    assert rep["passed"]
    assert rep["blowup"]["n"] == 200


def test_indistinguishability_preconditions():
    g = random_graph(6, 0)
    with pytest.raises(ValueError):
        indistinguishability_experiment(g, 1, [], 4, 10, 0)
