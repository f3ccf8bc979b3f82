import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import quasirandom_brute
from ptlab.density import kst_defect, t_inj
from ptlab.graph_core import Four, blowup, named_graph, random_graph
from ptlab.property_pi import BUILTIN_PROPERTY, is_member
from ptlab.quasirandom import (
    CgwParams,
    audit_member,
    blowup_part_witness,
    cgw_check,
    cgw_min_gamma,
    f_shift_coefficients,
    f_window,
    is_delta_quasirandom,
    member_quasirandomness_audit,
    pair_violation,
    poly_eval,
)
from ptlab.experiments import find_member


def test_complete_graph_not_quasirandom():
    rep = is_delta_quasirandom(named_graph("Kn(10)"), 0.1)
    assert rep.quasirandom is False
    u, v = rep.witness
    assert not set(u) & set(v) and len(u) >= 1 and len(v) >= 1
    assert pair_violation(named_graph("Kn(10)"), u, v, Fraction(1, 10))


@pytest.mark.parametrize("n", [5, 6, 7])
def test_exact_mode_matches_brute_force(n):
    for seed in range(12):
        g = random_graph(n, seed)
        for delta in (Fraction(1, 5), Fraction(1, 3), Fraction(2, 5)):
            assert is_delta_quasirandom(g, delta).quasirandom == quasirandom_brute(g, delta)


def test_witness_contract():
    for seed in range(20):
        g = random_graph(10, seed)
        rep = is_delta_quasirandom(g, Fraction(1, 4))
        if rep.witness is None:
            assert rep.verdict == "quasirandom"
        else:
            u, v = rep.witness
            assert u == sorted(u) and v == sorted(v)
            assert len(u) >= 2.5 and len(v) >= 2.5
            assert pair_violation(g, u, v, Fraction(1, 4))
            assert rep.to_json()["witness"] == {"U": u, "V": v}


def test_exact_and_sampled_agree():
    """The sampler never contradicts exact mode, and finds most violations."""
    found = violated = 0
    for seed in range(50):
        g = random_graph(12, seed)
        exact = is_delta_quasirandom(g, 0.25)
        sampled = is_delta_quasirandom(g, 0.25, mode="sampled", budget=100_000, seed=seed)
        if exact.quasirandom:
            assert sampled.witness is None and sampled.verdict == "no violation found"
        else:
            violated += 1
            found += sampled.witness is not None
    assert violated == 0 or found == violated


def test_exact_mode_limit():
    with pytest.raises(ValueError):
        is_delta_quasirandom(random_graph(15, 0), 0.2)
    rep = is_delta_quasirandom(random_graph(40, 0), 0.1, mode="sampled", budget=2000)
    assert rep.verdict in ("no violation found", "not quasirandom")


def test_monotone_in_delta():
    deltas = [Fraction(1, 10), Fraction(1, 6), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)]
    for seed in range(10):
        g = random_graph(11, seed)
        verdicts = [is_delta_quasirandom(g, d).quasirandom for d in deltas]
        for a, b in zip(verdicts, verdicts[1:]):
            assert not a or b


def test_blowup_has_part_witness():
    base = find_member(BUILTIN_PROPERTY, 8, 3)[0]
    big, s = blowup(base, 4)
    witness = blowup_part_witness(big, s, Fraction(1, 8))
    assert witness is not None
    assert pair_violation(big, *witness, Fraction(1, 8))


def test_cgw_examples():
    assert not cgw_check(named_graph("Kn(10)"), 0.1)
    assert not cgw_check(named_graph("C4"), 0.1)
    assert t_inj("K2", named_graph("C4")) == Fraction(2, 3)
    passes = sum(cgw_check(random_graph(64, s), 0.1) for s in range(100))
    assert passes >= 95


def test_cgw_min_gamma_is_tight():
    for seed in range(10):
        g = random_graph(20, seed)
        gmin = cgw_min_gamma(g)
        assert cgw_check(g, gmin) if gmin > 0 else True
        if gmin > 0:
            assert not cgw_check(g, gmin * Fraction(999, 1000))


def test_cgw_params():
    p = CgwParams.from_size(32)
    assert abs(float(p.gamma) - 0.5) < 1e-12 and p.source == "derived-from-n"
    with pytest.raises(ValueError):
        CgwParams(Fraction(0))
    with pytest.raises(ValueError):
        CgwParams(Fraction(1, 2), n0=3)


def test_f_window_examples():
    assert f_window(Fraction(1, 2)) == 0
    assert f_window(0) == Fraction(3, 8)
    assert f_window(1) == Fraction(11, 8)
    plus = f_shift_coefficients(1)
    minus = f_shift_coefficients(-1)
    assert plus == [0, 0, 3, 4, 2] and minus == [0, 0, 3, -4, 2]
    for g in (Fraction(1, 10), Fraction(1, 7), Fraction(1, 3)):
        assert f_window(Fraction(1, 2) + g) - (2 * g**4 + 4 * g**3 + 3 * g**2) == 0
        assert f_window(Fraction(1, 2) - g) == 2 * g**4 - 4 * g**3 + 3 * g**2
        assert poly_eval(plus, g) == f_window(Fraction(1, 2) + g)


@settings(max_examples=50, deadline=None)
@given(st.fractions(min_value=0, max_value=1))
def test_f_window_shift_identity(x):
    g = x - Fraction(1, 2)
    assert poly_eval(f_shift_coefficients(1), g) == f_window(x)
    assert f_window(x) >= 0


def test_member_audit_n32():
    rep = member_quasirandomness_audit(BUILTIN_PROPERTY, 32, 40, seed=5)
    assert rep.found > 0 and rep.all_ok
    for r in rep.members:
        assert r.t_c4 <= r.t_k2 / 2 - Fraction(3, 16)
        assert r.f_value <= 2 * r.kst_defect
    assert rep.to_json()["members_found"] == rep.found


def test_audit_rejects_nothing_for_nonmembers_pool():
    rep = member_quasirandomness_audit(BUILTIN_PROPERTY, 16, 0)
    assert rep.found == 0 and rep.all_ok and rep.max_gamma_sqrt_n == 0.0


def test_audit_member_fields():
    g, _ = find_member(BUILTIN_PROPERTY, 20, 1)
    assert is_member(BUILTIN_PROPERTY, g)
    rec = audit_member(g, math.sqrt(8 / 20))
    assert rec.kst_defect == kst_defect(g)
    assert rec.chain_ok and rec.c4_bound_ok and rec.window_ok
    assert rec.t_c4 == t_inj(Four.C4, g)
