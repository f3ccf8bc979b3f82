"""Named, seeded experiments with JSON reports.

Every experiment takes a flat parameter dict (unknown keys are rejected,
missing keys take defaults) and a 64-bit seed, and returns a report with the
fields ``experiment, seed, params, analytic, empirical, stderr, checks,
failed_assertions, verdict``.  The only non-reproducible field is
``meta.created``.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .density import ClassFamily, four_profile, frac_str, rho_expected
from .graph_core import Four, Graph, blowup, graph_classes, random_graph
from .property_pi import (
    BUILTIN_PROPERTY,
    WeightedDensityProperty,
    is_member,
    labeled_members,
    load_property,
    phi_value,
    pot_from_property,
    z_value,
)
from .quasirandom import (
    as_fraction,
    blowup_part_witness,
    member_quasirandomness_audit,
)
from .seeding import MASK64, derive_seed, rng_for
from .tester_sim import (
    TesterSpec,
    blowup_farness_inequality,
    double_sampling_marginal_test,
    good_rate,
    indistinguishability_experiment,
    pot_rejection_estimate,
    subsample_membership,
)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    output: str | None = None

    def resolved(self) -> dict[str, Any]:
        if self.experiment not in REGISTRY:
            raise ConfigError(f"unknown experiment {self.experiment!r}; known: {sorted(REGISTRY)}")
        defaults = REGISTRY[self.experiment].defaults
        unknown = set(self.params) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown parameters for {self.experiment}: {sorted(unknown)}")
        return {**defaults, **self.params}


def config_from_json(experiment: str, data: dict | None, seed: int | None = None,
                     output: str | None = None) -> ExperimentConfig:
    """Accepts ``{"params": {...}, "seed": s, "output": path}`` or a flat params dict."""
    data = dict(data or {})
    if "params" in data or "seed" in data or "output" in data or "experiment" in data:
        extra = set(data) - {"params", "seed", "output", "experiment"}
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        if data.get("experiment", experiment) != experiment:
            raise ConfigError("config names a different experiment")
        params = dict(data.get("params", {}))
        cfg_seed = data.get("seed", 0)
        cfg_out = data.get("output")
    else:
        params, cfg_seed, cfg_out = data, 0, None
    return ExperimentConfig(
        experiment,
        params,
        int(seed if seed is not None else cfg_seed) & MASK64,
        output if output is not None else cfg_out,
    )


@dataclass
class Outcome:
    analytic: dict = field(default_factory=dict)
    empirical: dict = field(default_factory=dict)
    stderr: dict = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)


@dataclass(frozen=True)
class Experiment:
    name: str
    defaults: dict[str, Any]
    run: Callable[[dict, int], Outcome]
    claim: str


REGISTRY: dict[str, Experiment] = {}


def experiment(name: str, claim: str, **defaults):
    def wrap(fn):
        REGISTRY[name] = Experiment(name, defaults, fn, claim)
        return fn

    return wrap


def run_experiment(cfg: ExperimentConfig) -> dict:
    params = cfg.resolved()
    exp = REGISTRY[cfg.experiment]
    out = exp.run(params, cfg.seed)
    failed = sorted(k for k, ok in out.checks.items() if not ok)
    return {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "params": params,
        "claim": exp.claim,
        "analytic": out.analytic,
        "empirical": out.empirical,
        "stderr": out.stderr,
        "checks": {k: bool(v) for k, v in out.checks.items()},
        "failed_assertions": failed,
        "verdict": "pass" if not failed else "fail",
        "meta": {"created": _dt.datetime.now(_dt.timezone.utc).isoformat()},
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, Fraction):
        return frac_str(x)
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"not JSON serialisable: {type(x)!r}")


# ---------------------------------------------------------------------------
# helpers shared with the tests


def find_member(prop: WeightedDensityProperty, n: int, seed: int, max_tries: int = 100_000) -> tuple[Graph, int]:
    """First member among G(n, 1/2) draws with seeds derive_seed(seed, i)."""
    for i in range(max_tries):
        s = derive_seed(seed, i)
        g = random_graph(n, s)
        if is_member(prop, g):
            return g, s
    raise RuntimeError(f"no member on {n} vertices within {max_tries} draws")


def random_four_family(rng: np.random.Generator, nonempty: bool = True) -> list[Four]:
    """Uniformly random subset of the eleven 4-vertex classes."""
    while True:
        picks = [c for c in Four if rng.random() < 0.5]
        if picks or not nonempty:
            return picks


def _family_param(value, rng) -> list[Four]:
    if value is None:
        return random_four_family(rng)
    return [Four[v] if isinstance(v, str) else Four(v) for v in value]


# ---------------------------------------------------------------------------
# experiments


@experiment("membership-prob", "a G(n,1/2) sample is a member with probability >= 1/(2n^4)",
            n=6, mode="exhaustive", samples=20000, property="thm1.4")
def _membership_prob(p: dict, seed: int) -> Outcome:
    prop = load_property(p["property"])
    n = int(p["n"])
    if n < 4:
        raise ConfigError("membership-prob needs n >= 4")
    bound = Fraction(1, 2 * n**4)
    out = Outcome(analytic={"lower_bound": frac_str(bound)})
    if p["mode"] == "exhaustive":
        if n > 7:
            raise ConfigError("exhaustive mode supports n <= 7")
        members = labeled_members(prop, n)
        frac = Fraction(int(members.sum()), members.size)
        out.empirical = {"labeled_graphs": int(members.size), "members": int(members.sum()),
                         "fraction": frac_str(frac), "fraction_float": float(frac)}
        out.checks["fraction_at_least_bound"] = frac >= bound
        if n == 4:
            oracle = sum(
                is_member(prop, Graph.from_mask(mask, 4), four_profile(Graph.from_mask(mask, 4), "reference"))
                for mask in range(64)
            )
            out.empirical["oracle_members"] = oracle
            out.checks["matches_64_graph_oracle"] = oracle == int(members.sum())
    elif p["mode"] == "sampled":
        trials = int(p["samples"])
        hits = sum(is_member(prop, random_graph(n, derive_seed(seed, i))) for i in range(trials))
        est = hits / trials
        se = math.sqrt(est * (1 - est) / trials)
        out.empirical = {"samples": trials, "members": hits, "fraction": est}
        out.stderr = {"fraction": se}
        out.checks["fraction_at_least_bound"] = est + 4 * se >= float(bound)
    else:
        raise ConfigError("mode must be 'exhaustive' or 'sampled'")
    return out


@experiment("member-quasirandom", "members of the property are quasirandom",
            n=16, samples=100, gamma=None, min_members=30, max_gamma_sqrt_n=10.0)
def _member_quasirandom(p: dict, seed: int) -> Outcome:
    n = int(p["n"])
    gamma = None if p["gamma"] is None else as_fraction(p["gamma"])
    audit = member_quasirandomness_audit(BUILTIN_PROPERTY, n, int(p["samples"]), gamma, seed)
    passing = sum(r.cgw_pass for r in audit.members)
    out = Outcome(
        analytic={"gamma": audit.gamma, "gamma_rule": "sqrt(8/n)" if gamma is None else "configured"},
        empirical={
            "members_found": audit.found,
            "cgw_pass": passing,
            "max_min_gamma_sqrt_n": audit.max_gamma_sqrt_n,
            "max_kst_defect_times_n": max((float(r.kst_defect) * n for r in audit.members), default=0.0),
        },
    )
    out.checks["enough_members"] = audit.found >= int(p["min_members"])
    out.checks["density_chain_exact"] = all(r.chain_ok for r in audit.members)
    out.checks["c4_bound_exact"] = all(r.c4_bound_ok for r in audit.members)
    out.checks["edge_window_when_defect_small"] = all(r.window_ok for r in audit.members)
    out.checks["cgw_or_small_min_gamma"] = passing == audit.found or audit.max_gamma_sqrt_n <= float(p["max_gamma_sqrt_n"])
    return out


@experiment("rho-concentration", "p(F, G(n,1/2)) = rho +- 0.1 with high probability",
            n=100, graphs=100, family=None, tolerance=0.1, min_within=99)
def _rho_concentration(p: dict, seed: int) -> Outcome:
    rng = rng_for(derive_seed(seed, 1 << 32))
    family = _family_param(p["family"], rng)
    fam = ClassFamily(4, family)
    rho = rho_expected(fam)
    tol = as_fraction(p["tolerance"])
    values, within = [], 0
    for i in range(int(p["graphs"])):
        g = random_graph(int(p["n"]), derive_seed(seed, i))
        val = fam.exact_density(g)
        values.append(float(val))
        within += abs(val - rho) <= tol
    out = Outcome(
        analytic={"family": [c.name for c in family], "rho": frac_str(rho), "rho_float": float(rho)},
        empirical={"within_tolerance": within, "graphs": len(values),
                   "mean": float(np.mean(values)), "max_abs_deviation": float(np.max(np.abs(np.array(values) - float(rho))))},
        stderr={"across_graphs": float(np.std(values, ddof=1)) if len(values) > 1 else 0.0},
    )
    out.checks["concentration"] = within >= int(p["min_within"])
    return out


def _far_blowup(m: int, k: int, seed: int) -> tuple[Graph, int, Graph, object]:
    base, base_seed = find_member(BUILTIN_PROPERTY, m, seed)
    big, structure = blowup(base, k)
    return base, base_seed, big, structure


@experiment("blowup-farness", "blowups of members are non-members and far from quasirandom",
            m=16, k=16, delta=None)
def _blowup_farness(p: dict, seed: int) -> Outcome:
    m, k = int(p["m"]), int(p["k"])
    delta = Fraction(1, m) if p["delta"] is None else as_fraction(p["delta"])
    base, base_seed, big, structure = _far_blowup(m, k, seed)
    n = big.n
    phi = phi_value(big)
    witness = blowup_part_witness(big, structure, delta)
    out = Outcome(
        analytic={
            "n": n,
            "per_pair_change_fraction": frac_str(Fraction(1, 2) - delta),
            "edit_lower_bound_pairs": frac_str(math.comb(m, 2) * (Fraction(1, 2) - delta) * k * k),
            "tenth_n_squared": frac_str(Fraction(n * n, 10)),
        },
        empirical={
            "base_seed": base_seed,
            "base_is_member": is_member(BUILTIN_PROPERTY, base),
            "blowup_z": frac_str(z_value(BUILTIN_PROPERTY, big)),
            "blowup_phi": frac_str(phi),
            "witness": None if witness is None else {"U": witness[0], "V": witness[1]},
        },
    )
    out.checks["blowup_nonmember"] = not is_member(BUILTIN_PROPERTY, big)
    out.checks["blowup_phi_positive"] = phi > 0
    out.checks["part_pair_witness"] = witness is not None
    out.checks["farness_integer_inequality"] = blowup_farness_inequality(m, k)
    out.checks["per_pair_fraction_at_least_0.4"] = Fraction(1, 2) - delta >= Fraction(2, 5)
    return out


@experiment("indistinguishability", "p(F, blowup) <= p(F, G) + binom(s,2)/m",
            m=64, k=8, s=4, trials=100_000, family=None)
def _indistinguishability(p: dict, seed: int) -> Outcome:
    rng = rng_for(derive_seed(seed, 1 << 32))
    family = _family_param(p["family"], rng)
    base, base_seed = find_member(BUILTIN_PROPERTY, int(p["m"]), seed)
    rep = indistinguishability_experiment(base, int(p["k"]), family, int(p["s"]), int(p["trials"]), seed)
    out = Outcome(
        analytic={**rep["analytic"], "family": [c.name for c in family]},
        empirical={**rep["empirical"], "base_seed": base_seed, "blowup": rep["blowup"]},
        stderr=rep["stderr"],
        checks=dict(rep["checks"]),
    )
    return out


@experiment("double-sampling", "far graphs rarely have member subsamples of size s^4",
            s=3, m=16, k=16, subsamples=1000, max_member_fraction=0.1, family=None,
            sequence_trials=20000, marginal_n=16, marginal_s=2, marginal_trials=200_000, alpha=0.001)
def _double_sampling(p: dict, seed: int) -> Outcome:
    s = int(p["s"])
    _, base_seed, big, _ = _far_blowup(int(p["m"]), int(p["k"]), seed)
    members = subsample_membership(BUILTIN_PROPERTY, big, s**4, int(p["subsamples"]), derive_seed(seed, 1))
    rng = rng_for(derive_seed(seed, 2))
    if p["family"] is None:
        fam = [c for c in graph_classes(s) if rng.random() < 0.5]
    else:
        fam = p["family"]
    tester = TesterSpec.from_classes(s, fam, "random family")
    via_u = good_rate(tester, big, int(p["sequence_trials"]), derive_seed(seed, 3), via_u=True)
    direct = good_rate(tester, big, int(p["sequence_trials"]), derive_seed(seed, 4), via_u=False)
    marg = double_sampling_marginal_test(int(p["marginal_n"]), int(p["marginal_s"]),
                                         int(p["marginal_trials"]), derive_seed(seed, 5))
    alpha = float(p["alpha"])
    se = math.hypot(via_u.stderr, direct.stderr)
    out = Outcome(
        analytic={"subsample_size": s**4, "blowup_n": big.n},
        empirical={
            "base_seed": base_seed,
            "member_subsample_fraction": members.value,
            "good_rate_via_U": via_u.value,
            "good_rate_direct": direct.value,
            "marginal": marg,
        },
        stderr={"member_subsample_fraction": members.stderr, "good_rate_difference": se},
    )
    out.checks["member_fraction_small"] = members.value <= float(p["max_member_fraction"])
    out.checks["good_rate_marginal_agrees"] = abs(via_u.value - direct.value) <= 4 * se + 1e-12
    out.checks["marginal_gof"] = marg["gof_pvalue"] > alpha
    out.checks["marginal_two_sample"] = marg["two_sample_pvalue"] > alpha
    return out


@experiment("pot-calibration", "the weight-rejecting POT rejects with probability z(G)",
            graphs=20, n=30, trials=100_000, sigmas=4.0)
def _pot_calibration(p: dict, seed: int) -> Outcome:
    pot = pot_from_property(BUILTIN_PROPERTY)
    rows = []
    ok = True
    for i in range(int(p["graphs"])):
        g = random_graph(int(p["n"]), derive_seed(seed, i))
        z = z_value(BUILTIN_PROPERTY, g)
        est = pot_rejection_estimate(pot, g, int(p["trials"]), derive_seed(seed, (1 << 20) + i))
        se = max(est.stderr, math.sqrt(float(z) * (1 - float(z)) / est.trials))
        dev = abs(est.value - float(z))
        ok &= dev <= float(p["sigmas"]) * se
        rows.append({"z": frac_str(z), "empirical": est.value, "stderr": se, "deviation_sigmas": dev / se if se else 0.0})
    out = Outcome(
        analytic={"c": frac_str(pot.c)},
        empirical={"graphs": rows, "max_deviation_sigmas": max(r["deviation_sigmas"] for r in rows)},
    )
    out.checks["all_within_sigmas"] = bool(ok)
    return out
