"""Simulated testers: POTs, amplification, canonical testers, double sampling
and the blowup indistinguishability experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import stats

from .density import (
    ClassFamily,
    DensityEstimate,
    ZERO,
    bernoulli_stderr,
    frac_str,
    sample_subsets,
    subset_masks,
)
from .graph_core import CLASS4_TABLE, FOUR_CODES, Graph, blowup, canonical_masks
from .property_pi import BUILTIN_PROPERTY, PotSpec, WeightedDensityProperty, is_member, phi_value, z_value
from .seeding import chunked_trials, rng_for

SUCCESS_PROBABILITY = Fraction(2, 3)
DEFAULT_KAPPA = 8


@dataclass(frozen=True)
class RunOutcome:
    accepted: bool
    sampled_vertices: tuple[int, ...]
    seed: int


def _exact_below(u: np.ndarray, probs: list[Fraction], idx: np.ndarray) -> np.ndarray:
    """``u < probs[idx]`` for float uniforms, compared against exact fractions."""
    out = np.zeros(u.shape, dtype=bool)
    for j, p in enumerate(probs):
        sel = idx == j
        if not sel.any() or p == 0:
            continue
        if p == 1:
            out[sel] = True
            continue
        # floats are dyadic rationals, so the float comparison is exact except
        # at the rounding of p; resolve ties with Fractions
        pf = float(p)
        vals = u[sel]
        res = vals < pf
        tie = vals == pf
        if tie.any():
            res[tie] = [Fraction(float(v)) < p for v in vals[tie]]
        out[sel] = res
    return out


def _pot_classes(pot: PotSpec, g: Graph, sub: np.ndarray) -> tuple[np.ndarray, list[Fraction]]:
    masks = subset_masks(g, sub)
    if pot.h == 4:
        probs = [pot.reject_prob.get(code, ZERO) for code in FOUR_CODES]
        return CLASS4_TABLE[masks].astype(np.int64), probs
    codes = canonical_masks(masks, pot.h)
    uniq, inv = np.unique(codes, return_inverse=True)
    return inv.reshape(codes.shape), [pot.reject_prob.get(int(c), ZERO) for c in uniq]


def run_pot(pot: PotSpec, g: Graph, seed: int) -> RunOutcome:
    """One POT run: sample h vertices, reject with the class's probability."""
    if g.n < pot.h:
        raise ValueError(f"POT needs n >= {pot.h}")
    rng = rng_for(seed)
    sub = sample_subsets(rng, g.n, pot.h, 1)
    idx, probs = _pot_classes(pot, g, sub)
    rejected = _exact_below(rng.random(1), probs, idx)[0]
    return RunOutcome(not bool(rejected), tuple(int(v) for v in sub[0]), seed)


def pot_acceptances(pot: PotSpec, g: Graph, trials: int, seed: int) -> int:
    """Number of accepting runs among ``trials`` independent POT runs."""
    if g.n < pot.h:
        raise ValueError(f"POT needs n >= {pot.h}")

    def work(rng, size):
        sub = sample_subsets(rng, g.n, pot.h, size)
        idx, probs = _pot_classes(pot, g, sub)
        return size - int(_exact_below(rng.random(size), probs, idx).sum())

    return sum(chunked_trials(seed, trials, work))


def pot_rejection_estimate(pot: PotSpec, g: Graph, trials: int, seed: int) -> DensityEstimate:
    rejected = trials - pot_acceptances(pot, g, trials, seed)
    p = Fraction(rejected, trials)
    return DensityEstimate(p, trials, bernoulli_stderr(float(p), trials), seed)


# ---------------------------------------------------------------------------
# amplification


@dataclass(frozen=True)
class AmplifiedTester:
    """Run the POT T = ceil(kappa / f(eps)^2) times; accept iff at least
    (c - f(eps)/2) T runs accept."""

    pot: PotSpec
    eps: float
    kappa: float
    margin: Fraction
    repetitions: int
    threshold: Fraction

    @property
    def min_acceptances(self) -> int:
        return math.ceil(self.threshold)

    def acceptance_probability(self, pot_accept: float | Fraction) -> float:
        """Exact binomial tail for a POT accepting with probability ``pot_accept``."""
        return float(stats.binom.sf(self.min_acceptances - 1, self.repetitions, float(pot_accept)))

    def run(self, g: Graph, seed: int) -> RunOutcome:
        acc = pot_acceptances(self.pot, g, self.repetitions, seed)
        return RunOutcome(bool(acc >= self.threshold), (), seed)

    def acceptance_frequency(self, g: Graph, runs: int, seed: int) -> DensityEstimate:
        """Fraction of accepting amplified runs, all POT calls drawn in batches."""

        def work(rng, size):
            sub = sample_subsets(rng, g.n, self.pot.h, size * self.repetitions)
            idx, probs = _pot_classes(self.pot, g, sub)
            rej = _exact_below(rng.random(size * self.repetitions), probs, idx)
            acc = self.repetitions - rej.reshape(size, self.repetitions).sum(axis=1)
            return int((acc >= self.threshold).sum())

        chunk = max(1, (1 << 20) // self.repetitions)
        hits = sum(chunked_trials(seed, runs, work, chunk=chunk))
        p = Fraction(hits, runs)
        return DensityEstimate(p, runs, bernoulli_stderr(float(p), runs), seed)


def amplify(pot: PotSpec, eps: float, kappa: float = DEFAULT_KAPPA) -> AmplifiedTester:
    if pot.f is None:
        raise ValueError("POT has no detection margin f")
    margin = Fraction(pot.f(eps))
    if margin <= 0:
        raise ValueError("f(eps) must be positive")
    reps = max(1, math.ceil(Fraction(kappa) / margin**2))
    return AmplifiedTester(pot, eps, kappa, margin, reps, (pot.c - margin / 2) * reps)


# ---------------------------------------------------------------------------
# canonical testers


@dataclass(frozen=True)
class TesterSpec:
    """Sample ``s`` vertices; reject iff the induced subgraph lies in ``family``."""

    s: int
    family: ClassFamily
    label: str = ""

    @classmethod
    def from_classes(cls, s: int, classes=(), label: str = "") -> "TesterSpec":
        return cls(s, ClassFamily(s, classes), label)

    @classmethod
    def from_predicate(cls, s: int, predicate: Callable[[Graph], bool], label: str = "") -> "TesterSpec":
        return cls(s, ClassFamily(s, predicate=predicate), label)

    def accepts(self, h: Graph) -> bool:
        return not self.family.contains(h)

    def acceptance_probability(self, g: Graph) -> Fraction:
        """1 - p(F, G), exact."""
        return 1 - self.family.exact_density(g)


def run_canonical(t: TesterSpec, g: Graph, seed: int) -> RunOutcome:
    if t.s > g.n:
        raise ValueError(f"sample size {t.s} exceeds n={g.n}")
    sub = sample_subsets(rng_for(seed), g.n, t.s, 1)
    rejected = t.family.contains_masks(subset_masks(g, sub))[0]
    return RunOutcome(not bool(rejected), tuple(int(v) for v in sub[0]), seed)


def canonical_acceptance_estimate(t: TesterSpec, g: Graph, trials: int, seed: int) -> DensityEstimate:
    if t.s > g.n:
        raise ValueError(f"sample size {t.s} exceeds n={g.n}")

    def work(rng, size):
        sub = sample_subsets(rng, g.n, t.s, size)
        return size - int(t.family.contains_masks(subset_masks(g, sub)).sum())

    acc = sum(chunked_trials(seed, trials, work))
    p = Fraction(acc, trials)
    return DensityEstimate(p, trials, bernoulli_stderr(float(p), trials), seed)


# ---------------------------------------------------------------------------
# double sampling


@dataclass(frozen=True)
class SequenceVerdict:
    blocks: tuple[bool, ...]
    good: bool

    @classmethod
    def from_blocks(cls, blocks) -> "SequenceVerdict":
        blocks = tuple(bool(b) for b in blocks)
        return cls(blocks, sum(blocks) >= math.ceil(len(blocks) / 2))


def _block_verdicts(t: TesterSpec, g: Graph, w: np.ndarray) -> np.ndarray:
    """Accept bits of consecutive s-blocks of each sequence row of ``w``."""
    rows = w.shape[0]
    blocks = w.reshape(rows * t.s, t.s)
    accept = ~t.family.contains_masks(subset_masks(g, blocks))
    return accept.reshape(rows, t.s)


def draw_double_samples(rng: np.random.Generator, n: int, s: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    """U: ``size`` uniform s^4-subsets (rows, unordered); W: s^2 vertices drawn
    without repetition from each U (rows, ordered)."""
    big = s**4
    if n < big:
        raise ValueError(f"double sampling needs n >= s^4 = {big}")
    u = sample_subsets(rng, n, big, size)
    pick = sample_subsets(rng, big, s * s, size)
    w = np.take_along_axis(u, pick, axis=1)
    return u, w


def double_sampling(t: TesterSpec, g: Graph, seed: int) -> tuple[SequenceVerdict, list[int]]:
    """Draw U of size s^4, then s disjoint s-blocks from U, and grade them."""
    u, w = draw_double_samples(rng_for(seed), g.n, t.s, 1)
    verdict = SequenceVerdict.from_blocks(_block_verdicts(t, g, w)[0])
    return verdict, sorted(int(x) for x in u[0])


def direct_sequence(t: TesterSpec, g: Graph, seed: int) -> SequenceVerdict:
    """Grade s^2 vertices drawn directly from G (the unconditioned view of W)."""
    w = sample_subsets(rng_for(seed), g.n, t.s * t.s, 1)
    return SequenceVerdict.from_blocks(_block_verdicts(t, g, w)[0])


def good_rate(t: TesterSpec, g: Graph, trials: int, seed: int, via_u: bool = True) -> DensityEstimate:
    """Fraction of good sequences, W drawn through U (``via_u``) or directly."""
    need = math.ceil(t.s / 2)

    def work(rng, size):
        if via_u:
            _, w = draw_double_samples(rng, g.n, t.s, size)
        else:
            w = sample_subsets(rng, g.n, t.s * t.s, size)
        return int((_block_verdicts(t, g, w).sum(axis=1) >= need).sum())

    hits = sum(chunked_trials(seed, trials, work, chunk=2048))
    p = Fraction(hits, trials)
    return DensityEstimate(p, trials, bernoulli_stderr(float(p), trials), seed)


def subsample_membership(prop: WeightedDensityProperty, g: Graph, size: int, trials: int, seed: int) -> DensityEstimate:
    """Fraction of random ``size``-vertex induced subgraphs that are members."""
    rng = rng_for(seed)
    subs = sample_subsets(rng, g.n, size, trials)
    hits = sum(is_member(prop, g.induced(sorted(int(v) for v in row))) for row in subs)
    p = Fraction(hits, trials)
    return DensityEstimate(p, trials, bernoulli_stderr(float(p), trials), seed)


def double_sampling_marginal_test(n: int, s: int, trials: int, seed: int) -> dict:
    """Compare the unordered set of W under double sampling with direct sampling.

    Returns chi-squared p-values for goodness of fit against the uniform law
    on s^2-subsets and for the two-sample contingency test.
    """
    cells = math.comb(n, s * s)
    if cells > 50_000:
        raise ValueError("too many cells for a chi-squared test; use smaller n")
    rng = rng_for(seed)
    _, w = draw_double_samples(rng, n, s, trials)
    direct = sample_subsets(rng, n, s * s, trials)

    def index(rows):
        srt = np.sort(rows, axis=1)
        return (srt * (n ** np.arange(s * s))).sum(axis=1)

    a, b = index(w), index(direct)
    keys, inv = np.unique(np.concatenate([a, b]), return_inverse=True)
    ca = np.bincount(inv[: len(a)], minlength=len(keys))
    cb = np.bincount(inv[len(a) :], minlength=len(keys))
    full = np.zeros(cells, dtype=np.int64)
    full[: len(keys)] = ca  # unseen cells have zero counts
    gof = stats.chisquare(full)
    both = np.vstack([ca, cb])
    cont = stats.chi2_contingency(both)
    pos = stats.chisquare(np.bincount(w.ravel(), minlength=n))
    return {
        "cells": cells,
        "trials": trials,
        "gof_pvalue": float(gof.pvalue),
        "two_sample_pvalue": float(cont.pvalue),
        "vertex_pvalue": float(pos.pvalue),
    }


# ---------------------------------------------------------------------------
# blowup indistinguishability


def blowup_farness_inequality(m: int, k: int) -> bool:
    """binom(m,2) * 0.4 k^2 >= 0.1 (mk)^2, as an integer inequality."""
    return math.comb(m, 2) * 4 * k * k >= (m * k) ** 2


def indistinguishability_experiment(
    g: Graph,
    k: int,
    family,
    s: int,
    trials: int,
    seed: int,
    prop: WeightedDensityProperty | None = None,
) -> dict:
    """Compare F-densities of a graph and its k-blowup by sampling.

    Reports the estimates, the collision bound binom(s,2)/m, the frequency of
    samples hitting some part twice, and the conditional F-frequency given no
    such collision (which should equal p(F, G)).
    """
    prop = prop or BUILTIN_PROPERTY
    fam = family if isinstance(family, ClassFamily) else ClassFamily(s, family)
    m = g.n
    if s * s > m * k:
        raise ValueError("need s^2 <= m k")
    if s > m:
        raise ValueError("need s <= m")
    gamma_graph, structure = blowup(g, k)

    def work_blowup(rng, size):
        sub = sample_subsets(rng, gamma_graph.n, s, size)
        hit = fam.contains_masks(subset_masks(gamma_graph, sub))
        parts = np.sort(sub // k, axis=1)
        multi = (parts[:, 1:] == parts[:, :-1]).any(axis=1)
        return np.array([hit.sum(), multi.sum(), (hit & ~multi).sum()], dtype=np.int64)

    def work_base(rng, size):
        sub = sample_subsets(rng, m, s, size)
        return int(fam.contains_masks(subset_masks(g, sub)).sum())

    hit_b, multi, hit_clean = (int(x) for x in sum(chunked_trials(seed, trials, work_blowup)))
    hit_g = int(sum(chunked_trials(seed ^ 0x5DEECE66D, trials, work_base)))
    p_blow = hit_b / trials
    p_base = hit_g / trials
    se_blow = bernoulli_stderr(p_blow, trials)
    se_base = bernoulli_stderr(p_base, trials)
    combined = math.hypot(se_blow, se_base)
    bound = Fraction(math.comb(s, 2), m)
    multi_freq = multi / trials
    multi_sigma = bernoulli_stderr(min(float(bound), 1.0), trials)
    clean = trials - int(multi)
    cond = hit_clean / clean if clean else float("nan")
    cond_se = bernoulli_stderr(cond, clean) if clean else float("inf")

    exact_g = fam.exact_density(g) if s <= 8 or fam.predicate is not None else None
    analytic = {"collision_bound": frac_str(bound), "p_F_G_exact": None if exact_g is None else frac_str(exact_g)}
    checks = {
        "blowup_bound": bool(p_blow <= p_base + float(bound) + 5 * combined),
        "collision_bound": bool(multi_freq <= float(bound) + 4 * multi_sigma),
    }
    if exact_g is not None and clean:
        ref = float(exact_g)
        checks["conditional_law"] = bool(abs(cond - ref) <= 4 * max(cond_se, bernoulli_stderr(ref, clean)))
    return {
        "m": m,
        "k": k,
        "s": s,
        "trials": trials,
        "analytic": analytic,
        "empirical": {
            "p_F_blowup": p_blow,
            "p_F_base": p_base,
            "multi_hit_frequency": multi_freq,
            "conditional_p_F": cond,
        },
        "stderr": {
            "p_F_blowup": se_blow,
            "p_F_base": se_base,
            "combined": combined,
            "multi_hit": multi_sigma,
            "conditional": cond_se,
        },
        "blowup": {
            "n": gamma_graph.n,
            "is_member": is_member(prop, gamma_graph),
            "phi": frac_str(phi_value(gamma_graph)),
            "z": frac_str(z_value(prop, gamma_graph)),
        },
        "checks": checks,
        "passed": all(checks.values()),
    }
