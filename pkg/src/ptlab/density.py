"""Exact induced-subgraph densities and the 4-vertex census.

All densities are :class:`fractions.Fraction`; floats only show up in Monte
Carlo summaries (:class:`DensityEstimate`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Literal

import numpy as np

from .graph_core import (
    CLASS4_TABLE,
    FOUR_CODES,
    Four,
    Graph,
    aut_count,
    canonical_masks,
    graph_classes,
    named_graph,
    pairs,
    resolve_class,
)
from .seeding import chunked_trials

ZERO = Fraction(0)
ONE = Fraction(1)


def frac_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str | int | Fraction) -> Fraction:
    return Fraction(s) if not isinstance(s, str) else Fraction(s.strip())


def falling(n: int, k: int) -> int:
    return math.perm(n, k) if n >= k else 0


# ---------------------------------------------------------------------------
# 4-profile


@dataclass(frozen=True)
class FourProfile:
    n: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != 11:
            raise ValueError("a 4-profile has 11 counts")
        if sum(self.counts) != math.comb(self.n, 4):
            raise ValueError("4-profile counts must sum to binom(n, 4)")

    def __getitem__(self, cls: Four | int) -> int:
        return self.counts[int(cls)]

    @property
    def total(self) -> int:
        return math.comb(self.n, 4)

    def density(self, cls: Four | int) -> Fraction:
        if self.n < 4:
            return ZERO
        return Fraction(self.counts[int(cls)], self.total)

    def densities(self) -> list[Fraction]:
        return [self.density(c) for c in Four]

    def complement(self) -> "FourProfile":
        """Profile of the complement graph."""
        return FourProfile(self.n, tuple(self.counts[Four(i).complement] for i in range(11)))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "counts": list(self.counts),
            "densities": [frac_str(d) for d in self.densities()],
        }


@lru_cache(maxsize=8)
def _quadruples(n: int) -> np.ndarray:
    flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(n), 4)), dtype=np.int16)
    return flat.reshape(-1, 4)


def _reference_counts(g: Graph) -> np.ndarray:
    """Class counts by looking at every 4-subset."""
    a = g.matrix
    counts = np.zeros(11, dtype=np.int64)
    if g.n <= 64:
        blocks: Iterable[np.ndarray] = [_quadruples(g.n)]
    else:
        def gen():
            it = itertools.combinations(range(g.n), 4)
            while True:
                chunk = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, 1 << 18)), dtype=np.int16)
                if chunk.size == 0:
                    return
                yield chunk.reshape(-1, 4)
        blocks = gen()
    for q in blocks:
        mask = np.zeros(q.shape[0], dtype=np.int64)
        for bit, (i, j) in enumerate(pairs(4)):
            mask |= a[q[:, i], q[:, j]].astype(np.int64) << bit
        counts += np.bincount(CLASS4_TABLE[mask], minlength=11)
    return counts


@lru_cache(maxsize=None)
def inclusion_matrix() -> tuple[tuple[int, ...], ...]:
    """``M[i][j]``: spanning subgraphs of class ``j`` (on its 4 labeled vertices)
    isomorphic to class ``i``, found by enumerating edge subsets."""
    m = [[0] * 11 for _ in range(11)]
    for j in Four:
        top = min(mask for mask in range(64) if CLASS4_TABLE[mask] == j)
        sub = top
        while True:
            m[int(CLASS4_TABLE[sub])][j] += 1
            if sub == 0:
                break
            sub = (sub - 1) & top
    return tuple(tuple(r) for r in m)


_EDGES4 = tuple(bin(code).count("1") for code in FOUR_CODES)


def noninduced_counts(g: Graph) -> list[int]:
    """Copies of each 4-vertex class as (not necessarily induced) subgraphs.

    Entry ``i`` counts pairs (4-set X, spanning subgraph of G[X] isomorphic to
    class ``i``).  Everything but K4 comes from degrees, codegrees and
    triangle counts; K4 is counted inside forward neighbourhoods.
    """
    n = g.n
    if n < 4:
        return [0] * 11
    a = g.matrix.astype(np.float64)
    deg = np.array(g.degrees(), dtype=np.int64)
    m = int(deg.sum()) // 2
    codeg = np.rint(a @ a).astype(np.int64)
    adj = g.matrix.astype(bool)
    upper = np.triu(np.ones((n, n), dtype=bool), 1)

    edge_codeg = codeg[adj & upper]
    tri_at = (codeg * adj).sum(axis=1) // 2
    triangles = int(tri_at.sum()) // 3
    wedges = int((deg * (deg - 1) // 2).sum())
    eu, ev = np.nonzero(adj & upper)

    s = [0] * 11
    s[Four.K4c] = math.comb(n, 4)
    s[Four.D4c] = m * math.comb(n - 2, 2)
    s[Four.P3] = wedges * (n - 3)
    s[Four.C4c] = math.comb(m, 2) - wedges
    s[Four.K13c] = triangles * (n - 3)
    s[Four.K13] = int((deg * (deg - 1) * (deg - 2) // 6).sum())
    s[Four.P4] = int(((deg[eu] - 1) * (deg[ev] - 1)).sum()) - 3 * triangles
    pair_c = codeg[upper]
    s[Four.C4] = int((pair_c * (pair_c - 1) // 2).sum()) // 2
    s[Four.P3c] = int((tri_at * (deg - 2)).sum())
    s[Four.D4] = int((edge_codeg * (edge_codeg - 1) // 2).sum())
    s[Four.K4] = _k4_count(g)
    return s


def _k4_count(g: Graph) -> int:
    """Each K4 counted once, at its smallest vertex: triangles in the
    forward neighbourhood, via trace(B^3)/6 on the induced 0/1 block."""
    a = g.matrix
    total = 0
    for u in range(g.n - 3):
        fwd = np.flatnonzero(a[u, u + 1 :]) + u + 1
        if fwd.size < 3:
            continue
        b = a[np.ix_(fwd, fwd)].astype(np.float64)
        total += int(round(float(((b @ b) * b).sum()))) // 6
    return total


def _invert(s: list[int]) -> list[int]:
    """Recover induced counts from non-induced ones (Möbius inversion over the
    subgraph order; the inclusion matrix is unitriangular by edge count)."""
    m = inclusion_matrix()
    order = sorted(range(11), key=lambda i: -_EDGES4[i])
    induced = [0] * 11
    for i in order:
        induced[i] = s[i] - sum(m[i][j] * induced[j] for j in range(11) if j != i and m[i][j])
    return induced


def four_profile(g: Graph, mode: Literal["fast", "reference"] = "fast") -> FourProfile:
    if g.n < 4:
        return FourProfile(g.n, (0,) * 11)
    if mode == "reference":
        counts = [int(c) for c in _reference_counts(g)]
    elif mode == "fast":
        counts = _invert(noninduced_counts(g))
    else:
        raise ValueError(f"unknown census mode {mode!r}")
    return FourProfile(g.n, tuple(counts))


def p_induced(cls: Four | str, g: Graph, profile: FourProfile | None = None) -> Fraction:
    """p(H, G) for a 4-vertex class H; 0 when G has fewer than 4 vertices."""
    cls = Four[cls] if isinstance(cls, str) else Four(cls)
    if g.n < 4:
        return ZERO
    return (profile or four_profile(g)).density(cls)


# ---------------------------------------------------------------------------
# injective / induced embedding densities


def _pattern(h: Graph | Four | str) -> Graph:
    if isinstance(h, Four):
        return h.graph
    if isinstance(h, str):
        return named_graph(h) if h != "K2" else named_graph("Kn", 2)
    return h


def _check_pattern(h: Graph) -> None:
    if h.n == 4 or (h.n == 2 and h.m == 1):
        return
    raise ValueError("t_inj/t_ind support K2 and 4-vertex patterns only")


def t_inj(h: Graph | Four | str, g: Graph, profile: FourProfile | None = None) -> Fraction:
    """Injective homomorphism density of ``h`` in ``g``."""
    h = _pattern(h)
    _check_pattern(h)
    if g.n < h.n:
        raise ValueError(f"need n >= {h.n}")
    if h.n == 2:
        return Fraction(2 * g.m, g.n * (g.n - 1))
    # injective edge-preserving maps = aut(H) * (non-induced copies of H),
    # expanded through the induced profile and the inclusion matrix
    profile = profile or four_profile(g)
    cls = int(CLASS4_TABLE[h.mask()])
    copies = sum(inclusion_matrix()[cls][j] * profile.counts[j] for j in range(11))
    return Fraction(copies * aut_count(h), falling(g.n, 4))


def t_ind(h: Graph | Four | str, g: Graph, profile: FourProfile | None = None) -> Fraction:
    """Induced embedding density; equals p(H,G)·aut(H)/h!."""
    h = _pattern(h)
    _check_pattern(h)
    if g.n < h.n:
        raise ValueError(f"need n >= {h.n}")
    if h.n == 2:
        return Fraction(2 * g.m, g.n * (g.n - 1))
    profile = profile or four_profile(g)
    cls = int(CLASS4_TABLE[h.mask()])
    return Fraction(profile.counts[cls] * aut_count(h), falling(g.n, 4))


def t_inj_c4_codegree(g: Graph) -> Fraction:
    """t_inj(C4, G) from codegrees: sum over ordered u != v of c(c-1)."""
    if g.n < 4:
        return ZERO
    codeg = np.rint(g.matrix.astype(np.float64) @ g.matrix.astype(np.float64)).astype(np.int64)
    np.fill_diagonal(codeg, 0)
    return Fraction(int((codeg * (codeg - 1)).sum()), falling(g.n, 4))


def hom_density_k2(g: Graph) -> Fraction:
    return Fraction(2 * g.m, g.n * g.n)


def hom_density_c4(g: Graph) -> Fraction:
    """Homomorphism density of C4: sum over all (u, v) of codeg(u, v)^2 / n^4."""
    a = g.matrix.astype(np.float64)
    codeg = np.rint(a @ a).astype(np.int64)
    return Fraction(int((codeg * codeg).sum()), g.n**4)


def kst_defect(g: Graph, profile: FourProfile | None = None) -> Fraction:
    """max(0, t_inj(K2)^4 - t_inj(C4))."""
    if g.n < 4:
        raise ValueError("kst_defect needs n >= 4")
    return max(ZERO, t_inj("K2", g) ** 4 - t_inj(Four.C4, g, profile))


# ---------------------------------------------------------------------------
# general k-vertex censuses (k <= 8)


def subset_masks(g: Graph, subsets: np.ndarray) -> np.ndarray:
    """Pair masks of the subgraphs induced on each row of ``subsets``."""
    subsets = np.asarray(subsets)
    k = subsets.shape[1]
    a = g.matrix
    mask = np.zeros(subsets.shape[0], dtype=np.int64)
    for bit, (i, j) in enumerate(pairs(k)):
        mask |= a[subsets[:, i], subsets[:, j]].astype(np.int64) << bit
    return mask


def induced_census(g: Graph, k: int) -> dict[int, int]:
    """Counts of k-subsets by canonical class, by full enumeration."""
    if g.n < k:
        return {}
    subsets = np.array(list(itertools.combinations(range(g.n), k)), dtype=np.int64).reshape(-1, k)
    codes = canonical_masks(subset_masks(g, subsets), k)
    uniq, cnt = np.unique(codes, return_counts=True)
    return {int(c): int(x) for c, x in zip(uniq, cnt)}


def p_class(cls, g: Graph, k: int | None = None) -> Fraction:
    """p(F, G) for a class of any order up to 8, by enumeration."""
    order, code = resolve_class(cls, k)
    if g.n < order:
        return ZERO
    return Fraction(induced_census(g, order).get(code, 0), math.comb(g.n, order))


def p_via_intermediate(f, g: Graph, h: int, k: int | None = None) -> Fraction:
    """Sum over h-vertex classes H of p(F, H)·p(H, G)."""
    order, code = resolve_class(f, k)
    if not (max(order, 4) <= h <= min(g.n, 7)):
        raise ValueError(f"intermediate order must lie in [{max(order, 4)}, {min(g.n, 7)}]")
    census = induced_census(g, h)
    total = math.comb(g.n, h)
    acc = ZERO
    for hcode in graph_classes(h):
        weight = census.get(hcode, 0)
        if weight:
            inner = induced_census(Graph.from_mask(hcode, h), order).get(code, 0)
            acc += Fraction(inner, math.comb(h, order)) * Fraction(weight, total)
    return acc


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class DensityEstimate:
    point: Fraction
    trials: int
    stderr: float
    seed: int

    @property
    def value(self) -> float:
        return float(self.point)

    def to_json(self) -> dict:
        return {"point": frac_str(self.point), "value": self.value, "trials": self.trials,
                "stderr": self.stderr, "seed": self.seed}


def bernoulli_stderr(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials) if trials else math.inf


def sample_subsets(rng: np.random.Generator, n: int, s: int, size: int) -> np.ndarray:
    """``size`` uniform ordered samples of ``s`` distinct vertices of ``[n]``.

    When repeats are unlikely, rows of i.i.d. draws are redrawn until they have
    no repeated vertex; otherwise rows are prefixes of random permutations.
    """
    if s > n:
        raise ValueError(f"cannot sample {s} distinct vertices from {n}")
    if s == 0:
        return np.zeros((size, 0), dtype=np.int64)
    distinct_prob = math.prod(1 - i / n for i in range(s))
    if distinct_prob >= 0.5:
        out = rng.integers(0, n, size=(size, s))
        bad = _has_repeat(out)
        while bad.any():
            out[bad] = rng.integers(0, n, size=(int(bad.sum()), s))
            bad = _has_repeat(out)
        return out
    rows = []
    step = max(1, (1 << 22) // n)
    for start in range(0, size, step):
        keys = rng.random((min(step, size - start), n))
        rows.append(np.argsort(keys, axis=1)[:, :s])
    return np.concatenate(rows)


def _has_repeat(x: np.ndarray) -> np.ndarray:
    srt = np.sort(x, axis=1)
    return (srt[:, 1:] == srt[:, :-1]).any(axis=1)


class ClassFamily:
    """A set of s-vertex isomorphism classes, or a predicate on induced subgraphs."""

    def __init__(self, s: int, classes: Iterable = (), predicate: Callable[[Graph], bool] | None = None):
        self.s = s
        self.predicate = predicate
        codes = set()
        for c in classes:
            order, code = resolve_class(c, s)
            if order != s:
                raise ValueError(f"class of order {order} in a family of order {s}")
            codes.add(code)
        self.codes = frozenset(codes)
        if predicate is not None and codes:
            raise ValueError("give either classes or a predicate, not both")

    @classmethod
    def all_classes(cls, s: int) -> "ClassFamily":
        return cls(s, graph_classes(s))

    def contains_masks(self, masks: np.ndarray) -> np.ndarray:
        """Membership of labeled pair masks (order ``s``)."""
        if self.predicate is not None:
            return np.array([bool(self.predicate(Graph.from_mask(int(x), self.s))) for x in masks], dtype=bool)
        if self.s == 4:
            table = np.array([FOUR_CODES[int(CLASS4_TABLE[x])] in self.codes for x in range(64)])
            return table[masks]
        if self.s <= 1:
            return np.full(masks.shape, 0 in self.codes)
        return np.isin(canonical_masks(masks, self.s), list(self.codes))

    def contains(self, h: Graph) -> bool:
        if self.predicate is not None:
            return bool(self.predicate(h))
        return bool(self.contains_masks(np.array([h.mask()], dtype=np.int64))[0])

    def exact_density(self, g: Graph) -> Fraction:
        """p(F, G) by enumeration (census for s = 4)."""
        if self.predicate is not None:
            hits = sum(bool(self.predicate(g.induced(sub))) for sub in itertools.combinations(range(g.n), self.s))
            return Fraction(hits, math.comb(g.n, self.s))
        if self.s == 4:
            prof = four_profile(g)
            return sum((prof.density(i) for i in Four if FOUR_CODES[i] in self.codes), ZERO)
        census = induced_census(g, self.s)
        return Fraction(sum(census.get(c, 0) for c in self.codes), math.comb(g.n, self.s))

    def __len__(self) -> int:
        return len(self.codes)


def _as_family(family, s: int) -> ClassFamily:
    if isinstance(family, ClassFamily):
        if family.s != s:
            raise ValueError("family order does not match sample size")
        return family
    return ClassFamily(s, family)


def sample_density(family, g: Graph, s: int, trials: int, seed: int) -> DensityEstimate:
    """Monte Carlo estimate of p(F, G) from uniform s-subsets."""
    if s > g.n:
        raise ValueError(f"sample size {s} exceeds n={g.n}")
    fam = _as_family(family, s)

    def work(rng, size):
        sub = sample_subsets(rng, g.n, s, size)
        return int(fam.contains_masks(subset_masks(g, sub)).sum())

    hits = sum(chunked_trials(seed, trials, work))
    point = Fraction(hits, trials)
    return DensityEstimate(point, trials, bernoulli_stderr(float(point), trials), seed)


def rho_expected(family, s: int | None = None) -> Fraction:
    """Expected p(F, G(n, 1/2)): sum over F of 2^-binom(s,2)·s!/aut(F)."""
    if not isinstance(family, ClassFamily):
        items = list(family)
        if s is None:
            if not items:
                return ZERO
            s = resolve_class(items[0], 4)[0]
        family = ClassFamily(s, items)
    if family.predicate is not None:
        raise ValueError("rho_expected needs an explicit class family")
    if family.s > 8:
        raise ValueError("rho_expected supports s <= 8")
    s = family.s
    return sum(
        (Fraction(math.factorial(s), aut_count(Graph.from_mask(code, s)) * 2 ** math.comb(s, 2))
         for code in family.codes),
        ZERO,
    )
