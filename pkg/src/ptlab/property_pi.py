"""Weighted induced-density properties: graphs with sum_H w_H p(H, G) <= b."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .density import (
    ZERO,
    four_profile,
    frac_str,
    induced_census,
    parse_frac,
    t_inj,
)
from .graph_core import (
    CLASS4_TABLE,
    FOUR_CODES,
    Four,
    Graph,
    canonical_masks,
    class_name,
    graph_classes,
    pairs,
    resolve_class,
)


@dataclass(frozen=True)
class WeightedDensityProperty:
    """``h``-vertex class weights (keyed by canonical mask) and threshold ``b``."""

    h: int
    weights: Mapping[int, Fraction]
    b: Fraction
    name: str = ""

    def __post_init__(self):
        if not 2 <= self.h <= 7:
            raise ValueError("supported pattern orders are 2..7")
        known = set(graph_classes(self.h))
        for code, w in self.weights.items():
            if code not in known:
                raise ValueError(f"{code} is not a canonical {self.h}-vertex class")
            if w < 0:
                raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", {c: Fraction(w) for c, w in self.weights.items() if w})
        object.__setattr__(self, "b", Fraction(self.b))

    @classmethod
    def from_classes(cls, h: int, weights: Mapping, b, name: str = "") -> "WeightedDensityProperty":
        """Build from class designators (``Four`` members, names or graphs)."""
        resolved = {}
        for key, w in weights.items():
            order, code = resolve_class(key, h)
            if order != h:
                raise ValueError(f"class {key!r} has order {order}, expected {h}")
            resolved[code] = parse_frac(w) if isinstance(w, str) else Fraction(w)
        return cls(h, resolved, parse_frac(b) if isinstance(b, str) else Fraction(b), name)

    def __hash__(self) -> int:
        return hash((self.h, tuple(sorted(self.weights.items())), self.b))

    def weight(self, cls) -> Fraction:
        return self.weights.get(resolve_class(cls, self.h)[1], ZERO)

    def four_weights(self) -> list[Fraction]:
        if self.h != 4:
            raise ValueError("not a 4-vertex property")
        return [self.weights.get(code, ZERO) for code in FOUR_CODES]

    def to_json(self) -> dict:
        return {
            "h": self.h,
            "weights": {class_name(self.h, c): frac_str(w) for c, w in sorted(self.weights.items())},
            "b": frac_str(self.b),
        }


def property_from_json(data: dict | str) -> WeightedDensityProperty:
    if isinstance(data, str):
        data = json.loads(data)
    unknown = set(data) - {"h", "weights", "b", "name"}
    if unknown:
        raise ValueError(f"unknown property keys {sorted(unknown)}")
    h = int(data["h"])
    weights = {}
    for key, w in data["weights"].items():
        if key.startswith(f"G{h}:"):
            weights[int(key.split(":", 1)[1])] = parse_frac(w)
        else:
            weights[resolve_class(key, h)[1]] = parse_frac(w)
    return WeightedDensityProperty(h, weights, parse_frac(data["b"]), data.get("name", ""))


F = Fraction
BUILTIN_WEIGHTS = {
    Four.K4: F(1), Four.K4c: F(1, 2), Four.D4: F(5, 12), Four.D4c: F(5, 12),
    Four.P3: F(1, 3), Four.P3c: F(1, 6), Four.C4: F(1, 2), Four.C4c: F(1, 3),
    Four.K13: F(1, 4), Four.K13c: F(1, 4), Four.P4: F(1, 4),
}
BUILTIN_PROPERTY = WeightedDensityProperty.from_classes(4, BUILTIN_WEIGHTS, F(5, 16), "thm1.4")
BUILTIN = {"thm1.4": BUILTIN_PROPERTY}


def load_property(spec: str | dict | None) -> WeightedDensityProperty:
    """A built-in name (``thm1.4``), a JSON string, a JSON file path or a dict."""
    if spec is None:
        return BUILTIN_PROPERTY
    if isinstance(spec, dict):
        return property_from_json(spec)
    if spec in BUILTIN:
        return BUILTIN[spec]
    if spec.lstrip().startswith("{"):
        return property_from_json(spec)
    with open(spec, encoding="utf-8") as fh:
        return property_from_json(fh.read())


# ---------------------------------------------------------------------------
# membership


def z_value(prop: WeightedDensityProperty, g: Graph, profile=None) -> Fraction:
    """z(G) = sum_H w_H p(H, G); 0 when G has fewer than h vertices."""
    if g.n < prop.h:
        return ZERO
    if prop.h == 4:
        prof = profile or four_profile(g)
        return sum((w * prof.density(i) for i, w in enumerate(prop.four_weights()) if w), ZERO)
    census = induced_census(g, prop.h)
    total = math.comb(g.n, prop.h)
    return sum((w * Fraction(census.get(c, 0), total) for c, w in prop.weights.items()), ZERO)


def phi_value(g: Graph, profile=None) -> Fraction:
    """2 t_inj(C4, G) - t_inj(K2, G) + 3/8, with t_inj(C4) = 0 below 4 vertices."""
    if g.n < 2:
        raise ValueError("phi needs at least 2 vertices")
    c4 = t_inj(Four.C4, g, profile) if g.n >= 4 else ZERO
    return 2 * c4 - t_inj("K2", g) + F(3, 8)


def is_member(prop: WeightedDensityProperty, g: Graph, profile=None) -> bool:
    return z_value(prop, g, profile) <= prop.b


@dataclass(frozen=True)
class IntegerizedProperty:
    scale: int
    w_int: Mapping[int, int]
    b_int: int
    h: int

    def z_int(self, g: Graph) -> Fraction:
        """scale * z(G); ``z_int * binom(n, h)`` is an integer."""
        if g.n < self.h:
            return ZERO
        census = induced_census(g, self.h) if self.h != 4 else _four_census(g)
        return Fraction(sum(w * census.get(c, 0) for c, w in self.w_int.items()), math.comb(g.n, self.h))


def _four_census(g: Graph) -> dict[int, int]:
    prof = four_profile(g)
    return {FOUR_CODES[i]: prof.counts[i] for i in range(11)}


def integerize(prop: WeightedDensityProperty) -> IntegerizedProperty:
    scale = math.lcm(prop.b.denominator, *(w.denominator for w in prop.weights.values()))
    w_int = {c: int(w * scale) for c, w in prop.weights.items()}
    return IntegerizedProperty(scale, w_int, int(prop.b * scale), prop.h)


class MembershipError(ValueError):
    pass


def nonmember_gap(prop: WeightedDensityProperty, g: Graph) -> Fraction:
    """z(G) - b for a non-member, checked against 1/(scale * binom(n, h))."""
    gap = z_value(prop, g) - prop.b
    if gap <= 0:
        raise MembershipError("graph is a member; no gap to report")
    bound = Fraction(1, integerize(prop).scale * math.comb(g.n, prop.h))
    if gap < bound:
        raise AssertionError(f"gap {gap} below the integrality bound {bound}")
    return gap


def z_average_check(prop: WeightedDensityProperty, g: Graph, u: int) -> tuple[Fraction, Fraction]:
    """(z(G), mean of z(G[U]) over all u-subsets U), both exact."""
    if not prop.h <= u <= g.n:
        raise ValueError(f"subset size must lie in [{prop.h}, {g.n}]")
    if g.n > 14:
        raise ValueError("z_average_check enumerates subsets; n <= 14")
    subsets = list(itertools.combinations(range(g.n), u))
    total = sum((z_value(prop, g.induced(s)) for s in subsets), ZERO)
    return z_value(prop, g), total / len(subsets)


# ---------------------------------------------------------------------------
# exhaustive labeled-graph tables


@lru_cache(maxsize=16)
def labeled_z_table(prop: WeightedDensityProperty, n: int) -> np.ndarray:
    """``scale * binom(n, h) * z`` for every labeled graph on ``n`` vertices.

    Index = pair mask over ``pairs(n)``; values are exact integers.
    """
    if n > 7:
        raise ValueError("labeled tables stop at n = 7")
    ip = integerize(prop)
    npairs = n * (n - 1) // 2
    masks = np.arange(1 << npairs, dtype=np.int64)
    out = np.zeros(masks.shape, dtype=np.int64)
    if n < prop.h:
        return out
    pidx = {p: i for i, p in enumerate(pairs(n))}
    if prop.h == 4:
        lut = np.array([ip.w_int.get(FOUR_CODES[int(CLASS4_TABLE[x])], 0) for x in range(64)], dtype=np.int64)
    for sub in itertools.combinations(range(n), prop.h):
        sub_mask = np.zeros_like(masks)
        for bit, (i, j) in enumerate(pairs(prop.h)):
            sub_mask |= ((masks >> pidx[(sub[i], sub[j])]) & 1) << bit
        if prop.h == 4:
            out += lut[sub_mask]
        else:
            codes = canonical_masks(sub_mask, prop.h)
            out += np.vectorize(lambda c: ip.w_int.get(int(c), 0), otypes=[np.int64])(codes)
    return out


def labeled_members(prop: WeightedDensityProperty, n: int) -> np.ndarray:
    ip = integerize(prop)
    return labeled_z_table(prop, n) <= ip.b_int * math.comb(n, prop.h)


def distance_to_property(prop: WeightedDensityProperty, g: Graph) -> int:
    """Fewest pair flips turning ``g`` into a member (exhaustive, n <= 6)."""
    if g.n > 6:
        raise ValueError("exhaustive distance is limited to n <= 6")
    members = np.flatnonzero(labeled_members(prop, g.n))
    if members.size == 0:
        raise ValueError(f"no {g.n}-vertex graph satisfies the property")
    x = members ^ g.mask()
    return int(min(int(v).bit_count() for v in x))


def farness_thresholds(n: int, eps: float | Fraction) -> dict[str, Fraction]:
    """Edit budgets for eps-farness under both counting conventions."""
    eps = Fraction(eps) if not isinstance(eps, float) else Fraction(str(eps))
    return {"pairs": eps * n * n / 2, "matrix_entries": eps * n * n}


def is_eps_far(prop: WeightedDensityProperty, g: Graph, eps) -> bool:
    return distance_to_property(prop, g) >= farness_thresholds(g.n, eps)["pairs"]


# ---------------------------------------------------------------------------
# proximity-oblivious testers


@dataclass(frozen=True)
class PotSpec:
    """Sample ``h`` vertices, reject with probability ``reject_prob[class]``."""

    h: int
    reject_prob: Mapping[int, Fraction]
    c: Fraction
    f: Callable[[float], Fraction] | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        for p in self.reject_prob.values():
            if not 0 <= p <= 1:
                raise ValueError("rejection probabilities must lie in [0, 1]")
        if not 0 < self.c <= 1:
            raise ValueError("acceptance constant c must lie in (0, 1]")

    def rejection_probability(self, g: Graph) -> Fraction:
        """Exact probability that one run rejects ``g``."""
        return z_value(WeightedDensityProperty(self.h, self.reject_prob, ZERO), g)

    def acceptance_probability(self, g: Graph) -> Fraction:
        return 1 - self.rejection_probability(g)


def pot_from_property(
    prop: WeightedDensityProperty,
    normalize: bool = True,
    f: Callable[[float], Fraction] | None = None,
) -> PotSpec:
    """The tester that rejects a sampled copy of H with probability w_H.

    Weights above 1 are divided by the largest weight (and ``b`` with them)
    when ``normalize`` is set.
    """
    weights, b = dict(prop.weights), prop.b
    top = max(weights.values(), default=ZERO)
    if top > 1:
        if not normalize:
            raise ValueError("weights exceed 1; enable normalisation")
        weights = {c: w / top for c, w in weights.items()}
        b = b / top
    return PotSpec(prop.h, weights, 1 - b, f, prop.name)
