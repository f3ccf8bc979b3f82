"""Quasirandomness: the cut-discrepancy definition and the edge/C4 criterion.

A graph is delta-quasirandom when every pair of disjoint vertex sets U, V
with |U|, |V| >= delta*n spans (1/2 +- delta)|U||V| edges.

For a fixed U, the edge count e(U, V) over t-subsets V of the remaining
vertices is extremal at the t vertices with the most (or fewest) neighbours
in U.  The exact check therefore walks every U and only the two extremal V
of each size, which decides the full definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .density import ZERO, four_profile, frac_str, kst_defect, t_inj
from .graph_core import BlowupStructure, Four, Graph, random_graph
from .property_pi import BUILTIN_PROPERTY, WeightedDensityProperty, is_member, phi_value
from .seeding import derive_seed, rng_for

EXACT_MAX_N = 14
HALF = Fraction(1, 2)


def as_fraction(x) -> Fraction:
    """Exact value of ``x``; floats go through their shortest decimal repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass
class QuasirandomReport:
    delta: float
    mode: str
    verdict: str  # "quasirandom", "not quasirandom" or "no violation found"
    witness: tuple[list[int], list[int]] | None
    edge_density: Fraction
    c4_density: Fraction
    kst_defect: Fraction
    pairs_checked: int = 0

    @property
    def quasirandom(self) -> bool | None:
        return {"quasirandom": True, "not quasirandom": False}.get(self.verdict)

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "mode": self.mode,
            "verdict": self.verdict,
            "witness": None if self.witness is None else {"U": self.witness[0], "V": self.witness[1]},
            "edge_density": frac_str(self.edge_density),
            "c4_density": frac_str(self.c4_density),
            "kst_defect": frac_str(self.kst_defect),
            "pairs_checked": self.pairs_checked,
        }


def pair_violation(g: Graph, u_set, v_set, delta) -> bool:
    """True if (U, V) qualifies by size and its edge count leaves (1/2 +- delta)|U||V|."""
    delta = as_fraction(delta)
    u_set, v_set = sorted(set(u_set)), sorted(set(v_set))
    if set(u_set) & set(v_set):
        raise ValueError("U and V must be disjoint")
    need = min_part_size(g.n, delta)
    if len(u_set) < need or len(v_set) < need:
        return False
    e = int(g.matrix[np.ix_(u_set, v_set)].sum())
    uv = len(u_set) * len(v_set)
    return abs(Fraction(e) - HALF * uv) > delta * uv


def min_part_size(n: int, delta: Fraction) -> int:
    return max(1, math.ceil(delta * n))


def _scan(g: Graph, umasks: np.ndarray, delta: Fraction, sizes: np.ndarray | None = None):
    """Check each U (bool rows) against its extremal V; return the first witness.

    ``sizes`` optionally pins |V| per row; otherwise every admissible size is
    tried.  Returns ``(U, V)`` vertex lists or ``None``.
    """
    n = g.n
    k = min_part_size(n, delta)
    a = g.matrix.astype(np.int64)
    p, q = delta.numerator, delta.denominator
    usz = umasks.sum(axis=1)
    d = umasks.astype(np.int64) @ a  # neighbours in U, per vertex
    big = n + 1
    asc = np.where(umasks, big, d)
    desc = np.where(umasks, -1, d)
    order_lo = np.argsort(asc, axis=1, kind="stable")
    order_hi = np.argsort(-desc, axis=1, kind="stable")
    lo = np.cumsum(np.take_along_axis(asc, order_lo, axis=1), axis=1)
    hi = np.cumsum(np.take_along_axis(desc, order_hi, axis=1), axis=1)
    for t in range(k, n - k + 1):
        ok = (usz >= k) & (usz + t <= n)
        if sizes is not None:
            ok &= sizes == t
        if not ok.any():
            continue
        uv = usz * t
        for sums, order in ((hi[:, t - 1], order_hi), (lo[:, t - 1], order_lo)):
            bad = ok & (q * np.abs(2 * sums - uv) > 2 * p * uv)
            if bad.any():
                r = int(np.flatnonzero(bad)[0])
                u_list = sorted(int(x) for x in np.flatnonzero(umasks[r]))
                v_list = sorted(int(x) for x in order[r, :t])
                return u_list, v_list
    return None


def is_delta_quasirandom(
    g: Graph,
    delta,
    mode: str = "exact",
    budget: int = 100_000,
    seed: int = 0,
) -> QuasirandomReport:
    """Check delta-quasirandomness.

    ``exact`` (n <= 14) decides the definition.  ``sampled`` draws ``budget``
    random sets U with |U| uniform in [ceil(delta n), n/2], pairs each with an
    extremal V of random admissible size, and can only refute.
    """
    delta_f = as_fraction(delta)
    n = g.n
    k = min_part_size(n, delta_f)
    witness = None
    checked = 0
    if mode == "exact":
        if n > EXACT_MAX_N:
            raise ValueError(f"exact mode enumerates 2^n sets; n <= {EXACT_MAX_N}")
        if 2 * k <= n:
            ids = np.arange(1 << n, dtype=np.int64)
            umasks = ((ids[:, None] >> np.arange(n)) & 1).astype(bool)
            sz = umasks.sum(axis=1)
            umasks = umasks[(sz >= k) & (sz <= n - k)]
            checked = len(umasks)
            witness = _scan(g, umasks, delta_f)
        verdict = "quasirandom" if witness is None else "not quasirandom"
    elif mode == "sampled":
        if 2 * k <= n:
            rng = rng_for(seed)
            batch = max(1, min(budget, (1 << 22) // max(n, 1)))
            done = 0
            while done < budget and witness is None:
                size = min(batch, budget - done)
                usz = rng.integers(k, n // 2 + 1, size=size)
                tsz = np.minimum(rng.integers(k, n // 2 + 1, size=size), n - usz)
                keys = rng.random((size, n))
                rank = np.argsort(np.argsort(keys, axis=1), axis=1)
                umasks = rank < usz[:, None]
                witness = _scan(g, umasks, delta_f, sizes=tsz)
                done += size
            checked = done
        verdict = "no violation found" if witness is None else "not quasirandom"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if witness is not None:
        assert pair_violation(g, *witness, delta_f)
    prof = four_profile(g) if n >= 4 else None
    return QuasirandomReport(
        delta=float(delta_f),
        mode=mode,
        verdict=verdict,
        witness=witness,
        edge_density=t_inj("K2", g) if n >= 2 else ZERO,
        c4_density=t_inj(Four.C4, g, prof) if n >= 4 else ZERO,
        kst_defect=kst_defect(g, prof) if n >= 4 else ZERO,
        pairs_checked=checked,
    )


def blowup_part_witness(g: Graph, structure: BlowupStructure, delta) -> tuple[list[int], list[int]] | None:
    """A pair of blowup parts violating delta-quasirandomness, if one exists."""
    base = structure.base
    for i in range(base.n):
        for j in range(i + 1, base.n):
            u, v = list(structure.parts[i]), list(structure.parts[j])
            if pair_violation(g, u, v, delta):
                return u, v
    return None


# ---------------------------------------------------------------------------
# edge / C4 criterion


@dataclass(frozen=True)
class CgwParams:
    gamma: Fraction
    n0: int = 4
    source: str = "configured"

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.n0 < 4:
            raise ValueError("n0 must be at least 4")

    @classmethod
    def from_size(cls, n: int, c: float = 8.0) -> "CgwParams":
        """gamma = sqrt(c / n), the default window for n-vertex members."""
        return cls(as_fraction(math.sqrt(c / n)), 4, "derived-from-n")


def cgw_check(g: Graph, gamma) -> bool:
    """t_inj(K2) = 1/2 +- gamma and t_inj(C4) <= 1/16 + gamma, compared exactly."""
    if g.n < 4:
        raise ValueError("cgw_check needs n >= 4")
    gamma = as_fraction(gamma.gamma if isinstance(gamma, CgwParams) else gamma)
    k2 = t_inj("K2", g)
    c4 = t_inj(Four.C4, g)
    return abs(k2 - HALF) <= gamma and c4 <= Fraction(1, 16) + gamma


def cgw_min_gamma(g: Graph) -> Fraction:
    """Smallest gamma >= 0 at which :func:`cgw_check` passes."""
    k2 = t_inj("K2", g)
    c4 = t_inj(Four.C4, g)
    return max(ZERO, abs(k2 - HALF), c4 - Fraction(1, 16))


def f_window(x) -> Fraction:
    """2x^4 - x + 3/8, the edge-density penalty; zero only at x = 1/2."""
    x = as_fraction(x)
    return 2 * x**4 - x + Fraction(3, 8)


def f_shift_coefficients(sign: int) -> list[Fraction]:
    """Coefficients (constant first) of f(1/2 + sign*g) as a polynomial in g."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    # (1/2 + s g)^4 by the binomial theorem
    quartic = [Fraction(math.comb(4, i)) * HALF ** (4 - i) * sign**i for i in range(5)]
    coeffs = [2 * c for c in quartic]
    coeffs[0] += -HALF + Fraction(3, 8)
    coeffs[1] += -sign
    return coeffs


def poly_eval(coeffs: list[Fraction], x) -> Fraction:
    x = as_fraction(x)
    return sum((c * x**i for i, c in enumerate(coeffs)), ZERO)


# ---------------------------------------------------------------------------
# audit of members


@dataclass
class MemberRecord:
    seed: int
    n: int
    t_k2: Fraction
    t_c4: Fraction
    phi: Fraction
    kst_defect: Fraction
    f_value: Fraction
    chain_ok: bool
    c4_bound_ok: bool
    window_ok: bool
    cgw_pass: bool
    min_gamma: Fraction

    def to_json(self) -> dict:
        out = {}
        for key, val in self.__dict__.items():
            out[key] = frac_str(val) if isinstance(val, Fraction) else val
        return out


@dataclass
class AuditReport:
    n: int
    samples: int
    gamma: float
    members: list[MemberRecord] = field(default_factory=list)

    @property
    def found(self) -> int:
        return len(self.members)

    @property
    def all_ok(self) -> bool:
        return all(r.chain_ok and r.c4_bound_ok and r.window_ok for r in self.members)

    @property
    def max_gamma_sqrt_n(self) -> float:
        return max((float(r.min_gamma) * math.sqrt(self.n) for r in self.members), default=0.0)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "samples": self.samples,
            "gamma": self.gamma,
            "members_found": self.found,
            "all_ok": self.all_ok,
            "cgw_pass": sum(r.cgw_pass for r in self.members),
            "max_min_gamma_sqrt_n": self.max_gamma_sqrt_n,
            "members": [r.to_json() for r in self.members],
        }


def audit_member(g: Graph, gamma, seed: int = 0) -> MemberRecord:
    """Check the density chain that forces a member towards quasirandomness."""
    gamma_f = as_fraction(gamma)
    prof = four_profile(g)
    k2 = t_inj("K2", g)
    c4 = t_inj(Four.C4, g, prof)
    phi = phi_value(g, prof)
    defect = kst_defect(g, prof)
    fx = f_window(k2)
    chain = fx <= phi + 2 * defect <= 2 * defect
    c4_ok = c4 <= k2 / 2 - Fraction(3, 16)
    # small defect forces the edge density into the gamma window
    window_ok = defect > gamma_f**2 / 2 or abs(k2 - HALF) <= gamma_f
    return MemberRecord(
        seed=seed, n=g.n, t_k2=k2, t_c4=c4, phi=phi, kst_defect=defect, f_value=fx,
        chain_ok=chain, c4_bound_ok=c4_ok, window_ok=window_ok,
        cgw_pass=cgw_check(g, gamma_f), min_gamma=cgw_min_gamma(g),
    )


def member_quasirandomness_audit(
    prop: WeightedDensityProperty | None,
    n: int,
    samples: int,
    gamma=None,
    seed: int = 0,
) -> AuditReport:
    """Rejection-sample members from G(n, 1/2) and audit each one.

    Graph ``i`` uses seed ``derive_seed(seed, i)``.  Finding no member is
    reported through ``found == 0``, not raised.
    """
    prop = prop or BUILTIN_PROPERTY
    gamma_f = CgwParams.from_size(n).gamma if gamma is None else as_fraction(gamma)
    report = AuditReport(n, samples, float(gamma_f))
    for i in range(samples):
        gseed = derive_seed(seed, i)
        g = random_graph(n, gseed)
        prof = four_profile(g)
        if is_member(prop, g, prof):
            report.members.append(audit_member(g, gamma_f, gseed))
    return report
