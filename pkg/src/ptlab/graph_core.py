"""Graphs, small-graph isomorphism classes, generators and the text formats.

A :class:`Graph` keeps one packed bit row per vertex (a Python ``int``; bit
``v`` of row ``u`` is set iff ``uv`` is an edge).  Kernels that want dense
linear algebra use :attr:`Graph.matrix`, a cached read-only 0/1 array.

Small graphs (at most 8 vertices) are also handled as *pair masks*: bit ``i``
of the mask is the ``i``-th vertex pair in lexicographic order
``(0,1), (0,2), ..., (0,k-1), (1,2), ...``.  The canonical code of a small
graph is the smallest pair mask over all relabelings.
"""

from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .seeding import rng_for

MAX_SMALL_ORDER = 8


class GraphFormatError(ValueError):
    """Malformed graph file; ``line`` is 1-based (0 when not line specific)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class GraphTooLargeError(ValueError):
    pass


class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``."""

    __slots__ = ("n", "rows", "_matrix")

    def __init__(self, n: int, rows: Sequence[int]):
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        rows = tuple(int(r) for r in rows)
        if len(rows) != n:
            raise ValueError(f"expected {n} rows, got {len(rows)}")
        full = (1 << n) - 1
        for u, r in enumerate(rows):
            if r & ~full:
                raise ValueError(f"row {u} has bits outside 0..{n - 1}")
            if (r >> u) & 1:
                raise ValueError(f"self-loop at vertex {u}")
            for v in _bits(r):
                if not (rows[v] >> u) & 1:
                    raise ValueError(f"asymmetric adjacency at ({u}, {v})")
        self.n = n
        self.rows = rows
        self._matrix: np.ndarray | None = None

    # construction -------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, rows)

    @classmethod
    def from_matrix(cls, a: np.ndarray) -> "Graph":
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency matrix must be square")
        a = a.astype(bool)
        if a.diagonal().any():
            raise ValueError("adjacency matrix has a nonzero diagonal")
        if (a != a.T).any():
            raise ValueError("adjacency matrix is not symmetric")
        n = a.shape[0]
        if n == 0:
            return cls(0, ())
        packed = np.packbits(a, axis=1, bitorder="little")
        rows = [int.from_bytes(packed[u].tobytes(), "little") for u in range(n)]
        g = cls.__new__(cls)
        g.n, g.rows = n, tuple(rows)
        g._matrix = None
        return g

    @classmethod
    def from_mask(cls, mask: int, k: int) -> "Graph":
        return cls.from_edges(k, (p for i, p in enumerate(pairs(k)) if (mask >> i) & 1))

    # views ---------------------------------------------------------------

    @property
    def matrix(self) -> np.ndarray:
        """Dense 0/1 ``uint8`` adjacency matrix (read-only, cached)."""
        if self._matrix is None:
            n = self.n
            if n == 0:
                a = np.zeros((0, 0), dtype=np.uint8)
            else:
                nbytes = (n + 7) // 8
                buf = b"".join(r.to_bytes(nbytes, "little") for r in self.rows)
                raw = np.frombuffer(buf, dtype=np.uint8).reshape(n, nbytes)
                a = np.unpackbits(raw, axis=1, bitorder="little", count=n)
            a.setflags(write=False)
            self._matrix = a
        return self._matrix

    @property
    def m(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def degrees(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, r in enumerate(self.rows) for v in _bits(r >> (u + 1) << (u + 1))]

    def induced(self, vertices: Sequence[int]) -> "Graph":
        """Subgraph induced on ``vertices``; vertex ``vertices[i]`` becomes ``i``."""
        vs = list(vertices)
        if len(set(vs)) != len(vs):
            raise ValueError("repeated vertex in induced subgraph")
        rows = []
        for u in vs:
            r = self.rows[u]
            rows.append(sum(1 << i for i, v in enumerate(vs) if (r >> v) & 1))
        return Graph(len(vs), rows)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with an edge ``perm[u] perm[v]`` for every edge ``uv``."""
        if sorted(perm) != list(range(self.n)):
            raise ValueError("not a permutation of the vertex set")
        return Graph.from_edges(self.n, ((perm[u], perm[v]) for u, v in self.edges()))

    def mask(self) -> int:
        """Pair mask of a graph on at most 8 vertices."""
        if self.n > MAX_SMALL_ORDER:
            raise GraphTooLargeError(f"pair masks need n <= {MAX_SMALL_ORDER}")
        return sum(1 << i for i, (u, v) in enumerate(pairs(self.n)) if self.has_edge(u, v))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.n, self.rows))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def _bits(x: int) -> Iterable[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


# generators ---------------------------------------------------------------


def complement(g: Graph) -> Graph:
    full = (1 << g.n) - 1
    return Graph(g.n, [(~r & full) & ~(1 << u) for u, r in enumerate(g.rows)])


def random_graph(n: int, seed: int) -> Graph:
    """G(n, 1/2): one fair bit per pair, pairs in lexicographic order.

    Bits come from ``rng_for(seed).integers(0, 2, size=n*(n-1)//2)``, so a
    given ``(n, seed)`` yields the same graph everywhere.
    """
    if n < 0:
        raise ValueError("vertex count must be nonnegative")
    a = np.zeros((n, n), dtype=bool)
    if n >= 2:
        bits = rng_for(seed).integers(0, 2, size=n * (n - 1) // 2, dtype=np.uint8)
        iu = np.triu_indices(n, 1)
        a[iu] = bits.astype(bool)
        a |= a.T
    return Graph.from_matrix(a)


@dataclass(frozen=True)
class BlowupStructure:
    base: Graph
    k: int
    parts: tuple[tuple[int, ...], ...]

    def part_of(self, v: int) -> int:
        return v // self.k

    def to_json(self) -> dict:
        return {"base_n": self.base.n, "k": self.k, "parts": [list(p) for p in self.parts]}


def blowup(g: Graph, k: int) -> tuple[Graph, BlowupStructure]:
    """Replace vertex ``v`` by the independent set ``v*k .. v*k+k-1``."""
    if k < 1:
        raise ValueError("blowup factor must be >= 1")
    a = np.kron(g.matrix.astype(bool), np.ones((k, k), dtype=bool))
    parts = tuple(tuple(range(v * k, (v + 1) * k)) for v in range(g.n))
    return Graph.from_matrix(a), BlowupStructure(g, k, parts)


# named graphs ---------------------------------------------------------------

_BASE_EDGES = {
    "K4": [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
    "D4": [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)],
    "P3": [(0, 1), (1, 2)],
    "C4": [(0, 1), (1, 2), (2, 3), (0, 3)],
    "K13": [(0, 1), (0, 2), (0, 3)],
    "P4": [(0, 1), (1, 2), (2, 3)],
}

_FAMILY = re.compile(r"^(Kn|En|Cn)\((\d+)\)$")


def named_graph(name: str, n: int | None = None) -> Graph:
    """Look up a named graph.

    The eleven 4-vertex names are ``K4 D4 P3 C4 K13 P4`` and the complements
    ``K4c D4c P3c C4c K13c``.  The families ``Kn``, ``En`` (edgeless) and
    ``Cn`` take a size, either as ``n`` or inline as ``"Kn(7)"``.
    """
    match = _FAMILY.match(name)
    if match:
        name, n = match.group(1), int(match.group(2))
    if name in ("Kn", "En", "Cn"):
        if n is None or n < 0:
            raise ValueError(f"{name} needs a nonnegative size")
        if name == "En":
            return Graph(n, [0] * n)
        if name == "Kn":
            return complement(Graph(n, [0] * n))
        if n < 3:
            raise ValueError("Cn needs n >= 3")
        return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))
    if name in _BASE_EDGES:
        return Graph.from_edges(4, _BASE_EDGES[name])
    if name.endswith("c") and name[:-1] in _BASE_EDGES:
        return complement(named_graph(name[:-1]))
    raise KeyError(f"unknown graph name {name!r}")


# small-graph isomorphism ----------------------------------------------------


@lru_cache(maxsize=None)
def pairs(k: int) -> tuple[tuple[int, int], ...]:
    return tuple(itertools.combinations(range(k), 2))


@lru_cache(maxsize=None)
def _pair_index(k: int) -> np.ndarray:
    idx = np.full((k, k), -1, dtype=np.int64)
    for i, (u, v) in enumerate(pairs(k)):
        idx[u, v] = idx[v, u] = i
    return idx


@lru_cache(maxsize=None)
def _perm_weights(k: int) -> np.ndarray:
    """``W[p, i] = 2**j`` where pair ``i`` maps to pair ``j`` under permutation ``p``."""
    if k > MAX_SMALL_ORDER:
        raise GraphTooLargeError(f"brute-force isomorphism supports n <= {MAX_SMALL_ORDER}")
    perms = np.array(list(itertools.permutations(range(k))), dtype=np.int64).reshape(-1, k)
    pu = np.array([p[0] for p in pairs(k)], dtype=np.int64)
    pv = np.array([p[1] for p in pairs(k)], dtype=np.int64)
    target = _pair_index(k)[perms[:, pu], perms[:, pv]]
    # float64 is exact for masks below 2**53 and lets the batch path use BLAS
    return np.exp2(target).astype(np.float64)


def _mask_bits(masks: np.ndarray, k: int) -> np.ndarray:
    npairs = k * (k - 1) // 2
    shifts = np.arange(npairs, dtype=np.int64)
    return ((masks[:, None] >> shifts) & 1).astype(np.float64)


def permuted_masks(mask: int, k: int) -> np.ndarray:
    """Pair masks of all ``k!`` relabelings of the graph ``mask``."""
    bits = _mask_bits(np.array([mask], dtype=np.int64), k)[0]
    return (_perm_weights(k) @ bits).astype(np.int64)


@lru_cache(maxsize=1 << 16)
def canonical_mask(mask: int, k: int) -> int:
    """Smallest pair mask isomorphic to ``mask`` (brute force, ``k <= 8``)."""
    if k <= 1:
        return 0
    return int(permuted_masks(mask, k).min())


def canonical_masks(masks: np.ndarray, k: int) -> np.ndarray:
    """Vectorised :func:`canonical_mask` over an array of pair masks."""
    masks = np.asarray(masks, dtype=np.int64)
    if k <= 1 or masks.size == 0:
        return np.zeros_like(masks)
    uniq, inverse = np.unique(masks, return_inverse=True)
    out = np.empty(uniq.shape, dtype=np.int64)
    w = _perm_weights(k)
    step = max(1, (1 << 22) // w.shape[0])
    for start in range(0, uniq.size, step):
        block = uniq[start : start + step]
        vals = _mask_bits(block, k) @ w.T
        out[start : start + step] = vals.min(axis=1).astype(np.int64)
    return out[inverse].reshape(masks.shape)


def canonical_code(g: Graph) -> int:
    return canonical_mask(g.mask(), g.n)


def is_isomorphic_small(g: Graph, h: Graph) -> bool:
    return g.n == h.n and canonical_code(g) == canonical_code(h)


def aut_count(h: Graph) -> int:
    """Number of automorphisms, by checking all ``n!`` permutations."""
    if h.n > MAX_SMALL_ORDER:
        raise GraphTooLargeError(f"aut_count supports n <= {MAX_SMALL_ORDER}")
    if h.n <= 1:
        return 1
    return int((permuted_masks(h.mask(), h.n) == h.mask()).sum())


@lru_cache(maxsize=None)
def graph_classes(k: int) -> tuple[int, ...]:
    """Canonical masks of all isomorphism classes on ``k`` vertices, sorted.

    Built by adding one vertex with every possible neighbourhood to each
    class on ``k - 1`` vertices and canonicalising.
    """
    if k > MAX_SMALL_ORDER:
        raise GraphTooLargeError(f"class enumeration supports k <= {MAX_SMALL_ORDER}")
    if k <= 1:
        return (0,)
    prev = np.array(graph_classes(k - 1), dtype=np.int64)
    # pairs (i, k-1) occupy positions after re-indexing the (k-1)-vertex masks
    old_idx = _pair_index(k)[: k - 1, : k - 1]
    remap = np.array([old_idx[u, v] for u, v in pairs(k - 1)], dtype=np.int64)
    lifted = np.zeros_like(prev)
    for i, j in enumerate(remap):
        lifted |= ((prev >> i) & 1) << j
    new_pos = _pair_index(k)[np.arange(k - 1), k - 1]
    nbhd = np.zeros(1 << (k - 1), dtype=np.int64)
    for s in range(k - 1):
        nbhd |= ((np.arange(1 << (k - 1)) >> s) & 1) << new_pos[s]
    candidates = (lifted[:, None] | nbhd[None, :]).ravel()
    return tuple(int(c) for c in np.unique(canonical_masks(candidates, k)))


# the eleven 4-vertex classes ------------------------------------------------


class Four(enum.IntEnum):
    """4-vertex classes in the order of the weight table (complements paired)."""

    K4 = 0
    K4c = 1
    D4 = 2
    D4c = 3
    P3 = 4
    P3c = 5
    C4 = 6
    C4c = 7
    K13 = 8
    K13c = 9
    P4 = 10

    @property
    def complement(self) -> "Four":
        return self if self is Four.P4 else Four(self ^ 1)

    @property
    def graph(self) -> Graph:
        return named_graph(self.name)

    @property
    def code(self) -> int:
        return FOUR_CODES[self]


FOUR_CODES: tuple[int, ...] = tuple(canonical_code(named_graph(c.name)) for c in Four)


def _build_class4_table() -> np.ndarray:
    canon = canonical_masks(np.arange(64, dtype=np.int64), 4)
    lookup = {code: i for i, code in enumerate(FOUR_CODES)}
    table = np.array([lookup[int(c)] for c in canon], dtype=np.int8)
    table.setflags(write=False)
    return table


CLASS4_TABLE = _build_class4_table()
"""Class index (0..10) of each of the 64 labeled 4-vertex pair masks."""


def classify4(h: Graph) -> Four:
    if h.n != 4:
        raise ValueError(f"classify4 needs a 4-vertex graph, got n={h.n}")
    return Four(int(CLASS4_TABLE[h.mask()]))


def class_name(k: int, code: int) -> str:
    if k == 4:
        return Four(FOUR_CODES.index(code)).name
    return f"G{k}:{code}"


def resolve_class(spec: "Four | str | int | Graph", k: int | None = None) -> tuple[int, int]:
    """Normalise a class designator to ``(order, canonical mask)``."""
    if isinstance(spec, Four):
        return 4, spec.code
    if isinstance(spec, Graph):
        return spec.n, canonical_code(spec)
    if isinstance(spec, str):
        if spec in Four.__members__:
            return 4, Four[spec].code
        g = named_graph(spec)
        return g.n, canonical_code(g)
    if k is None:
        raise ValueError("an integer class code needs its order k")
    return k, canonical_mask(int(spec), k)


# text formats --------------------------------------------------------------


def parse_graph(text: str) -> Graph:
    """Parse the edge-list or adjacency-matrix format.

    Edge list: a header ``n m`` then exactly ``m`` lines ``u v``.
    Matrix: a header ``n`` then ``n`` lines of ``n`` characters in ``{0,1}``.
    Blank lines and ``#`` comments are ignored.
    """
    lines = [
        (i + 1, line.split("#", 1)[0].strip())
        for i, line in enumerate(text.splitlines())
    ]
    lines = [(i, s) for i, s in lines if s]
    if not lines:
        raise GraphFormatError("empty graph file", 1)
    hline, header = lines[0]
    fields = header.split()
    if not all(re.fullmatch(r"\d+", f) for f in fields) or len(fields) not in (1, 2):
        raise GraphFormatError(f"malformed header {header!r}", hline)
    if len(fields) == 1:
        return _parse_matrix(int(fields[0]), lines[1:], hline)
    return _parse_edges(int(fields[0]), int(fields[1]), lines[1:], hline)


def _parse_edges(n: int, m: int, body: list[tuple[int, str]], hline: int) -> Graph:
    if m > n * (n - 1) // 2:
        raise GraphFormatError(f"{m} edges cannot fit on {n} vertices", hline)
    if len(body) != m:
        where = body[m][0] if len(body) > m else (body[-1][0] + 1 if body else hline + 1)
        raise GraphFormatError(f"expected {m} edge lines, found {len(body)}", where)
    rows = [0] * n
    for line, s in body:
        parts = s.split()
        if len(parts) != 2 or not all(re.fullmatch(r"\d+", p) for p in parts):
            raise GraphFormatError(f"malformed edge line {s!r}", line)
        u, v = int(parts[0]), int(parts[1])
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", line)
        if u >= n or v >= n:
            raise GraphFormatError(f"vertex id {max(u, v)} >= n={n}", line)
        if (rows[u] >> v) & 1:
            raise GraphFormatError(f"duplicate edge {min(u, v)} {max(u, v)}", line)
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return Graph(n, rows)


def _parse_matrix(n: int, body: list[tuple[int, str]], hline: int) -> Graph:
    if len(body) != n:
        raise GraphFormatError(f"expected {n} matrix rows, found {len(body)}", hline)
    a = np.zeros((n, n), dtype=bool)
    for u, (line, s) in enumerate(body):
        s = s.replace(" ", "")
        if len(s) != n or set(s) - {"0", "1"}:
            raise GraphFormatError(f"matrix row must be {n} characters from {{0,1}}", line)
        a[u] = [c == "1" for c in s]
        if a[u, u]:
            raise GraphFormatError(f"self-loop at vertex {u}", line)
    bad = np.argwhere(a != a.T)
    if bad.size:
        u = int(bad[:, 0].max())
        raise GraphFormatError(f"matrix is not symmetric at ({u}, {int(bad[bad[:, 0] == u][0, 1])})", body[u][0])
    return Graph.from_matrix(a)


def format_graph(g: Graph) -> str:
    """Edge-list text with edges sorted lexicographically."""
    edges = g.edges()
    return "".join([f"{g.n} {len(edges)}\n"] + [f"{u} {v}\n" for u, v in edges])


def labeled_graph_count(n: int) -> int:
    return 1 << math.comb(n, 2)
