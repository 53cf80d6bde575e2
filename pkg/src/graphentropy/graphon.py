"""Step-function graphons, motif densities and the large-deviation rate function.

A graphon is stored as a symmetric m x m matrix of block values on the uniform
grid of the unit square.  All densities are finite sums and therefore exact for
this class of kernels.

Gradient convention used throughout: for any density functional F the returned
matrix D satisfies  dF = (1/m^2) * sum_ij D[i,j] * dA[i,j]  for symmetric
perturbations dA, i.e. D is m^2 times the per-entry partial derivative, which
equals the continuum functional-derivative density averaged over each block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetricMatrix,
    DisconnectedMotif,
    DuplicateEdge,
    EmptyMatrix,
    FormatError,
    LoopEdge,
    MotifTooLarge,
    ValueOutOfRange,
)

MAX_MOTIF_VERTICES = 6
# Keeps I0' finite on the closed box; iterates live in [CLAMP, 1-CLAMP].
CLAMP = 1e-12

_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Graphon:
    """Symmetric step function on [0,1]^2 with values in [0,1]."""

    values: np.ndarray

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def __post_init__(self):
        self.values.setflags(write=False)


@dataclass(frozen=True)
class Motif:
    """Small simple connected graph H whose density constrains the optimization."""

    ell: int
    edges: frozenset  # frozenset of (i, j) with 1 <= i < j <= ell

    @property
    def k(self) -> int:
        return len(self.edges)

    @property
    def name(self) -> str:
        if self == Motif.triangle():
            return "triangle"
        if self.edges == Motif.star(self.ell - 1).edges and self.ell >= 2:
            return f"star:{self.ell - 1}"
        return f"motif(ell={self.ell},k={self.k})"

    @classmethod
    def from_edges(cls, ell, edges):
        seen = set()
        norm = []
        for (i, j) in edges:
            if i == j:
                raise LoopEdge(f"loop at vertex {i}")
            if not (1 <= i <= ell and 1 <= j <= ell):
                raise ValueOutOfRange(f"edge ({i},{j}) outside 1..{ell}")
            e = (min(i, j), max(i, j))
            if e in seen:
                raise DuplicateEdge(f"duplicate edge {e}")
            seen.add(e)
            norm.append(e)
        if ell > MAX_MOTIF_VERTICES:
            raise MotifTooLarge(f"ell={ell} exceeds cap {MAX_MOTIF_VERTICES}")
        motif = cls(ell=ell, edges=frozenset(norm))
        if not motif._connected():
            raise DisconnectedMotif("motif must be connected")
        return motif

    @classmethod
    def edge(cls):
        return cls.from_edges(2, [(1, 2)])

    @classmethod
    def triangle(cls):
        return cls.from_edges(3, [(1, 2), (1, 3), (2, 3)])

    @classmethod
    def star(cls, k):
        if k < 1:
            raise ValueOutOfRange("star needs k >= 1")
        return cls.from_edges(k + 1, [(1, j) for j in range(2, k + 2)])

    @classmethod
    def parse(cls, text):
        """Parse 'triangle', 'edge' or 'star:k' shorthand."""
        if text == "triangle":
            return cls.triangle()
        if text == "edge":
            return cls.edge()
        if text.startswith("star:"):
            return cls.star(int(text.split(":", 1)[1]))
        raise ValueOutOfRange(f"unknown motif shorthand {text!r}")

    def _connected(self):
        if self.ell == 1:
            return True
        adj = {v: set() for v in range(1, self.ell + 1)}
        for (i, j) in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        seen = {1}
        stack = [1]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.ell


@dataclass(frozen=True)
class DensityPair:
    e: float
    t: float

    def __post_init__(self):
        if not (0.0 <= self.e <= 1.0 and 0.0 <= self.t <= 1.0):
            raise ValueOutOfRange(f"densities ({self.e},{self.t}) outside [0,1]")


def validate(values) -> Graphon:
    """Check symmetry / range invariants and wrap the matrix as a Graphon."""
    a = np.array(values, dtype=float)
    if a.size == 0:
        raise EmptyMatrix("graphon matrix is empty")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise AsymmetricMatrix(f"matrix shape {a.shape} is not square")
    if not np.allclose(a, a.T, atol=_SYMMETRY_TOL, rtol=0):
        raise AsymmetricMatrix("matrix is not symmetric")
    if np.any(a < 0.0) or np.any(a > 1.0):
        raise ValueOutOfRange("graphon values must lie in [0,1]")
    return Graphon(values=0.5 * (a + a.T))


def constant_graphon(a, m=1) -> Graphon:
    if not (0.0 <= a <= 1.0):
        raise ValueOutOfRange(f"constant value {a} outside [0,1]")
    return Graphon(values=np.full((m, m), float(a)))


def embed_graph(n, edges) -> Graphon:
    """0-1 graphon of a labeled simple graph on n vertices (1-based edges)."""
    a = np.zeros((n, n))
    seen = set()
    for (i, j) in edges:
        if i == j:
            raise LoopEdge(f"loop at vertex {i}")
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValueOutOfRange(f"edge ({i},{j}) outside 1..{n}")
        e = (min(i, j), max(i, j))
        if e in seen:
            raise DuplicateEdge(f"duplicate edge {e}")
        seen.add(e)
        a[i - 1, j - 1] = a[j - 1, i - 1] = 1.0
    return Graphon(values=a)


def bipodal_graphon(c, p11, p12, p22, m) -> Graphon:
    """Two-cluster step graphon; the split point c is rounded to the grid."""
    for p in (p11, p12, p22):
        if not (0.0 <= p <= 1.0):
            raise ValueOutOfRange(f"block value {p} outside [0,1]")
    if not (0.0 < c < 1.0):
        raise ValueOutOfRange(f"split {c} outside (0,1)")
    mc = int(round(c * m))
    mc = min(max(mc, 0), m)
    a = np.full((m, m), float(p22))
    a[:mc, :mc] = p11
    a[:mc, mc:] = p12
    a[mc:, :mc] = p12
    return Graphon(values=a)


def snap_split(c, m):
    """Grid-rounded value of a bipodal split point."""
    return min(max(int(round(c * m)), 0), m) / m


def edge_density(g: Graphon) -> float:
    return float(np.mean(g.values))


_IDX = "abcdef"


def _density_einsum(motif: Motif):
    return ",".join(_IDX[i - 1] + _IDX[j - 1] for (i, j) in sorted(motif.edges))


def _is_star(motif: Motif) -> bool:
    return motif.ell >= 2 and motif.edges == frozenset(
        (1, j) for j in range(2, motif.ell + 1)
    )


def _motif_density_einsum(a, m, motif: Motif) -> float:
    val = np.einsum(_density_einsum(motif) + "->", *([a] * motif.k), optimize=True)
    return float(val) / m ** motif.ell


def motif_density(g: Graphon, motif: Motif) -> float:
    """Homomorphism density t(H, g), exact for step graphons.

    Contracted with an optimized elimination order, so triangles cost O(m^3)
    and k-stars O(m^2) rather than m^ell.
    """
    if motif.ell > MAX_MOTIF_VERTICES:
        raise MotifTooLarge(f"ell={motif.ell} exceeds cap {MAX_MOTIF_VERTICES}")
    if not motif.edges:
        return 1.0
    a = g.values
    m = g.m
    if motif == Motif.triangle():
        return float(np.sum((a @ a) * a)) / m ** 3
    if _is_star(motif):
        r = np.mean(a, axis=1)
        return float(np.mean(r ** motif.k))
    return _motif_density_einsum(a, m, motif)


def _pinned_field(a, m, ell, rest_edges, va, vb):
    """Block field of the density with one edge factor removed and its endpoints
    pinned to (block of x, block of y); divided by m^(ell-2)."""
    ops, subs = [], []
    covered = set()
    for (i, j) in rest_edges:
        subs.append(_IDX[i - 1] + _IDX[j - 1])
        ops.append(a)
        covered.update((i, j))
    ones = np.ones(m)
    for v in range(1, ell + 1):
        if v not in covered and v not in (va, vb):
            subs.append(_IDX[v - 1])
            ops.append(ones)
    for v in (va, vb):
        if v not in covered:
            subs.append(_IDX[v - 1])
            ops.append(ones)
    out = _IDX[va - 1] + _IDX[vb - 1]
    f = np.einsum(",".join(subs) + "->" + out, *ops, optimize=True)
    return f / m ** (ell - 2)


def _motif_gradient_einsum(a, m, motif: Motif) -> np.ndarray:
    d = np.zeros((m, m))
    edges = sorted(motif.edges)
    for e in edges:
        rest = [x for x in edges if x != e]
        f = _pinned_field(a, m, motif.ell, rest, e[0], e[1])
        d += 0.5 * (f + f.T)
    return d


def motif_gradient(g: Graphon, motif: Motif) -> np.ndarray:
    """First-variation field of t(H, g); see the module gradient convention.

    On a constant graphon with the triangle this is the matrix 3 e^2; in
    general it is the block average of the continuum field h(x, y).
    """
    if motif.ell > MAX_MOTIF_VERTICES:
        raise MotifTooLarge(f"ell={motif.ell} exceeds cap {MAX_MOTIF_VERTICES}")
    a = g.values
    m = g.m
    if motif == Motif.triangle():
        return 3.0 * (a @ a) / m
    if _is_star(motif):
        rp = np.mean(a, axis=1) ** (motif.k - 1)
        return 0.5 * motif.k * (rp[:, None] + rp[None, :])
    return _motif_gradient_einsum(a, m, motif)


def rate_value(u):
    """I0(u) = (1/2)[u ln u + (1-u) ln(1-u)], continuously extended to {0,1}."""
    scalar = np.isscalar(u) or getattr(u, "ndim", 0) == 0
    a = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.zeros_like(a)
    inner = (a > 0.0) & (a < 1.0)
    ai = a[inner]
    out[inner] = 0.5 * (ai * np.log(ai) + (1.0 - ai) * np.log(1.0 - ai))
    return float(out[0]) if scalar else out.reshape(np.shape(u))


def rate_derivative(u):
    """I0'(u) = (1/2) ln(u / (1-u)), evaluated with the boundary clamp."""
    a = np.clip(np.asarray(u, dtype=float), CLAMP, 1.0 - CLAMP)
    out = 0.5 * (np.log(a) - np.log1p(-a))
    return float(out) if out.ndim == 0 else out


def rate_second_derivative(u):
    a = np.asarray(u, dtype=float)
    out = 0.5 * (1.0 / a + 1.0 / (1.0 - a))
    return float(out) if out.ndim == 0 else out


def rate_function(g: Graphon) -> float:
    """I(g): block average of I0 over the graphon values."""
    return float(np.mean(rate_value(g.values)))


def rate_gradient(g: Graphon) -> np.ndarray:
    return rate_derivative(g.values)


def graphon_distance(f: Graphon, g: Graphon, motifs) -> float:
    """Truncated homomorphism-density metric sum_j 2^-j |t(H_j,f) - t(H_j,g)|."""
    if not motifs:
        raise ValueOutOfRange("motif list must be nonempty")
    total = 0.0
    for j, h in enumerate(motifs, start=1):
        total += abs(motif_density(f, h) - motif_density(g, h)) / 2.0 ** j
    return total


def resample(g: Graphon, m2) -> Graphon:
    """Re-grid to resolution m2.

    Exact block refinement when m2 is a multiple of m; otherwise area-weighted
    averaging, which preserves the edge density exactly.
    """
    m = g.m
    if m2 < 1:
        raise ValueOutOfRange("resolution must be >= 1")
    if m2 == m:
        return g
    if m2 % m == 0:
        r = m2 // m
        return Graphon(values=np.kron(g.values, np.ones((r, r))))
    # overlap matrix: P[i,k] = m2 * |[i/m2,(i+1)/m2) ∩ [k/m,(k+1)/m)|
    p = np.zeros((m2, m))
    for i in range(m2):
        for k in range(m):
            lo = max(i / m2, k / m)
            hi = min((i + 1) / m2, (k + 1) / m)
            if hi > lo:
                p[i, k] = (hi - lo) * m2
    vals = p @ g.values @ p.T
    return Graphon(values=np.clip(0.5 * (vals + vals.T), 0.0, 1.0))


def write_graphon(g: Graphon, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(graphon_text(g))


def graphon_text(g: Graphon) -> str:
    lines = [f"graphon v1 m={g.m}"]
    for row in g.values:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def read_graphon(path) -> Graphon:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("graphon v1 m="):
        raise FormatError("missing 'graphon v1 m=<int>' header")
    try:
        m = int(lines[0].split("m=", 1)[1])
    except ValueError as exc:
        raise FormatError("bad resolution in header") from exc
    if len(lines) != m + 1:
        raise FormatError(f"expected {m} data rows, found {len(lines) - 1}")
    a = np.array([[float(x) for x in ln.split()] for ln in lines[1:]])
    if a.shape != (m, m):
        raise FormatError(f"expected {m}x{m} values, found {a.shape}")
    # lower triangle is authoritative; the upper triangle must agree
    lower = np.tril(a) + np.tril(a, -1).T
    if not np.allclose(a, lower, atol=1e-13, rtol=0):
        raise AsymmetricMatrix("upper triangle disagrees with lower triangle")
    return validate(lower)


def write_motif(motif: Motif, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"motif v1 ell={motif.ell}\n")
        for (i, j) in sorted(motif.edges):
            fh.write(f"{i} {j}\n")


def read_motif(path) -> Motif:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("motif v1 ell="):
        raise FormatError("missing 'motif v1 ell=<int>' header")
    try:
        ell = int(lines[0].split("ell=", 1)[1])
    except ValueError as exc:
        raise FormatError("bad vertex count in header") from exc
    edges = []
    for ln in lines[1:]:
        i, j = ln.split()
        edges.append((int(i), int(j)))
    return Motif.from_edges(ell, edges)
