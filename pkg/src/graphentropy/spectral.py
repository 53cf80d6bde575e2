"""Kernel-operator spectral analysis of graphon perturbations.

A symmetric step kernel dg acts on block-constant functions through the matrix
dg/m, and its nonzero spectrum is that matrix's spectrum.  Everything here is
phrased in terms of that finite operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AsymmetricMatrix, EdgeDensityMismatch, UnsupportedPower
from .graphon import Graphon, Motif, edge_density, motif_density

RANK_TOL = 1e-9


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray  # sorted by descending magnitude
    trace2: float
    trace3: float
    quad_term: float  # 3e <phi1, T^2 phi1>
    delta_t: float  # quad_term + trace3
    numerical_rank: int


def _check_symmetric(dg):
    dg = np.asarray(dg, dtype=float)
    if dg.ndim != 2 or dg.shape[0] != dg.shape[1]:
        raise AsymmetricMatrix(f"kernel shape {dg.shape} is not square")
    if not np.allclose(dg, dg.T, atol=1e-12, rtol=0):
        raise AsymmetricMatrix("kernel matrix is not symmetric")
    return 0.5 * (dg + dg.T)


def kernel_operator_spectrum(dg) -> np.ndarray:
    """All m eigenvalues of dg/m, sorted by descending magnitude."""
    dg = _check_symmetric(dg)
    mu = np.linalg.eigvalsh(dg / dg.shape[0])
    return mu[np.argsort(-np.abs(mu), kind="stable")]


def numerical_rank(eigenvalues) -> int:
    mu = np.asarray(eigenvalues)
    if mu.size == 0:
        return 0
    tol = RANK_TOL * max(1.0, float(np.max(np.abs(mu))))
    return int(np.sum(np.abs(mu) > tol))


def trace_power(dg, p) -> float:
    """Tr (dg/m)^p for p in {2,3}; direct and spectral paths cross-checked."""
    if p not in (2, 3):
        raise UnsupportedPower(f"only p in {{2,3}} supported, got {p}")
    dg = _check_symmetric(dg)
    t = dg / dg.shape[0]
    t2 = t @ t
    direct = float(np.trace(t2)) if p == 2 else float(np.trace(t2 @ t))
    spectral = float(np.sum(kernel_operator_spectrum(dg) ** p))
    if abs(direct - spectral) > 1e-10 * max(1.0, abs(direct)):
        raise ArithmeticError(
            f"trace path mismatch: direct={direct} spectral={spectral}"
        )
    return direct


def delta_t_decomposition(g: Graphon, e) -> SpectralReport:
    """Decompose t(g) - e^3 into the quadratic term and Tr T^3.

    Requires e(g) to match e, otherwise the dropped linear term is nonzero.
    """
    de = edge_density(g) - e
    if abs(de) > 1e-8:
        raise EdgeDensityMismatch(f"edge density off target by {de}")
    m = g.m
    dg = g.values - e
    mu = kernel_operator_spectrum(dg)
    t = dg / m
    trace2 = float(np.trace(t @ t))
    trace3 = float(np.trace(t @ t @ t))
    row_means = np.mean(dg, axis=1)
    quad = 3.0 * e * float(np.mean(row_means ** 2))
    return SpectralReport(
        eigenvalues=mu,
        trace2=trace2,
        trace3=trace3,
        quad_term=quad,
        delta_t=quad + trace3,
        numerical_rank=numerical_rank(mu),
    )


def verify_trace_inequality(dg) -> dict:
    """|Tr T^3| <= (Tr T^2)^(3/2), with equality exactly at rank one."""
    dg = _check_symmetric(dg)
    mu = kernel_operator_spectrum(dg)
    lhs = abs(float(np.sum(mu ** 3)))
    rhs = float(np.sum(mu ** 2)) ** 1.5
    return {
        "lhs": lhs,
        "rhs": rhs,
        "holds": lhs <= rhs + 1e-12,
        "rank_one": numerical_rank(mu) <= 1,
        "gap": rhs - lhs,
    }


def triangle_delta_direct(g: Graphon, e) -> float:
    """Direct oracle t(g, triangle) - e^3."""
    return motif_density(g, Motif.triangle()) - e ** 3
