"""Finite-element oracle for the spectral gap of an arbitrary metric graph.

Conforming piecewise-linear elements on a subdivision of every edge; vertex
continuity comes from node sharing, and the flux-balance vertex condition is
the natural condition of the quadratic form, so no constraints are assembled.
The generalized problem (stiffness, mass) has the constants as its kernel;
the spectral gap is the second-smallest eigenvalue, computed by shift-invert
Lanczos, plus a two-mesh Richardson extrapolation for an error estimate.

This solver is the independent cross-check for the exact chain solver and
for the surgery/reduction monotonicity properties.  Chains with very large
multiplicities (above roughly 1e6 parallel edges) are outside its range; use
the chain solver there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import sparse
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh

from .errors import ConvergenceError, InputError
from .graphs import MetricGraph


@dataclass(frozen=True)
class DiscretizedForms:
    """Assembled P1 forms: symmetric stiffness/mass matrices plus node map."""

    node_index: Mapping
    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    h: float

    @property
    def n_nodes(self) -> int:
        return self.stiffness.shape[0]


def discretize(g: MetricGraph, h: float) -> DiscretizedForms:
    """Subdivide every edge into ceil(length/h) equal elements and assemble."""
    if not g.edges:
        raise InputError("graph has no edges to discretize")
    if not (0 < h < g.min_edge_length):
        raise InputError(
            f"mesh size h={h} must be positive and below the shortest edge "
            f"({g.min_edge_length})"
        )
    node_index: dict = {}
    for v in sorted(g.vertices):
        node_index[("v", v)] = len(node_index)

    rows, cols, kvals, mvals = [], [], [], []

    def add(i: int, j: int, k: float, m: float) -> None:
        rows.append(i)
        cols.append(j)
        kvals.append(k)
        mvals.append(m)

    for e in g.edges:
        length = float(e.length)
        n_elem = max(1, math.ceil(length / h))
        he = length / n_elem
        chain = [node_index[("v", e.u)]]
        for i in range(1, n_elem):
            node_index[(e.id, i)] = len(node_index)
            chain.append(node_index[(e.id, i)])
        chain.append(node_index[("v", e.v)])
        k_loc = 1.0 / he
        m_diag = he / 3.0
        m_off = he / 6.0
        for a, b in zip(chain, chain[1:]):
            add(a, a, k_loc, m_diag)
            add(b, b, k_loc, m_diag)
            add(a, b, -k_loc, m_off)
            add(b, a, -k_loc, m_off)

    n = len(node_index)
    stiffness = sparse.csr_matrix((kvals, (rows, cols)), shape=(n, n))
    mass = sparse.csr_matrix((mvals, (rows, cols)), shape=(n, n))
    return DiscretizedForms(node_index, stiffness, mass, h)


def _smallest_two(forms: DiscretizedForms):
    """Eigenvalues 0 = lam0 < lam1 of (K, M) with deterministic iteration."""
    K, M = forms.stiffness, forms.mass
    n = K.shape[0]
    if n <= 200:
        vals = eigh(K.toarray(), M.toarray(), eigvals_only=True, subset_by_index=(0, 1))
        return float(vals[0]), float(vals[1])
    total = float(M.sum())  # int rho dx over the graph
    shift = -((math.pi / total) ** 2 + 1.0)
    v0 = np.linspace(1.0, 2.0, n)
    try:
        vals = eigsh(
            K, k=2, M=M, sigma=shift, which="LM", v0=v0, return_eigenvectors=False
        )
    except Exception as exc:  # ARPACK failures surface as ConvergenceError
        raise ConvergenceError(f"eigensolver failed: {exc}") from exc
    vals = sorted(float(v) for v in vals)
    return vals[0], vals[1]


@dataclass(frozen=True)
class FemResult:
    value: float
    error_estimate: float
    converged: bool
    h: float

    def __iter__(self):
        return iter((self.value, self.error_estimate))


def lambda1_numeric(
    g: MetricGraph,
    tol: float = 1e-6,
    h: float | None = None,
    max_refinements: int = 8,
) -> FemResult:
    """Spectral gap of the graph with an a-posteriori relative error estimate.

    Runs meshes h, h/2, ... and Richardson-extrapolates the (second order)
    eigenvalue.  Refinement stops when the conservative error estimate
    ``|lam(h/2) - lam(h)| / 3`` is below ``tol`` relative to the value; if
    ``max_refinements`` is exhausted first, the best value is returned with
    ``converged=False``.
    """
    if not (tol > 0):
        raise InputError("tol must be positive")
    if h is None:
        h = g.min_edge_length / 16.0
    zero_scale = (math.pi / float(g.total_length_exact)) ** 2
    lam_prev = None
    for _ in range(max_refinements + 1):
        forms = discretize(g, h)
        lam0, lam1 = _smallest_two(forms)
        if abs(lam0) > 1e-8 * max(lam1, zero_scale):
            raise ConvergenceError(
                f"constant mode not resolved: lam0={lam0!r} at h={h!r}"
            )
        if lam_prev is not None:
            extrap = (4.0 * lam1 - lam_prev) / 3.0
            err = abs(lam1 - lam_prev) / 3.0
            if err <= tol * abs(extrap):
                return FemResult(extrap, err, True, h)
        lam_prev = lam1
        h /= 2.0
    return FemResult(extrap, err, False, h)
