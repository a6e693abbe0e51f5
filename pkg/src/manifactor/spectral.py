"""Kernel graph construction and the low spectrum of the random-walk Laplacian.

The eigensolve runs on the symmetric normalization D^{-1/2} W D^{-1/2} and the
eigenvectors are mapped back to random-walk eigenvectors, which share the same
eigenvalues.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import eigsh
from scipy.spatial.distance import pdist, squareform
from sklearn.neighbors import NearestNeighbors

from .errors import (
    DisconnectedGraphError,
    InvalidParameterError,
    NumericalError,
    ZeroBandwidthError,
)

# dense kernels below this size; k-NN sparsification above
DENSE_LIMIT = 2000
DEFAULT_NEIGHBORS = 64


def select_epsilon(points, multiplier=1.0, subsample=2000):
    """Median squared pairwise distance over a deterministic subsample."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if n < 2:
        raise InvalidParameterError("need at least two points to pick a bandwidth")
    if multiplier <= 0:
        raise InvalidParameterError("multiplier must be > 0")
    if n > subsample:
        idx = np.unique(np.linspace(0, n - 1, subsample).astype(int))
        points = points[idx]
    med = float(np.median(pdist(points, "sqeuclidean")))
    if med <= 0:
        raise ZeroBandwidthError("all points identical; bandwidth would be zero")
    return multiplier * med


@dataclass(frozen=True)
class KernelGraph:
    """Symmetric Gaussian kernel weights plus the degree vector."""

    weights: object  # dense ndarray or scipy.sparse csr
    epsilon: float
    degrees: np.ndarray
    density_normalized: bool = False

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.weights)


def pairwise_kernel(points, epsilon, neighbors=None):
    """Gaussian kernel graph W_ij = exp(-|x_i - x_j|^2 / epsilon).

    With ``neighbors`` given, each row keeps its nearest `neighbors` entries
    (plus the unit self-weight) and the matrix is symmetrized by elementwise
    maximum. Degrees are recomputed after sparsification.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if epsilon <= 0:
        raise InvalidParameterError("epsilon must be > 0")
    if neighbors is not None and not (2 <= neighbors <= n - 1):
        raise InvalidParameterError("neighbors must lie in [2, n-1]")

    if neighbors is None:
        d2 = squareform(pdist(points, "sqeuclidean"))
        W = np.exp(-d2 / epsilon)
        np.fill_diagonal(W, 1.0)
        degrees = W.sum(axis=1)
        return KernelGraph(W, float(epsilon), degrees)

    nn = NearestNeighbors(n_neighbors=neighbors + 1).fit(points)
    dist, idx = nn.kneighbors(points)
    w = np.exp(-(dist**2) / epsilon)
    rows = np.repeat(np.arange(n), neighbors + 1)
    W = sp.csr_matrix((w.ravel(), (rows, idx.ravel())), shape=(n, n))
    W = W.maximum(W.T)
    W.setdiag(1.0)
    degrees = np.asarray(W.sum(axis=1)).ravel()
    return KernelGraph(W.tocsr(), float(epsilon), degrees)


def density_normalize(graph: KernelGraph) -> KernelGraph:
    """Divide out the kernel density estimate (alpha = 1 normalization)."""
    if graph.density_normalized:
        raise InvalidParameterError("graph is already density-normalized")
    q = graph.degrees
    if np.any(q <= 0):
        raise DisconnectedGraphError(int(np.sum(q <= 0)))
    if graph.is_sparse:
        Qinv = sp.diags(1.0 / q)
        W = (Qinv @ graph.weights @ Qinv).tocsr()
        degrees = np.asarray(W.sum(axis=1)).ravel()
    else:
        W = graph.weights / np.outer(q, q)
        degrees = W.sum(axis=1)
    return replace(graph, weights=W, degrees=degrees, density_normalized=True)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenpairs of the random-walk Laplacian.

    Arrays include the trivial constant pair in column 0; ``index(k)`` maps
    the 1-based convention (index 1 = trivial) onto array columns. ``n_pairs``
    counts the nontrivial pairs.
    """

    eigenvalues: np.ndarray  # (N+1,)
    eigenvectors: np.ndarray  # (n, N+1), unit-norm, sign-fixed columns
    epsilon: float
    n_pairs: int

    def eigenvalue(self, k: int) -> float:
        return float(self.eigenvalues[k - 1])

    def eigenvector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k - 1]

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]


def _fix_signs(V):
    for j in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, j])))
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    return V


def check_connected(graph: KernelGraph) -> None:
    W = graph.weights
    if graph.is_sparse:
        adj = W.copy()
        adj.data = (adj.data > 1e-14).astype(float)
    else:
        adj = sp.csr_matrix((np.abs(W) > 1e-14).astype(float))
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp > 1:
        raise DisconnectedGraphError(ncomp)


def spectral_decompose(graph: KernelGraph, N: int) -> SpectralDecomposition:
    """Compute the N+1 smallest eigenpairs of the random-walk Laplacian."""
    n = graph.n
    if N + 1 > n:
        raise InvalidParameterError("N + 1 eigenpairs exceed the graph size")
    check_connected(graph)

    d = graph.degrees
    dmh = 1.0 / np.sqrt(d)
    if graph.is_sparse:
        Dm = sp.diags(dmh)
        Asym = (Dm @ graph.weights @ Dm).tocsr()
        if N + 1 >= n - 1:
            lam_sym, U = np.linalg.eigh(Asym.toarray())
            order = np.argsort(-lam_sym)[: N + 1]
            mu, U = lam_sym[order], U[:, order]
        else:
            v0 = np.full(n, 1.0 / np.sqrt(n))
            try:
                mu, U = eigsh(Asym, k=N + 1, which="LA", v0=v0)
            except Exception as exc:  # ArpackNoConvergence and friends
                raise NumericalError(f"eigensolver failed: {exc}") from exc
            order = np.argsort(-mu)
            mu, U = mu[order], U[:, order]
    else:
        Asym = (graph.weights * dmh[None, :]) * dmh[:, None]
        lam_sym, U = np.linalg.eigh(Asym)
        order = np.argsort(-lam_sym)[: N + 1]
        mu, U = lam_sym[order], U[:, order]

    lam = 1.0 - mu  # eigenvalues of L_sym == eigenvalues of L_rw
    lam = np.where(np.abs(lam) < 1e-12, np.abs(lam), lam)

    V = dmh[:, None] * U
    V /= np.linalg.norm(V, axis=0, keepdims=True)
    V = _fix_signs(V)

    # residual check on L_rw v = v - D^-1 W v
    Wv = graph.weights @ V
    resid = V - (Wv / d[:, None]) - lam[None, :] * V
    worst = float(np.max(np.linalg.norm(resid, axis=0)))
    if worst > 1e-8:
        raise NumericalError(f"eigenpair residual {worst:.3e} exceeds 1e-8")

    return SpectralDecomposition(lam, V, graph.epsilon, N)


def diffusion_coordinates(dec: SpectralDecomposition, t: float) -> np.ndarray:
    """Nontrivial eigenvectors scaled by (1 - lambda)^t."""
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    scale = (1.0 - dec.eigenvalues[1:]) ** t
    return dec.eigenvectors[:, 1:] * scale[None, :]


def write_decomposition(dec: SpectralDecomposition, outdir) -> None:
    """Write eigenvalues.csv and eigenvectors.csv (trivial pair excluded)."""
    os.makedirs(outdir, exist_ok=True)
    N = dec.n_pairs
    idx = np.arange(2, N + 2)
    with open(os.path.join(outdir, "eigenvalues.csv"), "w") as fh:
        fh.write("index,lambda\n")
        for k in idx:
            fh.write(f"{k},{dec.eigenvalue(k):.17g}\n")
    header = ",".join(f"phi_{k}" for k in idx)
    np.savetxt(os.path.join(outdir, "eigenvectors.csv"), dec.eigenvectors[:, 1:],
               delimiter=",", header=header, comments="", fmt="%.17g")
