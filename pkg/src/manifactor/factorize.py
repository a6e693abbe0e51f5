"""Search for eigenvectors that factor as elementwise products of earlier ones.

Indices follow the 1-based convention in which index 1 is the trivial constant
eigenvector; the search runs over indices 2..N+1 only.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .spectral import SpectralDecomposition

_NORM_FLOOR = 1e-14
_PAIR_CHUNK = 2048


def cosine_similarity(u, v):
    """Absolute cosine similarity; 0 when either vector is numerically null."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise InvalidParameterError("vectors must have the same length")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu < _NORM_FLOOR or nv < _NORM_FLOOR:
        return 0.0
    return float(abs(np.dot(u, v)) / (nu * nv))


@dataclass(frozen=True)
class Triplet:
    """phi_k is approximately the elementwise product phi_i * phi_j."""

    i: int
    j: int
    k: int
    score: float
    eig_gap: float


@dataclass(frozen=True)
class FactorizationParams:
    delta: float
    gamma: float
    n_eigenvectors: int
    relative_delta: bool = False  # interpret delta as gap / lambda_k

    def __post_init__(self):
        if self.delta <= 0:
            raise InvalidParameterError("delta must be > 0")
        if not (0.0 < self.gamma < 1.0):
            raise InvalidParameterError("gamma must lie in (0, 1)")
        if self.n_eigenvectors < 1:
            raise InvalidParameterError("n_eigenvectors must be >= 1")


@dataclass(frozen=True)
class TripletList:
    triplets: tuple
    params: FactorizationParams
    visited_pairs: int = 0
    descriptor: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.triplets)

    def __len__(self):
        return len(self.triplets)


def _pair_mask(lam, kk, delta, relative):
    """Boolean (kk, kk) matrix of pairs (i < j < kk) passing the gap filter.

    ``lam`` and ``kk`` are array indices (trivial pair at 0; candidates >= 1).
    """
    sub = lam[1:kk]
    gaps = np.abs(sub[:, None] + sub[None, :] - lam[kk])
    if relative and lam[kk] > 0:
        gaps = gaps / lam[kk]
    upper = np.triu(np.ones_like(gaps, dtype=bool), k=1)
    return upper & (gaps < delta), gaps


def _product_scores(phi, prod_norms, ii, jj, kk):
    """Similarity of phi[:, kk] with phi[:, ii] * phi[:, jj].

    When the gap filter keeps most pairs, every numerator is computed in one
    matrix product <phi_i, phi_k * phi_j> over the candidate columns; sparse
    selections fall back to gathering explicit elementwise products in chunks.
    """
    w = phi[:, kk]
    m = len(ii)
    n_cols = kk - 1
    if 16 * m >= n_cols * (n_cols - 1) // 2:
        B = phi[:, 1:kk] * w[:, None]
        G = np.abs(B.T @ phi[:, 1:kk])
        num = G[ii - 1, jj - 1]
        norms = prod_norms[ii, jj]
        scores = np.zeros(m)
        ok = norms >= _NORM_FLOOR
        scores[ok] = num[ok] / norms[ok]
        return scores
    scores = np.empty(m)
    for lo in range(0, m, _PAIR_CHUNK):
        hi = min(lo + _PAIR_CHUNK, m)
        P = phi[:, ii[lo:hi]] * phi[:, jj[lo:hi]]
        num = np.abs(w @ P)
        norms = prod_norms[ii[lo:hi], jj[lo:hi]]
        chunk = np.zeros(hi - lo)
        ok = norms >= _NORM_FLOOR
        chunk[ok] = num[ok] / norms[ok]
        scores[lo:hi] = chunk
    return scores


def find_triplets(dec: SpectralDecomposition, params: FactorizationParams) -> TripletList:
    """Best product factorization per eigenvector under both criteria.

    For each k the strict maximum similarity wins (first pair encountered in
    (i, j) ascending order on ties), and the triplet is kept only when the
    maximum exceeds gamma.
    """
    N = params.n_eigenvectors
    if N > dec.n_pairs:
        raise InvalidParameterError(
            f"requested {N} eigenvectors but decomposition retains {dec.n_pairs}"
        )
    lam = dec.eigenvalues[: N + 1]
    phi = dec.eigenvectors[:, : N + 1]

    # |phi_i * phi_j| norms for all pairs in one gram product
    sq = phi * phi
    prod_norms = np.sqrt(np.maximum(sq.T @ sq, 0.0))

    triplets = []
    visited = 0
    for kk in range(3, N + 1):  # array index; first k with two earlier pairs
        mask, gaps = _pair_mask(lam, kk, params.delta, params.relative_delta)
        m = int(mask.sum())
        visited += m
        if m == 0:
            continue
        ii0, jj0 = np.nonzero(mask)  # row-major: i ascending, then j
        ii = ii0 + 1
        jj = jj0 + 1
        scores = _product_scores(phi, prod_norms, ii, jj, kk)
        best = int(np.argmax(scores))
        if scores[best] > params.gamma:
            triplets.append(
                Triplet(
                    i=int(ii[best]) + 1,
                    j=int(jj[best]) + 1,
                    k=kk + 1,
                    score=float(scores[best]),
                    eig_gap=float(gaps[ii0[best], jj0[best]]),
                )
            )
    return TripletList(tuple(triplets), params, visited)


def criterion_scatter(dec: SpectralDecomposition, k: int):
    """All pairs (i < j < k) with their eigenvalue gap and similarity.

    Returns a list of ((i, j), eig_gap, score) with no thresholds applied;
    this is the raw data behind the criterion-analysis scatterplots.
    """
    if not (4 <= k <= dec.n_pairs + 1):
        raise IndexError(f"k={k} admits no candidate pairs in this decomposition")
    kk = k - 1
    lam = dec.eigenvalues
    phi = dec.eigenvectors
    sq = phi[:, 1:kk] ** 2
    prod_norms = np.sqrt(np.maximum(sq.T @ sq, 0.0))
    out = []
    w = phi[:, kk]
    for a in range(1, kk):
        P = phi[:, a][:, None] * phi[:, a + 1 : kk]
        nums = np.abs(w @ P)
        norms = prod_norms[a - 1, a:]
        for off, b in enumerate(range(a + 1, kk)):
            gap = abs(lam[a] + lam[b] - lam[kk])
            norm = norms[off]
            score = float(nums[off] / norm) if norm >= _NORM_FLOOR else 0.0
            out.append(((a + 1, b + 1), gap, score))
    return out


def write_triplets(tl: TripletList, outdir) -> None:
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "triplets.csv"), "w") as fh:
        fh.write("# indices are 1-based; index 1 is the trivial constant pair\n")
        fh.write("i,j,k,score,eig_gap\n")
        for t in tl:
            fh.write(f"{t.i},{t.j},{t.k},{t.score:.17g},{t.eig_gap:.17g}\n")


def write_criterion_scatter(dec: SpectralDecomposition, ks, outdir) -> None:
    """Per-pair criterion data for the chosen product indices."""
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "criterion.csv"), "w") as fh:
        fh.write("k,i,j,eig_gap,score\n")
        for k in ks:
            if k < 4:
                continue
            for (i, j), gap, score in criterion_scatter(dec, k):
                fh.write(f"{k},{i},{j},{gap:.17g},{score:.17g}\n")
