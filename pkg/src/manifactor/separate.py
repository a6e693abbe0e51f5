"""Separability matrix and Max-Cut partitioning of factor eigenvectors.

The exact solver enumerates all bipartitions and doubles as the test oracle;
the SDP path is a low-rank (Burer-Monteiro style) solve of the Goemans-
Williamson relaxation with random-hyperplane rounding.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptyTripletsError, GraphSizeError, NumericalError
from .factorize import TripletList

EXACT_LIMIT = 24
_MASK_CHUNK = 1 << 16


@dataclass(frozen=True)
class SeparabilityMatrix:
    """Upper-triangular score matrix over the factor eigenvector indices."""

    scores: np.ndarray  # (T, T), upper-triangular, zero diagonal
    index_map: tuple  # local position -> eigenvector index

    @property
    def T(self) -> int:
        return self.scores.shape[0]

    def symmetrized(self) -> np.ndarray:
        return self.scores + self.scores.T


@dataclass(frozen=True)
class FactorAssignment:
    """Bipartition of factor eigenvectors, plus product/unassigned bookkeeping."""

    group_a: tuple
    group_b: tuple
    unassigned: tuple
    products: tuple
    cut_value: float
    method: str  # exact | sdp-rounded
    sdp_value: float | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "factors": [list(self.group_a), list(self.group_b)],
            "products": list(self.products),
            "unassigned": list(self.unassigned),
            "cut_value": self.cut_value,
            "method": self.method,
            "seed": self.seed,
        }


def build_separability(triplets: TripletList) -> SeparabilityMatrix:
    """Max score per factor pair, on local indices over all factor positions."""
    if len(triplets) == 0:
        raise EmptyTripletsError(
            "no triplets to separate; loosen delta and/or gamma"
        )
    factors = sorted({t.i for t in triplets} | {t.j for t in triplets})
    local = {idx: p for p, idx in enumerate(factors)}
    T = len(factors)
    C = np.zeros((T, T))
    for t in triplets:
        a, b = local[t.i], local[t.j]
        if a > b:
            a, b = b, a
        C[a, b] = max(C[a, b], t.score)
    return SeparabilityMatrix(C, tuple(factors))


def _canonical(group_a, group_b):
    group_a = tuple(sorted(group_a))
    group_b = tuple(sorted(group_b))
    if group_b and (not group_a or min(group_b) < min(group_a)):
        group_a, group_b = group_b, group_a
    return group_a, group_b


def _cut_from_signs(W, s):
    """Cut value of the symmetrized matrix for a +/-1 assignment vector."""
    return float((W.sum() - s @ W @ s) / 4.0)


def max_cut_exact(matrix: SeparabilityMatrix) -> FactorAssignment:
    """Exhaustive Max-Cut over 2^(T-1) bipartitions of the symmetrized matrix."""
    T = matrix.T
    if T > EXACT_LIMIT:
        raise GraphSizeError(
            f"T={T} exceeds the exact-solver limit {EXACT_LIMIT}; use max_cut_sdp"
        )
    W = matrix.symmetrized()
    total = W.sum()
    n_masks = 1 << (T - 1)
    best_val = -np.inf
    best_masks = []
    bits = np.arange(T - 1)
    for lo in range(0, n_masks, _MASK_CHUNK):
        hi = min(lo + _MASK_CHUNK, n_masks)
        masks = np.arange(lo, hi, dtype=np.int64)
        # node 0 fixed at +1; bit b sets the sign of node b+1
        S = np.empty((hi - lo, T))
        S[:, 0] = 1.0
        S[:, 1:] = 1.0 - 2.0 * ((masks[:, None] >> bits[None, :]) & 1)
        vals = (total - ((S @ W) * S).sum(axis=1)) / 4.0
        chunk_best = vals.max()
        if chunk_best > best_val + 1e-15:
            best_val = chunk_best
            best_masks = list(masks[vals >= chunk_best - 1e-15])
        elif abs(chunk_best - best_val) <= 1e-15:
            best_masks.extend(masks[vals >= best_val - 1e-15])

    # deterministic tie-break: lexicographically smallest group_a
    candidates = []
    for mask in best_masks:
        in_a = [0] + [b + 1 for b in range(T - 1) if not (mask >> b) & 1]
        in_b = [b + 1 for b in range(T - 1) if (mask >> b) & 1]
        ga = tuple(matrix.index_map[p] for p in in_a)
        gb = tuple(matrix.index_map[p] for p in in_b)
        candidates.append(_canonical(ga, gb))
    group_a, group_b = min(candidates)

    # recompute the value on the winner to shed chunk rounding
    s = np.array([1.0 if matrix.index_map[p] in group_a else -1.0 for p in range(T)])
    value = _cut_from_signs(W, s)
    return FactorAssignment(group_a, group_b, (), (), value, "exact")


def _round_hyperplanes(W, U, repeats, rng):
    """Best random-hyperplane rounding of row-normalized factor U."""
    T, r = U.shape
    G = rng.standard_normal((r, repeats))
    S = np.sign(U @ G)
    S[S == 0] = 1.0
    vals = (W.sum() - ((W @ S) * S).sum(axis=0)) / 4.0
    best = int(np.argmax(vals))
    return float(vals[best]), S[:, best]


def max_cut_sdp(matrix: SeparabilityMatrix, restarts=8, rounding_repeats=200,
                seed=0, grad_tol=1e-7, max_iter=20000) -> FactorAssignment:
    """Goemans-Williamson relaxation via projected-gradient ascent on unit rows.

    Rank follows the Burer-Monteiro bound r = ceil(sqrt(2T)) + 1; every restart
    is rounded with ``rounding_repeats`` hyperplanes and the best rounded cut
    wins, with ties broken by restart index.
    """
    T = matrix.T
    if T < 2:
        raise GraphSizeError("need at least two factor eigenvectors to cut")
    W = matrix.symmetrized()
    r = int(math.ceil(math.sqrt(2 * T))) + 1
    # safe fallback step from the gradient Lipschitz constant of tr(W UU^T)
    lips = 2.0 * np.abs(W).sum(axis=1).max() + 1e-12

    best_rounded = -np.inf
    best_signs = None
    best_sdp = -np.inf
    converged_any = False
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        U = rng.standard_normal((T, r))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        converged = False
        step = 1.0 / lips
        U_prev = rg_prev = None
        for _ in range(max_iter):
            G = W @ U
            rgrad = G - (np.sum(G * U, axis=1, keepdims=True)) * U
            if np.linalg.norm(rgrad) <= grad_tol:
                converged = True
                break
            if U_prev is not None:
                # Barzilai-Borwein step from the last projected pair
                dU = U - U_prev
                dG = rgrad - rg_prev
                denom = abs(np.sum(dU * dG))
                step = np.sum(dU * dU) / denom if denom > 1e-30 else 1.0 / lips
                step = min(max(step, 1e-3 / lips), 1e6 / lips)
            U_prev, rg_prev = U, rgrad
            # descent on tr(W UU^T) maximizes the cut
            U = U - step * rgrad
            U /= np.linalg.norm(U, axis=1, keepdims=True)
        sdp_val = float((W.sum() - np.sum((U @ U.T) * W)) / 4.0)
        best_sdp = max(best_sdp, sdp_val)
        converged_any = converged_any or converged

        val, signs = _round_hyperplanes(W, U, rounding_repeats, rng)
        if val > best_rounded:
            best_rounded = val
            best_signs = signs

    in_a = [p for p in range(T) if best_signs[p] > 0]
    in_b = [p for p in range(T) if best_signs[p] <= 0]
    ga = tuple(matrix.index_map[p] for p in in_a)
    gb = tuple(matrix.index_map[p] for p in in_b)
    group_a, group_b = _canonical(ga, gb)
    assignment = FactorAssignment(group_a, group_b, (), (), best_rounded,
                                  "sdp-rounded", sdp_value=best_sdp, seed=seed)
    if not converged_any:
        raise NumericalError(
            f"SDP ascent missed gradient tolerance {grad_tol} in all restarts",
            best=assignment,
        )
    return assignment


def assign_factors(triplets: TripletList, cut: FactorAssignment) -> FactorAssignment:
    """Attach product and unassigned indices to a Max-Cut bipartition."""
    products = tuple(sorted({t.k for t in triplets}))
    all_indices = set(range(2, triplets.params.n_eigenvectors + 2))
    covered = set(cut.group_a) | set(cut.group_b) | set(products)
    unassigned = tuple(sorted(all_indices - covered))
    return replace(cut, products=products, unassigned=unassigned)


def write_assignment(assignment: FactorAssignment, outdir) -> None:
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "assignment.json"), "w") as fh:
        json.dump(assignment.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
