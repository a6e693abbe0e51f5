"""Closed-form Laplacian spectra for intervals, rectangles and circles.

These serve as ground truth when checking graph-Laplacian output: the interval
and rectangle use Neumann cosine modes, the circle uses the standard harmonics
with degenerate cos/sin pairs. Angle-valued latents are taken in degrees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class AnalyticSpectrum:
    """Ascending (multi_index, eigenvalue) modes with an evaluator."""

    modes: tuple  # of (multi_index, eigenvalue)
    evaluator: object  # callable(multi_index, latent) -> (n,) values
    degenerate_groups: dict = None  # multi_index -> tuple of partners

    def eigenvalue(self, multi_index) -> float:
        for m, lam in self.modes:
            if m == multi_index:
                return lam
        raise KeyError(multi_index)

    def partners(self, multi_index):
        if self.degenerate_groups and multi_index in self.degenerate_groups:
            return self.degenerate_groups[multi_index]
        return (multi_index,)


def _column(latent, col=0):
    latent = np.asarray(latent, dtype=float)
    if latent.ndim == 2:
        return latent[:, col]
    return latent


def interval_spectrum(L: float, count: int) -> AnalyticSpectrum:
    """Neumann modes cos(m pi x / L) with eigenvalues (m pi / L)^2."""
    if L <= 0:
        raise InvalidParameterError("interval length must be positive")
    modes = tuple((m, (m * np.pi / L) ** 2) for m in range(count))

    def evaluate(m, latent):
        x = _column(latent)
        return np.cos(m * np.pi * x / L)

    return AnalyticSpectrum(modes, evaluate)


def rectangle_spectrum(a: float, b: float, count: int) -> AnalyticSpectrum:
    """Product modes cos(m pi x / a) cos(n pi y / b), ascending by eigenvalue."""
    if a <= 0 or b <= 0:
        raise InvalidParameterError("rectangle sides must be positive")
    # enumerate a grid guaranteed to contain the `count` smallest modes
    grid = 1
    while (grid + 1) ** 2 < 4 * count + 4:
        grid += 1
    cand = []
    for m in range(grid + 1):
        for n in range(grid + 1):
            lam = np.pi**2 * (m**2 / a**2 + n**2 / b**2)
            cand.append(((m, n), lam))
    cand.sort(key=lambda t: (t[1], t[0]))
    modes = tuple(cand[:count])

    def evaluate(mn, latent):
        latent = np.atleast_2d(np.asarray(latent, dtype=float))
        m, n = mn
        return np.cos(m * np.pi * latent[:, 0] / a) * np.cos(n * np.pi * latent[:, 1] / b)

    return AnalyticSpectrum(modes, evaluate)


def circle_spectrum(count: int) -> AnalyticSpectrum:
    """Unit-circle harmonics; multi-index (n, 'cos'|'sin'), eigenvalue n^2.

    The evaluator takes the angle in degrees.
    """
    modes = [((0, "cos"), 0.0)]
    degen = {}
    n = 1
    while len(modes) < count:
        modes.append(((n, "cos"), float(n**2)))
        modes.append(((n, "sin"), float(n**2)))
        degen[(n, "cos")] = ((n, "cos"), (n, "sin"))
        degen[(n, "sin")] = ((n, "cos"), (n, "sin"))
        n += 1
    modes = tuple(modes[:count])

    def evaluate(mode, latent):
        n, kind = mode
        th = np.deg2rad(_column(latent))
        return np.cos(n * th) if kind == "cos" else np.sin(n * th)

    return AnalyticSpectrum(modes, evaluate, degen)


def correlate_mode(eigvec, latent, spectrum: AnalyticSpectrum, multi_index) -> float:
    """Similarity of a graph eigenvector with an analytic mode at the latents.

    Degenerate modes are scored by the norm of the projection onto the span of
    the whole degenerate pair, since graph eigenvectors inside a degenerate
    eigenspace are arbitrary rotations of the analytic basis.
    """
    if latent is None:
        raise InvalidParameterError("latent coordinates are required")
    v = np.asarray(eigvec, dtype=float).ravel()
    latent = np.asarray(latent, dtype=float)
    if latent.shape[0] != v.shape[0]:
        raise InvalidParameterError("latent row count must match the eigenvector")
    partners = spectrum.partners(multi_index)
    basis = np.column_stack([spectrum.evaluator(m, latent) for m in partners])
    Q, _ = np.linalg.qr(basis)
    nv = np.linalg.norm(v)
    if nv < 1e-14:
        return 0.0
    return float(np.linalg.norm(Q.T @ v) / nv)


def identify_modes(dec, latent, spectrum: AnalyticSpectrum, threshold=0.9,
                   max_modes=None):
    """Map eigenvector indices (1-based, trivial = 1) to best analytic modes.

    Returns {index: multi_index} for eigenvectors whose best correlation meets
    the threshold. Degenerate partners collapse onto the group representative.
    """
    out = {}
    modes = spectrum.modes[:max_modes] if max_modes else spectrum.modes
    for k in range(2, dec.n_pairs + 2):
        v = dec.eigenvector(k)
        best_mode, best_score = None, 0.0
        for mode, lam in modes:
            if lam == 0.0:
                continue
            score = correlate_mode(v, latent, spectrum, mode)
            if score > best_score:
                best_mode, best_score = mode, score
        if best_mode is not None and best_score >= threshold:
            out[k] = best_mode
    return out


def circular_correlation(alpha_deg, beta_deg) -> float:
    """Strength of a relation alpha ~ +/- beta + const between two angles.

    Returns max over the two orientations of |mean exp(i(alpha -/+ beta))|,
    which is 1 for an exact rotation/reflection and near 0 for independence.
    """
    a = np.deg2rad(np.asarray(alpha_deg, dtype=float))
    b = np.deg2rad(np.asarray(beta_deg, dtype=float))
    minus = np.abs(np.mean(np.exp(1j * (a - b))))
    plus = np.abs(np.mean(np.exp(1j * (a + b))))
    return float(max(minus, plus))
