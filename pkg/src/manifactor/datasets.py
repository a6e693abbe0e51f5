"""Seeded synthetic point clouds on known product manifolds.

All generators return a :class:`PointCloud` carrying the ambient points, the
ground-truth latent coordinates, and a descriptor sufficient to regenerate the
cloud. Angles are stored in degrees on [0, 360).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.utils.extmath import randomized_svd

from .errors import InvalidParameterError, RankDeficiencyError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PointCloud:
    """n observations in ambient dimension D, with optional latent truth."""

    points: np.ndarray
    latent: Optional[np.ndarray] = None
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = _frozen(np.atleast_2d(self.points))
        object.__setattr__(self, "points", pts)
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidParameterError("point cloud must be n x D with n, D >= 1")
        if not np.all(np.isfinite(pts)):
            raise InvalidParameterError("point cloud contains non-finite entries")
        if self.latent is not None:
            lat = _frozen(np.atleast_2d(self.latent))
            object.__setattr__(self, "latent", lat)
            if lat.shape[0] != pts.shape[0]:
                raise InvalidParameterError(
                    "latent row count does not match point count"
                )
            if not np.all(np.isfinite(lat)):
                raise InvalidParameterError("latent contains non-finite entries")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters for one synthetic dataset, including the RNG seed."""

    kind: str  # rectangle | cylinder | torus | image-surrogate
    params: dict = field(default_factory=dict)
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("rectangle", "cylinder", "torus", "image-surrogate"):
            raise InvalidParameterError(f"unknown generator kind {self.kind!r}")
        if self.noise_sigma < 0:
            raise InvalidParameterError("noise_sigma must be >= 0")
        for name, value in self.params.items():
            if name in ("a", "b", "radius", "length", "R", "r") and value <= 0:
                raise InvalidParameterError(f"{name} must be > 0")


def sample_rectangle(n, a, b, noise_sigma=0.0, seed=0, isotropic_noise=False):
    """Uniform samples on [0,a] x [0,b] embedded in R^3 with z-noise.

    With ``isotropic_noise`` the same Gaussian noise is also added to the
    x and y coordinates.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if a <= 0 or b <= 0:
        raise InvalidParameterError("rectangle sides must be positive")
    if noise_sigma < 0:
        raise InvalidParameterError("noise_sigma must be >= 0")
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, a, size=n)
    y = rng.uniform(0.0, b, size=n)
    z = rng.normal(0.0, noise_sigma, size=n) if noise_sigma > 0 else np.zeros(n)
    pts = np.column_stack([x, y, z])
    if isotropic_noise and noise_sigma > 0:
        pts[:, 0] += rng.normal(0.0, noise_sigma, size=n)
        pts[:, 1] += rng.normal(0.0, noise_sigma, size=n)
    latent = np.column_stack([x, y])
    desc = {
        "kind": "rectangle",
        "params": {"a": a, "b": b, "isotropic_noise": bool(isotropic_noise)},
        "noise_sigma": noise_sigma,
        "seed": seed,
    }
    return PointCloud(pts, latent, desc)


def sample_torus(n, R, r, seed=0):
    """Uniform latent angles on the standard torus embedding in R^3."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if r <= 0 or R <= r:
        raise InvalidParameterError("torus requires R > r > 0")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 360.0, size=n)
    psi = rng.uniform(0.0, 360.0, size=n)
    th = np.deg2rad(theta)
    ps = np.deg2rad(psi)
    ring = R + r * np.cos(ps)
    pts = np.column_stack([ring * np.cos(th), ring * np.sin(th), r * np.sin(ps)])
    latent = np.column_stack([theta, psi])
    desc = {"kind": "torus", "params": {"R": R, "r": r}, "noise_sigma": 0.0, "seed": seed}
    return PointCloud(pts, latent, desc)


def sample_cylinder(n, radius, length_, seed=0):
    """Uniform samples on a circle x interval cylinder in R^3."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if radius <= 0 or length_ <= 0:
        raise InvalidParameterError("radius and length must be positive")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 360.0, size=n)
    s = rng.uniform(0.0, length_, size=n)
    th = np.deg2rad(theta)
    pts = np.column_stack([radius * np.cos(th), radius * np.sin(th), s])
    latent = np.column_stack([theta, s])
    desc = {
        "kind": "cylinder",
        "params": {"radius": radius, "length": length_},
        "noise_sigma": 0.0,
        "seed": seed,
    }
    return PointCloud(pts, latent, desc)


# Image-surrogate stretch range, matching the latent interval of the
# two-motion experiment this generator stands in for.
STRETCH_RANGE = 20.0


def _render_frames(theta_deg, stretch, side):
    """Noiseless renders: a rotating radial blob plus a stretching ellipse ring.

    The blob sits at a single angular position, so the rotation latent has
    full period 360 degrees (no bar symmetry to break).
    """
    n = len(theta_deg)
    c = (side - 1) / 2.0
    ax = np.arange(side) - c
    xx, yy = np.meshgrid(ax, ax, indexing="xy")
    xx = xx[None, :, :]
    yy = yy[None, :, :]

    th = np.deg2rad(np.asarray(theta_deg))[:, None, None]
    s = np.asarray(stretch)[:, None, None]

    # rotating feature: Gaussian blob at radius 0.38*side, angle theta
    br = 0.38 * side
    bw = 0.06 * side
    bx = br * np.cos(th)
    by = br * np.sin(th)
    blob = np.exp(-((xx - bx) ** 2 + (yy - by) ** 2) / (2.0 * bw**2))

    # stretching feature: soft ellipse ring, horizontal radius driven by s
    rx = side * (0.17 + 0.003 * s / (STRETCH_RANGE / 20.0))
    ry = 0.13 * side
    rho = np.sqrt((xx / rx) ** 2 + (yy / ry) ** 2)
    ring = 0.85 * np.exp(-(((rho - 1.0) / 0.12) ** 2))

    return np.clip(blob + ring, 0.0, 1.0).reshape(n, side * side)


def render_image_surrogate(n, side, noise_sigma=0.0, seed=0):
    """Grayscale image stack with independent rotation and stretch latents."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if side < 16:
        raise InvalidParameterError("side must be >= 16 to render both features")
    if noise_sigma < 0:
        raise InvalidParameterError("noise_sigma must be >= 0")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 360.0, size=n)
    stretch = rng.uniform(-STRETCH_RANGE, STRETCH_RANGE, size=n)
    imgs = _render_frames(theta, stretch, side)
    if noise_sigma > 0:
        imgs = imgs + rng.normal(0.0, noise_sigma, size=imgs.shape)
    latent = np.column_stack([theta, stretch])
    desc = {
        "kind": "image-surrogate",
        "params": {"side": side},
        "noise_sigma": noise_sigma,
        "seed": seed,
    }
    return PointCloud(imgs, latent, desc)


def generate(config: GeneratorConfig, n: int) -> PointCloud:
    """Dispatch on a GeneratorConfig."""
    p = config.params
    if config.kind == "rectangle":
        return sample_rectangle(
            n, p["a"], p["b"], config.noise_sigma, config.seed,
            isotropic_noise=p.get("isotropic_noise", False),
        )
    if config.kind == "torus":
        return sample_torus(n, p["R"], p["r"], config.seed)
    if config.kind == "cylinder":
        return sample_cylinder(n, p["radius"], p["length"], config.seed)
    return render_image_surrogate(n, p["side"], config.noise_sigma, config.seed)


def pca_whiten(cloud: PointCloud, p: int) -> PointCloud:
    """Project onto the top-p principal components, each scaled to unit variance."""
    n, D = cloud.points.shape
    if p < 1 or p > min(n, D):
        raise InvalidParameterError("p must satisfy 1 <= p <= min(n, D)")
    X = cloud.points - cloud.points.mean(axis=0)
    if min(n, D) <= 2000:
        U, svals, _ = np.linalg.svd(X, full_matrices=False)
        U = U[:, :p]
        svals_head = svals[:p]
        tol = max(n, D) * np.finfo(float).eps * svals[0] if svals[0] > 0 else 0.0
        rank = int(np.sum(svals > max(tol, 1e-10 * max(svals[0], 1.0))))
    else:
        U, svals_head, _ = randomized_svd(X, n_components=p, n_oversamples=10,
                                          random_state=0)
        top = svals_head[0] if svals_head.size else 0.0
        rank = int(np.sum(svals_head > 1e-10 * max(top, 1.0)))
    if rank < p:
        raise RankDeficiencyError(p, rank)
    scores = U * np.sqrt(n - 1) if n > 1 else U
    # deterministic sign: largest-|entry| coordinate of each score column positive
    for j in range(scores.shape[1]):
        i = int(np.argmax(np.abs(scores[:, j])))
        if scores[i, j] < 0:
            scores[:, j] = -scores[:, j]
    desc = dict(cloud.descriptor)
    desc["pca_components"] = p
    return PointCloud(scores, cloud.latent, desc)


FLOAT_FMT = "%.17g"


def write_cloud(cloud: PointCloud, outdir) -> None:
    """Write points.csv, latent.csv (if present) and a config sidecar."""
    os.makedirs(outdir, exist_ok=True)
    D = cloud.ambient_dim
    header = ",".join(f"x{i + 1}" for i in range(D))
    np.savetxt(os.path.join(outdir, "points.csv"), cloud.points,
               delimiter=",", header=header, comments="", fmt=FLOAT_FMT)
    if cloud.latent is not None:
        d = cloud.latent.shape[1]
        header = ",".join(f"latent{i + 1}" for i in range(d))
        np.savetxt(os.path.join(outdir, "latent.csv"), cloud.latent,
                   delimiter=",", header=header, comments="", fmt=FLOAT_FMT)
    with open(os.path.join(outdir, "generator.json"), "w") as fh:
        json.dump(cloud.descriptor, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_cloud(indir) -> PointCloud:
    """Read a cloud previously written by :func:`write_cloud`."""
    pts = np.loadtxt(os.path.join(indir, "points.csv"), delimiter=",", skiprows=1,
                     ndmin=2)
    latent = None
    lat_path = os.path.join(indir, "latent.csv")
    if os.path.exists(lat_path):
        latent = np.loadtxt(lat_path, delimiter=",", skiprows=1, ndmin=2)
    desc = {}
    cfg_path = os.path.join(indir, "generator.json")
    if os.path.exists(cfg_path):
        with open(cfg_path) as fh:
            desc = json.load(fh)
    return PointCloud(pts, latent, desc)
