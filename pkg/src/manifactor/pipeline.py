"""End-to-end orchestration: generate, decompose, factorize, separate, embed.

Every stage writes its documented output files into ``output_dir`` and the run
closes with a ``report.json`` carrying per-stage timings and the complete
effective configuration (including the resolved kernel bandwidth), so a run is
reproducible from the report alone.
"""

from __future__ import annotations

import dataclasses
import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import datasets, factorize, separate, spectral
from .datasets import GeneratorConfig, PointCloud
from .errors import InsufficientFactorsError, InvalidParameterError
from .separate import EXACT_LIMIT, FactorAssignment
from .spectral import SpectralDecomposition


@dataclass
class PipelineConfig:
    generator: GeneratorConfig = field(
        default_factory=lambda: GeneratorConfig(
            "rectangle", {"a": 1.0 + np.sqrt(np.pi), "b": 1.5}, 0.1, 0
        )
    )
    n_samples: int = 10000
    epsilon_mode: str = "auto-median"  # or "fixed"
    epsilon: float | None = None  # multiplier in auto mode, value in fixed mode
    neighbors: int | None = None  # default: dense below the size limit, else 64
    density_normalization: bool = False
    n_eigenvectors: int = 50
    delta: float = 0.5
    gamma: float = 0.85
    relative_delta: bool = False
    pca_components: int | None = None
    maxcut_restarts: int = 8
    maxcut_rounding_repeats: int = 200
    embed_dims: int = 2
    seed: int = 0
    output_dir: str = "run"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["generator"] = {
            "kind": self.generator.kind,
            "params": dict(self.generator.params),
            "noise_sigma": self.generator.noise_sigma,
            "seed": self.generator.seed,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        gen = d.pop("generator", None)
        known = {f.name for f in dataclasses.fields(cls)}
        d = {k: v for k, v in d.items() if k in known}
        if gen is None:
            return cls(**d)
        return cls(
            generator=GeneratorConfig(
                gen["kind"], gen.get("params", {}),
                gen.get("noise_sigma", 0.0), gen.get("seed", 0),
            ),
            **d,
        )


def resolve_epsilon(config: PipelineConfig, points) -> float:
    if config.epsilon_mode == "fixed":
        if config.epsilon is None or config.epsilon <= 0:
            raise InvalidParameterError("fixed epsilon mode requires epsilon > 0")
        return float(config.epsilon)
    if config.epsilon_mode != "auto-median":
        raise InvalidParameterError(f"unknown epsilon mode {config.epsilon_mode!r}")
    mult = 1.0 if config.epsilon is None else float(config.epsilon)
    return spectral.select_epsilon(points, multiplier=mult)


def decompose_cloud(config: PipelineConfig, cloud: PointCloud):
    """Kernel graph plus eigendecomposition for a prepared cloud."""
    eps = resolve_epsilon(config, cloud.points)
    neighbors = config.neighbors
    if neighbors is None and cloud.n > spectral.DENSE_LIMIT:
        neighbors = spectral.DEFAULT_NEIGHBORS
    graph = spectral.pairwise_kernel(cloud.points, eps, neighbors=neighbors)
    if config.density_normalization:
        graph = spectral.density_normalize(graph)
    dec = spectral.spectral_decompose(graph, config.n_eigenvectors)
    return graph, dec


def embed_factors(dec: SpectralDecomposition, assignment: FactorAssignment,
                  dims: int):
    """Per-factor Laplacian eigenmap: lowest-eigenvalue members of each group."""
    out = []
    for name, group in (("group_a", assignment.group_a),
                        ("group_b", assignment.group_b)):
        if dims == 0:
            out.append(np.zeros((dec.n, 0)))
            continue
        members = sorted(group, key=lambda k: dec.eigenvalue(k))
        if len(members) < dims:
            raise InsufficientFactorsError(
                f"{name} has {len(members)} eigenvectors, fewer than dims={dims}"
            )
        cols = [dec.eigenvector(k) for k in members[:dims]]
        out.append(np.column_stack(cols))
    return out


def _write_embeddings(embeddings, cloud: PointCloud, outdir) -> None:
    for fi, emb in enumerate(embeddings):
        cols = [emb]
        header = [f"e{j + 1}" for j in range(emb.shape[1])]
        if cloud.latent is not None:
            cols.append(cloud.latent)
            header += [f"latent{j + 1}" for j in range(cloud.latent.shape[1])]
        data = np.column_stack(cols) if cols else emb
        np.savetxt(os.path.join(outdir, f"embedding_factor{fi}.csv"), data,
                   delimiter=",", header=",".join(header), comments="",
                   fmt="%.17g")


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute the full chain and write all stage outputs plus report.json."""
    outdir = config.output_dir
    os.makedirs(outdir, exist_ok=True)
    failed_marker = os.path.join(outdir, "FAILED")
    if os.path.exists(failed_marker):
        os.remove(failed_marker)

    timings = {}
    stage = "generate"
    try:
        t0 = time.perf_counter()
        cloud = datasets.generate(config.generator, config.n_samples)
        if config.pca_components is not None:
            cloud = datasets.pca_whiten(cloud, config.pca_components)
        datasets.write_cloud(cloud, outdir)
        timings["generate"] = time.perf_counter() - t0

        stage = "decomposition"
        t0 = time.perf_counter()
        graph, dec = decompose_cloud(config, cloud)
        spectral.write_decomposition(dec, outdir)
        timings["decomposition"] = time.perf_counter() - t0

        stage = "factorization"
        t0 = time.perf_counter()
        params = factorize.FactorizationParams(
            config.delta, config.gamma, config.n_eigenvectors,
            relative_delta=config.relative_delta,
        )
        triplets = factorize.find_triplets(dec, params)
        factorize.write_triplets(triplets, outdir)
        factorize.write_criterion_scatter(dec, sorted({t.k for t in triplets}),
                                          outdir)
        timings["factorization"] = time.perf_counter() - t0

        stage = "separation"
        t0 = time.perf_counter()
        matrix = separate.build_separability(triplets)
        if matrix.T <= EXACT_LIMIT:
            cut = separate.max_cut_exact(matrix)
        else:
            cut = separate.max_cut_sdp(
                matrix, restarts=config.maxcut_restarts,
                rounding_repeats=config.maxcut_rounding_repeats,
                seed=config.seed,
            )
        assignment = separate.assign_factors(triplets, cut)
        separate.write_assignment(assignment, outdir)
        timings["separation"] = time.perf_counter() - t0

        stage = "embedding"
        t0 = time.perf_counter()
        embeddings = embed_factors(dec, assignment, config.embed_dims)
        _write_embeddings(embeddings, cloud, outdir)
        timings["embedding"] = time.perf_counter() - t0
    except Exception as exc:
        with open(failed_marker, "w") as fh:
            fh.write(f"stage: {stage}\nerror: {exc}\n")
        raise RuntimeError(f"pipeline stage {stage!r} failed: {exc}") from exc

    effective = config.to_dict()
    effective["resolved_epsilon"] = dec.epsilon
    report = {
        "config": effective,
        "timings": timings,
        "n_triplets": len(triplets),
        "assignment": assignment.to_dict(),
    }
    with open(os.path.join(outdir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def bench(config: PipelineConfig, n_values=(50, 100, 200, 400)) -> list:
    """Timing table rows across eigenvector counts, on one shared cloud.

    Columns mirror the pipeline stages: decomposition, factorization
    (the triplet search), and separation (separability matrix plus Max-Cut).
    """
    cloud = datasets.generate(config.generator, config.n_samples)
    if config.pca_components is not None:
        cloud = datasets.pca_whiten(cloud, config.pca_components)
    rows = []
    for N in n_values:
        cfg = dataclasses.replace(config, n_eigenvectors=N)
        t0 = time.perf_counter()
        _, dec = decompose_cloud(cfg, cloud)
        t_dec = time.perf_counter() - t0

        t0 = time.perf_counter()
        params = factorize.FactorizationParams(
            cfg.delta, cfg.gamma, N, relative_delta=cfg.relative_delta
        )
        triplets = factorize.find_triplets(dec, params)
        t_fac = time.perf_counter() - t0

        t0 = time.perf_counter()
        try:
            matrix = separate.build_separability(triplets)
            if matrix.T <= EXACT_LIMIT:
                separate.max_cut_exact(matrix)
            else:
                separate.max_cut_sdp(matrix, restarts=cfg.maxcut_restarts,
                                     rounding_repeats=cfg.maxcut_rounding_repeats,
                                     seed=cfg.seed)
        except separate.EmptyTripletsError:
            pass
        t_sep = time.perf_counter() - t0
        rows.append({"N": N, "decomposition": t_dec, "factorization": t_fac,
                     "separation": t_sep, "n_triplets": len(triplets)})
    return rows
