"""Command-line interface: composable subcommands over a shared run directory.

Config-file values (JSON, same schema as report.json's "config" block) are
overridden by explicit CLI flags.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import datasets, factorize, separate, spectral
from .pipeline import PipelineConfig, bench, decompose_cloud, embed_factors, \
    run_pipeline, _write_embeddings
from .separate import EXACT_LIMIT


def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float,
                   help="bandwidth multiplier (auto mode) or value (fixed mode)")
    p.add_argument("--epsilon-mode", choices=["auto-median", "fixed"])
    p.add_argument("--delta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--n-eigs", type=int, dest="n_eigenvectors")
    p.add_argument("--neighbors", type=int)
    p.add_argument("--n-samples", type=int)
    p.add_argument("--output-dir")
    p.add_argument("--density-normalize", action="store_true", default=None,
                   dest="density_normalization")
    p.add_argument("--pca-components", type=int)
    p.add_argument("--generator",
                   choices=["rectangle", "cylinder", "torus", "image-surrogate"])


_GENERATOR_DEFAULTS = {
    "rectangle": {"a": 1.0 + float(np.sqrt(np.pi)), "b": 1.5},
    "torus": {"R": 2.0, "r": 0.7},
    "cylinder": {"radius": 1.0, "length": 2.0},
    "image-surrogate": {"side": 64},
}


def build_config(args) -> PipelineConfig:
    base = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            base = json.load(fh)
        if "config" in base:  # accept a whole report.json
            base = base["config"]
    cfg = PipelineConfig.from_dict(base) if base else PipelineConfig()
    for name in ("seed", "epsilon", "epsilon_mode", "delta", "gamma",
                 "n_eigenvectors", "neighbors", "n_samples", "output_dir",
                 "density_normalization", "pca_components"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    gen_kind = getattr(args, "generator", None)
    if gen_kind is not None and gen_kind != cfg.generator.kind:
        sigma = 0.1 if gen_kind in ("rectangle", "image-surrogate") else 0.0
        cfg.generator = datasets.GeneratorConfig(
            gen_kind, _GENERATOR_DEFAULTS[gen_kind], sigma, cfg.seed
        )
    elif getattr(args, "seed", None) is not None:
        cfg.generator = datasets.GeneratorConfig(
            cfg.generator.kind, cfg.generator.params,
            cfg.generator.noise_sigma, cfg.seed,
        )
    return cfg


def _load_decomposition(outdir):
    import os

    lam = np.loadtxt(os.path.join(outdir, "eigenvalues.csv"), delimiter=",",
                     skiprows=1, ndmin=2)
    phi = np.loadtxt(os.path.join(outdir, "eigenvectors.csv"), delimiter=",",
                     skiprows=1, ndmin=2)
    n = phi.shape[0]
    eigenvalues = np.concatenate([[0.0], lam[:, 1]])
    trivial = np.full(n, 1.0 / np.sqrt(n))
    vectors = np.column_stack([trivial, phi])
    # the bandwidth is only informational past decomposition; staged runs
    # without a report.json fall back to a placeholder
    report = os.path.join(outdir, "report.json")
    eps = 1.0
    if os.path.exists(report):
        with open(report) as fh:
            eps = json.load(fh)["config"].get("resolved_epsilon", 1.0)
    return spectral.SpectralDecomposition(eigenvalues, vectors, eps, lam.shape[0])


def cmd_generate(cfg):
    cloud = datasets.generate(cfg.generator, cfg.n_samples)
    if cfg.pca_components is not None:
        cloud = datasets.pca_whiten(cloud, cfg.pca_components)
    datasets.write_cloud(cloud, cfg.output_dir)
    print(f"wrote {cloud.n} x {cloud.ambient_dim} cloud to {cfg.output_dir}")


def cmd_decompose(cfg):
    cloud = datasets.read_cloud(cfg.output_dir)
    graph, dec = decompose_cloud(cfg, cloud)
    spectral.write_decomposition(dec, cfg.output_dir)
    print(f"epsilon={dec.epsilon:.6g}, lambda_2={dec.eigenvalue(2):.6g}, "
          f"N={dec.n_pairs}")


def cmd_run(cfg):
    report = run_pipeline(cfg)
    groups = report["assignment"]["factors"]
    print(f"factors: {groups[0]} | {groups[1]}")
    print(f"products: {report['assignment']['products']}")
    print(f"timings: {json.dumps(report['timings'])}")


def cmd_bench(cfg, n_values):
    rows = bench(cfg, n_values)
    print(f"{'N':>5} {'decomposition':>14} {'factorization':>14} {'separation':>11}")
    for row in rows:
        print(f"{row['N']:>5} {row['decomposition']:>14.3f} "
              f"{row['factorization']:>14.3f} {row['separation']:>11.4f}")
    import os

    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(f"{cfg.output_dir}/bench.json", "w") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="manifactor",
        description="Factorize product-manifold point clouds via graph spectra",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("generate", "decompose", "factorize", "separate", "embed",
                 "run", "bench"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "bench":
            p.add_argument("--n-values", type=int, nargs="+",
                           default=[50, 100, 200, 400])
        if name == "embed":
            p.add_argument("--dims", type=int, default=2)
    args = parser.parse_args(argv)
    cfg = build_config(args)

    if args.command == "generate":
        cmd_generate(cfg)
    elif args.command == "decompose":
        cmd_decompose(cfg)
    elif args.command == "factorize":
        dec = _load_decomposition(cfg.output_dir)
        params = factorize.FactorizationParams(cfg.delta, cfg.gamma,
                                               dec.n_pairs,
                                               relative_delta=cfg.relative_delta)
        tl = factorize.find_triplets(dec, params)
        factorize.write_triplets(tl, cfg.output_dir)
        factorize.write_criterion_scatter(dec, sorted({t.k for t in tl}),
                                          cfg.output_dir)
        print(f"{len(tl)} triplets")
    elif args.command == "separate":
        dec = _load_decomposition(cfg.output_dir)
        params = factorize.FactorizationParams(cfg.delta, cfg.gamma,
                                               dec.n_pairs,
                                               relative_delta=cfg.relative_delta)
        tl = factorize.find_triplets(dec, params)
        matrix = separate.build_separability(tl)
        if matrix.T <= EXACT_LIMIT:
            cut = separate.max_cut_exact(matrix)
        else:
            cut = separate.max_cut_sdp(matrix, restarts=cfg.maxcut_restarts,
                                       rounding_repeats=cfg.maxcut_rounding_repeats,
                                       seed=cfg.seed)
        assignment = separate.assign_factors(tl, cut)
        separate.write_assignment(assignment, cfg.output_dir)
        print(f"cut={assignment.cut_value:.4f} method={assignment.method}")
    elif args.command == "embed":
        dec = _load_decomposition(cfg.output_dir)
        with open(f"{cfg.output_dir}/assignment.json") as fh:
            a = json.load(fh)
        assignment = separate.FactorAssignment(
            tuple(a["factors"][0]), tuple(a["factors"][1]),
            tuple(a["unassigned"]), tuple(a["products"]),
            a["cut_value"], a["method"],
        )
        embeddings = embed_factors(dec, assignment, args.dims)
        cloud = datasets.read_cloud(cfg.output_dir)
        _write_embeddings(embeddings, cloud, cfg.output_dir)
        print("wrote per-factor embeddings")
    elif args.command == "run":
        cmd_run(cfg)
    elif args.command == "bench":
        cmd_bench(cfg, tuple(args.n_values))
    return 0


if __name__ == "__main__":
    sys.exit(main())
