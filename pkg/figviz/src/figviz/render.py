"""Renderers for the four figure kinds produced from a run directory.

All figures are static rasters written through the Agg backend; rendering is
read-only over the pipeline outputs and deterministic for fixed inputs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .io import RunData, SchemaError, read_embedding, read_run  # noqa: E402

KINDS = ("eigvec-on-latent", "factor-embedding", "criterion-scatter",
         "timing-table")

# the per-factor eigenvector figures show at most this many panels
MAX_PANELS = 5
_DPI = 150


@dataclass(frozen=True)
class FigureSpec:
    """One render request: a figure kind over a run directory."""

    kind: str
    run_dir: str
    out_dir: str
    point_size: float = 2.0
    colormap: str = "viridis"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")


def _save(fig, path):
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def _empty_panel(message, path):
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.text(0.5, 0.5, message, ha="center", va="center")
    ax.set_axis_off()
    return _save(fig, path)


def _render_eigvec_on_latent(spec: FigureSpec, run: RunData):
    """One figure per factor group: panels of eigenvectors over the latents."""
    if run.latent is None or run.latent.shape[1] < 2:
        raise SchemaError("latent.csv: need two latent columns for panels")
    written = []
    for fi, group in enumerate(run.groups):
        path = os.path.join(spec.out_dir, f"eigvec_factor{fi}.png")
        if not group:
            written.append(_empty_panel("no factors found", path))
            continue
        members = sorted(group, key=run.eigenvalue)[:MAX_PANELS]
        fig, axes = plt.subplots(
            1, len(members), figsize=(2.4 * len(members), 2.6), squeeze=False
        )
        for ax, k in zip(axes[0], members):
            ax.scatter(run.latent[:, 0], run.latent[:, 1],
                       c=run.eigenvector(k), s=spec.point_size,
                       cmap=spec.colormap, rasterized=True)
            ax.set_title(f"$\\phi_{{{k}}}$")
            ax.set_xticks([])
            ax.set_yticks([])
        fig.suptitle(f"factor {fi} eigenvectors over ground-truth latents")
        fig.tight_layout()
        written.append(_save(fig, path))
    return written


def _render_factor_embedding(spec: FigureSpec, run: RunData):
    """Per factor: the 2D eigenmap embedding colored by each latent column."""
    written = []
    for fi in range(2):
        path = os.path.join(spec.out_dir, f"embedding_factor{fi}.png")
        emb, latent = read_embedding(spec.run_dir, fi)
        if emb.shape[1] < 2:
            written.append(_empty_panel("no 2D embedding", path))
            continue
        n_lat = max(latent.shape[1], 1)
        fig, axes = plt.subplots(
            1, n_lat, figsize=(3.0 * n_lat, 2.8), squeeze=False
        )
        for col, ax in enumerate(axes[0]):
            color = latent[:, col] if latent.shape[1] else None
            sc = ax.scatter(emb[:, 0], emb[:, 1], c=color, s=spec.point_size,
                            cmap=spec.colormap, rasterized=True)
            if color is not None:
                fig.colorbar(sc, ax=ax, label=f"latent{col + 1}")
            ax.set_xlabel("e1")
            ax.set_ylabel("e2")
            ax.set_aspect("equal")
        fig.suptitle(f"factor {fi} embedding")
        fig.tight_layout()
        written.append(_save(fig, path))
    return written


def highlighted_pair(run: RunData, k: int):
    """The (i, j, eig_gap, score) highlighted in the scatter for index k.

    The coordinates are looked up in criterion.csv for the pair named by the
    triplets.csv row of k, so any disagreement between the two files raises.
    """
    rows = run.triplets[run.triplets[:, 2] == k]
    if len(rows) != 1:
        raise SchemaError(f"triplets.csv: expected one row with k={k}, "
                          f"found {len(rows)}")
    i, j = int(rows[0, 0]), int(rows[0, 1])
    if run.criterion is None:
        raise SchemaError("criterion.csv: file not found")
    crit = run.criterion
    match = crit[(crit[:, 0] == k) & (crit[:, 1] == i) & (crit[:, 2] == j)]
    if len(match) != 1:
        raise SchemaError(
            f"criterion.csv: no unique row for pair ({i},{j}) at k={k}"
        )
    return i, j, float(match[0, 3]), float(match[0, 4])


def _render_criterion_scatter(spec: FigureSpec, run: RunData):
    """Similarity vs eigenvalue gap per candidate pair, winner highlighted."""
    if run.criterion is None:
        raise SchemaError("criterion.csv: file not found")
    ks = sorted({int(k) for k in run.criterion[:, 0]})
    wanted = spec.options.get("k")
    if wanted is not None:
        if wanted not in ks:
            raise SchemaError(f"criterion.csv: no rows for k={wanted}")
        ks = [wanted]
    written = []
    for k in ks:
        rows = run.criterion[run.criterion[:, 0] == k]
        i, j, gap, score = highlighted_pair(run, k)
        fig, ax = plt.subplots(figsize=(4, 3))
        ax.scatter(rows[:, 3], rows[:, 4], s=max(spec.point_size, 8.0),
                   color="tab:gray", label="candidate pairs")
        ax.scatter([gap], [score], s=60, marker="*", color="tab:red",
                   zorder=3, label=f"selected ({i},{j})")
        ax.set_xlabel(r"$|\lambda_i + \lambda_j - \lambda_k|$")
        ax.set_ylabel("similarity")
        ax.set_title(f"product criteria for k={k}")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        written.append(
            _save(fig, os.path.join(spec.out_dir, f"criterion_k{k}.png"))
        )
    return written


def _render_timing_table(spec: FigureSpec, run: RunData):
    """Stage timing table from report.json."""
    path = os.path.join(spec.out_dir, "timing_table.png")
    if not run.timings:
        return [_empty_panel("no timings recorded", path)]
    stages = list(run.timings)
    cells = [[stage, f"{run.timings[stage]:.3f}"] for stage in stages]
    fig, ax = plt.subplots(figsize=(4, 0.4 * len(stages) + 1))
    ax.set_axis_off()
    table = ax.table(cellText=cells, colLabels=["stage", "seconds"],
                     loc="center")
    table.scale(1.0, 1.3)
    fig.tight_layout()
    return [_save(fig, path)]


_RENDERERS = {
    "eigvec-on-latent": _render_eigvec_on_latent,
    "factor-embedding": _render_factor_embedding,
    "criterion-scatter": _render_criterion_scatter,
    "timing-table": _render_timing_table,
}


def render(spec: FigureSpec):
    """Render one figure kind; returns the list of written image paths."""
    os.makedirs(spec.out_dir, exist_ok=True)
    run = read_run(spec.run_dir)
    return _RENDERERS[spec.kind](spec, run)
