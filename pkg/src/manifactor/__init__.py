"""Spectral factorization of product-manifold point clouds.

The pipeline: sample or load a point cloud, build a Gaussian kernel graph,
take the low spectrum of its random-walk Laplacian, find eigenvectors that are
elementwise products of earlier ones, and split the factor eigenvectors into
two groups (one per latent degree of freedom) with Max-Cut.
"""

from .analytic import (
    AnalyticSpectrum,
    circle_spectrum,
    circular_correlation,
    correlate_mode,
    identify_modes,
    interval_spectrum,
    rectangle_spectrum,
)
from .datasets import (
    GeneratorConfig,
    PointCloud,
    pca_whiten,
    render_image_surrogate,
    sample_cylinder,
    sample_rectangle,
    sample_torus,
)
from .factorize import (
    FactorizationParams,
    Triplet,
    TripletList,
    cosine_similarity,
    criterion_scatter,
    find_triplets,
)
from .pipeline import PipelineConfig, bench, embed_factors, run_pipeline
from .separate import (
    FactorAssignment,
    SeparabilityMatrix,
    assign_factors,
    build_separability,
    max_cut_exact,
    max_cut_sdp,
)
from .spectral import (
    KernelGraph,
    SpectralDecomposition,
    density_normalize,
    diffusion_coordinates,
    pairwise_kernel,
    select_epsilon,
    spectral_decompose,
)

__version__ = "0.1.0"
