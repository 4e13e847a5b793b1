"""Regularized graph Laplacians for sparse random graphs.

Graph models, matrix-free (regularized) Laplacian operators, brute-force
norm oracles, core/residual decompositions, two-block spectral clustering,
and a Monte Carlo experiment CLI.
"""
from .community import (
    ClusterResult,
    DkReport,
    auto_tau,
    davis_kahan_report,
    eigenvector_distance,
    spectral_cluster,
)
from .core_residual import (
    CoreSet,
    IndexDecomposition,
    degree_trim_core,
    expected_residual_bound,
    residual_norm_bound,
    restrict,
    restriction_bound_check,
    sparse_decompose,
)
from .graph_model import (
    ModelParams,
    ProbabilityMatrix,
    SbmConfig,
    SparseAdjacency,
    er_prob_matrix,
    model_params,
    sample_graph,
    sbm_prob_matrix,
)
from .oracles import (
    GrothendieckCert,
    cutnorm_concentration_check,
    grothendieck_submatrix_search,
    inf_to_one_norm_exact,
    spectral_norm_dense,
)
from .spectral import (
    ExpectedOperator,
    Kind,
    Mode,
    RegularizedOperator,
    SpectralResult,
    degrees,
    eig_symmetric,
    make_operator,
    operator_norm,
    second_eigenvector_laplacian,
    submatrix_norm,
)

__version__ = "0.1.0"
