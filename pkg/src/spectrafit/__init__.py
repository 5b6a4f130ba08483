"""Random-graph model fitting through spectral densities."""

__version__ = "1.0.0"

from .graphs import Graph, graph_from_edges, load_edge_list, parse_edge_list
from .generators import (BAParams, BMParams, DRParams, ERParams, GRGParams,
                         WSParams, generate)
from .spectrum import (EmpiricalCDF, DensityCurve, GridSpec, Raw, SqrtN,
                       ecdf, eigenvalues, kernel_density, silverman_bandwidth)
from .laws import (BlockModelLaw, KestenMcKay, KestenMcKayScaled,
                   SemicircleP, SemicircleUnit, block_model_density,
                   block_variance_ratios)
from .metrics import kl_divergence, l1_cdf, l1_density
from .fitting import (FitConfig, SearchSpace, fit_parameter, select_model)

__all__ = [
    "__version__",
    "Graph", "graph_from_edges", "load_edge_list", "parse_edge_list",
    "ERParams", "DRParams", "GRGParams", "WSParams", "BAParams", "BMParams",
    "generate",
    "EmpiricalCDF", "DensityCurve", "GridSpec", "Raw", "SqrtN",
    "ecdf", "eigenvalues", "kernel_density", "silverman_bandwidth",
    "SemicircleUnit", "SemicircleP", "KestenMcKay", "KestenMcKayScaled",
    "BlockModelLaw", "block_model_density", "block_variance_ratios",
    "kl_divergence", "l1_cdf", "l1_density",
    "FitConfig", "SearchSpace", "fit_parameter", "select_model",
]
