"""Adjacency-spectral partitioning for stochastic block models with unknown parameters."""

from .clustering import Clustering, LeastSquaresKMeans, assignment_from_clustering, exact_min_sse, lloyd_cluster
from .embedding import AdjacencySpectralEmbedding, KnowledgeMode, assemble_features, estimate_rank, svd_embed
from .evaluation import misassignment_count, misassignment_fraction
from .model import KEST_PARAM, PARAM1, SbmParams, compute_constants, factorize, numerical_rank, validate_params
from .sampler import GraphSample, extend_sample, sample_adjacency, sample_graph, sample_tau
from .seeding import Seed
from .selection import AdjacencySpectralPartition, estimate_k_check, estimate_k_hat, extended_partition

__version__ = "0.1.0"

__all__ = [
    "AdjacencySpectralEmbedding",
    "AdjacencySpectralPartition",
    "Clustering",
    "GraphSample",
    "KEST_PARAM",
    "KnowledgeMode",
    "LeastSquaresKMeans",
    "PARAM1",
    "SbmParams",
    "Seed",
    "assemble_features",
    "assignment_from_clustering",
    "compute_constants",
    "estimate_k_check",
    "estimate_k_hat",
    "estimate_rank",
    "exact_min_sse",
    "extend_sample",
    "extended_partition",
    "factorize",
    "lloyd_cluster",
    "misassignment_count",
    "misassignment_fraction",
    "numerical_rank",
    "sample_adjacency",
    "sample_graph",
    "sample_tau",
    "svd_embed",
    "validate_params",
]
