"""Latent concept discovery over token embedding datasets.

Clustering backends (k-means, Ward agglomerative, leaders compression),
concept extraction with type filtering, and alignment scoring against a
labeled ontology, plus a child-process scaling benchmark.
"""

__version__ = "0.1.0"

from .agglomerative import Dendrogram, cut_tree, ward_fit
from .alignment import AlignmentReport, theta_alignment
from .assignment import ClusterAssignment, load_assignment, save_assignment
from .concepts import (Concept, ConceptSet, build_concepts, filter_concepts,
                       size_histogram)
from .dataset import (EmbeddingDataset, HumanOntology, TokenRecord, build_ontology,
                      frequency_filter, load_dataset, load_embeddings, load_tokens,
                      save_dataset, save_embeddings, save_tokens, validate_dataset)
from .errors import ResourceBudgetError, ValidationError
from .kmeans import KMeansConfig, kmeans_fit
from .leaders import (LeadersCompression, TauSearchConfig, leaders_cluster,
                      leaders_pass, tau_binary_search)

__all__ = [
    "__version__",
    "AlignmentReport",
    "ClusterAssignment",
    "Concept",
    "ConceptSet",
    "Dendrogram",
    "EmbeddingDataset",
    "HumanOntology",
    "KMeansConfig",
    "LeadersCompression",
    "ResourceBudgetError",
    "TauSearchConfig",
    "TokenRecord",
    "ValidationError",
    "build_concepts",
    "build_ontology",
    "cut_tree",
    "filter_concepts",
    "frequency_filter",
    "kmeans_fit",
    "leaders_cluster",
    "leaders_pass",
    "load_assignment",
    "load_dataset",
    "load_embeddings",
    "load_tokens",
    "save_assignment",
    "save_dataset",
    "save_embeddings",
    "save_tokens",
    "size_histogram",
    "tau_binary_search",
    "theta_alignment",
    "validate_dataset",
    "ward_fit",
]
