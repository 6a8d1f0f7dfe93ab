"""Quantum compressive k-means simulated on a classical machine."""
from ._kernels import BACKEND
from .core import (
    ClusteringResult,
    Dataset,
    FrequencyMatrix,
    RngSpec,
    Standardizer,
    assign_nearest,
    feature_map,
    sample_frequencies,
    sse,
    standardize,
)
from .errors import (
    CapacityError,
    EmptyClusterError,
    InvalidDataError,
    InvalidParameterError,
    ParseError,
    QcKmeansError,
)
from .pipeline import PipelineConfig, q_peak, run_qc_kmeans
from .statevec import NoiseModel

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CapacityError", "ClusteringResult", "Dataset", "EmptyClusterError",
    "FrequencyMatrix", "InvalidDataError", "InvalidParameterError", "NoiseModel",
    "ParseError", "PipelineConfig", "QcKmeansError", "RngSpec", "Standardizer",
    "assign_nearest", "feature_map", "q_peak", "run_qc_kmeans", "sample_frequencies",
    "sse", "standardize",
]
