"""Datasets, classical baselines and the experiment harness."""
from .baselines import classical_ckm, kmeanspp_init, lloyd_kmeans
from .datasets import FAMILIES, SyntheticSpec, generate, load_csv, save_csv

__all__ = [
    "FAMILIES", "SyntheticSpec", "classical_ckm", "generate", "kmeanspp_init",
    "lloyd_kmeans", "load_csv", "save_csv",
]
