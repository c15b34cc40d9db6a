"""Density level-set recovery with DBSCAN at data-driven parameters."""

from .dbscan import NOISE, Clustering, dbscan_cluster
from .density import knn_density, unit_ball_volume
from .geometry import NeighborIndex, build_index
from .tuning import TuningConfig, epsilon_for_level, epsilon_tilde

__version__ = "0.1.0"

__all__ = [
    "NOISE",
    "Clustering",
    "NeighborIndex",
    "TuningConfig",
    "build_index",
    "dbscan_cluster",
    "epsilon_for_level",
    "epsilon_tilde",
    "knn_density",
    "unit_ball_volume",
]
