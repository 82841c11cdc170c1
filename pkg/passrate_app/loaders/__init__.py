"""
Dataset loaders.
Each loader returns a DatasetHandle of validated enrollment records.
"""

from .csv_loader import load_dataset, write_dataset
from .synthetic_loader import (
    GradeModel,
    SyntheticConfig,
    generate_synthetic,
    load_synthetic_config,
)

__all__ = [
    "load_dataset",
    "write_dataset",
    "GradeModel",
    "SyntheticConfig",
    "generate_synthetic",
    "load_synthetic_config",
]
