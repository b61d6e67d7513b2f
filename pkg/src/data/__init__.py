"""Dataset ingestion and synthetic data generation."""

from .dataset import Dataset, Split, load_csv, save_csv, split_indices
from .synthetic import SyntheticSpec, generate_synthetic

__all__ = ['Dataset', 'Split', 'load_csv', 'save_csv', 'split_indices',
           'SyntheticSpec', 'generate_synthetic']
