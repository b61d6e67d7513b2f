"""Global prototype codes: client class means and server aggregation."""

from .prototype_set import ClassMeanReport, PrototypeSet
from .aggregation import aggregate_prototypes, local_class_means

__all__ = ['ClassMeanReport', 'PrototypeSet', 'aggregate_prototypes', 'local_class_means']
