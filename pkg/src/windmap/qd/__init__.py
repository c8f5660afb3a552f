"""Quality-diversity machinery: unstructured elite archive and search loop."""

from .archive import Archive, Elite
from .sobol import sobol
from .sphen import SphenConfig, illuminate, mutate, select_new_samples, sphen

__all__ = [
    "Archive",
    "Elite",
    "SphenConfig",
    "illuminate",
    "mutate",
    "select_new_samples",
    "sobol",
    "sphen",
]
