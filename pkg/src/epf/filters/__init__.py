from .base import FilterDescriptor, FilterInstance, FilterRegistry, registry
from .external import ExternalAdapter, apply_external, external_instance

__all__ = [
    "FilterDescriptor",
    "FilterInstance",
    "FilterRegistry",
    "registry",
    "ExternalAdapter",
    "apply_external",
    "external_instance",
]
