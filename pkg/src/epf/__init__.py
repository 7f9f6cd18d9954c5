"""Edge-preserving smoothing filters behind a one-parameter interface, with
gradient-attenuation metrics, per-image parameter equivalency, and operator
clustering."""

__version__ = "0.1.0"

from .image import ImageF, LabImage, GradientField, PixelMask, load_image, save_image
from .filters import FilterDescriptor, FilterInstance, FilterRegistry, registry
from .metrics import AttributeReport, full_report, so_ratio, ssim
from .equivalency import MatchResult, SmoothingEvaluator, baseline_match, find_parameter

__all__ = [
    "__version__",
    "ImageF",
    "LabImage",
    "GradientField",
    "PixelMask",
    "load_image",
    "save_image",
    "FilterDescriptor",
    "FilterInstance",
    "FilterRegistry",
    "registry",
    "AttributeReport",
    "full_report",
    "so_ratio",
    "ssim",
    "MatchResult",
    "SmoothingEvaluator",
    "baseline_match",
    "find_parameter",
]
