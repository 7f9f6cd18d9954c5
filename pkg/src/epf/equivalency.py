"""Per-image mapping from a target smoothing level to a filter parameter.

Smoothing level is 1 - SO. SO decreases monotonically with the controlling
parameter for the supported filters, so the search is a bracketing bisection
over [0, param_max] that always returns the best (minimum-deviation)
parameter seen.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import FilterInstance
from .image import ImageF, gradient_magnitude

DEVIATION_TOL = 1e-3
BRACKET_TOL = 1e-4
MAX_EVALUATIONS = 60

# The ten-level common baseline of target smoothing levels.
BASELINE_TARGETS = tuple(round(0.1 * k, 1) for k in range(1, 11))


@dataclass(frozen=True)
class MatchResult:
    filter_id: str
    target_level: float
    param: float
    normalized_param: float
    achieved_so: float
    deviation: float
    evaluations: int
    converged: bool

    @property
    def achieved_level(self) -> float:
        return 1.0 - self.achieved_so

    def to_dict(self) -> dict:
        return {
            "filter_id": self.filter_id,
            "target": self.target_level,
            "param": self.param,
            "normalized_param": self.normalized_param,
            "achieved_level": self.achieved_level,
            "deviation": self.deviation,
            "evaluations": self.evaluations,
            "converged": self.converged,
        }


MATCH_CSV_HEADER = (
    "filter_id",
    "target",
    "param",
    "normalized_param",
    "achieved_level",
    "deviation",
    "evaluations",
    "converged",
)


class SmoothingEvaluator:
    """Caches SO evaluations for one (filter, image) pair.

    The cache is keyed on the filter's canonical parameter, so integer-radius
    filters pay for each distinct radius once.
    """

    def __init__(self, filt: FilterInstance, image: ImageF):
        self.filter = filt
        self.image = image
        self._grad_i_sum = float(gradient_magnitude(image).mag.sum())
        self._cache: dict[float, float] = {}

    def so(self, param: float) -> float:
        key = self.filter.descriptor.canonical_param(param)
        if key in self._cache:
            return self._cache[key]
        out = self.filter.apply(self.image, param)
        if self._grad_i_sum < 1e-12:
            value = 1.0
        else:
            value = float(gradient_magnitude(out).mag.sum()) / self._grad_i_sum
        self._cache[key] = value
        return value

    def output(self, param: float) -> ImageF:
        return self.filter.apply(self.image, param)


def find_parameter(
    filt: FilterInstance,
    image: ImageF,
    target: float,
    *,
    evaluator: SmoothingEvaluator | None = None,
    tol: float = DEVIATION_TOL,
    bracket_tol: float = BRACKET_TOL,
    max_evaluations: int = MAX_EVALUATIONS,
) -> MatchResult:
    """Search [0, param_max] for the parameter matching a target smoothing level.

    Terminates when the deviation drops to ``tol``, when the bracket endpoints'
    smoothing levels collapse within ``bracket_tol``, or after
    ``max_evaluations`` smoothing evaluations. Unreachable targets yield the
    clamped endpoint with ``converged=False``.
    """
    if not (0.0 <= target <= 1.0):
        raise ValueError(f"target smoothing level must be in [0, 1], got {target}")
    ev = evaluator if evaluator is not None else SmoothingEvaluator(filt, image)
    pmax = filt.param_max

    evaluations = 0
    best_param = 0.0
    best_so = 1.0
    best_dev = np.inf

    def level(param: float) -> float:
        nonlocal evaluations, best_param, best_so, best_dev
        evaluations += 1
        so = ev.so(param)
        sl = 1.0 - so
        dev = abs(sl - target)
        if dev < best_dev:
            best_param, best_so, best_dev = param, so, dev
        return sl

    lo, hi = 0.0, pmax
    sl_lo = level(lo)
    if best_dev > tol:
        sl_hi = level(hi)
        if sl_hi >= target:
            while (
                evaluations < max_evaluations
                and best_dev > tol
                and abs(sl_hi - sl_lo) >= bracket_tol
            ):
                mid = 0.5 * (lo + hi)
                sl_mid = level(mid)
                if sl_mid < target:
                    lo, sl_lo = mid, sl_mid
                else:
                    hi, sl_hi = mid, sl_mid
        # else: the target exceeds the filter's reach; hi is already best-seen.

    return MatchResult(
        filter_id=filt.id,
        target_level=float(target),
        param=float(best_param),
        normalized_param=float(best_param / pmax),
        achieved_so=float(best_so),
        deviation=float(best_dev),
        evaluations=evaluations,
        converged=bool(best_dev <= tol),
    )


def baseline_match(
    filt: FilterInstance,
    image: ImageF,
    targets: tuple = BASELINE_TARGETS,
    *,
    evaluator: SmoothingEvaluator | None = None,
) -> list[MatchResult]:
    """Match the ten-level common baseline (0.1 .. 1.0) in order."""
    ev = evaluator if evaluator is not None else SmoothingEvaluator(filt, image)
    return [find_parameter(filt, image, t, evaluator=ev) for t in targets]
