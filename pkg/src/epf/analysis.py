"""Batch pipelines: elimination profiles, baseline sweeps, attribute curves,
smooth-vs-edge tradeoffs, SSIM distance matrices with planar embeddings, and
the two application demos.

Pipelines fan out over per-image tasks; aggregation always runs in fixed
corpus order so results are bit-reproducible regardless of the worker count.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .equivalency import BASELINE_TARGETS, MatchResult, SmoothingEvaluator, find_parameter
from .errors import FilterError, FitDegenerateError
from .filters import FilterInstance
from .image import ImageF, clamped, gradient_magnitude
from .metrics import full_report, smooth_mask, so_ratio, ssim

log = logging.getLogger(__name__)

PROFILE_PARAM_STEPS = 11
PROFILE_BINS = 100


def _map_images(fn, images, parallel: int):
    """Apply fn over images, preserving order; parallel only changes scheduling."""
    if parallel <= 1 or len(images) <= 1:
        return [fn(img) for img in images]
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(fn, images))


@dataclass(frozen=True)
class ProfileMatrix:
    filter_id: str
    params: tuple
    n_bins: int
    values: np.ndarray  # len(params) x n_bins
    images_used: int


@dataclass(frozen=True)
class SweepLevel:
    level: float
    mean_param_norm: float
    var_param_norm: float
    mean_deviation: float
    converged: int
    total: int


@dataclass(frozen=True)
class SweepTable:
    filter_id: str
    levels: tuple  # of SweepLevel


@dataclass(frozen=True)
class AttributeCurve:
    filter_id: str
    levels: tuple  # of (level, mean delta_l, mean delta_c, mean contrast_ratio, converged, total)


@dataclass(frozen=True)
class TradeoffPoint:
    image_index: int
    level: float
    smoothing: float  # 1 - SO_S
    edge_so: float
    converged: bool


@dataclass(frozen=True)
class TradeoffFit:
    filter_id: str
    points: tuple
    coefficients: tuple  # cubic, highest degree first
    residual_rms: float


@dataclass(frozen=True)
class DistanceMatrix:
    filter_ids: tuple
    level: float
    values: np.ndarray  # n x n, symmetric, zero diagonal
    images_used: int


@dataclass(frozen=True)
class Embedding:
    filter_ids: tuple
    level: float
    coords: np.ndarray  # n x dims
    negative_eigenvalue_mass: float


def assign_bins(image: ImageF, n_bins: int = PROFILE_BINS) -> np.ndarray:
    """Equal-count bin index per pixel from the original gradient magnitudes.

    Ties break in raster order, so bin sizes differ by at most one and the
    k-th bin's gradients never exceed the (k+1)-th bin's.
    """
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    mags = gradient_magnitude(image).mag.ravel()
    order = np.argsort(mags, kind="stable")
    n = mags.size
    base = n // n_bins
    extra = n % n_bins
    sizes = [base + (1 if k < extra else 0) for k in range(n_bins)]
    bins = np.empty(n, dtype=np.int32)
    start = 0
    for k, size in enumerate(sizes):
        bins[order[start : start + size]] = k
        start += size
    return bins.reshape(image.height, image.width)


def _per_bin_so(grad_i: np.ndarray, grad_j: np.ndarray, bins: np.ndarray, n_bins: int) -> np.ndarray:
    flat_bins = bins.ravel()
    denom = np.bincount(flat_bins, weights=grad_i.ravel(), minlength=n_bins)
    numer = np.bincount(flat_bins, weights=grad_j.ravel(), minlength=n_bins)
    out = np.ones(n_bins)
    ok = denom >= 1e-12
    out[ok] = numer[ok] / denom[ok]
    return out


def elimination_profile(
    filt: FilterInstance,
    corpus: list[ImageF],
    n_bins: int = PROFILE_BINS,
    parallel: int = 1,
) -> ProfileMatrix:
    """Per-bin SO over a uniform parameter sampling, averaged over the corpus."""
    if not corpus:
        raise ValueError("corpus must not be empty")
    params = tuple(filt.param_max * k / (PROFILE_PARAM_STEPS - 1) for k in range(PROFILE_PARAM_STEPS))

    def one(image: ImageF):
        try:
            bins = assign_bins(image, n_bins)
            grad_i = gradient_magnitude(image).mag
            rows = np.empty((len(params), n_bins))
            for pi, p in enumerate(params):
                out = filt.apply(image, p)
                rows[pi] = _per_bin_so(grad_i, gradient_magnitude(out).mag, bins, n_bins)
            return rows
        except FilterError as exc:
            log.warning("profile: skipping image (%s failed: %s)", filt.id, exc)
            return None

    results = _map_images(one, corpus, parallel)
    used = [r for r in results if r is not None]
    if not used:
        raise FilterError(f"profile: filter {filt.id!r} failed on every corpus image")
    total = np.zeros((len(params), n_bins))
    for rows in used:
        total += rows
    return ProfileMatrix(
        filter_id=filt.id,
        params=params,
        n_bins=n_bins,
        values=total / len(used),
        images_used=len(used),
    )


def baseline_sweep(
    filt: FilterInstance,
    corpus: list[ImageF],
    targets: tuple = BASELINE_TARGETS,
    parallel: int = 1,
) -> SweepTable:
    """Per-level normalized-parameter statistics and match accuracy."""

    def one(image: ImageF) -> list[MatchResult]:
        ev = SmoothingEvaluator(filt, image)
        return [find_parameter(filt, image, t, evaluator=ev) for t in targets]

    per_image = _map_images(one, corpus, parallel)
    rows = []
    for ti, target in enumerate(targets):
        matches = [res[ti] for res in per_image]
        norms = np.array([m.normalized_param for m in matches])
        devs = np.array([m.deviation for m in matches])
        rows.append(
            SweepLevel(
                level=float(target),
                mean_param_norm=float(norms.mean()),
                var_param_norm=float(norms.var()),
                mean_deviation=float(devs.mean()),
                converged=sum(1 for m in matches if m.converged),
                total=len(matches),
            )
        )
    return SweepTable(filter_id=filt.id, levels=tuple(rows))


def attribute_curves(
    filt: FilterInstance,
    corpus: list[ImageF],
    levels: tuple = BASELINE_TARGETS,
    parallel: int = 1,
) -> AttributeCurve:
    """Mean brightness/color/contrast change per smoothing level.

    Only converged matches enter the means; a level-0 sanity row (identity)
    is prepended. Masks come from the original image.
    """
    all_levels = (0.0,) + tuple(levels)

    def one(image: ImageF):
        ev = SmoothingEvaluator(filt, image)
        mask = smooth_mask(image)
        out = []
        for level in all_levels:
            m = find_parameter(filt, image, level, evaluator=ev)
            if not m.converged:
                out.append(None)
                continue
            report = full_report(image, filt.apply(image, m.param), mask=mask)
            out.append(report)
        return out

    per_image = _map_images(one, corpus, parallel)
    rows = []
    for li, level in enumerate(all_levels):
        reports = [res[li] for res in per_image if res[li] is not None]
        if reports:
            dl = float(np.mean([r.delta_l for r in reports]))
            dc = float(np.mean([r.delta_c for r in reports]))
            cr = float(np.mean([r.contrast_ratio for r in reports]))
        else:
            dl = dc = cr = float("nan")
        rows.append((float(level), dl, dc, cr, len(reports), len(per_image)))
    return AttributeCurve(filter_id=filt.id, levels=tuple(rows))


def fit_cubic(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares cubic fit; raises when the design matrix is rank-deficient."""
    design = np.vander(x, 4)
    rank = np.linalg.matrix_rank(design)
    if rank < 4:
        raise np.linalg.LinAlgError(f"design rank {rank} < 4")
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = design @ coeffs - y
    return coeffs, float(np.sqrt(np.mean(resid**2)))


def smooth_vs_edge(
    filt: FilterInstance,
    corpus: list[ImageF],
    levels: tuple = BASELINE_TARGETS,
    parallel: int = 1,
) -> TradeoffFit:
    """The (1 - SO_S, SO_E) point cloud with a cubic fit of edge preservation.

    Every attempted match contributes its achieved point, converged or not;
    a rank-deficient point set raises FitDegenerateError carrying the points.
    """

    def one(args):
        idx, image = args
        ev = SmoothingEvaluator(filt, image)
        mask = smooth_mask(image)
        edge = mask.complement()
        grad_i = gradient_magnitude(image)
        pts = []
        for level in levels:
            m = find_parameter(filt, image, level, evaluator=ev)
            out = filt.apply(image, m.param)
            grad_j = gradient_magnitude(out)
            so_s = so_ratio(image, out, mask=mask, grad_i=grad_i, grad_j=grad_j)
            so_e = so_ratio(image, out, mask=edge, grad_i=grad_i, grad_j=grad_j)
            pts.append(TradeoffPoint(idx, float(level), 1.0 - so_s, so_e, m.converged))
        return pts

    per_image = _map_images(one, list(enumerate(corpus)), parallel)
    points = tuple(p for pts in per_image for p in pts)
    if len(points) < 4:
        raise FitDegenerateError(
            f"need at least 4 points for the cubic fit, got {len(points)}", points=points
        )
    x = np.array([p.smoothing for p in points])
    y = np.array([p.edge_so for p in points])
    try:
        coeffs, rms = fit_cubic(x, y)
    except np.linalg.LinAlgError as exc:
        raise FitDegenerateError(f"degenerate tradeoff point set: {exc}", points=points) from exc
    return TradeoffFit(
        filter_id=filt.id,
        points=points,
        coefficients=tuple(float(c) for c in coeffs),
        residual_rms=rms,
    )


def ssim_distance_matrix(
    filters: list[FilterInstance],
    corpus: list[ImageF],
    levels: tuple = (0.5,),
    parallel: int = 1,
) -> list[DistanceMatrix]:
    """Per level: D[i][j] = 1 - mean SSIM between equivalently smoothed outputs.

    Images where any filter fails to converge at a level drop out of that
    level's mean; the contributing count is recorded.
    """
    if len(filters) < 2:
        raise ValueError("need at least 2 filters for a distance matrix")
    n = len(filters)

    def one(image: ImageF):
        # (level, i, j) -> ssim, or None when some filter missed the level
        evs = [SmoothingEvaluator(f, image) for f in filters]
        per_level = {}
        for level in levels:
            matches = [find_parameter(f, image, level, evaluator=ev) for f, ev in zip(filters, evs)]
            if not all(m.converged for m in matches):
                per_level[level] = None
                continue
            outputs = [f.apply(image, m.param) for f, m in zip(filters, matches)]
            sims = np.ones((n, n))
            for i in range(n):
                for j in range(i + 1, n):
                    s = ssim(outputs[i], outputs[j])
                    sims[i, j] = sims[j, i] = s
            per_level[level] = sims
        return per_level

    per_image = _map_images(one, corpus, parallel)
    result = []
    for level in levels:
        sims = [res[level] for res in per_image if res[level] is not None]
        if sims:
            mean_sim = np.zeros((n, n))
            for s in sims:
                mean_sim += s
            mean_sim /= len(sims)
            dist = 1.0 - mean_sim
        else:
            dist = np.full((n, n), np.nan)
        np.fill_diagonal(dist, 0.0)
        result.append(
            DistanceMatrix(
                filter_ids=tuple(f.id for f in filters),
                level=float(level),
                values=dist,
                images_used=len(sims),
            )
        )
    return result


def classical_mds(matrix: DistanceMatrix, dims: int = 2) -> Embedding:
    """Torgerson double-centering embedding with a deterministic sign convention."""
    d = np.asarray(matrix.values, dtype=np.float64)
    n = d.shape[0]
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (d * d) @ j
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    neg_mass = float(np.sum(np.abs(evals[evals < 0])))
    top = np.maximum(evals[:dims], 0.0)
    coords = evecs[:, :dims] * np.sqrt(top)[None, :]
    for axis in range(coords.shape[1]):
        col = coords[:, axis]
        nz = np.nonzero(col)[0]
        if nz.size and col[nz[0]] < 0:
            coords[:, axis] = -col
    return Embedding(
        filter_ids=matrix.filter_ids,
        level=matrix.level,
        coords=coords,
        negative_eigenvalue_mass=neg_mass,
    )


def abstraction_demo(
    filt: FilterInstance, image: ImageF, level: float = 0.5,
    evaluator: SmoothingEvaluator | None = None,
) -> tuple[ImageF, MatchResult]:
    """The matched smoothing itself: equivalently smoothed across filters."""
    m = find_parameter(filt, image, level, evaluator=evaluator)
    return filt.apply(image, m.param), m


def detail_enhance_demo(
    filt: FilterInstance, image: ImageF, level: float = 0.5, boost: float = 2.0,
    evaluator: SmoothingEvaluator | None = None,
) -> tuple[ImageF, MatchResult]:
    """Boosted detail layer recombined with the matched base: J + boost*(I - J).

    Evaluated as boost*I + (1-boost)*J so that boost 1 reproduces the input
    bit-exactly and boost 0 the base layer.
    """
    if boost < 0:
        raise ValueError("boost must be >= 0")
    base, m = abstraction_demo(filt, image, level, evaluator=evaluator)
    enhanced = boost * image.data + (1.0 - boost) * base.data
    return clamped(enhanced), m
