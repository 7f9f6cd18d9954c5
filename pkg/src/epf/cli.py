"""Batch command-line frontend.

Commands: filters, smooth, match, profile, sweep, attrs, tradeoff, cluster,
serve. Corpus ingestion is directory-based with lexicographic ordering; all
outputs carry a provenance header and are deterministic for a given corpus,
registry, and config regardless of --parallel.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, analysis, reporting
from .corpus import load_corpus
from .equivalency import BASELINE_TARGETS, MATCH_CSV_HEADER, SmoothingEvaluator, find_parameter
from .errors import EpfError
from .filters import FilterRegistry, registry
from .image import load_image, save_image

log = logging.getLogger("epf")


def _registry_from(args) -> FilterRegistry:
    path = getattr(args, "registry", None) or os.environ.get("EPF_REGISTRY")
    return registry(path)


def _select_filters(reg: FilterRegistry, ids_csv: str | None):
    if not ids_csv:
        return reg.instances()
    return reg.instances([s.strip() for s in ids_csv.split(",") if s.strip()])


def _parse_levels(levels_csv: str | None, default=BASELINE_TARGETS) -> tuple:
    if not levels_csv:
        return tuple(default)
    levels = tuple(float(s) for s in levels_csv.split(",") if s.strip())
    for lv in levels:
        if not (0.0 <= lv <= 1.0):
            raise EpfError(f"level {lv} outside [0, 1]")
    return levels


def _load_named_corpus(args):
    if not getattr(args, "corpus", None):
        raise EpfError("--corpus DIR is required")
    entries = load_corpus(args.corpus)
    blobs = [(name, (Path(args.corpus) / name).read_bytes()) for name, _ in entries]
    return entries, reporting.corpus_hash(blobs)


def _provenance(reg: FilterRegistry, corpus_sha: str) -> str:
    return reporting.provenance_line(corpus_sha, reporting.registry_hash(reg.descriptors()))


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_filters(args) -> int:
    reg = _registry_from(args)
    descriptors = reg.descriptors()
    if args.json:
        print(json.dumps([d.to_dict() for d in descriptors], indent=2))
    else:
        print(f"{'id':8s} {'param':10s} {'max':>8s} {'kind':8s}")
        for d in descriptors:
            print(f"{d.id:8s} {d.param_name:10s} {d.param_max:8g} {d.kind:8s}")
    return 0


def cmd_smooth(args) -> int:
    reg = _registry_from(args)
    filt = reg.get(args.filter)
    img = load_image(args.image)
    if (args.param is None) == (args.level is None):
        raise EpfError("exactly one of --param or --level must be given")
    if args.param is not None:
        param = args.param
    else:
        result = find_parameter(filt, img, args.level)
        print(json.dumps(result.to_dict()))
        param = result.param
    out_path = args.out or (
        Path(args.image).with_name(f"{Path(args.image).stem}_{filt.id}_{param:g}.png")
    )
    save_image(filt.apply(img, param), out_path)
    log.info("wrote %s", out_path)
    return 0


def cmd_match(args) -> int:
    reg = _registry_from(args)
    img = load_image(args.image)
    filters = _select_filters(reg, args.filters)
    levels = _parse_levels(args.levels, default=(args.level,) if args.level is not None else BASELINE_TARGETS)
    results = []
    for filt in filters:
        ev = SmoothingEvaluator(filt, img)
        for level in levels:
            results.append(find_parameter(filt, img, level, evaluator=ev).to_dict())
    print(json.dumps(results, indent=2))
    if args.out:
        lines = [",".join(MATCH_CSV_HEADER)]
        for r in results:
            lines.append(",".join(reporting.fmt(r[k]) for k in MATCH_CSV_HEADER))
        Path(args.out).write_text("\n".join(lines) + "\n", newline="\n")
    return 0


def _pipeline_summary(args, tag: str, converged: int, total: int) -> None:
    if getattr(args, "json", False):
        print(json.dumps({"command": tag, "converged": converged, "total": total}))
    else:
        print(f"{tag}: {converged}/{total} tasks converged")


def cmd_profile(args) -> int:
    reg = _registry_from(args)
    filters = _select_filters(reg, args.filters)
    entries, corpus_sha = _load_named_corpus(args)
    images = [img for _, img in entries]
    profiles = [
        analysis.elimination_profile(f, images, n_bins=args.bins, parallel=args.parallel)
        for f in filters
    ]
    out = _out_dir(args)
    prov = _provenance(reg, corpus_sha)
    reporting.write_profile_csv(out / "profile.csv", profiles, prov)
    reporting.write_report_json(
        out / "report.json",
        {
            "command": "profile",
            "tool": f"epf {__version__}",
            "corpus_sha256": corpus_sha,
            "registry_sha256": reporting.registry_hash(reg.descriptors()),
            "filters": [f.id for f in filters],
            "images_used": {p.filter_id: p.images_used for p in profiles},
        },
    )
    _pipeline_summary(args, "profile", sum(p.images_used for p in profiles), len(filters) * len(images))
    return 0


def cmd_sweep(args) -> int:
    reg = _registry_from(args)
    filters = _select_filters(reg, args.filters)
    entries, corpus_sha = _load_named_corpus(args)
    images = [img for _, img in entries]
    tables = [analysis.baseline_sweep(f, images, parallel=args.parallel) for f in filters]
    out = _out_dir(args)
    prov = _provenance(reg, corpus_sha)
    reporting.write_sweep_csv(out / "sweep.csv", tables, prov)
    converged = sum(lv.converged for t in tables for lv in t.levels)
    total = sum(lv.total for t in tables for lv in t.levels)
    reporting.write_report_json(
        out / "report.json",
        {
            "command": "sweep",
            "tool": f"epf {__version__}",
            "corpus_sha256": corpus_sha,
            "registry_sha256": reporting.registry_hash(reg.descriptors()),
            "filters": [f.id for f in filters],
            "converged": converged,
            "total": total,
        },
    )
    _pipeline_summary(args, "sweep", converged, total)
    return 0


def cmd_attrs(args) -> int:
    reg = _registry_from(args)
    filters = _select_filters(reg, args.filters)
    entries, corpus_sha = _load_named_corpus(args)
    images = [img for _, img in entries]
    levels = _parse_levels(args.levels)
    curves = [analysis.attribute_curves(f, images, levels=levels, parallel=args.parallel) for f in filters]
    out = _out_dir(args)
    prov = _provenance(reg, corpus_sha)
    reporting.write_attrs_csv(out / "attrs.csv", curves, prov)
    converged = sum(row[4] for c in curves for row in c.levels)
    total = sum(row[5] for c in curves for row in c.levels)
    reporting.write_report_json(
        out / "report.json",
        {
            "command": "attrs",
            "tool": f"epf {__version__}",
            "corpus_sha256": corpus_sha,
            "registry_sha256": reporting.registry_hash(reg.descriptors()),
            "filters": [f.id for f in filters],
            "converged": converged,
            "total": total,
        },
    )
    _pipeline_summary(args, "attrs", converged, total)
    return 0


def cmd_tradeoff(args) -> int:
    reg = _registry_from(args)
    filters = _select_filters(reg, args.filters)
    entries, corpus_sha = _load_named_corpus(args)
    images = [img for _, img in entries]
    levels = _parse_levels(args.levels)
    fits = [analysis.smooth_vs_edge(f, images, levels=levels, parallel=args.parallel) for f in filters]
    out = _out_dir(args)
    prov = _provenance(reg, corpus_sha)
    reporting.write_tradeoff_csv(out / "tradeoff.csv", fits, prov)
    reporting.write_report_json(
        out / "report.json",
        {
            "command": "tradeoff",
            "tool": f"epf {__version__}",
            "corpus_sha256": corpus_sha,
            "registry_sha256": reporting.registry_hash(reg.descriptors()),
            "fits": {
                f.filter_id: {"coefficients": list(f.coefficients), "residual_rms": f.residual_rms}
                for f in fits
            },
        },
    )
    converged = sum(1 for f in fits for p in f.points if p.converged)
    total = sum(len(f.points) for f in fits)
    _pipeline_summary(args, "tradeoff", converged, total)
    return 0


def cmd_cluster(args) -> int:
    reg = _registry_from(args)
    filters = _select_filters(reg, args.filters)
    entries, corpus_sha = _load_named_corpus(args)
    images = [img for _, img in entries]
    levels = _parse_levels(args.levels, default=(0.5,))
    matrices = analysis.ssim_distance_matrix(filters, images, levels=levels, parallel=args.parallel)
    embeddings = []
    for m in matrices:
        if m.images_used == 0:
            log.warning(
                "cluster: skipping embedding at level %g (no image converged for every filter)",
                m.level,
            )
            continue
        embeddings.append(analysis.classical_mds(m))
    out = _out_dir(args)
    prov = _provenance(reg, corpus_sha)
    reporting.write_distances_csv(out / "distances.csv", matrices, prov)
    reporting.write_embedding_csv(out / "embedding.csv", embeddings, prov)
    reporting.write_report_json(
        out / "report.json",
        {
            "command": "cluster",
            "tool": f"epf {__version__}",
            "corpus_sha256": corpus_sha,
            "registry_sha256": reporting.registry_hash(reg.descriptors()),
            "filters": [f.id for f in filters],
            "levels": list(levels),
            "images_used": {str(m.level): m.images_used for m in matrices},
            "negative_eigenvalue_mass": {str(e.level): e.negative_eigenvalue_mass for e in embeddings},
        },
    )
    used = sum(m.images_used for m in matrices)
    _pipeline_summary(args, "cluster", used, len(levels) * len(images))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    reg = _registry_from(args)
    config = ServiceConfig(static_dir=args.static)
    app = create_app(reg, config)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    except SystemExit as exc:  # uvicorn raises on bind failure
        return int(exc.code or 1)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epf", description=__doc__)
    parser.add_argument("--version", action="version", version=f"epf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus=False):
        p.add_argument("--registry", help="TOML file of external filter adapters (or $EPF_REGISTRY)")
        p.add_argument("--json", action="store_true", help="machine-readable stdout")
        if corpus:
            p.add_argument("--corpus", required=True, help="directory of PNG/JPEG images")
            p.add_argument("--out", default=".", help="output directory")
            p.add_argument("--filters", help="comma-separated filter ids (default: all)")
            p.add_argument("--parallel", type=int, default=1, help="worker count")

    p = sub.add_parser("filters", help="list registered filters")
    common(p)
    p.set_defaults(fn=cmd_filters)

    p = sub.add_parser("smooth", help="smooth one image at a parameter or matched level")
    common(p)
    p.add_argument("image")
    p.add_argument("filter")
    p.add_argument("--param", type=float)
    p.add_argument("--level", type=float)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_smooth)

    p = sub.add_parser("match", help="find equivalent parameters for target levels")
    common(p)
    p.add_argument("image")
    p.add_argument("--filters", help="comma-separated filter ids (default: all)")
    p.add_argument("--level", type=float, help="single target level")
    p.add_argument("--levels", help="comma-separated target levels")
    p.add_argument("--out", help="also write the results as CSV")
    p.set_defaults(fn=cmd_match)

    p = sub.add_parser("profile", help="gradient elimination profiles")
    common(p, corpus=True)
    p.add_argument("--bins", type=int, default=analysis.PROFILE_BINS)
    p.set_defaults(fn=cmd_profile)

    p = sub.add_parser("sweep", help="ten-level baseline parameter sweep")
    common(p, corpus=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("attrs", help="attribute curves per smoothing level")
    common(p, corpus=True)
    p.add_argument("--levels", help="comma-separated target levels")
    p.set_defaults(fn=cmd_attrs)

    p = sub.add_parser("tradeoff", help="smooth-vs-edge tradeoff points and cubic fit")
    common(p, corpus=True)
    p.add_argument("--levels", help="comma-separated target levels")
    p.set_defaults(fn=cmd_tradeoff)

    p = sub.add_parser("cluster", help="SSIM distance matrices and planar embeddings")
    common(p, corpus=True)
    p.add_argument("--levels", default="0.5", help="comma-separated target levels")
    p.set_defaults(fn=cmd_cluster)

    p = sub.add_parser("serve", help="run the interactive HTTP service")
    common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--static", help="directory of built web UI assets")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except EpfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
