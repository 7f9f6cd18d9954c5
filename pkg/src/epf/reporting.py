"""Serialization of analysis products: CSV files and a combined JSON report.

CSV contract: '.' decimal, ',' separator, LF line endings, one '#' provenance
line before the header. All formatting is deterministic so reruns (at any
parallelism) are byte-identical.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    AttributeCurve,
    DistanceMatrix,
    Embedding,
    ProfileMatrix,
    SweepTable,
    TradeoffFit,
)


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float) and np.isnan(value):
        return "nan"
    return format(float(value), ".10g")


def corpus_hash(named_images: list[tuple[str, bytes]]) -> str:
    h = hashlib.sha256()
    for name, blob in sorted(named_images):
        h.update(name.encode())
        h.update(b"\x00")
        h.update(blob)
    return h.hexdigest()


def registry_hash(descriptors) -> str:
    payload = json.dumps([d.to_dict() for d in descriptors], sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def provenance_line(corpus_sha: str, registry_sha: str) -> str:
    return f"# epf {__version__} corpus_sha256={corpus_sha} registry_sha256={registry_sha}"


def _write_csv(path: Path, provenance: str, header: tuple, rows) -> None:
    lines = [provenance, ",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if not isinstance(v, str) else v for v in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def write_profile_csv(path, profiles: list[ProfileMatrix], provenance: str) -> None:
    rows = []
    for p in profiles:
        for pi, param in enumerate(p.params):
            for b in range(p.n_bins):
                rows.append((p.filter_id, pi, param, b, p.values[pi, b]))
    _write_csv(Path(path), provenance, ("filter", "param_index", "param", "bin", "so"), rows)


def write_sweep_csv(path, tables: list[SweepTable], provenance: str) -> None:
    rows = []
    for t in tables:
        for lv in t.levels:
            rows.append(
                (t.filter_id, lv.level, lv.mean_param_norm, lv.var_param_norm,
                 lv.mean_deviation, lv.converged, lv.total)
            )
    _write_csv(
        Path(path), provenance,
        ("filter", "level", "mean_param_norm", "var_param_norm", "mean_deviation", "converged", "total"),
        rows,
    )


def write_attrs_csv(path, curves: list[AttributeCurve], provenance: str) -> None:
    rows = []
    for c in curves:
        for level, dl, dc, cr, conv, total in c.levels:
            rows.append((c.filter_id, level, dl, dc, cr, conv, total))
    _write_csv(
        Path(path), provenance,
        ("filter", "level", "delta_l", "delta_c", "contrast_ratio", "converged", "total"),
        rows,
    )


def write_tradeoff_csv(path, fits: list[TradeoffFit], provenance: str) -> None:
    rows = []
    for f in fits:
        for p in f.points:
            rows.append((f.filter_id, p.image_index, p.level, p.smoothing, p.edge_so, p.converged))
    _write_csv(
        Path(path), provenance,
        ("filter", "image", "level", "smoothing", "edge_so", "converged"),
        rows,
    )


def write_distances_csv(path, matrices: list[DistanceMatrix], provenance: str) -> None:
    rows = []
    for m in matrices:
        ids = m.filter_ids
        for i in range(len(ids)):
            for j in range(len(ids)):
                rows.append((m.level, ids[i], ids[j], m.values[i, j]))
    _write_csv(Path(path), provenance, ("level", "filter_a", "filter_b", "distance"), rows)


def write_embedding_csv(path, embeddings: list[Embedding], provenance: str) -> None:
    rows = []
    for e in embeddings:
        for i, fid in enumerate(e.filter_ids):
            rows.append((e.level, fid, e.coords[i, 0], e.coords[i, 1]))
    _write_csv(Path(path), provenance, ("level", "filter", "x", "y"), rows)


def write_report_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", newline="\n")
