"""One-parameter filter interface: descriptors, instances, and the registry."""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ..errors import FilterError, RegistryError
from ..image import ImageF, clamped

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class FilterDescriptor:
    """A named operator with a single controlling parameter on [0, param_max]."""

    id: str
    param_name: str
    param_max: float
    monotone: bool = True
    kind: str = "native"  # "native" | "external"
    integer_param: bool = False  # parameter rounds to the nearest integer (GIF radius)

    def __post_init__(self):
        if self.param_max <= 0:
            raise RegistryError(f"filter {self.id!r}: param_max must be > 0")
        if self.kind not in ("native", "external"):
            raise RegistryError(f"filter {self.id!r}: unknown kind {self.kind!r}")

    def canonical_param(self, param: float) -> float:
        """The parameter value the filter actually uses (rounds for integer params)."""
        if self.integer_param:
            return float(np.floor(param + 0.5))
        return float(param)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "param_name": self.param_name,
            "param_max": self.param_max,
            "monotone": self.monotone,
            "kind": self.kind,
        }


class FilterInstance:
    """A descriptor bound to an apply function; secondary parameters are frozen."""

    def __init__(self, descriptor: FilterDescriptor, fn: Callable[[ImageF, float], np.ndarray]):
        self.descriptor = descriptor
        self._fn = fn

    @property
    def id(self) -> str:
        return self.descriptor.id

    @property
    def param_max(self) -> float:
        return self.descriptor.param_max

    def apply(self, img: ImageF, param: float) -> ImageF:
        """Smooth ``img``; output has the input's shape, samples clamped to [0, 1].

        Native filters return the input unchanged at parameter 0.
        """
        if not (0.0 <= param <= self.descriptor.param_max):
            raise FilterError(
                f"parameter {param} out of range for {self.id!r} "
                f"({self.descriptor.param_name} in [0, {self.descriptor.param_max}])"
            )
        if self.descriptor.kind == "native" and param == 0.0:
            return img
        out = self._fn(img, float(param))
        result = out if isinstance(out, ImageF) else clamped(out)
        if not result.same_shape(img):
            raise FilterError(
                f"filter {self.id!r} changed dimensions: "
                f"{img.data.shape} -> {result.data.shape}"
            )
        return result


class FilterRegistry:
    """Ordered collection of filter instances, keyed by id."""

    def __init__(self, instances: list[FilterInstance]):
        self._by_id: dict[str, FilterInstance] = {}
        for inst in instances:
            if inst.id in self._by_id:
                raise RegistryError(f"duplicate filter id {inst.id!r}")
            self._by_id[inst.id] = inst

    def descriptors(self) -> list[FilterDescriptor]:
        return [inst.descriptor for inst in self._by_id.values()]

    def ids(self) -> list[str]:
        return list(self._by_id)

    def get(self, filter_id: str) -> FilterInstance:
        try:
            return self._by_id[filter_id]
        except KeyError:
            raise RegistryError(f"unknown filter id {filter_id!r}") from None

    def instances(self, ids: Optional[list[str]] = None) -> list[FilterInstance]:
        if ids is None:
            return list(self._by_id.values())
        return [self.get(i) for i in ids]

    def __contains__(self, filter_id: str) -> bool:
        return filter_id in self._by_id

    def __len__(self) -> int:
        return len(self._by_id)


def _native_instances() -> list[FilterInstance]:
    from . import l0, native, wls

    specs = [
        (FilterDescriptor("gauss", "sigma", 16.0), native.gaussian_smooth),
        (FilterDescriptor("blf", "sigma_r", 0.5), native.bilateral_smooth),
        (FilterDescriptor("gif", "radius", 10.0, integer_param=True), native.guided_smooth),
        (FilterDescriptor("dom", "sigma_r", 5.0), native.domain_transform_smooth),
        (FilterDescriptor("wls", "lambda", 10.0), wls.wls_smooth),
        (FilterDescriptor("l0", "lambda", 0.3), l0.l0_smooth),
        (FilterDescriptor("fgs", "sigma", 0.1), native.fast_global_smooth),
    ]
    return [FilterInstance(desc, fn) for desc, fn in specs]


def load_external_config(path) -> list[dict]:
    """Parse the TOML external-filter registry file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise RegistryError(f"registry file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise RegistryError(f"malformed registry file {path}: {exc}") from exc
    entries = doc.get("filter", [])
    if not isinstance(entries, list):
        raise RegistryError(f"registry file {path}: [[filter]] entries expected")
    out = []
    for entry in entries:
        if "id" not in entry or "exec" not in entry or "param_max" not in entry:
            raise RegistryError(
                f"registry file {path}: each filter needs 'id', 'exec', and 'param_max'"
            )
        out.append(entry)
    return out


def registry(external_config=None) -> FilterRegistry:
    """The built-in natives plus any external adapters from a TOML config path."""
    from .external import ExternalAdapter, external_instance

    instances = _native_instances()
    if external_config is not None:
        for entry in load_external_config(external_config):
            adapter = ExternalAdapter(
                exe=str(entry["exec"]),
                args=tuple(entry.get("args", ("{input}", "{output}", "{param}"))),
                timeout=float(entry.get("timeout", 120.0)),
            )
            desc = FilterDescriptor(
                id=str(entry["id"]),
                param_name=str(entry.get("param_name", "param")),
                param_max=float(entry["param_max"]),
                monotone=bool(entry.get("monotone", True)),
                kind="external",
            )
            instances.append(external_instance(desc, adapter))
    return FilterRegistry(instances)
