"""Subprocess adapter wiring third-party filter executables into the registry.

Protocol: the executable receives an input PNG path, an output PNG path, and
the decimal parameter as argv (template-substituted); exit code 0 on success;
the output PNG must match the input dimensions.
"""
from __future__ import annotations

import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ExternalFilterError, ImageError
from ..image import ImageF, load_image, save_image
from .base import FilterDescriptor, FilterInstance


@dataclass(frozen=True)
class ExternalAdapter:
    exe: str
    args: tuple = ("{input}", "{output}", "{param}")
    timeout: float = 120.0


def apply_external(adapter: ExternalAdapter, img: ImageF, param: float) -> np.ndarray:
    with tempfile.TemporaryDirectory(prefix="epf-ext-") as td:
        in_path = Path(td) / "input.png"
        out_path = Path(td) / "output.png"
        save_image(img, in_path)
        argv = [adapter.exe] + [
            a.format(input=str(in_path), output=str(out_path), param=f"{param:.12g}")
            for a in adapter.args
        ]
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=adapter.timeout
            )
        except FileNotFoundError:
            raise ExternalFilterError(f"external filter executable not found: {adapter.exe}")
        except subprocess.TimeoutExpired:
            raise ExternalFilterError(
                f"external filter timed out after {adapter.timeout}s: {adapter.exe}"
            )
        if proc.returncode != 0:
            raise ExternalFilterError(
                f"external filter exited with code {proc.returncode}: {adapter.exe}\n"
                f"stderr: {proc.stderr.strip()[:2000]}",
                exit_code=proc.returncode,
                stderr=proc.stderr,
            )
        try:
            result = load_image(out_path)
        except ImageError as exc:
            raise ExternalFilterError(
                f"external filter produced no readable output image: {exc}"
            ) from exc
        if (result.height, result.width) != (img.height, img.width):
            raise ExternalFilterError(
                f"external filter changed dimensions: expected "
                f"{img.width}x{img.height}, got {result.width}x{result.height}"
            )
        if result.channels != img.channels:
            # Gray input re-encoded as RGB (or vice versa) is tolerated only
            # when the content is representable; collapse/expand channels.
            if result.channels == 3 and img.channels == 1:
                result = ImageF(result.data.mean(axis=2, keepdims=True))
            else:
                result = ImageF(np.repeat(result.data, 3, axis=2))
        return result.data


def external_instance(descriptor: FilterDescriptor, adapter: ExternalAdapter) -> FilterInstance:
    def fn(img: ImageF, param: float) -> np.ndarray:
        return apply_external(adapter, img, param)

    return FilterInstance(descriptor, fn)
