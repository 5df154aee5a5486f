"""Cube and ground-truth file I/O.

Two cube formats are supported:

* ``container``: a JSON header file next to a raw little-endian float32
  payload, band-sequential (bsq). Header keys: ``width``, ``height``,
  ``bands``, ``dtype`` (always ``"f32"``), ``layout`` (always ``"bsq"``),
  ``data`` (payload filename, relative to the header), plus optional
  ``wavelengths`` and ``band_names``. Round-trips are bit-exact.
* ``envi``: classic ENVI ``.hdr`` text next to a binary payload. Supported
  subset: interleaves bsq/bil/bip, data types 4 (float32) and 12 (uint16,
  converted to float without scaling), byte order 0/1, header offset.
  Anything else is rejected loudly.

Ground truth comes either from a CSV with header ``pixel_index,label``
(missing pixels are unlabeled) or from a single-band label image in the
container format.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .cube import GroundTruth, HyperCube
from .errors import (
    CorruptFileError,
    InvalidArgumentError,
    InvalidDataError,
    UnsupportedFormatError,
)

__all__ = [
    "load_cube",
    "save_cube",
    "load_ground_truth",
    "save_ground_truth_csv",
    "inspect_cube",
]

_ENVI_DTYPES = {4: "f4", 12: "u2"}
_ENVI_DATA_EXTS = ("", ".dat", ".img", ".raw", ".bsq", ".bil", ".bip", ".envi")


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    """Write a file via a temp sibling + rename so readers never see partials."""
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_bytes(payload)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def save_cube(cube: HyperCube, path) -> Path:
    """Write a cube in the container format; returns the header path.

    `path` names the JSON header; the payload goes to the same name with a
    ``.f32`` suffix.
    """
    header_path = Path(path)
    payload_path = header_path.with_suffix(".f32")
    header = {
        "width": cube.width,
        "height": cube.height,
        "bands": cube.bands,
        "dtype": "f32",
        "layout": "bsq",
        "data": payload_path.name,
    }
    if cube.wavelengths is not None:
        header["wavelengths"] = [float(w) for w in cube.wavelengths]
    if cube.band_names is not None:
        header["band_names"] = list(cube.band_names)
    header_path.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_bytes(payload_path, cube.data.astype("<f4").tobytes())
    atomic_write_text(header_path, json.dumps(header, indent=2) + "\n")
    return header_path


def _read_container(path: Path):
    try:
        header = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"unreadable container header {path}: {exc}") from exc
    for key in ("width", "height", "bands", "dtype", "layout", "data"):
        if key not in header:
            raise CorruptFileError(f"container header {path} missing key {key!r}")
    if header["dtype"] != "f32":
        raise UnsupportedFormatError(
            f"container dtype {header['dtype']!r} not supported (only f32)"
        )
    if header["layout"] != "bsq":
        raise UnsupportedFormatError(
            f"container layout {header['layout']!r} not supported (only bsq)"
        )
    width, height, bands = (int(header[k]) for k in ("width", "height", "bands"))
    if min(width, height, bands) < 1:
        raise CorruptFileError(f"container header {path} has non-positive dimensions")
    payload_path = path.parent / str(header["data"])
    if not payload_path.is_file():
        raise CorruptFileError(f"container payload missing: {payload_path}")
    raw = payload_path.read_bytes()
    expected = width * height * bands * 4
    if len(raw) != expected:
        raise CorruptFileError(
            f"container payload {payload_path} has {len(raw)} bytes, expected {expected}"
        )
    data = np.frombuffer(raw, dtype="<f4").reshape(bands, width * height)
    return data, width, height, header


def _parse_envi_header(path: Path) -> dict[str, str]:
    try:
        text = path.read_text(errors="replace")
    except OSError as exc:
        raise CorruptFileError(f"unreadable ENVI header {path}: {exc}") from exc
    fields: dict[str, str] = {}
    lines = iter(text.splitlines())
    for line in lines:
        if "=" not in line:
            continue
        key, _, value = line.partition("=")
        key = " ".join(key.strip().lower().split())
        value = value.strip()
        if value.startswith("{") and "}" not in value:
            parts = [value]
            for cont in lines:
                parts.append(cont)
                if "}" in cont:
                    break
            value = " ".join(parts)
        if value.startswith("{"):
            value = value.strip("{} \t")
        fields[key] = value
    return fields


def _find_envi_payload(header_path: Path) -> Path:
    stem = header_path.with_suffix("") if header_path.suffix == ".hdr" else header_path
    for ext in _ENVI_DATA_EXTS:
        candidate = stem.with_name(stem.name + ext) if ext else stem
        if candidate.is_file() and candidate != header_path:
            return candidate
    raise CorruptFileError(f"no ENVI payload found next to {header_path}")


def _read_envi(path: Path):
    fields = _parse_envi_header(path)
    try:
        samples = int(fields["samples"])
        lines = int(fields["lines"])
        bands = int(fields["bands"])
        data_type = int(fields["data type"])
        interleave = fields["interleave"].strip().lower()
    except KeyError as exc:
        raise CorruptFileError(f"ENVI header {path} missing field {exc}") from exc
    except ValueError as exc:
        raise CorruptFileError(f"ENVI header {path} has a malformed field: {exc}") from exc
    byte_order = int(fields.get("byte order", "0"))
    offset = int(fields.get("header offset", "0"))

    if data_type not in _ENVI_DTYPES:
        raise UnsupportedFormatError(
            f"ENVI data type {data_type} not supported (only 4 and 12)"
        )
    if interleave not in ("bsq", "bil", "bip"):
        raise UnsupportedFormatError(f"ENVI interleave {interleave!r} not supported")
    if byte_order not in (0, 1):
        raise UnsupportedFormatError(f"ENVI byte order {byte_order} not supported")
    if min(samples, lines, bands) < 1:
        raise CorruptFileError(f"ENVI header {path} has non-positive dimensions")

    payload_path = _find_envi_payload(path)
    dtype = np.dtype(("<" if byte_order == 0 else ">") + _ENVI_DTYPES[data_type])
    count = samples * lines * bands
    raw = payload_path.read_bytes()
    if len(raw) < offset + count * dtype.itemsize:
        raise CorruptFileError(
            f"ENVI payload {payload_path} too short for {lines}x{samples}x{bands}"
        )
    flat = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)

    if interleave == "bsq":
        arr = flat.reshape(bands, lines, samples)
    elif interleave == "bil":
        arr = flat.reshape(lines, bands, samples).transpose(1, 0, 2)
    else:  # bip
        arr = flat.reshape(lines, samples, bands).transpose(2, 0, 1)
    data = np.ascontiguousarray(arr.reshape(bands, lines * samples)).astype(np.float32)

    wavelengths = None
    if "wavelength" in fields:
        try:
            wl = np.array(
                [float(v) for v in fields["wavelength"].split(",") if v.strip()]
            )
        except ValueError:
            wl = None
        # Keep only metadata that satisfies the cube invariant.
        if wl is not None and wl.size == bands and (np.diff(wl) > 0).all():
            wavelengths = wl
    return data, samples, lines, wavelengths


def _raw_read(path, fmt: str):
    path = Path(path)
    if not path.is_file():
        raise CorruptFileError(f"no such file: {path}")
    if fmt == "container":
        data, width, height, header = _read_container(path)
        return data, width, height, header.get("wavelengths"), header.get("band_names")
    if fmt == "envi":
        data, width, height, wavelengths = _read_envi(path)
        return data, width, height, wavelengths, None
    raise UnsupportedFormatError(f"unknown cube format {fmt!r}")


def load_cube(path, fmt: str = "container") -> HyperCube:
    """Load a cube from disk; values pass through without scaling."""
    data, width, height, wavelengths, band_names = _raw_read(path, fmt)
    if not np.isfinite(data).all():
        raise InvalidDataError(f"cube payload {path} contains NaN or infinity")
    return HyperCube(
        width=width,
        height=height,
        data=data,
        wavelengths=wavelengths,
        band_names=tuple(band_names) if band_names else None,
    )


def inspect_cube(path, fmt: str = "container") -> dict:
    """Summarize a cube file without rejecting NaN payloads.

    Returns dims plus per-band min/max/mean (NaN-aware) and the NaN count,
    so broken payloads can be diagnosed instead of erroring out.
    """
    data, width, height, wavelengths, _ = _raw_read(path, fmt)
    with np.errstate(invalid="ignore"):
        finite = np.where(np.isfinite(data), data, np.nan)
        summary = {
            "width": width,
            "height": height,
            "bands": int(data.shape[0]),
            "nan_count": int(np.isnan(data).sum()),
            "non_finite_count": int((~np.isfinite(data)).sum()),
            "has_wavelengths": wavelengths is not None,
            "band_min": np.nanmin(finite, axis=1).tolist(),
            "band_max": np.nanmax(finite, axis=1).tolist(),
            "band_mean": np.nanmean(finite, axis=1).tolist(),
        }
    return summary


def load_ground_truth(path, width: int, height: int) -> GroundTruth:
    """Load labels from CSV (``pixel_index,label``) or a container label image."""
    path = Path(path)
    if not path.is_file():
        raise CorruptFileError(f"no such file: {path}")
    if path.suffix.lower() == ".csv":
        labels = np.zeros(width * height, dtype=np.int32)
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip().lower() for c in header[:2]] != [
                "pixel_index",
                "label",
            ]:
                raise CorruptFileError(
                    f"{path}: expected CSV header 'pixel_index,label'"
                )
            for row in reader:
                if not row:
                    continue
                try:
                    idx, label = int(row[0]), int(row[1])
                except (IndexError, ValueError) as exc:
                    raise CorruptFileError(f"{path}: malformed row {row!r}") from exc
                if not 0 <= idx < labels.size:
                    raise CorruptFileError(
                        f"{path}: pixel index {idx} outside image of {labels.size} pixels"
                    )
                labels[idx] = label
        return GroundTruth(width=width, height=height, labels=labels)

    img = load_cube(path, fmt="container")
    if img.bands != 1:
        raise InvalidArgumentError(
            f"label image must have exactly one band, got {img.bands}"
        )
    if (img.width, img.height) != (width, height):
        raise InvalidArgumentError(
            f"label image is {img.width}x{img.height}, cube is {width}x{height}"
        )
    values = img.data[0]
    rounded = np.rint(values)
    if np.abs(values - rounded).max(initial=0.0) > 1e-6 or rounded.min(initial=0) < 0:
        raise InvalidDataError("label image values must be non-negative integers")
    return GroundTruth(width=width, height=height, labels=rounded.astype(np.int32))


def save_ground_truth_csv(gt: GroundTruth, path) -> Path:
    """Write labeled pixels as ``pixel_index,label`` rows (0 rows omitted)."""
    path = Path(path)
    lines = ["pixel_index,label"]
    for idx in gt.labeled_indices():
        lines.append(f"{int(idx)},{int(gt.labels[idx])}")
    path.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path
