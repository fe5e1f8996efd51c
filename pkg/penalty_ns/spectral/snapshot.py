"""Binary snapshot container for fields, increment ladders and checkpoints.

Layout (all little-endian):
    header   magic "PNSF", version u16, L f64, N u32, kind u8, meta_len u32
    meta     UTF-8 JSON of length meta_len; "arrays" lists name/shape/dtype
    payload  arrays in the listed order, row-major
"""

from __future__ import annotations

import json
import logging
import pathlib
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np

from penalty_ns.spectral.fields import Field, SpectralScalar, SpectralVector
from penalty_ns.spectral.grid import Grid
from penalty_ns.utils.csv_io import OutputError

logger = logging.getLogger(__name__)

MAGIC = b"PNSF"
VERSION = 1
KINDS = ("scalar", "vector", "increments", "checkpoint")

_HEADER = np.dtype(
    [
        ("magic", "S4"),
        ("version", "<u2"),
        ("L", "<f8"),
        ("N", "<u4"),
        ("kind", "u1"),
        ("meta_len", "<u4"),
    ]
)
_DTYPES = {"complex128": "<c16", "float64": "<f8", "int64": "<i8"}


@dataclass
class Container:
    """Decoded snapshot file."""

    L: float
    N: int
    kind: str
    arrays: Dict[str, np.ndarray] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def grid(self, **kwargs) -> Grid:
        """Grid with the stored L and N."""
        return Grid(L=self.L, N=self.N, **kwargs)


def write_container(
    path: str | pathlib.Path,
    L: float,
    N: int,
    kind: str,
    arrays: Dict[str, np.ndarray],
    metadata: Dict[str, Any] | None = None,
) -> None:
    """Write named arrays and JSON metadata into one container file."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, but it is {kind}!")
    path = pathlib.Path(path)
    meta = dict(metadata or {})
    layout = []
    blobs = []
    for name, array in arrays.items():
        array = np.asarray(array)
        dtype_name = array.dtype.name
        if dtype_name not in _DTYPES:
            raise ValueError(
                f"Array {name} has unsupported dtype {dtype_name}!"
            )
        layout.append(
            {"name": name, "shape": list(array.shape), "dtype": dtype_name}
        )
        blobs.append(
            np.ascontiguousarray(array, dtype=_DTYPES[dtype_name]).tobytes()
        )
    meta["arrays"] = layout
    meta_bytes = json.dumps(meta, sort_keys=True).encode("utf-8")

    header = np.zeros((), dtype=_HEADER)
    header["magic"] = MAGIC
    header["version"] = VERSION
    header["L"] = L
    header["N"] = N
    header["kind"] = KINDS.index(kind)
    header["meta_len"] = len(meta_bytes)
    try:
        with path.open("wb") as file:
            file.write(header.tobytes())
            file.write(meta_bytes)
            for blob in blobs:
                file.write(blob)
    except OSError as err:
        raise OutputError(f"Failed to write snapshot {path}: {err}") from err
    logger.debug("Wrote %s container to %s.", kind, path)


def read_container(path: str | pathlib.Path) -> Container:
    """Read a container written by write_container."""
    path = pathlib.Path(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise OutputError(f"Failed to read snapshot {path}: {err}") from err
    if len(raw) < _HEADER.itemsize:
        raise ValueError(f"{path} is too short to be a snapshot!")
    header = np.frombuffer(raw, dtype=_HEADER, count=1)[0]
    if bytes(header["magic"]) != MAGIC:
        raise ValueError(f"{path} is not a snapshot (bad magic)!")
    if int(header["version"]) != VERSION:
        raise ValueError(
            f"Unsupported snapshot version {int(header['version'])} in {path}!"
        )
    offset = _HEADER.itemsize
    meta_len = int(header["meta_len"])
    meta = json.loads(raw[offset : offset + meta_len].decode("utf-8"))
    offset += meta_len

    arrays = {}
    for entry in meta.pop("arrays"):
        dtype = np.dtype(_DTYPES[entry["dtype"]])
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=int))
        array = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
        arrays[entry["name"]] = array.reshape(shape).astype(entry["dtype"])
        offset += count * dtype.itemsize
    if offset != len(raw):
        raise ValueError(f"{path} has {len(raw) - offset} trailing bytes!")
    return Container(
        L=float(header["L"]),
        N=int(header["N"]),
        kind=KINDS[int(header["kind"])],
        arrays=arrays,
        metadata=meta,
    )


def save_snapshot(
    path: str | pathlib.Path,
    field_: Field,
    metadata: Dict[str, Any] | None = None,
) -> None:
    """Save one scalar or vector field."""
    kind = "vector" if isinstance(field_, SpectralVector) else "scalar"
    write_container(
        path,
        field_.grid.L,
        field_.grid.N,
        kind,
        {"coeffs": field_.coeffs},
        metadata,
    )


def load_snapshot(
    path: str | pathlib.Path, grid: Grid | None = None
) -> Tuple[Field, Dict[str, Any]]:
    """Load a field saved by save_snapshot.

    Args:
        path: Snapshot file.
        grid: Grid to attach the field to. Must match the stored L and N.
            Defaults to a new Grid built from the header.

    Returns:
        Field and its metadata.
    """
    container = read_container(path)
    if container.kind not in ("scalar", "vector"):
        raise ValueError(
            f"{path} holds a {container.kind} container, not a field!"
        )
    stored = container.grid()
    if grid is None:
        grid = stored
    else:
        grid.check_same(stored)
    cls = SpectralVector if container.kind == "vector" else SpectralScalar
    return cls(grid, container.arrays["coeffs"]), container.metadata


def dump_text(field_: Field, path: str | pathlib.Path) -> None:
    """Plain-text dump with one "n1 n2 re im" line per mode.

    Vector fields are written component after component, each block preceded
    by a "# component i" comment.
    """
    path = pathlib.Path(path)
    n1, n2 = field_.grid.integers
    coeffs = field_.coeffs
    if isinstance(field_, SpectralScalar):
        coeffs = coeffs[None]
    try:
        with path.open("w", encoding="utf-8") as file:
            file.write(f"# L {field_.grid.L!r} N {field_.grid.N}\n")
            for i, component in enumerate(coeffs):
                if coeffs.shape[0] > 1:
                    file.write(f"# component {i}\n")
                table = np.column_stack(
                    [
                        n1.ravel(),
                        n2.ravel(),
                        component.real.ravel(),
                        component.imag.ravel(),
                    ]
                )
                np.savetxt(file, table, fmt=["%d", "%d", "%.17g", "%.17g"])
    except OSError as err:
        raise OutputError(f"Failed to write text dump {path}: {err}") from err
