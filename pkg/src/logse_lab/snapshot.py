"""Binary field snapshots.

Layout: a UTF-8 text header of ``key: value`` lines, terminated by one empty
line, followed by the raw field as little-endian complex128 values (real and
imaginary part interleaved) over the full node lattice, boundary included, in
C order (last axis fastest). Header keys::

    format: logse-snapshot 1
    dims: 2
    bounds: -8 8 -8 8
    counts: 512 512
    step: 100
    time: 1
    scheme: BDF1
    lambda: -10
    tau: 0.01

Floats are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import GridFunction, GridSpec

MAGIC = "logse-snapshot 1"
_DTYPE = np.dtype("<c16")


class SnapshotError(ValueError):
    pass


@dataclass(frozen=True)
class Snapshot:
    field: GridFunction
    step: int = 0
    time: float = 0.0
    scheme: str = ""
    lam: float = 0.0
    tau: float = 0.0


def _header(s: Snapshot) -> str:
    spec = s.field.spec
    lines = [
        f"format: {MAGIC}",
        f"dims: {spec.dim}",
        "bounds: " + " ".join(f"{a!r} {b!r}" for a, b in spec.bounds),
        "counts: " + " ".join(str(J) for J in spec.counts),
        f"step: {s.step}",
        f"time: {float(s.time)!r}",
        f"scheme: {s.scheme}",
        f"lambda: {float(s.lam)!r}",
        f"tau: {float(s.tau)!r}",
    ]
    return "\n".join(lines) + "\n\n"


def write_snapshot(path: str | os.PathLike, s: Snapshot) -> None:
    payload = np.ascontiguousarray(s.field.values, dtype=_DTYPE)
    with open(path, "wb") as fh:
        fh.write(_header(s).encode("utf-8"))
        fh.write(payload.tobytes(order="C"))


def _parse_header(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        key, sep, value = line.partition(":")
        if not sep:
            raise SnapshotError(f"malformed header line {line!r}")
        out[key.strip()] = value.strip()
    return out


def read_snapshot(path: str | os.PathLike) -> Snapshot:
    with open(path, "rb") as fh:
        data = fh.read()
    end = data.find(b"\n\n")
    if end < 0:
        raise SnapshotError("header is not terminated by a blank line")
    meta = _parse_header(data[:end].decode("utf-8"))
    if meta.get("format") != MAGIC:
        raise SnapshotError(f"unsupported format {meta.get('format')!r}")
    try:
        dim = int(meta["dims"])
        b = [float(x) for x in meta["bounds"].split()]
        counts = tuple(int(x) for x in meta["counts"].split())
        spec = GridSpec(tuple(zip(b[0::2], b[1::2])), counts)
    except (KeyError, ValueError) as exc:
        raise SnapshotError(f"bad grid header: {exc}") from exc
    if spec.dim != dim:
        raise SnapshotError(f"dims={dim} disagrees with counts {counts}")
    payload = data[end + 2 :]
    expected = 16 * int(np.prod(spec.shape))
    if len(payload) != expected:
        raise SnapshotError(f"payload has {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype=_DTYPE).reshape(spec.shape).astype(np.complex128)
    return Snapshot(
        GridFunction(spec, values, copy=False),
        step=int(meta.get("step", 0)),
        time=float(meta.get("time", 0.0)),
        scheme=meta.get("scheme", ""),
        lam=float(meta.get("lambda", 0.0)),
        tau=float(meta.get("tau", 0.0)),
    )


def snapshot_name(step: int, width: Optional[int] = 6) -> str:
    """``snap_<step>.bin`` with the step zero-padded to ``width`` digits."""
    return f"snap_{step:0{width}d}.bin" if width else f"snap_{step}.bin"
