"""Raw IQ files: header-less interleaved float32 little-endian I/Q pairs."""
from __future__ import annotations

import os

import numpy as np

from .core import EmptyFile, IqBuffer, MalformedFile

_SAMPLE_DTYPE = np.dtype("<f4")
BYTES_PER_SAMPLE = 2 * _SAMPLE_DTYPE.itemsize


def write_iq(buf: IqBuffer, path) -> None:
    """Write ``buf`` as I0 Q0 I1 Q1 ...; the sample rate is not stored."""
    inter = np.empty(2 * len(buf), dtype=_SAMPLE_DTYPE)
    inter[0::2] = buf.samples.real
    inter[1::2] = buf.samples.imag
    inter.tofile(os.fspath(path))


def read_iq(path, sample_rate_hz: float) -> IqBuffer:
    size = os.path.getsize(path)
    if size == 0:
        raise EmptyFile(f"{path} is empty")
    if size % BYTES_PER_SAMPLE:
        raise MalformedFile(
            f"{path} has {size} bytes, not a multiple of {BYTES_PER_SAMPLE}"
        )
    raw = np.fromfile(os.fspath(path), dtype=_SAMPLE_DTYPE)
    return IqBuffer(raw[0::2] + 1j * raw[1::2].astype(np.float64), sample_rate_hz)
