"""Byte formats for phase fields, network checkpoints and rendered images.

Fields travel as PHF1 blobs: the 4-byte magic "PHF1", a little-endian u32
grid size m, a little-endian f64 side length a, a u8 kind flag (0 real,
1 complex), then m*m little-endian f64 samples in row-major order; complex
samples are interleaved (re, im) pairs. Network checkpoints travel as ANN1
blobs: the magic "ANN1", little-endian u32 input and hidden sizes, then the
flattened float64 layers W1, B1, W2, B2 in that order. Both formats
round-trip bit for bit.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fields import ComplexField, ScalarField

_FIELD_MAGIC = b"PHF1"
_FIELD_HEADER = struct.Struct("<4sIdB")
_NET_MAGIC = b"ANN1"
_NET_HEADER = struct.Struct("<4sII")

_KIND_REAL = 0
_KIND_COMPLEX = 1


def save_field(path, field) -> None:
    """Write a ScalarField or ComplexField to a PHF1 file."""
    if isinstance(field, ScalarField):
        kind = _KIND_REAL
        payload = np.ascontiguousarray(field.data, dtype="<f8").tobytes()
    elif isinstance(field, ComplexField):
        kind = _KIND_COMPLEX
        # complex128 memory layout is already interleaved (re, im) doubles
        payload = np.ascontiguousarray(field.data, dtype="<c16").tobytes()
    else:
        raise TypeError(f"cannot serialise {type(field).__name__} as a field")
    header = _FIELD_HEADER.pack(_FIELD_MAGIC, field.m, field.a, kind)
    Path(path).write_bytes(header + payload)


def load_field(path):
    """Read a PHF1 file back into a ScalarField or ComplexField."""
    blob = Path(path).read_bytes()
    if len(blob) < _FIELD_HEADER.size:
        raise ValueError(f"{path}: truncated field header")
    magic, m, a, kind = _FIELD_HEADER.unpack_from(blob)
    if magic != _FIELD_MAGIC:
        raise ValueError(f"{path}: not a PHF1 field file")
    if kind == _KIND_REAL:
        dtype, cls = np.dtype("<f8"), ScalarField
    elif kind == _KIND_COMPLEX:
        dtype, cls = np.dtype("<c16"), ComplexField
    else:
        raise ValueError(f"{path}: unknown sample kind {kind}")
    expected = _FIELD_HEADER.size + m * m * dtype.itemsize
    if len(blob) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(blob)}")
    data = np.frombuffer(blob, dtype=dtype, offset=_FIELD_HEADER.size).reshape(m, m)
    return cls(int(m), float(a), data)


def save_network(path, net) -> None:
    """Write a Network to an ANN1 checkpoint."""
    header = _NET_HEADER.pack(_NET_MAGIC, net.inputs, net.hidden)
    parts = [header]
    for layer in (net.w1, net.b1, net.w2, net.b2):
        parts.append(np.ascontiguousarray(layer, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_network(path):
    """Read an ANN1 checkpoint back into a Network."""
    from .ann import Network

    blob = Path(path).read_bytes()
    if len(blob) < _NET_HEADER.size:
        raise ValueError(f"{path}: truncated checkpoint header")
    magic, inputs, hidden = _NET_HEADER.unpack_from(blob)
    if magic != _NET_MAGIC:
        raise ValueError(f"{path}: not an ANN1 checkpoint")
    sizes = (inputs * hidden, hidden, hidden * inputs, inputs)
    expected = _NET_HEADER.size + 8 * sum(sizes)
    if len(blob) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(blob)}")
    offset = _NET_HEADER.size
    layers = []
    for size, shape in zip(sizes, ((inputs, hidden), (hidden,), (hidden, inputs), (inputs,))):
        arr = np.frombuffer(blob, dtype="<f8", count=size, offset=offset).reshape(shape)
        layers.append(arr)
        offset += 8 * size
    return Network(*layers)


def write_pgm(path, image: np.ndarray) -> None:
    """Write an 8-bit grayscale image as a binary PGM (P5) file."""
    img = np.asarray(image)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError("PGM output expects a 2-D uint8 array")
    height, width = img.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.tobytes())
