"""Grayscale PGM (P2 ASCII / P5 binary) reading and writing."""
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, UnsupportedFormat

MAXVAL_LIMIT = 65535
_WS = b" \t\r\n\v\f"


@dataclass
class ImageBuffer:
    width: int
    height: int
    pixels: np.ndarray  # (height, width), row-major, values in [0, 1]

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=float)
        if self.pixels.shape != (self.height, self.width):
            raise ValueError(f"pixel array {self.pixels.shape} does not match {self.height}x{self.width}")


def _header(data):
    """Magic plus three integers; returns (magic, width, height, maxval, offset after header)."""
    pos = 0
    tokens = []
    while len(tokens) < 4:
        while pos < len(data) and data[pos] in _WS:
            pos += 1
        if pos < len(data) and data[pos] == ord("#"):
            while pos < len(data) and data[pos] not in b"\r\n":
                pos += 1
            continue
        if pos >= len(data):
            raise ParseError(f"truncated header at offset {pos}")
        start = pos
        while pos < len(data) and data[pos] not in _WS and data[pos] != ord("#"):
            pos += 1
        tokens.append((data[start:pos], start))
    magic = tokens[0][0]
    if magic not in (b"P2", b"P5"):
        raise UnsupportedFormat(f"unsupported magic {magic!r}; only P2 and P5 are read")
    vals = []
    for tok, off in tokens[1:]:
        if not tok.isdigit():
            raise ParseError(f"expected an integer at offset {off}, got {tok!r}")
        vals.append(int(tok))
    width, height, maxval = vals
    if width < 1 or height < 1:
        raise ParseError(f"bad dimensions {width}x{height}")
    if not 1 <= maxval <= MAXVAL_LIMIT:
        raise UnsupportedFormat(f"maxval {maxval} outside [1, {MAXVAL_LIMIT}]")
    return magic.decode(), width, height, maxval, pos


def load_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    magic, width, height, maxval, pos = _header(data)
    n = width * height
    if magic == "P5":
        if pos >= len(data) or data[pos] not in _WS:
            raise ParseError(f"missing whitespace after maxval at offset {pos}")
        pos += 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = n * dtype.itemsize
        if len(data) - pos < need:
            raise ParseError(f"truncated raster: expected {need} bytes at offset {pos}, found {len(data) - pos}")
        raw = np.frombuffer(data, dtype=dtype, count=n, offset=pos).astype(np.int64)
    else:
        lines = data[pos:].split(b"\n")
        toks = []
        line_no = data[:pos].count(b"\n") + 1
        for k, line in enumerate(lines):
            body = line.split(b"#", 1)[0]
            for tok in body.split():
                if not tok.isdigit():
                    raise ParseError(f"bad sample {tok!r} on line {line_no + k}")
                toks.append(int(tok))
        if len(toks) < n:
            raise ParseError(f"truncated raster: expected {n} samples, found {len(toks)}")
        raw = np.array(toks[:n], dtype=np.int64)
    if raw.max(initial=0) > maxval:
        raise ParseError(f"sample {int(raw.max())} exceeds maxval {maxval}")
    return ImageBuffer(width, height, (raw / maxval).reshape(height, width))


def quantize(pixels, maxval=255):
    """Round-half-up to integers in ``[0, maxval]``."""
    q = np.floor(np.asarray(pixels, dtype=float) * maxval + 0.5)
    return np.clip(q, 0, maxval).astype(np.int64)


def save_pgm(buf, path, maxval=255, binary=True):
    if not 1 <= maxval <= MAXVAL_LIMIT:
        raise UnsupportedFormat(f"maxval {maxval} outside [1, {MAXVAL_LIMIT}]")
    px = np.asarray(buf.pixels, dtype=float)
    if not np.all(np.isfinite(px)) or px.min() < -1e-6 or px.max() > 1.0 + 1e-6:
        raise ValueError(f"pixels must lie in [0, 1], got [{px.min():.6g}, {px.max():.6g}]")
    q = quantize(px, maxval)
    header = f"{'P5' if binary else 'P2'}\n{buf.width} {buf.height}\n{maxval}\n".encode()
    with open(path, "wb") as fh:
        fh.write(header)
        if binary:
            fh.write(q.astype(">u2" if maxval > 255 else "u1").tobytes())
        else:
            for row in q:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode())
