"""Scalar fields, binary masks, and their on-disk formats.

Supported formats, all bit-exact:

* PGM ``P2``/``P5`` with maxval 255 or 65535 (16-bit P5 payloads are
  big-endian, per Netpbm). Loading divides by maxval so values land in [0, 1].
* Raw-float: a single JSON header line ``{"w": <int>, "h": <int>}`` followed
  by ``w*h`` little-endian float32 values in row-major order. Out-of-range
  values are clamped to [0, 1] and counted on the returned field
  (``field.clamped``); upstream sigmoids occasionally overshoot in exports.
* Persistence diagrams: CSV with header ``birth,death``, 17 significant
  digits per value.
* Skeletons: CSV with header ``x,y,branch_id``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    IoFailure,
    MalformedHeader,
    MalformedMask,
    TruncatedPayload,
    UnsupportedDepth,
)

_SUPPORTED_MAXVALS = (255, 65535)


@dataclass
class ScalarField2D:
    """A likelihood map on a pixel grid; values in [0, 1], row-major."""

    width: int
    height: int
    values: np.ndarray  # float64, shape (height, width)
    clamped: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("field dimensions must be positive")
        self.values = np.asarray(self.values, dtype=np.float64).reshape(
            self.height, self.width
        )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains NaN or infinity")
        if self.values.min() < 0.0 or self.values.max() > 1.0:
            raise ValueError("field values must lie in [0, 1]")


@dataclass
class BinaryMask2D:
    """A {0,1} mask with the same dimension contract as ScalarField2D."""

    width: int
    height: int
    bits: np.ndarray  # uint8, shape (height, width)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("mask dimensions must be positive")
        self.bits = np.asarray(self.bits, dtype=np.uint8).reshape(
            self.height, self.width
        )
        extra = set(np.unique(self.bits)) - {0, 1}
        if extra:
            raise ValueError(f"mask holds values other than 0/1: {sorted(extra)}")

    def count(self) -> int:
        return int(self.bits.sum())


@dataclass
class PersistenceDiagram:
    """Multiset of (birth, death) pairs with death >= birth."""

    pairs: list[tuple[float, float]]

    def __post_init__(self):
        for b, d in self.pairs:
            if d < b:
                raise ValueError(f"death {d} < birth {b}")


def _read_pgm_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    """Next whitespace-delimited token, skipping ``#`` comments."""
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c == b"#":
            while pos < n and buf[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise MalformedHeader("unexpected end of header", start)
    return buf[start:pos], pos


def _parse_pgm_header(buf: bytes) -> tuple[str, int, int, int, int]:
    magic, pos = _read_pgm_token(buf, 0)
    if magic not in (b"P2", b"P5"):
        raise MalformedHeader(f"not a PGM file (magic {magic!r})", 0)
    dims = []
    for name in ("width", "height", "maxval"):
        tok, pos = _read_pgm_token(buf, pos)
        try:
            dims.append(int(tok))
        except ValueError:
            raise MalformedHeader(f"non-numeric {name} {tok!r}", pos) from None
    width, height, maxval = dims
    if width < 1 or height < 1:
        raise MalformedHeader(f"bad dimensions {width}x{height}", pos)
    if maxval not in _SUPPORTED_MAXVALS:
        raise UnsupportedDepth(f"maxval {maxval} not in {_SUPPORTED_MAXVALS}", pos)
    # exactly one whitespace byte separates header and binary payload
    pos += 1
    return magic.decode(), width, height, maxval, pos


def _load_pgm(buf: bytes, path: Path) -> tuple[np.ndarray, int]:
    magic, width, height, maxval, pos = _parse_pgm_header(buf)
    n = width * height
    if magic == "P2":
        raw = np.zeros(n, dtype=np.uint32)
        for i in range(n):
            try:
                tok, pos = _read_pgm_token(buf, pos)
            except MalformedHeader as exc:
                raise TruncatedPayload(
                    f"P2 payload ends after {i} of {n} samples", exc.offset
                ) from None
            try:
                raw[i] = int(tok)
            except ValueError:
                raise TruncatedPayload(f"non-numeric sample {tok!r}", pos) from None
    else:
        bytes_per = 1 if maxval < 256 else 2
        need = n * bytes_per
        payload = buf[pos : pos + need]
        if len(payload) < need:
            raise TruncatedPayload(
                f"P5 payload has {len(payload)} of {need} bytes",
                pos + len(payload),
            )
        dtype = np.uint8 if bytes_per == 1 else np.dtype(">u2")
        raw = np.frombuffer(payload, dtype=dtype).astype(np.uint32)
    if raw.max(initial=0) > maxval:
        raise MalformedHeader(f"{path}: sample exceeds maxval {maxval}", pos)
    return raw.reshape(height, width), maxval


def _load_raw_float(buf: bytes, path: Path) -> tuple[np.ndarray, int]:
    nl = buf.find(b"\n")
    if nl < 0:
        raise MalformedHeader("raw-float header line missing newline", len(buf))
    try:
        header = json.loads(buf[:nl].decode("utf-8"))
        width, height = int(header["w"]), int(header["h"])
    except (ValueError, KeyError, UnicodeDecodeError):
        raise MalformedHeader("raw-float header is not {'w':..,'h':..} JSON", 0) from None
    if width < 1 or height < 1:
        raise MalformedHeader(f"bad dimensions {width}x{height}", 0)
    need = width * height * 4
    payload = buf[nl + 1 : nl + 1 + need]
    if len(payload) < need:
        raise TruncatedPayload(
            f"raw-float payload has {len(payload)} of {need} bytes",
            nl + 1 + len(payload),
        )
    values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise MalformedHeader("raw-float payload contains NaN or infinity", nl + 1)
    clamped = int(np.count_nonzero((values < 0.0) | (values > 1.0)))
    values = np.clip(values, 0.0, 1.0)
    field = values.reshape(height, width)
    return field, clamped


def load_field(path: str | Path) -> ScalarField2D:
    """Load a scalar field from PGM (P2/P5) or raw-float.

    Raw-float is detected by a leading ``{``; anything else must be PGM.
    """
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not buf:
        raise MalformedHeader(f"{path} is empty", 0)
    if buf[:1] == b"{":
        values, clamped = _load_raw_float(buf, path)
        h, w = values.shape
        return ScalarField2D(w, h, values, clamped=clamped)
    raw, maxval = _load_pgm(buf, path)
    h, w = raw.shape
    return ScalarField2D(w, h, raw.astype(np.float64) / maxval)


def save_field(field: ScalarField2D, path: str | Path, fmt: str = "raw") -> None:
    """Write a field as ``raw`` (lossless float32), ``pgm8``, or ``pgm16``."""
    path = Path(path)
    try:
        if fmt == "raw":
            header = json.dumps({"w": field.width, "h": field.height}) + "\n"
            payload = field.values.astype("<f4").tobytes()
            path.write_bytes(header.encode("utf-8") + payload)
        elif fmt in ("pgm8", "pgm16"):
            maxval = 255 if fmt == "pgm8" else 65535
            quant = np.rint(field.values * maxval).astype(np.uint32)
            header = f"P5\n{field.width} {field.height}\n{maxval}\n".encode()
            dtype = np.uint8 if maxval == 255 else np.dtype(">u2")
            path.write_bytes(header + quant.astype(dtype).tobytes())
        else:
            raise ValueError(f"unknown field format {fmt!r}")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def save_mask(mask: BinaryMask2D, path: str | Path) -> None:
    """Write a mask as binary PGM with values {0, 255}."""
    path = Path(path)
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode()
    try:
        path.write_bytes(header + (mask.bits * 255).astype(np.uint8).tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_mask(path: str | Path) -> BinaryMask2D:
    """Load a mask saved by save_mask; pixels must be exactly 0 or maxval."""
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    raw, maxval = _load_pgm(buf, path)
    values = set(np.unique(raw))
    if not values <= {0, maxval}:
        raise MalformedMask(
            f"{path}: mask pixels must be 0 or {maxval}, found {sorted(values)}"
        )
    h, w = raw.shape
    return BinaryMask2D(w, h, (raw == maxval).astype(np.uint8))


def export_diagram(pd: PersistenceDiagram, path: str | Path) -> None:
    """Write a persistence diagram as ``birth,death`` CSV, 17 significant digits."""
    lines = ["birth,death"]
    for birth, death in pd.pairs:
        lines.append(f"{birth:.17g},{death:.17g}")
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_diagram(path: str | Path) -> PersistenceDiagram:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "birth,death":
        raise MalformedHeader("diagram CSV must start with 'birth,death'", 0)
    pairs = []
    for ln in lines[1:]:
        b, d = ln.split(",")
        pairs.append((float(b), float(d)))
    return PersistenceDiagram(pairs)


def export_skeleton(pixels_by_branch: dict[int, np.ndarray], path: str | Path) -> None:
    """Write branch pixels as ``x,y,branch_id`` CSV.

    ``pixels_by_branch`` maps branch id to an (n, 2) array of (y, x) pixels.
    """
    lines = ["x,y,branch_id"]
    for bid in sorted(pixels_by_branch):
        for y, x in pixels_by_branch[bid]:
            lines.append(f"{int(x)},{int(y)},{bid}")
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
