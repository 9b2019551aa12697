"""Raw planar video, depth maps, dataset manifests and subject ratings.

Every metric in the package consumes the immutable types defined here.
Planes keep their source sample scale (0-255 for 8-bit content) whatever the
dtype, so float planes produced by filtering or noise injection can be passed
through the same API as planes read from disk.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ManifestError, RatingsError, TruncatedFileError

__all__ = [
    "Plane",
    "Frame",
    "StereoFrame",
    "DepthMap",
    "ViewingGeometry",
    "ManifestEntry",
    "DatasetManifest",
    "RatingsTable",
    "frame_bytes",
    "frame_offset",
    "count_frames",
    "read_yuv420",
    "write_yuv420",
    "read_depth",
    "write_depth",
    "rgb_to_frame",
    "parse_manifest",
    "dump_manifest",
    "parse_ratings",
    "write_ratings",
    "MAX_MISSING_FRACTION",
]

MAX_MISSING_FRACTION = 0.2


def _frozen_array(a, dtype=None):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Plane:
    """One image plane, shape ``(height, width)``, stored read-only."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.ndim != 2:
            raise ValueError(f"plane samples must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"plane must be at least 1x1, got {arr.shape[1]}x{arr.shape[0]}")
        if arr.dtype.kind not in "uif":
            raise ValueError(f"plane samples must be numeric, got dtype {arr.dtype}")
        if arr.flags.writeable or arr is not self.samples:
            arr = _frozen_array(arr)
        object.__setattr__(self, "samples", arr)

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def shape(self):
        return self.samples.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.samples
        return self.samples.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, Plane):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.samples, other.samples))

    __hash__ = None


def as_array(x) -> np.ndarray:
    """float64 view of a Plane or array-like."""
    if isinstance(x, Plane):
        return x.samples.astype(np.float64, copy=False)
    return np.asarray(x, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Frame:
    """A 4:2:0 frame: full-resolution luma, half-resolution chroma."""

    y: Plane
    u: Plane
    v: Plane

    def __post_init__(self):
        for name in ("y", "u", "v"):
            p = getattr(self, name)
            if not isinstance(p, Plane):
                object.__setattr__(self, name, Plane(p))
        cw, ch = math.ceil(self.y.width / 2), math.ceil(self.y.height / 2)
        for name in ("u", "v"):
            p = getattr(self, name)
            if (p.width, p.height) != (cw, ch):
                raise ValueError(
                    f"{name} plane is {p.width}x{p.height}, 4:2:0 needs {cw}x{ch} "
                    f"for luma {self.y.width}x{self.y.height}"
                )

    @property
    def width(self) -> int:
        return self.y.width

    @property
    def height(self) -> int:
        return self.y.height

    @property
    def subsampling(self) -> str:
        return "420"

    def planes(self):
        return self.y, self.u, self.v

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.y == other.y and self.u == other.u and self.v == other.v

    __hash__ = None


@dataclass(frozen=True)
class ViewingGeometry:
    """Display and viewer placement used to map pixels to visual degrees.

    Defaults describe a 46-inch 16:9 full-HD panel watched from three
    picture heights.
    """

    viewing_distance: float = 1.7184  # metres
    display_width: float = 1.0184  # metres
    horizontal_resolution: int = 1920

    def __post_init__(self):
        if not (self.viewing_distance > 0 and self.display_width > 0 and self.horizontal_resolution > 0):
            raise ValueError(f"viewing geometry values must be positive: {self}")

    @property
    def pixels_per_degree(self) -> float:
        pitch = self.display_width / self.horizontal_resolution
        return 2.0 * self.viewing_distance * math.tan(math.radians(0.5)) / pitch

    @property
    def degrees_per_pixel(self) -> float:
        return 1.0 / self.pixels_per_degree


@dataclass(frozen=True, eq=False)
class DepthMap:
    """8-bit depth codes for one view, with optional display geometry."""

    plane: Plane
    geometry: Optional[ViewingGeometry] = None

    def __post_init__(self):
        if not isinstance(self.plane, Plane):
            object.__setattr__(self, "plane", Plane(self.plane))

    @property
    def width(self) -> int:
        return self.plane.width

    @property
    def height(self) -> int:
        return self.plane.height

    def __eq__(self, other):
        if not isinstance(other, DepthMap):
            return NotImplemented
        return self.plane == other.plane and self.geometry == other.geometry

    __hash__ = None


@dataclass(frozen=True, eq=False)
class StereoFrame:
    left: Frame
    right: Frame
    depth: Optional[DepthMap] = None

    def __post_init__(self):
        if (self.left.width, self.left.height) != (self.right.width, self.right.height):
            raise ValueError(
                f"left view is {self.left.width}x{self.left.height} but right view is "
                f"{self.right.width}x{self.right.height}"
            )
        if self.depth is not None and (self.depth.width, self.depth.height) != (
            self.left.width,
            self.left.height,
        ):
            raise ValueError(
                f"depth map is {self.depth.width}x{self.depth.height}, views are "
                f"{self.left.width}x{self.left.height}"
            )

    @property
    def width(self) -> int:
        return self.left.width

    @property
    def height(self) -> int:
        return self.left.height

    def same_views(self, other: "StereoFrame") -> bool:
        return self.left == other.left and self.right == other.right


# ---------------------------------------------------------------------------
# raw YUV / depth files
# ---------------------------------------------------------------------------


def frame_bytes(width: int, height: int) -> int:
    return width * height * 3 // 2


def frame_offset(width: int, height: int, frame_index: int) -> int:
    return frame_index * frame_bytes(width, height)


def _check_dims(width, height):
    if width < 1 or height < 1:
        raise ValueError(f"dimensions must be positive, got {width}x{height}")
    if width % 2 or height % 2:
        raise ValueError(f"4:2:0 raw video needs even dimensions, got {width}x{height}")


def count_frames(path, width: int, height: int) -> int:
    _check_dims(width, height)
    return os.path.getsize(path) // frame_bytes(width, height)


def _read_span(path, offset, nbytes):
    path = Path(path)
    size = path.stat().st_size  # FileNotFoundError propagates
    if size < offset + nbytes:
        raise TruncatedFileError(path, offset + nbytes, size)
    with open(path, "rb") as fh:
        fh.seek(offset)
        data = fh.read(nbytes)
    return np.frombuffer(data, dtype=np.uint8)


def read_yuv420(path, width: int, height: int, frame_index: int = 0) -> Frame:
    """Read one frame of headerless 8-bit planar YUV 4:2:0.

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    TruncatedFileError
        If the file ends before the requested frame does.
    ValueError
        For odd or nonpositive dimensions, or a negative frame index.
    """
    _check_dims(width, height)
    if frame_index < 0:
        raise ValueError(f"frame_index must be >= 0, got {frame_index}")
    n_y = width * height
    n_c = n_y // 4
    buf = _read_span(path, frame_offset(width, height, frame_index), frame_bytes(width, height))
    cw, ch = width // 2, height // 2
    return Frame(
        Plane(buf[:n_y].reshape(height, width)),
        Plane(buf[n_y : n_y + n_c].reshape(ch, cw)),
        Plane(buf[n_y + n_c :].reshape(ch, cw)),
    )


def _to_u8(plane) -> np.ndarray:
    a = np.asarray(plane.samples if isinstance(plane, Plane) else plane)
    if a.dtype != np.uint8:
        a = np.clip(np.rint(a), 0, 255).astype(np.uint8)
    return a


def write_yuv420(path, frames: Sequence[Frame], append: bool = False) -> None:
    """Write frames as raw 8-bit 4:2:0; float samples are rounded and clipped."""
    with open(path, "ab" if append else "wb") as fh:
        for f in frames:
            _check_dims(f.width, f.height)
            for p in f.planes():
                fh.write(_to_u8(p).tobytes())


def _depth_format(path, fmt):
    if fmt != "auto":
        if fmt not in ("y8", "yuv420"):
            raise ValueError(f"unknown depth format {fmt!r}; use 'auto', 'y8' or 'yuv420'")
        return fmt
    return "yuv420" if str(path).lower().endswith(".yuv") else "y8"


def read_depth(path, width: int, height: int, frame_index: int = 0, fmt: str = "auto",
               geometry: Optional[ViewingGeometry] = None) -> DepthMap:
    """Read one depth frame.

    ``fmt`` is ``"y8"`` (single 8-bit plane per frame), ``"yuv420"`` (chroma
    present but ignored) or ``"auto"``, which picks ``yuv420`` for ``*.yuv``
    files and ``y8`` otherwise.
    """
    fmt = _depth_format(path, fmt)
    if fmt == "yuv420":
        return DepthMap(read_yuv420(path, width, height, frame_index).y, geometry)
    if width < 1 or height < 1:
        raise ValueError(f"dimensions must be positive, got {width}x{height}")
    if frame_index < 0:
        raise ValueError(f"frame_index must be >= 0, got {frame_index}")
    n = width * height
    buf = _read_span(path, frame_index * n, n)
    return DepthMap(Plane(buf.reshape(height, width)), geometry)


def write_depth(path, depth_maps: Sequence, fmt: str = "y8") -> None:
    with open(path, "wb") as fh:
        for d in depth_maps:
            plane = d.plane if isinstance(d, DepthMap) else d
            a = _to_u8(plane)
            fh.write(a.tobytes())
            if fmt == "yuv420":
                fh.write(np.full(a.size // 2, 128, dtype=np.uint8).tobytes())


def rgb_to_frame(rgb) -> Frame:
    """BT.601 full-range RGB to a float 4:2:0 frame (chroma by 2x2 mean)."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected an HxWx3 array, got {rgb.shape}")
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    u = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    v = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    h, w = y.shape
    ph, pw = (-h) % 2, (-w) % 2

    def sub(c):
        c = np.pad(c, ((0, ph), (0, pw)), mode="edge")
        return c.reshape(c.shape[0] // 2, 2, c.shape[1] // 2, 2).mean(axis=(1, 3))

    return Frame(Plane(y), Plane(sub(u)), Plane(sub(v)))


# ---------------------------------------------------------------------------
# dataset manifest
# ---------------------------------------------------------------------------

_REQUIRED = (
    "sequence_id",
    "class_label",
    "ref_left_path",
    "ref_right_path",
    "dist_left_path",
    "dist_right_path",
    "width",
    "height",
    "frame_count",
    "rate_point_label",
)
_OPTIONAL = ("ref_depth_path", "mos", "view_label")
_PATH_FIELDS = ("ref_left_path", "ref_right_path", "dist_left_path", "dist_right_path", "ref_depth_path")


@dataclass(frozen=True)
class ManifestEntry:
    sequence_id: str
    class_label: str
    ref_left_path: str
    ref_right_path: str
    dist_left_path: str
    dist_right_path: str
    width: int
    height: int
    frame_count: int
    rate_point_label: str
    ref_depth_path: Optional[str] = None
    mos: Optional[float] = None
    view_label: Optional[str] = None

    @property
    def key(self):
        return self.sequence_id, self.rate_point_label

    @property
    def item_id(self) -> str:
        return item_key(self.sequence_id, self.rate_point_label)


def item_key(sequence_id: str, rate_point: str) -> str:
    """Item id joining a sequence and a rate point, as used in ratings files."""
    return f"{sequence_id}:{rate_point}"


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple
    dataset_id: str = ""

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _entry_from_dict(raw, index, base: Path) -> ManifestEntry:
    where = f"entry {index}"
    if not isinstance(raw, dict):
        raise ManifestError(f"{where}: expected an object, got {type(raw).__name__}")
    missing = [k for k in _REQUIRED if k not in raw or raw[k] is None]
    if missing:
        raise ManifestError(f"{where}: missing required field(s) {', '.join(missing)}")
    unknown = sorted(set(raw) - set(_REQUIRED) - set(_OPTIONAL))
    if unknown:
        raise ManifestError(f"{where}: unknown field(s) {', '.join(unknown)}")
    vals = {}
    for k in ("width", "height", "frame_count"):
        v = raw[k]
        if isinstance(v, bool) or not isinstance(v, int):
            raise ManifestError(f"{where}: {k} must be an integer, got {v!r}")
        if v < 1:
            raise ManifestError(f"{where}: {k} must be positive, got {v}")
        vals[k] = v
    for k in ("sequence_id", "class_label", "rate_point_label"):
        vals[k] = str(raw[k])
    for k in _PATH_FIELDS:
        v = raw.get(k)
        if v is None:
            vals[k] = None
            continue
        p = Path(str(v))
        vals[k] = str(p if p.is_absolute() else (base / p))
    mos = raw.get("mos")
    if mos is not None:
        mos = float(mos)
        if not 1.0 <= mos <= 10.0:
            raise ManifestError(f"{where}: mos {mos} outside [1, 10]")
    vals["mos"] = mos
    vals["view_label"] = None if raw.get("view_label") is None else str(raw["view_label"])
    return ManifestEntry(**vals)


def parse_manifest(path) -> DatasetManifest:
    """Load and validate a JSON dataset manifest.

    Relative paths are resolved against the manifest's directory.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}: invalid JSON ({exc})") from exc
    if isinstance(doc, list):
        doc = {"entries": doc}
    if not isinstance(doc, dict) or "entries" not in doc:
        raise ManifestError(f"{path}: manifest must be an object with an 'entries' list")
    raw_entries = doc["entries"]
    if not isinstance(raw_entries, list) or not raw_entries:
        raise ManifestError(f"{path}: empty manifest")
    base = path.resolve().parent
    entries = []
    seen = {}
    for i, raw in enumerate(raw_entries):
        e = _entry_from_dict(raw, i, base)
        if e.key in seen:
            raise ManifestError(
                f"duplicate entry (sequence_id={e.sequence_id!r}, rate_point_label="
                f"{e.rate_point_label!r}) at entries {seen[e.key]} and {i}"
            )
        seen[e.key] = i
        entries.append(e)
    return DatasetManifest(tuple(entries), str(doc.get("dataset_id", "")))


def dump_manifest(manifest: DatasetManifest, path) -> None:
    doc = {"dataset_id": manifest.dataset_id, "entries": []}
    for e in manifest.entries:
        d = {k: v for k, v in asdict(e).items() if v is not None or k in _REQUIRED}
        doc["entries"].append(d)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subject ratings
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RatingsTable:
    """Items x subjects matrix of 1-10 ratings; NaN marks a missing cell."""

    items: tuple
    subjects: tuple
    scores: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(str(i) for i in self.items))
        object.__setattr__(self, "subjects", tuple(str(s) for s in self.subjects))
        s = _frozen_array(self.scores, dtype=np.float64)
        if s.shape != (len(self.items), len(self.subjects)):
            raise RatingsError(
                f"score matrix is {s.shape}, expected {len(self.items)} items x "
                f"{len(self.subjects)} subjects"
            )
        bad = np.argwhere(~np.isnan(s) & ((s < 1) | (s > 10) | (s != np.round(s))))
        if bad.size:
            i, j = bad[0]
            raise RatingsError(
                f"score {s[i, j]:g} at item {self.items[i]!r} (row {i + 1}), subject "
                f"{self.subjects[j]!r} (column {j + 1}) is not an integer in 1-10"
            )
        object.__setattr__(self, "scores", s)

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.scores)

    def missing_fraction(self) -> np.ndarray:
        return self.missing.mean(axis=1)

    def subset(self, subjects) -> "RatingsTable":
        idx = [self.subjects.index(s) for s in subjects]
        return RatingsTable(self.items, tuple(subjects), self.scores[:, idx])

    def __eq__(self, other):
        if not isinstance(other, RatingsTable):
            return NotImplemented
        return (
            self.items == other.items
            and self.subjects == other.subjects
            and bool(np.array_equal(self.scores, other.scores, equal_nan=True))
        )

    __hash__ = None


def parse_ratings(path, max_missing_fraction: float = MAX_MISSING_FRACTION) -> RatingsTable:
    """Read a ratings CSV: header of subject ids, then one row per item.

    Blank cells are missing ratings. An item missing more than
    ``max_missing_fraction`` of its ratings is rejected.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise RatingsError(f"{path}: empty ratings file")
    header = rows[0]
    subjects = [h.strip() for h in header[1:]]
    if not subjects:
        raise RatingsError(f"{path}: header has no subject columns")
    if len(set(subjects)) != len(subjects):
        raise RatingsError(f"{path}: duplicate subject ids in header")
    items, scores = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise RatingsError(
                f"{path}: line {lineno} has {len(row)} cells, header has {len(header)}"
            )
        item = row[0].strip()
        vals = []
        for col, cell in enumerate(row[1:], start=1):
            cell = cell.strip()
            if cell == "":
                vals.append(np.nan)
                continue
            try:
                v = int(cell)
            except ValueError:
                raise RatingsError(
                    f"{path}: line {lineno}, subject {subjects[col - 1]!r}: {cell!r} is not an integer"
                ) from None
            if not 1 <= v <= 10:
                raise RatingsError(
                    f"{path}: score {v} out of range 1-10 at item {item!r} (line {lineno}), "
                    f"subject {subjects[col - 1]!r} (column {col})"
                )
            vals.append(float(v))
        items.append(item)
        scores.append(vals)
    if not items:
        raise RatingsError(f"{path}: no item rows")
    if len(set(items)) != len(items):
        raise RatingsError(f"{path}: duplicate item ids")
    table = RatingsTable(tuple(items), tuple(subjects), np.array(scores, dtype=np.float64))
    frac = table.missing_fraction()
    over = np.flatnonzero(frac > max_missing_fraction)
    if over.size:
        i = over[0]
        raise RatingsError(
            f"{path}: item {items[i]!r} is missing {frac[i]:.0%} of its ratings "
            f"(limit {max_missing_fraction:.0%})"
        )
    return table


def write_ratings(table: RatingsTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["item", *table.subjects])
        for item, row in zip(table.items, table.scores):
            w.writerow([item, *("" if np.isnan(v) else int(v) for v in row)])
