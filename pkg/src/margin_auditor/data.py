"""Datasets: IDX ingestion, binary export, label/input randomization, and
deterministic synthetic generators."""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    InputOutputError,
    NumericDegeneracyError,
    ParameterError,
    ParseError,
)
from .linalg import as_matrix, read_mat1, write_mat1

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
LBL1_MAGIC = b"LBL1"


@dataclass(frozen=True)
class Dataset:
    """Feature rows X (n x d) with 1-based integer labels in {1..k}."""

    X: np.ndarray
    y: np.ndarray
    k: int

    def __post_init__(self):
        x = as_matrix(self.X)
        y = np.asarray(self.y, dtype=np.int64)
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ParameterError("need exactly one label per example row")
        if self.k < 1:
            raise ParameterError(f"label count k must be >= 1, got {self.k}")
        if y.min() < 1 or y.max() > self.k:
            raise ParameterError(f"labels must lie in 1..{self.k}")
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]


def _read_file(path):
    try:
        with open(path, "rb") as f:
            return f.read()
    except FileNotFoundError:
        raise InputOutputError(f"file not found: {path}") from None


def _be_u32(raw, offset, path, what):
    if len(raw) < offset + 4:
        raise ParseError(f"truncated before {what}", path=path, offset=len(raw))
    return struct.unpack_from(">I", raw, offset)[0]


def inspect_idx(path):
    """Header of an IDX file as a dict; distinguishes image and label files."""
    raw = _read_file(path)
    magic = _be_u32(raw, 0, path, "magic")
    if magic == IDX_IMAGES_MAGIC:
        count = _be_u32(raw, 4, path, "image count")
        rows = _be_u32(raw, 8, path, "row count")
        cols = _be_u32(raw, 12, path, "column count")
        return {"kind": "images", "count": count, "rows": rows, "cols": cols,
                "payload_bytes": len(raw) - 16}
    if magic == IDX_LABELS_MAGIC:
        count = _be_u32(raw, 4, path, "label count")
        return {"kind": "labels", "count": count, "payload_bytes": len(raw) - 8}
    raise ParseError(f"unrecognized IDX magic 0x{magic:08x}", path=path, offset=0)


def load_idx(images_path, labels_path):
    """Parse an IDX image/label pair into a Dataset.

    Pixels are scaled to [0,1] by 1/255 and flattened to rows*cols features;
    byte labels are shifted to 1-based.  Malformed input raises a parse error
    naming the byte offset.
    """
    raw = _read_file(images_path)
    magic = _be_u32(raw, 0, images_path, "magic")
    if magic != IDX_IMAGES_MAGIC:
        raise ParseError(
            f"bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}",
            path=images_path, offset=0,
        )
    n = _be_u32(raw, 4, images_path, "image count")
    rows = _be_u32(raw, 8, images_path, "row count")
    cols = _be_u32(raw, 12, images_path, "column count")
    expected = 16 + n * rows * cols
    if len(raw) != expected:
        raise ParseError(
            f"image payload has {len(raw)} bytes, expected {expected}",
            path=images_path, offset=min(len(raw), expected),
        )
    pixels = np.frombuffer(raw, dtype=np.uint8, count=n * rows * cols, offset=16)
    x = pixels.reshape(n, rows * cols).astype(np.float64) / 255.0

    lraw = _read_file(labels_path)
    lmagic = _be_u32(lraw, 0, labels_path, "magic")
    if lmagic != IDX_LABELS_MAGIC:
        raise ParseError(
            f"bad label magic 0x{lmagic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}",
            path=labels_path, offset=0,
        )
    ln = _be_u32(lraw, 4, labels_path, "label count")
    if ln != n:
        raise ParseError(
            f"label count {ln} does not match image count {n}", path=labels_path, offset=4
        )
    if len(lraw) != 8 + ln:
        raise ParseError(
            f"label payload has {len(lraw)} bytes, expected {8 + ln}",
            path=labels_path, offset=min(len(lraw), 8 + ln),
        )
    labels = np.frombuffer(lraw, dtype=np.uint8, count=ln, offset=8).astype(np.int64) + 1
    k = max(int(labels.max()), 1)
    return Dataset(X=x, y=labels, k=k)


def write_idx(ds, images_path, labels_path, rows=1, cols=None):
    """Serialize a Dataset back to an IDX pair (pixels re-quantized to bytes).

    Round-trips exactly for datasets that came from :func:`load_idx`.
    """
    n, d = ds.X.shape
    if cols is None:
        cols = d // rows
    if rows * cols != d:
        raise ParameterError(f"rows*cols={rows * cols} must equal feature dim {d}")
    if ds.k > 256:
        raise ParameterError("IDX labels are single bytes; need k <= 256")
    pixels = np.rint(np.clip(ds.X, 0.0, 1.0) * 255.0).astype(np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        f.write(pixels.tobytes(order="C"))
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, n))
        f.write((ds.y - 1).astype(np.uint8).tobytes())


def save_dataset(ds, matrix_path, labels_path):
    """Dataset export: features as MAT1, labels as LBL1 (magic, u32 count, u32 k, u32 labels)."""
    write_mat1(matrix_path, ds.X)
    with open(labels_path, "wb") as f:
        f.write(LBL1_MAGIC)
        f.write(struct.pack("<II", ds.n, ds.k))
        f.write(ds.y.astype("<u4").tobytes())


def load_dataset(matrix_path, labels_path):
    """Inverse of :func:`save_dataset`."""
    x = read_mat1(matrix_path)
    raw = _read_file(labels_path)
    if len(raw) < 12:
        raise ParseError("LBL1 header truncated", path=labels_path, offset=len(raw))
    if raw[:4] != LBL1_MAGIC:
        raise ParseError(f"bad LBL1 magic {raw[:4]!r}", path=labels_path, offset=0)
    count, k = struct.unpack_from("<II", raw, 4)
    expected = 12 + 4 * count
    if len(raw) != expected:
        raise ParseError(
            f"LBL1 payload has {len(raw)} bytes, expected {expected}",
            path=labels_path, offset=min(len(raw), expected),
        )
    y = np.frombuffer(raw, dtype="<u4", count=count, offset=12).astype(np.int64)
    return Dataset(X=x, y=y, k=int(k))


def randomize_labels(ds, seed=0):
    """Replace labels by iid uniform draws over {1..k}; features untouched."""
    if ds.k == 1:
        return Dataset(X=ds.X, y=ds.y.copy(), k=ds.k)
    rng = np.random.default_rng(seed)
    y = rng.integers(1, ds.k + 1, size=ds.n)
    return Dataset(X=ds.X, y=y.astype(np.int64), k=ds.k)


def randomize_inputs_gaussian(ds, seed=0):
    """Replace the feature rows by Gaussian draws matching their mean and covariance.

    The empirical covariance gets a diagonal shrinkage of 1e-6 * trace/d so the
    Cholesky factorization is well-posed even with few samples.
    """
    if ds.n < 2:
        raise ParameterError("need at least 2 examples to estimate input statistics")
    x = ds.X
    mu = x.mean(axis=0)
    centered = x - mu
    cov = centered.T @ centered / ds.n
    d = x.shape[1]
    lam = 1e-6 * float(np.trace(cov)) / d
    if lam <= 0.0:
        raise NumericDegeneracyError("all rows identical: covariance has zero trace")
    try:
        chol = np.linalg.cholesky(cov + lam * np.eye(d))
    except np.linalg.LinAlgError as exc:
        raise NumericDegeneracyError(f"covariance factorization failed: {exc}") from None
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((ds.n, d))
    return Dataset(X=mu + z @ chol.T, y=ds.y.copy(), k=ds.k)


def synth_blobs(n, d, k, separation, seed=0):
    """k unit-covariance Gaussian clusters whose means have norm ``separation``.

    Labels are balanced round-robin; fully deterministic under the seed.
    """
    if n < k:
        raise ParameterError(f"need n >= k, got n={n}, k={k}")
    if k < 1 or d < 1:
        raise ParameterError("k and d must be at least 1")
    rng = np.random.default_rng(seed)
    means = rng.standard_normal((k, d))
    lens = np.sqrt(np.sum(means * means, axis=1))
    lens[lens == 0.0] = 1.0
    means = separation * means / lens[:, None]
    y = (np.arange(n) % k) + 1
    x = means[y - 1] + rng.standard_normal((n, d))
    return Dataset(X=x, y=y.astype(np.int64), k=k)


def synth_images(n, k=10, side=28, seed=0, smooth_noise=0.25, pixel_noise=0.15):
    """Deterministic image-like classes: smooth random prototypes plus noise.

    Each class has a fixed prototype obtained by bilinearly upsampling a seeded
    coarse random field to side x side; samples add a smooth per-sample field
    plus iid per-pixel noise (so every sample varies across all coordinates,
    like real image data) and are clipped to [0, 1].  Mimics the shape and
    pixel scale of handwritten-digit data for desk-scale experiments when real
    image data is not on disk.
    """
    if n < k:
        raise ParameterError(f"need n >= k, got n={n}, k={k}")
    grid = 7
    rng = np.random.default_rng(seed)
    interp = _bilinear_matrix(grid, side)
    protos = np.einsum("ag,kgh,bh->kab", interp, rng.standard_normal((k, grid, grid)), interp)
    protos = 0.5 + 0.5 * protos / np.abs(protos).max()
    protos = np.clip(protos, 0.05, 0.95)
    y = (np.arange(n) % k) + 1
    fields = np.einsum(
        "ag,ngh,bh->nab", interp, rng.standard_normal((n, grid, grid)), interp
    )
    speckle = rng.standard_normal((n, side, side))
    samples = np.clip(protos[y - 1] + smooth_noise * fields + pixel_noise * speckle, 0.0, 1.0)
    return Dataset(X=samples.reshape(n, side * side), y=y.astype(np.int64), k=k)


def _bilinear_matrix(grid, side):
    pos = np.linspace(0.0, grid - 1.0, side)
    base = np.floor(pos).astype(np.int64)
    base = np.minimum(base, grid - 2)
    frac = pos - base
    mat = np.zeros((side, grid))
    mat[np.arange(side), base] = 1.0 - frac
    mat[np.arange(side), base + 1] = frac
    return mat
