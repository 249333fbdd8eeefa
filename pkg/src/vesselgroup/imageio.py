"""Image loading, saving, luminosity normalization and Otsu thresholding.

Images are plain float64 grids with intensities in [0, 1].  Soft
segmentations (per-pixel vessel likelihood) use the same container; binary
masks are boolean numpy arrays of the same shape.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from scipy.ndimage import uniform_filter

EPS_STD = 1e-6
# Standardized values are mapped to [0, 1] by a fixed affine window of
# +-NORM_SPAN local standard deviations (then clipped), so that zero local
# contrast lands exactly on mid-gray and local means stay near 0.5.
NORM_SPAN = 3.0


@dataclass(frozen=True)
class Image2D:
    """Grayscale raster with intensities in [0, 1], row-major ``data[y, x]``.

    Parameters
    ----------
    data : np.ndarray
        2D float array; values must be finite and within [0, 1].
    meta : dict
        Provenance notes (e.g. which channel of an RGB source was taken).
    """

    data: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("Image2D requires a 2D array with positive dimensions")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Image2D values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("Image2D values must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self):
        return self.data.shape


# A soft segmentation is carried in the same container as the image it is
# paired with; likelihoods live in [0, 1] exactly like intensities.
SoftSegmentation = Image2D


def _parse_pgm(raw: bytes):
    """Parse a binary (P5) PGM. Returns (array, maxval)."""
    if not raw.startswith(b"P5"):
        raise ValueError("not a binary PGM (P5) file")
    # header tokens: magic, width, height, maxval; '#' comments allowed
    tokens = []
    pos = 2
    while len(tokens) < 3:
        match = re.match(rb"(?:\s+|#[^\n]*\n)*(\d+)", raw[pos:])
        if match is None:
            raise ValueError("malformed PGM header")
        tokens.append(int(match.group(1)))
        pos += match.end()
    width, height, maxval = tokens
    pos += 1  # single whitespace byte after maxval
    if width < 1 or height < 1:
        raise ValueError("zero-size image")
    if maxval <= 0 or maxval > 65535:
        raise ValueError(f"unsupported PGM maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=pos)
    if data.size != count:
        raise ValueError("truncated PGM pixel data")
    return data.reshape(height, width).astype(np.float64), maxval


def load_grayscale(path) -> Image2D:
    """Load a PNG or PGM raster as an Image2D scaled into [0, 1].

    8- and 16-bit single-channel files are scaled by their maximum code
    value; RGB inputs contribute their green channel (higher vessel
    contrast), which is recorded in ``meta['source_channel']``.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(str(path))
    meta = {"source": str(path)}
    if path.suffix.lower() == ".pgm":
        arr, maxval = _parse_pgm(path.read_bytes())
        return Image2D(arr / maxval, meta)
    with PILImage.open(path) as im:
        if im.width < 1 or im.height < 1:
            raise ValueError("zero-size image")
        if im.mode in ("RGB", "RGBA"):
            arr = np.asarray(im)[:, :, 1].astype(np.float64) / 255.0
            meta["source_channel"] = "green"
        elif im.mode == "L":
            arr = np.asarray(im).astype(np.float64) / 255.0
        elif im.mode in ("I", "I;16", "I;16B"):
            arr = np.asarray(im).astype(np.float64) / 65535.0
        else:
            raise ValueError(f"unsupported image mode {im.mode!r}")
    if arr.max() > 1.0 or arr.min() < 0.0:
        raise ValueError("unsupported bit depth")
    return Image2D(arr, meta)


def save_grayscale(img: Image2D, path) -> None:
    """Write an Image2D as an 8-bit PNG or binary PGM (by extension)."""
    path = Path(path)
    codes = np.round(img.data * 255.0).astype(np.uint8)
    if path.suffix.lower() == ".pgm":
        header = f"P5\n{img.width} {img.height}\n255\n".encode()
        path.write_bytes(header + codes.tobytes())
    else:
        PILImage.fromarray(codes, mode="L").save(path, format="PNG")


def normalize_luminosity(img: Image2D, window: int) -> Image2D:
    """Equalize slow luminosity/contrast drift with a sliding-window z-score.

    Each pixel is standardized against the mean and standard deviation of
    its (edge-replicated) window, then mapped affinely from
    [-NORM_SPAN, NORM_SPAN] onto [0, 1] with clipping.  Constant regions map
    to 0.5.

    Parameters
    ----------
    img : Image2D
    window : int
        Window side; odd, >= 3.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be odd and >= 3")
    if window > img.width and window > img.height:
        raise ValueError("window larger than both image dimensions")
    data = img.data
    mean = uniform_filter(data, size=window, mode="nearest")
    sq = uniform_filter(data * data, size=window, mode="nearest")
    var = np.maximum(sq - mean * mean, 0.0)
    std = np.maximum(np.sqrt(var), EPS_STD)
    z = (data - mean) / std
    out = np.clip(0.5 + z / (2.0 * NORM_SPAN), 0.0, 1.0)
    return Image2D(out, dict(img.meta))


def otsu_threshold(seg: SoftSegmentation) -> np.ndarray:
    """Binarize a soft segmentation at the Otsu-optimal threshold.

    The threshold maximizes between-class variance over a 256-bin histogram
    of the observed value range; ties break toward the lower threshold to
    keep more vessel pixels.  Returns the boolean mask ``seg >= t*``.
    """
    values = seg.data
    vmin = float(values.min())
    vmax = float(values.max())
    if vmax <= vmin:
        raise ValueError("degenerate histogram: all segmentation values identical")
    nbins = 256
    scaled = (values - vmin) / (vmax - vmin)
    idx = np.minimum((scaled * nbins).astype(np.int64), nbins - 1)
    hist = np.bincount(idx.ravel(), minlength=nbins).astype(np.float64)

    # between-class variance for every split "bin <= k" vs "bin > k"
    bin_ids = np.arange(nbins, dtype=np.float64)
    w0 = np.cumsum(hist)
    total = w0[-1]
    m0 = np.cumsum(hist * bin_ids)
    mtot = m0[-1]
    w1 = total - w0
    valid = (w0 > 0) & (w1 > 0)
    var_between = np.zeros(nbins)
    var_between[valid] = (
        (mtot * w0[valid] - m0[valid] * total) ** 2
        / (w0[valid] * w1[valid])
    )
    k_star = int(np.argmax(var_between))  # argmax takes the first (lowest) maximum
    t_star = vmin + (k_star + 1) * (vmax - vmin) / nbins
    return values >= t_star
