"""Image descriptors: joint RGB histograms and a fully pinned GIST-style Gabor descriptor.

Both extractors are exposed twice: as plain functions over single images and as
sklearn-style transformers (`fit`/`transform`/`get_params`) over sequences of
images, so they drop into ordinary pipelines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from lumpkit.errors import ValidationError

KIND_HIST_PREFIX = "rgb-hist"
KIND_GIST_PREFIX = "gist"

# Weights and magnitudes for the pinned GIST stand-in. The descriptor is
# self-consistent by contract, not a replica of any external GIST tool.
_GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class Descriptor:
    """Fixed-length real vector with a kind tag (e.g. rgb-hist-512, gist-512)."""

    kind: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValidationError("descriptor values must be a 1-D vector")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]


def _check_image(image) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValidationError(f"expected an (H, W, 3) RGB raster, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError("zero-pixel image")
    return arr


def rgb_histogram(image, bins_per_channel: int = 8, marginal: bool = False) -> Descriptor:
    """Joint 3-D RGB histogram with equal-width bins over [0, 256).

    Pixel value v maps to bin floor(v * bins / 256); cells are flattened
    R-major, G-middle, B-minor. Values are raw counts summing to the pixel
    count. With `marginal=True` the three per-channel histograms are
    concatenated instead (the 24-cell sensitivity variant at 8 bins).
    """
    if bins_per_channel < 1:
        raise ValidationError("bins_per_channel must be >= 1")
    arr = _check_image(image).astype(np.int64)
    b = int(bins_per_channel)
    idx = (arr * b) // 256
    if marginal:
        counts = np.concatenate([np.bincount(idx[..., c].ravel(), minlength=b) for c in range(3)])
        kind = f"{KIND_HIST_PREFIX}-marginal-{3 * b}"
    else:
        codes = (idx[..., 0] * b + idx[..., 1]) * b + idx[..., 2]
        counts = np.bincount(codes.ravel(), minlength=b**3)
        kind = f"{KIND_HIST_PREFIX}-{b**3}"
    return Descriptor(kind, counts.astype(np.float64))


@dataclass(frozen=True)
class GistConfig:
    """Pinned parameters of the Gabor-bank descriptor.

    Grayscale 0.299R+0.587G+0.114B, bilinear resize to `image_size` square, the
    image mean subtracted (so constant images respond exactly zero despite the
    zero padding), complex Gabor filtering (zero-padded 'same' convolution,
    DC-free kernels), response magnitudes averaged over a `grid` x `grid` cell
    partition, flattened (scale, orientation, row, col) C-order, then
    L2-normalized (all-zero vectors stay zero). At the defaults: 4 scales x 8
    orientations x 16 cells = 512 values.
    """

    image_size: int = 64
    kernel_size: int = 15
    wavelengths: tuple[float, ...] = (4.0, 8.0, 16.0, 32.0)
    n_orientations: int = 8
    sigma_ratio: float = 0.56
    grid: int = 4
    min_input_size: int = 32

    @property
    def n_features(self) -> int:
        return len(self.wavelengths) * self.n_orientations * self.grid**2

    @property
    def kind(self) -> str:
        return f"{KIND_GIST_PREFIX}-{self.n_features}"


def _gabor_bank(config: GistConfig) -> np.ndarray:
    """Complex kernels, (n_filters, k, k); real part mean-subtracted so DC response is 0."""
    k = config.kernel_size
    half = k // 2
    ys, xs = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)
    kernels = []
    for lam in config.wavelengths:
        sigma = config.sigma_ratio * lam
        envelope = np.exp(-(xs**2 + ys**2) / (2.0 * sigma**2))
        for o in range(config.n_orientations):
            theta = np.pi * o / config.n_orientations
            xr = xs * np.cos(theta) + ys * np.sin(theta)
            even = envelope * np.cos(2.0 * np.pi * xr / lam)
            odd = envelope * np.sin(2.0 * np.pi * xr / lam)
            even = even - even.mean()
            kernels.append(even + 1j * odd)
    return np.stack(kernels)


def _to_gray(image) -> np.ndarray:
    arr = _check_image(image).astype(np.float64)
    return arr @ _GRAY_WEIGHTS


def _resize_bilinear(gray: np.ndarray, size: int) -> np.ndarray:
    """Bilinear resample to size x size with half-pixel-centred sampling."""
    h, w = gray.shape
    out = np.empty((size, size), dtype=np.float64)

    def axis_coords(n_in: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pos = (np.arange(size) + 0.5) * (n_in / size) - 0.5
        pos = np.clip(pos, 0.0, n_in - 1.0)
        lo = np.floor(pos).astype(np.int64)
        lo = np.minimum(lo, n_in - 2) if n_in > 1 else np.zeros_like(lo)
        frac = pos - lo
        return lo, lo + 1 if n_in > 1 else lo, frac

    r0, r1, fr = axis_coords(h)
    c0, c1, fc = axis_coords(w)
    top = gray[r0][:, c0] * (1 - fc) + gray[r0][:, c1] * fc
    bot = gray[r1][:, c0] * (1 - fc) + gray[r1][:, c1] * fc
    out[:] = top * (1 - fr)[:, None] + bot * fr[:, None]
    return out


class _GistEngine:
    """Precomputed kernel spectra; batched zero-padded convolution via FFT.

    Filtering runs in single precision (the descriptor is renormalized in
    float64 afterwards); the summed responses are far above float32 noise.
    """

    def __init__(self, config: GistConfig):
        from scipy.fft import fft2, next_fast_len

        self.config = config
        size, k = config.image_size, config.kernel_size
        self.pad = next_fast_len(size + k - 1)
        self.kernel_fft = fft2(
            _gabor_bank(config).astype(np.complex64), s=(self.pad, self.pad), axes=(-2, -1)
        )
        self.crop = k // 2

    def magnitudes(self, grays: np.ndarray) -> np.ndarray:
        """(B, size, size) grayscale batch -> (B, n_filters, size, size) magnitudes."""
        from scipy.fft import fft2, ifft2

        cfg = self.config
        grays = grays - grays.mean(axis=(-2, -1), keepdims=True)
        img_fft = fft2(grays.astype(np.float32), s=(self.pad, self.pad), axes=(-2, -1))
        resp = ifft2(img_fft[:, None, :, :] * self.kernel_fft[None, :, :, :], axes=(-2, -1))
        lo = self.crop
        hi = lo + cfg.image_size
        return np.abs(resp[:, :, lo:hi, lo:hi])

    def descriptors(self, grays: np.ndarray) -> np.ndarray:
        cfg = self.config
        mags = self.magnitudes(grays)
        b, f, s, _ = mags.shape
        cell = s // cfg.grid
        blocks = mags.reshape(b, f, cfg.grid, cell, cfg.grid, cell).mean(
            axis=(3, 5), dtype=np.float64
        )
        vecs = blocks.reshape(b, f * cfg.grid**2)
        norms = np.linalg.norm(vecs, axis=1, keepdims=True)
        safe = norms > 1e-9
        return np.where(safe, vecs / np.where(safe, norms, 1.0), 0.0)


_engine_cache: dict[GistConfig, _GistEngine] = {}


def _engine_for(config: GistConfig) -> _GistEngine:
    eng = _engine_cache.get(config)
    if eng is None:
        eng = _GistEngine(config)
        _engine_cache[config] = eng
    return eng


def gist_descriptor(image, config: GistConfig = GistConfig()) -> Descriptor:
    """Gabor-bank scene descriptor of an RGB image (see GistConfig for the recipe)."""
    arr = _check_image(image)
    if min(arr.shape[0], arr.shape[1]) < config.min_input_size:
        raise ValidationError(
            f"image {arr.shape[1]}x{arr.shape[0]} below minimum {config.min_input_size}"
        )
    gray = _resize_bilinear(_to_gray(arr), config.image_size)
    vec = _engine_for(config).descriptors(gray[None])[0]
    return Descriptor(config.kind, vec)


class RGBHistogramExtractor(BaseEstimator, TransformerMixin):
    """Transformer mapping a sequence of RGB rasters to histogram rows."""

    def __init__(self, bins_per_channel: int = 8, marginal: bool = False):
        self.bins_per_channel = bins_per_channel
        self.marginal = marginal

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        rows = [rgb_histogram(img, self.bins_per_channel, self.marginal).values for img in X]
        if not rows:
            return np.empty((0, 0))
        return np.stack(rows)

    @property
    def kind(self) -> str:
        b = self.bins_per_channel
        return f"{KIND_HIST_PREFIX}-marginal-{3 * b}" if self.marginal else f"{KIND_HIST_PREFIX}-{b**3}"


class GistExtractor(BaseEstimator, TransformerMixin):
    """Transformer mapping RGB rasters to GIST rows; batches the FFT work."""

    def __init__(
        self,
        image_size: int = 64,
        kernel_size: int = 15,
        wavelengths: tuple[float, ...] = (4.0, 8.0, 16.0, 32.0),
        n_orientations: int = 8,
        sigma_ratio: float = 0.56,
        grid: int = 4,
        batch_size: int = 32,
    ):
        self.image_size = image_size
        self.kernel_size = kernel_size
        self.wavelengths = wavelengths
        self.n_orientations = n_orientations
        self.sigma_ratio = sigma_ratio
        self.grid = grid
        self.batch_size = batch_size

    def _config(self) -> GistConfig:
        return GistConfig(
            image_size=self.image_size,
            kernel_size=self.kernel_size,
            wavelengths=tuple(self.wavelengths),
            n_orientations=self.n_orientations,
            sigma_ratio=self.sigma_ratio,
            grid=self.grid,
        )

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        config = self._config()
        engine = _engine_for(config)
        images = list(X)
        out = np.empty((len(images), config.n_features), dtype=np.float64)
        for start in range(0, len(images), self.batch_size):
            chunk = images[start : start + self.batch_size]
            grays = np.stack(
                [
                    _resize_bilinear(_to_gray(_check_min_size(img, config)), config.image_size)
                    for img in chunk
                ]
            )
            out[start : start + len(chunk)] = engine.descriptors(grays)
        return out

    @property
    def kind(self) -> str:
        return self._config().kind


def _check_min_size(image, config: GistConfig):
    arr = _check_image(image)
    if min(arr.shape[0], arr.shape[1]) < config.min_input_size:
        raise ValidationError(
            f"image {arr.shape[1]}x{arr.shape[0]} below minimum {config.min_input_size}"
        )
    return arr
