"""Exact simulation of the 2-D field and supremum extraction over regions.

Sampling exploits separability: the grid covariance is a Kronecker product
C1 (x) C2 of one-dimensional stationary correlation matrices, so a sample is
L1 @ Z @ L2.T with per-axis factors applied to an i.i.d. Gaussian matrix.
Factors are Cholesky for moderate axis sizes and circulant embedding with
FFT beyond that.  Two derived constructions are provided: a field made of
independent copies on unit blocks, and the strongly dependent mixture that
adds one shared Gaussian on top of the block field.

Regions (half-open rectangles, closed balls, finite disjoint unions of
rectangles) are resolved to grid index sets; suprema are grid-restricted
maxima.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np
from scipy.fft import next_fast_len
from scipy.linalg import cholesky as _cholesky
from scipy.linalg import toeplitz

from .corr_models import CorrelationModel
from .errors import (
    AlignmentError,
    EmbeddingFailure,
    EmptyRegionError,
    InvalidMixError,
    MemoryCapExceeded,
)
from .seeding import stream

__all__ = [
    "DEFAULT_POINT_CAP",
    "Construction",
    "GridSpec",
    "FieldSample",
    "Rect",
    "Ball",
    "SimpleSet",
    "StationarySampler",
    "BlockSampler",
    "sample_stationary",
    "sample_block_independent",
    "mix_strong",
    "region_mask",
    "region_indices",
    "sup_over",
    "make_eps_net_ball",
    "circulant_eigenvalues",
    "validate_embedding",
    "write_field",
    "read_field",
]

DEFAULT_POINT_CAP = 1 << 24  # 16.7M grid points
_MAX_CHOLESKY_N = 2048
_EMBED_REL_TOL = 1e-8
_MAGIC = b"GXFLD001"
_HEADER = struct.Struct("<8sIIddq")


class Construction(enum.Enum):
    STATIONARY = "stationary"
    BLOCK_INDEPENDENT = "block_independent"
    STRONG_MIXTURE = "strong_mixture"


@dataclass(frozen=True)
class GridSpec:
    """Regular grid with origin (0, 0), spacings (q1, q2) and shape (n1, n2)."""

    q1: float
    q2: float
    n1: int
    n2: int

    def __post_init__(self):
        if self.q1 <= 0.0 or self.q2 <= 0.0:
            raise ValueError("grid spacings must be positive")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("grid must have at least one point per axis")

    @property
    def n_points(self) -> int:
        return self.n1 * self.n2

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        return np.arange(self.n1) * self.q1, np.arange(self.n2) * self.q2


@dataclass(frozen=True)
class FieldSample:
    """One realization on a grid, with the seed that produced it."""

    grid: GridSpec
    values: np.ndarray
    seed: int
    construction: Optional[Construction]


def _check_cap(n_points: int, point_cap: int) -> None:
    if n_points > point_cap:
        raise MemoryCapExceeded(
            f"grid has {n_points} points, cap is {point_cap}"
        )


def _axis_correlation(model: CorrelationModel, q: float, n: int, axis: int) -> np.ndarray:
    lags = np.arange(n) * q
    alpha = model.alpha1 if axis == 1 else model.alpha2
    return np.exp(-lags ** alpha)


def _axis_cholesky(corr_row: np.ndarray) -> np.ndarray:
    mat = toeplitz(corr_row)
    try:
        return _cholesky(mat, lower=True)
    except np.linalg.LinAlgError:
        # near-singular for very fine grids: clip the spectrum
        w, v = np.linalg.eigh(mat)
        w = np.clip(w, 0.0, None)
        return v * np.sqrt(w)


def circulant_eigenvalues(model: CorrelationModel, q: float, n: int, axis: int) -> np.ndarray:
    """Eigenvalues of the circulant extension of the axis correlation.

    The extension length is padded to an FFT-friendly size; the correlation
    is evaluated out to half the extension, which only improves positive
    definiteness for decaying correlations.
    """
    M = next_fast_len(max(2 * (n - 1), 2))
    k = np.arange(M)
    lag = np.minimum(k, M - k) * q
    alpha = model.alpha1 if axis == 1 else model.alpha2
    row = np.exp(-lag ** alpha)
    return np.fft.fft(row).real


def validate_embedding(eigenvalues: np.ndarray, rel_tol: float = _EMBED_REL_TOL) -> np.ndarray:
    """Clip small negative circulant eigenvalues; fail on material ones."""
    top = float(eigenvalues.max())
    low = float(eigenvalues.min())
    if low < -rel_tol * top:
        raise EmbeddingFailure(
            f"circulant eigenvalue {low:.3e} below -{rel_tol:.0e} * {top:.3e}"
        )
    return np.clip(eigenvalues, 0.0, None)


class StationarySampler:
    """Reusable exact sampler for a stationary separable field on a grid."""

    def __init__(self, model: CorrelationModel, grid: GridSpec,
                 point_cap: int = DEFAULT_POINT_CAP,
                 max_cholesky: int = _MAX_CHOLESKY_N):
        _check_cap(grid.n_points, point_cap)
        self.model = model
        self.grid = grid
        self._use_fft = grid.n1 > max_cholesky or grid.n2 > max_cholesky
        if self._use_fft:
            lam1 = validate_embedding(circulant_eigenvalues(model, grid.q1, grid.n1, 1))
            lam2 = validate_embedding(circulant_eigenvalues(model, grid.q2, grid.n2, 2))
            self._lam_scaled = np.sqrt(
                np.outer(lam1, lam2) / (lam1.size * lam2.size)
            )
        else:
            self._L1 = _axis_cholesky(_axis_correlation(model, grid.q1, grid.n1, 1))
            self._L2 = _axis_cholesky(_axis_correlation(model, grid.q2, grid.n2, 2))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if self._use_fft:
            M1, M2 = self._lam_scaled.shape
            z = rng.standard_normal((2, M1, M2))
            spec = self._lam_scaled * (z[0] + 1j * z[1])
            return np.fft.fft2(spec).real[: self.grid.n1, : self.grid.n2].copy()
        z = rng.standard_normal((self.grid.n1, self.grid.n2))
        return self._L1 @ z @ self._L2.T

    def sample_batch(self, rngs: Sequence[np.random.Generator]) -> np.ndarray:
        """Stack of independent samples, one per generator (replicate order)."""
        if self._use_fft:
            return np.stack([self.sample(r) for r in rngs])
        n1, n2 = self.grid.n1, self.grid.n2
        z = np.empty((len(rngs), n1, n2))
        for b, r in enumerate(rngs):
            z[b] = r.standard_normal((n1, n2))
        return np.einsum("ij,bjk,lk->bil", self._L1, z, self._L2, optimize=True)


def _block_points(q: float) -> int:
    inv = 1.0 / q
    p = round(inv)
    if p < 1 or abs(inv - p) > 1e-9:
        raise AlignmentError(f"1/q = {inv} is not an integer; unit blocks misaligned")
    return p


class BlockSampler:
    """Field equal to an independent stationary copy on each unit square.

    Grid spacings must divide 1 exactly so blocks align with grid cells;
    block (j, k) covers the half-open square [j, j+1) x [k, k+1).
    """

    def __init__(self, model: CorrelationModel, grid: GridSpec,
                 point_cap: int = DEFAULT_POINT_CAP):
        _check_cap(grid.n_points, point_cap)
        self.model = model
        self.grid = grid
        self.p1 = _block_points(grid.q1)
        self.p2 = _block_points(grid.q2)
        self.nb1 = -(-grid.n1 // self.p1)
        self.nb2 = -(-grid.n2 // self.p2)
        _check_cap(self.nb1 * self.p1 * self.nb2 * self.p2, point_cap)
        self._Lb1 = _axis_cholesky(_axis_correlation(model, grid.q1, self.p1, 1))
        self._Lb2 = _axis_cholesky(_axis_correlation(model, grid.q2, self.p2, 2))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        nb1, nb2, p1, p2 = self.nb1, self.nb2, self.p1, self.p2
        z = rng.standard_normal((nb1 * nb2, p1, p2))
        blocks = np.einsum("ij,bjk,lk->bil", self._Lb1, z, self._Lb2, optimize=True)
        full = (
            blocks.reshape(nb1, nb2, p1, p2)
            .transpose(0, 2, 1, 3)
            .reshape(nb1 * p1, nb2 * p2)
        )
        return full[: self.grid.n1, : self.grid.n2].copy()


def sample_stationary(model: CorrelationModel, grid: GridSpec, seed: int,
                      point_cap: int = DEFAULT_POINT_CAP,
                      max_cholesky: int = _MAX_CHOLESKY_N) -> FieldSample:
    """Exact-in-distribution stationary sample; deterministic in (model, grid, seed)."""
    sampler = StationarySampler(model, grid, point_cap, max_cholesky)
    values = sampler.sample(stream(seed))
    return FieldSample(grid=grid, values=values, seed=int(seed),
                       construction=Construction.STATIONARY)


def sample_block_independent(model: CorrelationModel, grid: GridSpec, seed: int,
                             point_cap: int = DEFAULT_POINT_CAP) -> FieldSample:
    """Independent stationary copies on unit blocks; zero correlation across blocks."""
    sampler = BlockSampler(model, grid, point_cap)
    values = sampler.sample(stream(seed))
    return FieldSample(grid=grid, values=values, seed=int(seed),
                       construction=Construction.BLOCK_INDEPENDENT)


def mix_weight(r: float, T: float) -> float:
    """Mixture weight r / log(T); requires T > 1 and weight < 1."""
    if r < 0.0:
        raise InvalidMixError(f"dependence level r must be >= 0, got {r}")
    if T <= 1.0:
        raise InvalidMixError(f"mixture horizon T must exceed 1, got {T}")
    w = r / math.log(T)
    if w >= 1.0:
        raise InvalidMixError(f"r/log(T) = {w:.4g} must be < 1")
    return w


def mix_strong(eta: FieldSample, r: float, T: float, w_seed: int) -> FieldSample:
    """Strong-dependence mixture sqrt(1 - r/logT) * eta + sqrt(r/logT) * W.

    W is a single shared standard normal, so marginals stay N(0,1) while all
    points at distance > 1 pick up correlation r/log(T).  With r = 0 the
    values are returned unchanged.
    """
    if eta.construction is not Construction.BLOCK_INDEPENDENT:
        raise ValueError("mix_strong expects a block-independent base field")
    w = mix_weight(r, T)
    if w == 0.0:
        return replace(eta, construction=Construction.STRONG_MIXTURE)
    shared = float(stream(w_seed).standard_normal())
    values = math.sqrt(1.0 - w) * eta.values + math.sqrt(w) * shared
    return FieldSample(grid=eta.grid, values=values, seed=eta.seed,
                       construction=Construction.STRONG_MIXTURE)


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class Rect:
    """Half-open rectangle [a1, b1) x [a2, b2)."""

    a1: float
    b1: float
    a2: float
    b2: float

    def __post_init__(self):
        if not (self.b1 > self.a1 and self.b2 > self.a2):
            raise ValueError("rectangle sides must have positive length")

    @property
    def measure(self) -> float:
        return (self.b1 - self.a1) * (self.b2 - self.a2)


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball."""

    cx: float
    cy: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("ball radius must be positive")


@dataclass(frozen=True)
class SimpleSet:
    """Finite union of pairwise disjoint half-open rectangles."""

    rects: tuple = field(default_factory=tuple)

    def __post_init__(self):
        rects = tuple(self.rects)
        object.__setattr__(self, "rects", rects)
        k = len(rects)
        if k > 1:
            a1 = np.array([r.a1 for r in rects]); b1 = np.array([r.b1 for r in rects])
            a2 = np.array([r.a2 for r in rects]); b2 = np.array([r.b2 for r in rects])
            ov1 = (a1[:, None] < b1[None, :]) & (a1[None, :] < b1[:, None])
            ov2 = (a2[:, None] < b2[None, :]) & (a2[None, :] < b2[:, None])
            overlap = ov1 & ov2
            np.fill_diagonal(overlap, False)
            if overlap.any():
                i, j = np.argwhere(overlap)[0]
                raise ValueError(f"rectangles {i} and {j} overlap")

    @property
    def measure(self) -> float:
        return float(sum(r.measure for r in self.rects))

    def translate(self, dx: float, dy: float) -> "SimpleSet":
        return SimpleSet(tuple(
            Rect(r.a1 + dx, r.b1 + dx, r.a2 + dy, r.b2 + dy) for r in self.rects
        ))

    def scale(self, sx: float, sy: float) -> "SimpleSet":
        if sx <= 0 or sy <= 0:
            raise ValueError("scale factors must be positive")
        return SimpleSet(tuple(
            Rect(r.a1 * sx, r.b1 * sx, r.a2 * sy, r.b2 * sy) for r in self.rects
        ))


Region = Union[Rect, Ball, SimpleSet]


def region_mask(grid: GridSpec, region: Region) -> np.ndarray:
    """Boolean (n1, n2) mask of grid points inside the region."""
    xs, ys = grid.coords()
    if isinstance(region, Rect):
        mask = np.zeros((grid.n1, grid.n2), dtype=bool)
        i0 = int(np.searchsorted(xs, region.a1, side="left"))
        i1 = int(np.searchsorted(xs, region.b1, side="left"))
        j0 = int(np.searchsorted(ys, region.a2, side="left"))
        j1 = int(np.searchsorted(ys, region.b2, side="left"))
        mask[i0:i1, j0:j1] = True
        return mask
    if isinstance(region, Ball):
        dx2 = (xs - region.cx) ** 2
        dy2 = (ys - region.cy) ** 2
        return dx2[:, None] + dy2[None, :] <= region.radius ** 2
    if isinstance(region, SimpleSet):
        mask = np.zeros((grid.n1, grid.n2), dtype=bool)
        for r in region.rects:
            mask |= region_mask(grid, r)
        return mask
    raise TypeError(f"unsupported region type {type(region)!r}")


def region_indices(grid: GridSpec, region: Region) -> np.ndarray:
    """Flat indices of grid points inside the region; error if none."""
    idx = np.flatnonzero(region_mask(grid, region))
    if idx.size == 0:
        raise EmptyRegionError(f"no grid point falls inside {region!r}")
    return idx


def sup_over(sample: FieldSample, region: Region) -> float:
    """Maximum of grid values whose coordinates lie in the region."""
    idx = region_indices(sample.grid, region)
    return float(sample.values.ravel()[idx].max())


def make_eps_net_ball(radius: float, eps: float,
                      center: tuple[float, float] = (0.0, 0.0)
                      ) -> tuple[SimpleSet, SimpleSet]:
    """Pixelate a closed disk by axis-aligned squares of side eps.

    Returns (inner, outer): the union of squares fully inside the disk and
    the union of squares whose closure meets it.  Both are merged into one
    rectangle per pixel row (the disk is convex), so the rectangle count is
    O(radius / eps), not O((radius / eps)**2).  ``eps >= radius`` is allowed
    and may give an empty inner set.
    """
    if radius <= 0.0 or eps <= 0.0:
        raise ValueError("radius and eps must be positive")
    r2 = radius * radius
    j_lo = math.floor(-radius / eps) - 1
    j_hi = math.ceil(radius / eps) + 1
    inner_rects = []
    outer_rects = []
    for j in range(j_lo, j_hi + 1):
        y0, y1 = j * eps, (j + 1) * eps
        worst_y = max(abs(y0), abs(y1))
        best_y = 0.0 if y0 < 0.0 < y1 else min(abs(y0), abs(y1))
        # squares fully inside: worst corner strictly within the disk
        gap_in = r2 - worst_y * worst_y
        if gap_in > 0.0:
            x_lim = math.sqrt(gap_in)
            i_min = math.ceil(-x_lim / eps)
            i_max = math.floor(x_lim / eps) - 1
            if i_max >= i_min:
                inner_rects.append(Rect(i_min * eps, (i_max + 1) * eps, y0, y1))
        # squares meeting the disk: nearest corner within the disk
        gap_out = r2 - best_y * best_y
        if gap_out >= 0.0:
            x_lim = math.sqrt(gap_out)
            i_min = math.ceil(-x_lim / eps - 1.0)
            i_max = math.floor(x_lim / eps)
            if i_max >= i_min:
                outer_rects.append(Rect(i_min * eps, (i_max + 1) * eps, y0, y1))
    cx, cy = center
    inner = SimpleSet(tuple(inner_rects)).translate(cx, cy)
    outer = SimpleSet(tuple(outer_rects)).translate(cx, cy)
    return inner, outer


# ---------------------------------------------------------------------------
# binary field format


def write_field(sample: FieldSample, path) -> None:
    """Dump a sample: magic, n1, n2, q1, q2, seed header then row-major float64 LE."""
    g = sample.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, g.n1, g.n2, g.q1, g.q2, sample.seed))
        fh.write(np.ascontiguousarray(sample.values, dtype="<f8").tobytes())


def read_field(path) -> FieldSample:
    """Read a sample written by :func:`write_field` (construction is not stored)."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        magic, n1, n2, q1, q2, seed = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}; not a field file")
        raw = fh.read(n1 * n2 * 8)
    values = np.frombuffer(raw, dtype="<f8").reshape(n1, n2).astype(float)
    grid = GridSpec(q1=q1, q2=q2, n1=n1, n2=n2)
    return FieldSample(grid=grid, values=values, seed=seed, construction=None)
