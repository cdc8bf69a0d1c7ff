"""Periodic sampling grids, Fourier transforms and Fourier multipliers.

Functions on R^n are represented by samples on the torus [0, 2*pi*T)^n with
P points per axis. Spectral samples live on the lattice (1/T) Z^n restricted
to [-P/2, P/2) / T. With dx = 2*pi*T / P the forward transform

    F(xi_k) = dx^n * sum_j f(x_j) exp(-i x_j . xi_k)

approximates the continuous transform  int f(x) exp(-i x.xi) dx  and the
inverse is the corresponding Fourier series, so that
f = ifft(F) / dx^n exactly.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import ContractError, ValidationError

Domain = Literal["space", "frequency"]

MAX_POINTS = {1: 2**20, 2: 2**10, 3: 2**7}


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on the torus of period 2*pi*scale per axis."""

    n: int = 1
    points_per_dim: int = 2**14
    scale: float = 1.0

    def __post_init__(self):
        if self.n not in MAX_POINTS:
            raise ContractError(f"dimension n must be 1, 2 or 3, got {self.n}", "n")
        P = self.points_per_dim
        if P < 4 or P & (P - 1):
            raise ContractError(
                f"points_per_dim must be a power of two >= 4, got {P}", "points_per_dim")
        if P > MAX_POINTS[self.n]:
            raise ContractError(
                f"points_per_dim {P} too large for n={self.n} (max {MAX_POINTS[self.n]})",
                "points_per_dim")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ContractError("scale must be positive", "scale")

    @property
    def period(self) -> float:
        return 2 * math.pi * self.scale

    @property
    def dx(self) -> float:
        return self.period / self.points_per_dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.n

    @property
    def size(self) -> int:
        return self.points_per_dim**self.n

    @property
    def nyquist(self) -> float:
        """Largest positive frequency represented exactly (the bin -P/2 is excluded)."""
        return (self.points_per_dim // 2 - 1) / self.scale

    def axis_points(self) -> np.ndarray:
        return np.arange(self.points_per_dim) * self.dx

    def axis_frequencies(self) -> np.ndarray:
        P = self.points_per_dim
        return np.fft.fftfreq(P, d=1.0 / P) / self.scale

    def points(self) -> np.ndarray:
        """Sample points, shape ``(*shape, n)``."""
        return _mesh(self.axis_points(), self.n)

    def frequencies(self) -> np.ndarray:
        """Spectral sample points in FFT order, shape ``(*shape, n)``."""
        return _freq_mesh(self.n, self.points_per_dim, self.scale)

    def frequency_norms(self) -> np.ndarray:
        return np.linalg.norm(self.frequencies(), axis=-1)

    def frequency_index(self, xi) -> np.ndarray:
        """FFT index of the (lattice) frequency ``xi`` along each axis."""
        k = np.rint(np.asarray(xi, dtype=float) * self.scale).astype(np.int64)
        return np.mod(k, self.points_per_dim)

    def to_dict(self) -> dict:
        return {"n": self.n, "points_per_dim": self.points_per_dim, "scale": self.scale}


def _mesh(axis: np.ndarray, n: int) -> np.ndarray:
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack(grids, axis=-1)


@functools.lru_cache(maxsize=16)
def _freq_mesh(n: int, P: int, scale: float) -> np.ndarray:
    axis = np.fft.fftfreq(P, d=1.0 / P) / scale
    out = _mesh(axis, n)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function (``domain='space'``) or of its transform."""

    spec: GridSpec
    samples: np.ndarray
    domain: Domain = "space"

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.complex128, copy=True)
        if arr.shape != self.spec.shape:
            raise ContractError(
                f"samples have shape {arr.shape}, grid expects {self.spec.shape}", "samples")
        if self.domain not in ("space", "frequency"):
            raise ContractError(f"unknown domain {self.domain!r}", "domain")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_callable(cls, spec: GridSpec, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return cls(spec, fn(spec.points()))

    @classmethod
    def from_spectrum(cls, spec: GridSpec, values: np.ndarray) -> "GridFunction":
        """Space-domain function whose transform samples are ``values``."""
        return transform(cls(spec, values, "frequency"), "inverse")

    def spectrum(self) -> np.ndarray:
        """Transform samples (computing them if needed)."""
        if self.domain == "frequency":
            return self.samples
        return transform(self, "forward").samples

    def values(self) -> np.ndarray:
        """Space samples (computing them if needed)."""
        if self.domain == "space":
            return self.samples
        return transform(self, "inverse").samples

    def with_samples(self, samples: np.ndarray) -> "GridFunction":
        return GridFunction(self.spec, samples, self.domain)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self, other)
        return GridFunction(self.spec, self.values() + other.values())

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self, other)
        return GridFunction(self.spec, self.values() - other.values())

    def __mul__(self, c) -> "GridFunction":
        if isinstance(c, GridFunction):
            _same_grid(self, c)
            return GridFunction(self.spec, self.values() * c.values())
        return GridFunction(self.spec, self.samples * c, self.domain)

    __rmul__ = __mul__


def _same_grid(a: GridFunction, b: GridFunction):
    if a.spec != b.spec:
        raise ContractError("grid functions live on different grids", "spec")


def transform(f: GridFunction, direction: str) -> GridFunction:
    """Discrete forward/inverse transform normalised to approximate the integral transform."""
    vol = f.spec.dx**f.spec.n
    if direction == "forward":
        if f.domain != "space":
            raise ContractError("forward transform expects a space-domain function", "domain")
        return GridFunction(f.spec, np.fft.fftn(f.samples) * vol, "frequency")
    if direction == "inverse":
        if f.domain != "frequency":
            raise ContractError("inverse transform expects a frequency-domain function", "domain")
        return GridFunction(f.spec, np.fft.ifftn(f.samples) / vol, "space")
    raise ValidationError(f"direction must be 'forward' or 'inverse', got {direction!r}", "direction")


@dataclass(frozen=True)
class SpectrumSampler:
    """A function of the frequency variable, evaluated on arrays of shape ``(..., n)``.

    If ``support_radius`` is set the sampler is forced to vanish outside the
    closed Euclidean ball of that radius.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    support_radius: float | None = None
    name: str = ""

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.asarray(self.evaluator(xi))
        if self.support_radius is not None:
            r = np.linalg.norm(xi, axis=-1)
            out = np.where(r <= self.support_radius, out, 0.0)
        return out

    def on_grid(self, spec: GridSpec) -> np.ndarray:
        return self(spec.frequencies())


def apply_multiplier(m: Callable[[np.ndarray], np.ndarray], f: GridFunction) -> GridFunction:
    """Return m(D) f, the inverse transform of m * F(f)."""
    mult = np.asarray(m(f.spec.frequencies()))
    if mult.shape != f.spec.shape:
        raise ContractError("multiplier returned an array of the wrong shape", "m")
    if not np.all(np.isfinite(mult)):
        raise ValidationError("multiplier produced non-finite values", "m")
    if f.domain == "space":
        return GridFunction(f.spec, np.fft.ifftn(np.fft.fftn(f.samples) * mult))
    return GridFunction(f.spec, f.samples * mult, "frequency")


def band_project(k: int, family, f: GridFunction) -> GridFunction:
    """psi_k(D) f for the k-th window of a window family."""
    if not 0 <= k <= family.K:
        raise IndexError(f"band index {k} outside 0..{family.K}")
    return apply_multiplier(family[k], f)


def box_project(mu, kappa, f: GridFunction) -> GridFunction:
    """kappa(D - mu) f for a compactly supported window ``kappa``."""
    support = _support_box(kappa)
    if support is None:
        raise ContractError("box projection needs a compactly supported window", "kappa")
    mu = np.asarray(mu, dtype=float).reshape(f.spec.n)
    return apply_multiplier(lambda xi: kappa(xi - mu), f)


def _support_box(kappa) -> float | None:
    box = getattr(kappa, "support_box", None)
    if box is not None:
        return box
    return getattr(kappa, "support_radius", None)


def spectral_support(f: GridFunction, rtol: float = 1e-14) -> np.ndarray:
    """Boolean mask of spectral bins carrying non-negligible mass."""
    F = np.abs(f.spectrum())
    top = F.max() if F.size else 0.0
    if top == 0.0:
        return np.zeros(F.shape, dtype=bool)
    return F > rtol * top


def active_boxes(f: GridFunction, support_box: float, rtol: float = 1e-14) -> np.ndarray:
    """Integer lattice points mu whose open box mu + (-s, s)^n meets the spectrum of f.

    Returns an array of shape (K, n) in lexicographic order.
    """
    mask = spectral_support(f, rtol)
    xi = f.spec.frequencies()[mask]
    if xi.size == 0:
        return np.zeros((0, f.spec.n), dtype=np.int64)
    lo = np.floor(xi.min(axis=0) - support_box).astype(np.int64)
    hi = np.ceil(xi.max(axis=0) + support_box).astype(np.int64)
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    cand = _mesh_int(axes)
    keep = np.zeros(len(cand), dtype=bool)
    # a candidate is active when some active bin is strictly inside its box
    for start in range(0, len(cand), 256):
        block = cand[start:start + 256]
        d = np.abs(xi[None, :, :] - block[:, None, :]).max(axis=-1)
        keep[start:start + 256] = (d < support_box).any(axis=1)
    return cand[keep]


def _mesh_int(axes: list[np.ndarray]) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1).astype(np.int64)
