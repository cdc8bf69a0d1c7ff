"""Discrete estimators of sequence, Lebesgue, Besov, local Hardy, bmo and
Wiener amalgam (quasi-)norms for functions sampled on a torus grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, CoverageError, ValidationError
from .exponents import LebesgueExponent, as_fraction, parse_exponent
from .grid import GridFunction, SpectrumSampler, active_boxes, spectral_support
from .partitions import UniformWindow, WindowFamily, make_uniform_window

COVERAGE_TOL = 1e-12


def _exp(p, field="p") -> LebesgueExponent:
    return parse_exponent(p, field)


def lq_norm(a, q) -> float:
    """(sum |a_j|^q)^(1/q), or max |a_j| for q = inf.

    Entries are rescaled by their maximum first, which makes the value exactly
    non-increasing in q (every scaled term is <= 1) and avoids overflow.
    """
    q = _exp(q, "q")
    a = np.abs(np.asarray(a, dtype=complex).ravel())
    if a.size == 0:
        return 0.0
    top = a.max()
    if top == 0 or not math.isfinite(top):
        return float(top)
    if q.is_inf:
        return float(top)
    qq = float(q)
    if qq == 1.0:
        return float(top * np.sum(a / top))
    return float(top * np.sum((a / top) ** qq) ** (1.0 / qq))


def _lp_values(values: np.ndarray, p: LebesgueExponent, vol: float) -> float:
    a = np.abs(values)
    if p.is_inf:
        return float(a.max(initial=0.0))
    top = a.max(initial=0.0)
    if top == 0:
        return 0.0
    pp = float(p)
    return float(top * (vol * np.sum((a / top) ** pp)) ** (1.0 / pp))


def lp_norm(f: GridFunction, p) -> float:
    """Riemann sum (cell_volume * sum |f|^p)^(1/p); grid maximum for p = inf."""
    if f.domain != "space":
        raise ContractError("lp_norm expects a space-domain function", "f")
    return _lp_values(f.samples, _exp(p), f.spec.dx**f.spec.n)


# --- local Hardy -----------------------------------------------------------

def _gaussian_hat(xi: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * np.sum(xi * xi, axis=-1))


@dataclass(frozen=True)
class MaximalConfig:
    """Scales and mollifier of the discrete grand maximal function.

    ``mollifier`` is given through its Fourier transform; its value at 0 is
    the integral of the mollifier. ``include_limit`` adds the t -> 0 limit
    |f| itself to the supremum.
    """

    t_levels: tuple[float, ...] = tuple(2.0**-j for j in range(11))
    mollifier: Callable[[np.ndarray], np.ndarray] = _gaussian_hat
    include_limit: bool = True

    def __post_init__(self):
        t = np.asarray(self.t_levels, dtype=float)
        if t.size == 0 or np.any(t <= 0) or np.any(t >= 1 + 1e-15):
            raise ValidationError("t_levels must lie in (0, 1]", "t_levels")
        if np.any(np.diff(t) >= 0):
            raise ValidationError("t_levels must be strictly decreasing", "t_levels")
        if abs(complex(np.asarray(self.mollifier(np.zeros((1, 1))))[0])) == 0:
            raise ValidationError("mollifier must have nonzero integral", "mollifier")


def maximal_function(f: GridFunction, cfg: MaximalConfig | None = None) -> np.ndarray:
    cfg = cfg or MaximalConfig()
    vals = f.values()
    F = np.fft.fftn(vals)
    xi = f.spec.frequencies()
    out = np.abs(vals) if cfg.include_limit else np.zeros(f.spec.shape)
    for t in cfg.t_levels:
        g = np.fft.ifftn(F * cfg.mollifier(t * xi))
        out = np.maximum(out, np.abs(g))
    return out


def local_hardy_norm(f: GridFunction, p, cfg: MaximalConfig | None = None) -> float:
    """L^p norm of max over t of |phi_t * f| (convolutions through the spectrum)."""
    p = _exp(p)
    if p.is_inf:
        raise ValidationError("h^p is not defined for p = inf; use bmo_norm", "p")
    if f.domain != "space":
        raise ContractError("local_hardy_norm expects a space-domain function", "f")
    return _lp_values(maximal_function(f, cfg), p, f.spec.dx**f.spec.n)


# --- Besov -----------------------------------------------------------------

def check_coverage(f: GridFunction, family: WindowFamily, tol: float = COVERAGE_TOL):
    """Raise CoverageError if f has spectral mass where the windows do not sum to 1."""
    mask = spectral_support(f)
    if not mask.any():
        return
    xi = f.spec.frequencies()[mask]
    total = family.total(xi)
    bad = np.abs(total - 1.0) > tol
    if bad.any():
        where = xi[bad][np.argmax(np.linalg.norm(xi[bad], axis=-1))]
        raise CoverageError(
            f"spectral mass at |xi|={np.linalg.norm(where):.4g} is not covered by "
            f"{family.kind} with K={family.K} (coverage radius {family.coverage})")


def besov_blocks(f: GridFunction, p, s, family: WindowFamily, block_norm: str = "lp",
                 cfg: MaximalConfig | None = None) -> list[float]:
    """Weighted block norms 2^{ks} ||psi_k(D) f|| for k = 0..K."""
    p = _exp(p)
    s = float(as_fraction(s, "s"))
    if block_norm not in ("lp", "hp"):
        raise ValidationError("block_norm must be 'lp' or 'hp'", "block_norm")
    if family.coverage is None:
        raise ValidationError(f"{family.kind} is not a partition of unity", "family")
    check_coverage(f, family)
    F = f.spectrum()
    xi = f.spec.frequencies()
    vol = f.spec.dx**f.spec.n
    out = []
    for k, w in enumerate(family.windows):
        block = GridFunction(f.spec, np.fft.ifftn(F * w(xi)) / vol)
        if block_norm == "hp" and not p.is_inf:
            v = local_hardy_norm(block, p, cfg)
        else:
            v = lp_norm(block, p)
        out.append(2.0 ** (k * s) * v)
    return out


def besov_norm(f: GridFunction, p, q, s, family: WindowFamily, block_norm: str = "lp",
               cfg: MaximalConfig | None = None) -> float:
    return lq_norm(besov_blocks(f, p, s, family, block_norm, cfg), q)


# --- bmo -------------------------------------------------------------------

def _dyadic_cube_stats(values: np.ndarray, n: int, cubes_per_axis: int):
    P = values.shape[0]
    w = P // cubes_per_axis
    shape = []
    for _ in range(n):
        shape += [cubes_per_axis, w]
    v = values.reshape(shape)
    axes = tuple(range(1, 2 * n, 2))
    mean = v.mean(axis=axes, keepdims=True)
    osc = np.abs(v - mean).mean(axis=axes)
    mabs = np.abs(v).mean(axis=axes)
    return osc, mabs


def bmo_norm(f: GridFunction) -> float:
    """sup over dyadic torus cubes of side <= 1 of the mean oscillation, plus
    sup over dyadic cubes of side >= 1 of the mean of |f|."""
    if f.domain != "space":
        raise ContractError("bmo_norm expects a space-domain function", "f")
    P, n = f.spec.points_per_dim, f.spec.n
    small, large = 0.0, 0.0
    c = 1
    while c <= P // 2:
        side = f.spec.period / c
        osc, mabs = _dyadic_cube_stats(f.samples, n, c)
        if side <= 1.0:
            small = max(small, float(osc.max()))
        if side >= 1.0:
            large = max(large, float(mabs.max()))
        c *= 2
    return small + large


# --- Wiener amalgam --------------------------------------------------------

def _box_pieces(f: GridFunction, kappa: UniformWindow, rtol: float = 1e-14):
    """Yield (mu, kappa(D - mu) f samples) over the active lattice points mu."""
    mus = active_boxes(f, kappa.support_box, rtol)
    F = f.spectrum()
    xi = f.spec.frequencies()
    vol = f.spec.dx**f.spec.n
    mask = spectral_support(f, rtol)
    idx = np.nonzero(mask)
    xi_act = xi[idx]
    F_act = F[idx]
    for mu in mus:
        w = kappa(xi_act - mu)
        G = np.zeros(f.spec.shape, dtype=complex)
        G[idx] = F_act * w
        yield mu, np.fft.ifftn(G) / vol


def wiener_amalgam_norm(f: GridFunction, p, q, s, kappa: UniformWindow | None = None) -> float:
    """|| || <mu>^s box_mu f(x) ||_{l^q_mu} ||_{L^p_x} over the active lattice points."""
    kappa = kappa or make_uniform_window("kappa_wiener")
    p, q = _exp(p), _exp(q, "q")
    s = float(as_fraction(s, "s"))
    if f.domain != "space":
        raise ContractError("wiener_amalgam_norm expects a space-domain function", "f")
    acc = np.zeros(f.spec.shape)
    qq = None if q.is_inf else float(q)
    # the accumulation order follows the lexicographic order of mu
    for mu, piece in _box_pieces(f, kappa):
        a = (1.0 + float(np.dot(mu, mu))) ** (s / 2) * np.abs(piece)
        if qq is None:
            acc = np.maximum(acc, a)
        else:
            acc += a**qq
    if qq is not None:
        acc = acc ** (1.0 / qq)
    return _lp_values(acc, p, f.spec.dx**f.spec.n)


def wiener_exponential_closed_form(nu, spec, p, q, s, kappa: UniformWindow | None = None) -> float:
    """Wiener amalgam norm of exp(i nu.x) from the box values kappa(nu - mu)."""
    kappa = kappa or make_uniform_window("kappa_wiener")
    p, q = _exp(p), _exp(q, "q")
    s = float(as_fraction(s, "s"))
    nu = np.asarray(nu, dtype=float).reshape(spec.n)
    r = int(math.ceil(kappa.support_box)) + 1
    axes = [np.arange(math.floor(v) - r, math.ceil(v) + r + 1) for v in nu]
    mus = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, spec.n)
    vals = kappa(nu - mus) * (1 + np.sum(mus * mus, axis=-1)) ** (s / 2)
    vol = spec.period**spec.n
    inner = lq_norm(vals, q)
    return inner if p.is_inf else inner * vol ** float(p.inv)


# --- requests and embeddings -----------------------------------------------

SPACES = ("lq", "lp", "besov", "besov_hp_variant", "local_hardy", "bmo", "wiener_amalgam")


@dataclass(frozen=True)
class NormRequest:
    space: str
    p: object = None
    q: object = None
    s: object = 0
    family: WindowFamily | None = None
    kappa: UniformWindow | None = None
    maximal: MaximalConfig | None = None

    def __post_init__(self):
        if self.space not in SPACES:
            raise ValidationError(f"unknown space {self.space!r}", "space")
        need_p = self.space in ("lp", "besov", "besov_hp_variant", "local_hardy", "wiener_amalgam")
        need_q = self.space in ("lq", "besov", "besov_hp_variant", "wiener_amalgam")
        if need_p and self.p is None:
            raise ValidationError(f"{self.space} needs p", "p")
        if need_q and self.q is None:
            raise ValidationError(f"{self.space} needs q", "q")
        if self.space in ("besov", "besov_hp_variant") and self.family is None:
            raise ValidationError(f"{self.space} needs a window family", "family")

    def label(self) -> str:
        return f"{self.space}(p={self.p}, q={self.q}, s={self.s})"


def evaluate_norm(req: NormRequest, f) -> float:
    if req.space == "lq":
        return lq_norm(f, req.q)
    if req.space == "lp":
        return lp_norm(f, req.p)
    if req.space == "besov":
        return besov_norm(f, req.p, req.q, req.s, req.family, "lp", req.maximal)
    if req.space == "besov_hp_variant":
        return besov_norm(f, req.p, req.q, req.s, req.family, "hp", req.maximal)
    if req.space == "local_hardy":
        return local_hardy_norm(f, req.p, req.maximal)
    if req.space == "bmo":
        return bmo_norm(f)
    return wiener_amalgam_norm(f, req.p, req.q, req.s, req.kappa)


@dataclass
class EmbeddingRatio:
    max_ratio: float
    arg_max: int | None
    ratios: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


def embedding_ratio(fs: Sequence, source: NormRequest, target: NormRequest,
                    zero_tol: float = 1e-14) -> EmbeddingRatio:
    """max over fs of ||f||_target / ||f||_source; members with a zero source norm are skipped."""
    ratios, skipped = [], []
    best, arg = -math.inf, None
    for i, f in enumerate(fs):
        den = evaluate_norm(source, f)
        if den <= zero_tol:
            skipped.append(i)
            ratios.append(math.nan)
            continue
        r = evaluate_norm(target, f) / den
        ratios.append(r)
        if r > best:
            best, arg = r, i
    return EmbeddingRatio(best if arg is not None else math.nan, arg, ratios, skipped)
