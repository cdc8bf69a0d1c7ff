"""Extremal constructions: Wainger-type oscillatory series, the lattice index
sets D_l, their weighted coefficient sums, and Rademacher sign sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractError, ValidationError
from .exponents import parse_exponent
from .grid import GridFunction, GridSpec
from .partitions import UniformWindow, make_uniform_window
from .symbols import bracket


# --- Wainger functions -----------------------------------------------------

def wainger_threshold(a: float, p, n: int) -> float:
    """b* = (1 - a)(n/2 - n/p) + n/2; the L^p norms stay bounded as eps -> 0 for b > b*."""
    p = parse_exponent(p)
    return (1.0 - a) * (n / 2 - n * float(p.inv)) + n / 2


@dataclass(frozen=True)
class WaingerParams:
    a: float
    b: float
    eps: float
    V_max: float
    p: object = "2"
    n: int = 1

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ContractError(f"a must lie in (0, 1), got {self.a}", "a")
        if not self.b > 0:
            raise ContractError(f"b must be positive, got {self.b}", "b")
        if self.eps < 0:
            raise ContractError(f"eps must be >= 0, got {self.eps}", "eps")
        if not self.V_max >= 1:
            raise ContractError("V_max must be at least 1", "V_max")
        parse_exponent(self.p)

    @property
    def threshold(self) -> float:
        return wainger_threshold(self.a, self.p, self.n)

    @property
    def above_threshold(self) -> bool:
        return self.b > self.threshold

    def with_eps(self, eps: float) -> "WaingerParams":
        return WaingerParams(self.a, self.b, eps, self.V_max, self.p, self.n)


def wainger_coefficients(params: WaingerParams) -> tuple[np.ndarray, np.ndarray]:
    """Lattice points 0 < |nu| <= V_max (lexicographic) and their coefficients
    exp(-eps|nu|) |nu|^-b exp(i |nu|^a)."""
    n = params.n
    R = int(math.floor(params.V_max))
    axis = np.arange(-R, R + 1)
    nus = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), -1).reshape(-1, n)
    r = np.linalg.norm(nus, axis=-1)
    keep = (r > 0) & (r <= params.V_max)
    nus, r = nus[keep], r[keep]
    coef = np.exp(-params.eps * r) * r ** (-params.b) * np.exp(1j * r**params.a)
    return nus, coef


def make_wainger(params: WaingerParams, spec: GridSpec, window: UniformWindow | None = None,
                 cutoff: str = "space") -> GridFunction:
    """Truncated series  sum_{0<|nu|<=V} exp(-eps|nu|)|nu|^-b exp(i|nu|^a) exp(i nu.x)  times a cutoff.

    cutoff='space'      multiply by window(x) on the fundamental domain centred at 0.
    cutoff='frequency'  transform = sum_nu coef_nu window(xi - nu); the space
                        cutoff is then the inverse transform of the window.
    """
    window = window or make_uniform_window("phi", "s4")
    if params.n != spec.n:
        raise ConfigurationError("parameter dimension and grid dimension differ", "n")
    T = spec.scale
    if abs(T - round(T)) > 1e-12:
        raise ConfigurationError("the grid scale must be an integer so Z^n lies on the grid", "scale")
    reach = window.support_box if cutoff == "frequency" else 0.0
    if params.V_max + reach > spec.nyquist:
        raise ConfigurationError(
            f"V_max={params.V_max} exceeds the grid band (nyquist {spec.nyquist})", "V_max")
    nus, coef = wainger_coefficients(params)
    P = spec.points_per_dim
    idx = np.mod(np.rint(nus * T).astype(np.int64), P)
    if cutoff == "space":
        C = np.zeros(spec.shape, dtype=complex)
        C[tuple(idx.T)] = coef
        series = np.fft.ifftn(C) * P**spec.n
        x = spec.points()
        x = np.where(x >= spec.period / 2, x - spec.period, x)
        return GridFunction(spec, series * window(x))
    if cutoff == "frequency":
        F = _spread_on_grid(spec, idx, coef, window)
        return GridFunction.from_spectrum(spec, F)
    raise ValidationError("cutoff must be 'space' or 'frequency'", "cutoff")


def _spread_on_grid(spec: GridSpec, idx: np.ndarray, coef: np.ndarray, window: UniformWindow):
    """sum_nu coef_nu window(xi - nu) sampled on the spectral grid."""
    T, P, n = spec.scale, spec.points_per_dim, spec.n
    r = int(math.floor(window.support_box * T))
    offs = np.arange(-r, r + 1)
    stencil = np.stack(np.meshgrid(*([offs] * n), indexing="ij"), -1).reshape(-1, n)
    wvals = window(stencil / T)
    F = np.zeros(spec.shape, dtype=complex)
    for o, w in zip(stencil, wvals):
        if w == 0:
            continue
        tgt = np.mod(idx + o, P)
        np.add.at(F, tuple(tgt.T), coef * w)
    return F


def wainger_norm_ladder(params: WaingerParams, spec: GridSpec, eps_values,
                        window: UniformWindow | None = None, cutoff: str = "space") -> list[float]:
    """L^p norms of the construction along a list of damping values."""
    from .spaces import lp_norm

    return [lp_norm(make_wainger(params.with_eps(e), spec, window, cutoff), params.p)
            for e in eps_values]


# --- lattice sets ----------------------------------------------------------

def default_L(N: int, delta: float) -> int:
    """Smallest L >= 0 with (N-2) 2^(delta-L) <= min(2^-delta - 2^-2delta, 2^2delta - 2^delta).

    The triangle inequality then gives 2^(l-2delta) <= |mu_2 + ... + mu_N| <= 2^(l+2delta)
    for every member of D_l.
    """
    if N <= 2:
        return 0
    gap = min(2.0**-delta - 2.0 ** (-2 * delta), 2.0 ** (2 * delta) - 2.0**delta)
    L = 0
    while (N - 2) * 2.0 ** (delta - L) > gap:
        L += 1
    return L


def lattice_shell(ell: float, delta: float, n: int) -> np.ndarray:
    """{mu in Z^n : 2^(ell-delta) <= |mu| <= 2^(ell+delta)} in lexicographic order."""
    lo2, hi2 = 2.0 ** (2 * (ell - delta)), 2.0 ** (2 * (ell + delta))
    R = int(math.floor(2.0 ** (ell + delta)))
    axis = np.arange(-R, R + 1)
    pts = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), -1).reshape(-1, n)
    r2 = np.sum(pts * pts, axis=-1)
    return pts[(r2 >= lo2) & (r2 <= hi2)]


@dataclass(frozen=True)
class LatticeSetD:
    variant: str
    ell: int
    delta: float
    L: int
    N: int
    n: int
    members: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def slots(self) -> int:
        return self.members.shape[1]

    def nu(self) -> np.ndarray:
        """mu_2 + ... + mu_N for each member."""
        if self.variant == "nec1":
            return self.members[:, 1:, :].sum(axis=1)
        return self.members.sum(axis=1)

    def to_csv(self) -> str:
        if self.variant == "nec1":
            cols = [f"mu{j + 1}_{i}" for j in range(self.slots) for i in range(1, self.n + 1)]
        else:
            cols = [f"mu{j + 2}_{i}" for j in range(self.slots) for i in range(1, self.n + 1)]
        lines = [",".join(cols)]
        for row in self.members.reshape(len(self.members), -1):
            lines.append(",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, variant: str, ell: int, delta: float, L: int, N: int, n: int):
        rows = [r for r in text.strip().splitlines()[1:] if r.strip()]
        slots = N if variant == "nec1" else N - 1
        arr = np.array([[int(v) for v in r.split(",")] for r in rows], dtype=np.int64)
        return cls(variant, ell, delta, L, N, n, arr.reshape(-1, slots, n))


def enumerate_D(variant: str, ell: int, delta: float, L: int | None, N: int, n: int) -> LatticeSetD:
    """Exhaustive enumeration of D_l.

    nec1: (mu_1..mu_N) with mu_1 = -(mu_2+...+mu_N), mu_2 in the shell at level l,
          mu_j (j >= 3) in the shell at level l - L.
    nec2: (mu_2..mu_N) with mu_2 + ... + mu_N in the shell at level l and
          mu_j (j >= 3) in the shell at level l - L.
    The implied range of mu_2 + ... + mu_N (nec1) or mu_2 (nec2) is asserted.
    """
    if variant not in ("nec1", "nec2"):
        raise ValidationError(f"variant must be 'nec1' or 'nec2', got {variant!r}", "variant")
    if N < 2:
        raise ValidationError("N must be >= 2", "N")
    if not delta > 0:
        raise ValidationError("delta must be positive", "delta")
    L = default_L(N, delta) if L is None else int(L)
    if L < 0 or not ell > L:
        raise ValidationError(f"need l > L >= 0, got l={ell}, L={L}", "ell")
    top = lattice_shell(ell, delta, n)
    low = lattice_shell(ell - L, delta, n) if N > 2 else np.zeros((0, n), dtype=np.int64)
    if N > 2:
        grids = np.meshgrid(*([np.arange(len(top))] + [np.arange(len(low))] * (N - 2)), indexing="ij")
        ids = [g.ravel() for g in grids]
        parts = [top[ids[0]]] + [low[i] for i in ids[1:]]
    else:
        parts = [top]
    if variant == "nec1":
        mu2 = parts[0]
        rest = parts[1:]
        s = mu2 + sum(rest) if rest else mu2.copy()
        members = np.stack([-s, mu2] + rest, axis=1)
        check = s
    else:
        nu = parts[0]
        rest = parts[1:]
        mu2 = nu - sum(rest) if rest else nu.copy()
        members = np.stack([mu2] + rest, axis=1)
        check = mu2
    if len(members) == 0:
        raise ConfigurationError(f"D_{ell} is empty; try a larger delta", "delta")
    r2 = np.sum(check * check, axis=-1)
    lo2, hi2 = 2.0 ** (2 * (ell - 2 * delta)), 2.0 ** (2 * (ell + 2 * delta))
    bad = (r2 < lo2) | (r2 > hi2)
    if bad.any():
        raise ConfigurationError(
            f"(delta={delta}, L={L}) violates the range implication for {int(bad.sum())} members "
            f"of D_{ell}; increase L", "L")
    flat = members.reshape(len(members), -1)
    order = np.lexsort(flat.T[::-1])
    return LatticeSetD(variant, ell, delta, L, N, n, members[order].astype(np.int64))


def _b_vector(D: LatticeSetD, b) -> np.ndarray:
    b = np.atleast_1d(np.asarray(b, dtype=float))
    slots = D.slots
    if b.size == 1:
        return np.full(slots, float(b[0]))
    if b.size == slots:
        return b
    if D.variant == "nec2" and b.size == D.N:
        return b[1:]
    raise ContractError(f"need {slots} decay exponents, got {b.size}", "b")


def member_weights(D: LatticeSetD, m: float, b, eps: float) -> np.ndarray:
    """<M>^m prod_j exp(-eps|mu_j|) |mu_j|^-b_j for every member."""
    bv = _b_vector(D, b)
    flat = D.members.reshape(len(D), -1).astype(float)
    norms = np.linalg.norm(D.members.astype(float), axis=-1)
    with np.errstate(divide="ignore"):
        w = bracket(flat) ** m * np.prod(np.exp(-eps * norms) * norms ** (-bv), axis=-1)
    return w


def coefficient_sum(D: LatticeSetD, m: float, b, eps: float = 0.0, mode: str = "total"):
    """Weighted sum over D (mode='total') or the grouped sums d_nu over nu = mu_2+...+mu_N
    (mode='per_nu', returned as (nus, d) with nus in lexicographic order)."""
    if len(D) == 0:
        raise ConfigurationError("empty lattice set", "D")
    w = member_weights(D, m, b, eps)
    if mode == "total":
        return float(np.sum(w))
    if mode == "per_nu":
        nus, inv = np.unique(D.nu(), axis=0, return_inverse=True)
        d = np.bincount(inv.ravel(), weights=w, minlength=len(nus))
        return nus, d
    raise ValidationError("mode must be 'total' or 'per_nu'", "mode")


# --- Rademacher signs ------------------------------------------------------

def _zigzag(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0, 2 * z - 1, -2 * z)


def _pair(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a >= b, a * a + a + b, b * b + a)


def lattice_index(points) -> np.ndarray:
    """A fixed bijection Z^n -> N (zigzag on each axis, then nested square pairing)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.int64))
    out = _zigzag(pts[:, 0])
    for i in range(1, pts.shape[1]):
        out = _pair(out, _zigzag(pts[:, i]))
    return out


def rademacher_sample(seed: int, indices) -> np.ndarray:
    """Signs r_nu in {-1, +1} for lattice indices nu (array of shape (K, n)).

    Sign number k of the stream drawn from ``numpy.random.default_rng(seed)``
    is attached to the lattice point with bijection index k, so r_nu does
    not depend on which other indices are requested.
    """
    idx = lattice_index(indices)
    if idx.size == 0:
        return np.zeros(0)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=int(idx.max()) + 1, dtype=np.int8)
    return (2.0 * bits[idx] - 1.0)


def khintchine_average(nus, coeffs, p: float, samples: int = 200, seed: int = 0,
                       points: int | None = None) -> float:
    """(mean over sign draws of ||sum r_nu a_nu exp(i nu.x)||^p_{L^p([-1,1])})^(1/p), n = 1."""
    lattice = np.asarray(nus, dtype=np.int64).reshape(len(coeffs), -1)
    freq = lattice[:, 0].astype(float)
    a = np.asarray(coeffs, dtype=complex)
    M = points or max(4096, int(16 * np.abs(freq).max(initial=1)))
    x = -1.0 + (np.arange(M) + 0.5) * (2.0 / M)
    E = np.exp(1j * np.outer(x, freq))
    acc = 0.0
    for child in np.random.SeedSequence(seed).spawn(samples):
        r = rademacher_sample(int(child.generate_state(1)[0]), lattice)
        vals = E @ (r * a)
        acc += np.sum(np.abs(vals) ** p) * (2.0 / M)
    return float((acc / samples) ** (1.0 / p))
