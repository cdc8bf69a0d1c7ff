"""Evaluation of multilinear pseudo-differential operators and of their
lattice expansion.

For inputs sampled on a common grid, with Fourier series coefficients c_j,

    T(x) = sum_{Xi} exp(i x . (xi_1 + ... + xi_N)) sigma(x, Xi) prod_j c_j(xi_j),

which is the discrete form of  (2 pi)^{-Nn} int e^{ix.sum xi_j} sigma(x, Xi) prod f_j^(xi_j) dXi.

The expansion route decomposes sigma with the unit-lattice partition phi,
expands each piece sigma_Nu in a Fourier series on Nu + [-pi, pi]^{Nn} and
evaluates

    T(x) = sum_Mu <Mu>^{-2M} sum_Nu Q_{Nu,Mu}(x) prod_j (phi~(D - nu_j) f_j)(x + mu_j).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ComputationError, ContractError, CostGuardError, EvaluationError, \
    ResolutionError, ValidationError
from .grid import GridFunction, GridSpec, apply_multiplier
from .partitions import UniformWindow, WindowFamily, make_uniform_window
from .symbols import Symbol, bracket

DEFAULT_BUDGET = 2e8
DEFAULT_RADIUS = 64
MIN_QUAD_POINTS = 32
DEFAULT_QUAD_POINTS = 64
ACTIVE_RTOL = 1e-14


# --- direct evaluation -----------------------------------------------------

def _check_inputs(sym: Symbol, inputs: Sequence[GridFunction]) -> GridSpec:
    if len(inputs) != sym.N:
        raise ContractError(f"symbol takes {sym.N} inputs, got {len(inputs)}", "inputs")
    spec = inputs[0].spec
    for f in inputs:
        if f.spec != spec:
            raise ContractError("all inputs must share one grid", "inputs")
    if spec.n != sym.n:
        raise ContractError("grid dimension differs from the symbol dimension", "n")
    return spec


def _series_coefficients(f: GridFunction, rtol: float):
    """Active Fourier series coefficients: (integer bin index (K, n), frequency (K, n), value (K,))."""
    spec = f.spec
    P = spec.points_per_dim
    c = np.fft.fftn(f.values()) / P**spec.n
    a = np.abs(c)
    top = a.max(initial=0.0)
    if top == 0:
        return np.zeros((0, spec.n), np.int64), np.zeros((0, spec.n)), np.zeros(0, complex)
    idx = np.argwhere(a > rtol * top)
    signed = np.where(idx >= P // 2, idx - P, idx)
    return idx.astype(np.int64), signed / spec.scale, c[tuple(idx.T)]


def _combos(sizes: Sequence[int]):
    total = int(np.prod(sizes, dtype=np.float64))
    return total


def apply_direct(sym: Symbol, inputs: Sequence[GridFunction], budget: float = DEFAULT_BUDGET,
                 rtol: float = ACTIVE_RTOL) -> GridFunction:
    """Quadrature of the defining integral over the active frequency bins of the inputs.

    x-independent symbols are summed into a single output spectrum (binning by
    xi_1 + ... + xi_N); x-dependent symbols are evaluated point by point.
    """
    spec = _check_inputs(sym, inputs)
    N, n, P = sym.N, spec.n, spec.points_per_dim
    act = [_series_coefficients(f, rtol) for f in inputs]
    sizes = [len(a[2]) for a in act]
    total = _combos(sizes)
    if total == 0:
        return GridFunction(spec, np.zeros(spec.shape, complex))
    work = total if sym.x_independent else total * spec.size
    if work > budget:
        raise CostGuardError(
            f"direct evaluation needs {work:.3g} symbol evaluations (budget {budget:.3g}); "
            f"active bins per input: {sizes}")

    X = None if sym.x_independent else spec.points().reshape(-1, n)
    out = np.zeros(spec.size, dtype=complex)
    acc_re = np.zeros(spec.size)
    acc_im = np.zeros(spec.size)
    chunk = max(1, 2**20 if sym.x_independent else 2**22 // max(1, min(spec.size, 4096)))
    strides = P ** np.arange(n - 1, -1, -1)
    for start in range(0, total, chunk):
        lin = np.arange(start, min(total, start + chunk))
        ids = np.unravel_index(lin, sizes)
        xi = np.stack([act[j][1][ids[j]] for j in range(N)], axis=1)  # (B, N, n)
        w = np.ones(len(lin), dtype=complex)
        for j in range(N):
            w = w * act[j][2][ids[j]]
        if sym.x_independent:
            s = sym(None, xi)
            if not np.all(np.isfinite(s)):
                raise EvaluationError("symbol returned non-finite values")
            kout = np.zeros((len(lin), n), dtype=np.int64)
            for j in range(N):
                kout += act[j][0][ids[j]]
            flat = (np.mod(kout, P) * strides).sum(axis=1)
            v = s * w
            acc_re += np.bincount(flat, v.real, minlength=spec.size)
            acc_im += np.bincount(flat, v.imag, minlength=spec.size)
        else:
            zeta = xi.sum(axis=1)  # (B, n)
            bx = max(1, 2**22 // len(lin))
            for xs in range(0, len(X), bx):
                xb = X[xs:xs + bx]
                s = sym(xb[:, None, :], xi[None])
                if not np.all(np.isfinite(s)):
                    raise EvaluationError("symbol returned non-finite values")
                phase = np.exp(1j * (xb @ zeta.T))
                out[xs:xs + bx] += (s * phase) @ w
    if sym.x_independent:
        g = (acc_re + 1j * acc_im).reshape(spec.shape)
        return GridFunction(spec, np.fft.ifftn(g) * P**n)
    return GridFunction(spec, out.reshape(spec.shape))


# --- decomposition ---------------------------------------------------------

def _lattice_near(xi: np.ndarray, radius: float, closed: bool) -> np.ndarray:
    """Integer points nu with |xi - nu|_inf <= radius (or < radius) for some xi in the set."""
    if len(xi) == 0:
        return np.zeros((0, xi.shape[-1]), np.int64)
    n = xi.shape[-1]
    lo = np.floor(xi.min(axis=0) - radius).astype(np.int64)
    hi = np.ceil(xi.max(axis=0) + radius).astype(np.int64)
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    cand = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    keep = np.zeros(len(cand), dtype=bool)
    for s in range(0, len(cand), 256):
        d = np.abs(xi[None, :, :] - cand[s:s + 256, None, :]).max(axis=-1)
        keep[s:s + 256] = (d <= radius).any(axis=1) if closed else (d < radius).any(axis=1)
    return cand[keep]


@dataclass(frozen=True)
class DecompositionPlan:
    """Active lattice points per slot, windows, Mu truncation (sup norm) and order M."""

    active: tuple
    phi: UniformWindow
    phi_tilde: UniformWindow
    radius: int
    order: int
    quad_points: int

    @property
    def N(self) -> int:
        return len(self.active)

    @property
    def n(self) -> int:
        return self.active[0].shape[1]

    @property
    def piece_count(self) -> int:
        return int(np.prod([len(a) for a in self.active]))

    def pieces(self):
        """Iterate over Nu as integer arrays of shape (N, n) (lexicographic)."""
        for ids in itertools.product(*[range(len(a)) for a in self.active]):
            yield np.stack([self.active[j][i] for j, i in enumerate(ids)])


def make_plan(inputs: Sequence[GridFunction], radius: int = DEFAULT_RADIUS, order: int = 0,
              quad_points: int | None = None, rtol: float = ACTIVE_RTOL) -> DecompositionPlan:
    """Plan covering the joint spectral support: nu_j ranges over lattice points whose
    closed box nu_j + [-1, 1]^n meets the active spectrum of f_j."""
    if radius < 0 or order < 0:
        raise ValidationError("radius and order must be non-negative", "radius")
    phi = make_uniform_window("phi", "s3")
    phit = make_uniform_window("phi_tilde", "s3")
    active = []
    for f in inputs:
        _, xi, _ = _series_coefficients(f, rtol)
        active.append(_lattice_near(xi, phi.support_box, closed=True))
    if quad_points is None:
        quad_points = max(DEFAULT_QUAD_POINTS, 3 * radius + 2)
        quad_points += quad_points % 2
    return DecompositionPlan(tuple(active), phi, phit, int(radius), int(order), int(quad_points))


def decompose_symbol(sym: Symbol, plan: DecompositionPlan) -> dict:
    """sigma_Nu = sigma * prod_j phi(xi_j - nu_j) for every Nu of the plan, keyed by tuple."""
    out = {}
    for nu in plan.pieces():
        piece = sym.times_windows(nu, plan.phi)
        key = tuple(map(tuple, nu.tolist()))
        out[key] = Symbol(piece.N, piece.n, piece.evaluator, piece.x_independent, "general",
                          name=piece.name, config={"nu": nu, "parent": sym, "window": plan.phi})
    return out


@dataclass(frozen=True)
class CoefficientTable:
    """Fourier coefficients P_{Nu,Mu} and Q_{Nu,Mu} = <Mu>^{2M} P_{Nu,Mu}.

    Arrays have shape (*xshape, 2R+1, ..., 2R+1) with N*n trailing Mu axes
    (index i on an axis is mu = i - R); ``xshape`` is empty for x-independent
    symbols.
    """

    nu: np.ndarray
    radius: int
    order: int
    P: np.ndarray
    Q: np.ndarray
    x_dependent: bool

    def coefficient(self, mu) -> tuple:
        mu = np.asarray(mu, dtype=np.int64).ravel()
        if np.any(np.abs(mu) > self.radius):
            raise IndexError("Mu outside the table radius")
        ix = tuple(int(v) + self.radius for v in mu)
        sl = (Ellipsis,) + ix
        return self.P[sl], self.Q[sl]


def _mu_bracket_sq(radius: int, dims: int) -> np.ndarray:
    mu = np.arange(-radius, radius + 1, dtype=float)
    out = np.ones((2 * radius + 1,) * dims)
    for d in range(dims):
        shape = [1] * dims
        shape[d] = -1
        out = out + (mu**2).reshape(shape)
    return out


def symbol_fourier_coefficients(sym: Symbol, nu, radius: int, order: int = 0, x=None,
                                quad_points: int | None = None, window: UniformWindow | None = None,
                                laplacian: str = "spectral", budget: float = DEFAULT_BUDGET) -> CoefficientTable:
    """Fourier coefficients of sigma_Nu = sigma * prod phi(xi_j - nu_j) on Nu + [-pi, pi]^{Nn}.

    P is the periodic trapezoid rule (only nodes inside the support of the
    piece are evaluated). With laplacian='spectral', (I - Delta)^M is applied
    to the trigonometric interpolant of the samples, which gives
    Q = <Mu>^{2M} P exactly. laplacian='fd' applies the second-order
    periodic difference Laplacian to the full nodal grid instead (a
    diagnostic: it agrees with the spectral route up to O(h^2)).
    """
    window = window or make_uniform_window("phi", "s3")
    N, n = sym.N, sym.n
    nu = np.asarray(nu, dtype=np.int64).reshape(N, n)
    dims = N * n
    Qp = quad_points or max(DEFAULT_QUAD_POINTS, 3 * radius + 2)
    if Qp < MIN_QUAD_POINTS or Qp < 2 * radius + 1:
        raise ResolutionError(
            f"{Qp} quadrature points per axis cannot resolve |Mu| <= {radius} "
            f"(need >= max({MIN_QUAD_POINTS}, 2R+1))")
    if window.support_box >= math.pi:
        raise ContractError("window support must fit in the period cell", "window")
    off = -math.pi + 2 * math.pi * np.arange(Qp) / Qp
    if laplacian == "spectral":
        nodes = np.nonzero(np.abs(off) < window.support_box)[0]
    elif laplacian == "fd":
        nodes = np.arange(Qp)
    else:
        raise ValidationError("laplacian must be 'spectral' or 'fd'", "laplacian")
    o = off[nodes]
    s = len(o)
    grids = np.meshgrid(*([o] * dims), indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=-1)  # (s^dims, dims)
    xi = nu.reshape(1, dims) + offs
    wts = np.prod(window.profile_1d(offs), axis=-1)
    keep = wts != 0
    xs = None
    if sym.x_independent:
        X = 1
    else:
        if x is None:
            raise ContractError("x points are required for an x-dependent symbol", "x")
        xs = np.asarray(x, dtype=float).reshape(-1, n)
        X = len(xs)
    if X * keep.sum() > budget:
        raise CostGuardError(f"coefficient quadrature needs {X * keep.sum():.3g} evaluations")
    vals = np.zeros((X, len(offs)), dtype=complex)
    xi_k = xi[keep].reshape(-1, N, n)
    if sym.x_independent:
        vals[0, keep] = sym(None, xi_k) * wts[keep]
    else:
        bx = max(1, 2**21 // max(1, len(xi_k)))
        for a in range(0, X, bx):
            vals[a:a + bx, keep] = sym(xs[a:a + bx, None, :], xi_k[None]) * wts[keep]
    if not np.all(np.isfinite(vals)):
        raise EvaluationError(f"non-finite symbol values on the quadrature grid of Nu={nu.tolist()}")
    vals = vals.reshape((X,) + (s,) * dims)

    mu = np.arange(-radius, radius + 1)
    brk = _mu_bracket_sq(radius, dims)

    def dft(arr):
        out = arr
        for d in range(dims):
            E = np.exp(-1j * np.outer(mu, nu.ravel()[d] + o)) / Qp  # (2R+1, s)
            out = np.moveaxis(np.tensordot(out, E, axes=([1 + d], [1])), -1, 1 + d)
        return out

    P = dft(vals)
    if laplacian == "spectral":
        Q = P * brk**order
    else:
        h = 2 * math.pi / Qp
        lap = vals
        for _ in range(order):
            acc = lap.copy()
            for d in range(dims):
                ax = 1 + d
                acc = acc - (np.roll(lap, 1, ax) - 2 * lap + np.roll(lap, -1, ax)) / h**2
            lap = acc
        Q = dft(lap)
    if sym.x_independent:
        P, Q = P[0], Q[0]
    return CoefficientTable(nu, int(radius), int(order), P, Q, not sym.x_independent)


def _shifted_boxes(f: GridFunction, nus: np.ndarray, radius: int, phit: UniformWindow,
                   rtol: float) -> list:
    """For each nu: array (A, X) of (phi~(D - nu) f)(x + mu) with mu over [-R, R]^n (flattened)."""
    spec = f.spec
    n = spec.n
    _, xi, c = _series_coefficients(f, rtol)
    X = spec.points().reshape(-1, n)
    mu = np.arange(-radius, radius + 1)
    mus = np.stack(np.meshgrid(*([mu] * n), indexing="ij"), -1).reshape(-1, n)
    out = []
    for nu in nus:
        w = phit(xi - nu)
        sel = w != 0
        if not sel.any():
            out.append(np.zeros((len(mus), len(X)), complex))
            continue
        z = xi[sel]
        v = c[sel] * w[sel]
        left = np.exp(1j * (mus @ z.T)) * v  # (A, b)
        out.append(left @ np.exp(1j * (z @ X.T)))  # (A, X)
    return out


def apply_via_expansion(sym: Symbol, inputs: Sequence[GridFunction],
                        plan: DecompositionPlan | None = None, budget: float = DEFAULT_BUDGET,
                        laplacian: str = "spectral", **plan_kw) -> GridFunction:
    """Evaluate T_sigma(f_1..f_N) through the truncated lattice expansion."""
    spec = _check_inputs(sym, inputs)
    plan = plan or make_plan(inputs, **plan_kw)
    N, n, R = sym.N, spec.n, plan.radius
    if plan.piece_count == 0:
        return GridFunction(spec, np.zeros(spec.shape, complex))
    A = (2 * R + 1) ** n
    Xn = spec.size
    work = plan.piece_count * (A**N) * (Xn if not sym.x_independent else 1)
    if work > budget * 50:
        raise CostGuardError(f"expansion needs about {work:.3g} multiply-adds; reduce radius or band")
    boxes = [_shifted_boxes(f, plan.active[j], R, plan.phi_tilde, ACTIVE_RTOL)
             for j, f in enumerate(inputs)]
    X = None if sym.x_independent else spec.points().reshape(-1, n)
    brk = _mu_bracket_sq(R, N * n)
    total = np.zeros(Xn, dtype=complex)
    for ids in itertools.product(*[range(len(a)) for a in plan.active]):
        nu = np.stack([plan.active[j][i] for j, i in enumerate(ids)])
        tab = symbol_fourier_coefficients(sym, nu, R, plan.order, X, plan.quad_points,
                                          plan.phi, laplacian, budget)
        W = tab.Q * brk ** (-plan.order)
        # group the Mu axes slot by slot: (..., A_1, ..., A_N)
        if sym.x_independent:
            W = W.reshape((A,) * N)
            G = boxes[N - 1][ids[N - 1]]
            W = np.tensordot(G, W, axes=([0], [N - 1]))  # (X, A_1..A_{N-1})
        else:
            W = W.reshape((Xn,) + (A,) * N)
            W = np.einsum("x...a,ax->x...", W, boxes[N - 1][ids[N - 1]])
        for j in range(N - 2, -1, -1):
            W = np.einsum("x...a,ax->x...", W, boxes[j][ids[j]])
        total += W
    return GridFunction(spec, total.reshape(spec.shape))


# --- decay facts -----------------------------------------------------------

def support_exponent(N: int) -> int:
    """d = ceil(log2(N + 1)) + 2."""
    return int(math.ceil(math.log2(N + 1))) + 2


def joint_support_halfwidth(ell0: int, N: int, family: WindowFamily, box_halfwidth: float = 3.0) -> float:
    """Half side 2^(ell0 + d) of the cube around nu_1 + ... + nu_N containing the spectrum of
    psi_ell0(D) Q * prod_j box_j f_j. Asserts that the cube dominates the actual sum of supports."""
    d = support_exponent(N)
    need = N * box_halfwidth + family.supports[ell0][1]
    half = 2.0 ** (ell0 + d)
    if half < need:
        raise ComputationError(f"support cube 2^{ell0 + d} smaller than {need}")
    return half


def coefficient_band_decay(sym: Symbol, nu, mu, family: WindowFamily, L_list=(1, 2, 3),
                           spec: GridSpec | None = None, order: int = 2,
                           fit_range=(2, 6), quad_points: int | None = None) -> dict:
    """Band norms ||psi_l0(D) Q_{Nu,Mu}||_inf for l0 = 0..K and the fitted dyadic slope.

    For every L in ``L_list`` the verdict records whether the slope over
    ``fit_range`` is at most -L + 0.2. An x-independent symbol has a constant
    Q, so only the l0 = 0 band is non-zero ('trivial' concentration).
    """
    from .experiments import fit_slope

    spec = spec or GridSpec(sym.n, 256, 1.0)
    mu = np.asarray(mu, dtype=np.int64).reshape(sym.N, sym.n)
    r = int(np.abs(mu).max(initial=0))
    X = None if sym.x_independent else spec.points().reshape(-1, sym.n)
    tab = symbol_fourier_coefficients(sym, nu, max(r, 1), order, X,
                                      quad_points or DEFAULT_QUAD_POINTS, None, "spectral")
    _, q = tab.coefficient(mu)
    if sym.x_independent:
        qx = np.full(spec.shape, complex(q))
    else:
        qx = np.asarray(q).reshape(spec.shape)
    g = GridFunction(spec, qx)
    values = []
    for l0 in range(family.K + 1):
        values.append(float(np.abs(apply_multiplier(family[l0], g).samples).max()))
    top = max(values) if values else 0.0
    trivial = all(v <= 1e-13 * top for v in values[1:])
    result = {"values": values, "trivial": trivial, "fit_range": tuple(fit_range)}
    if trivial:
        result.update(slope=None, verdicts={L: True for L in L_list})
        return result
    lo, hi = fit_range
    fit = fit_slope([(l, values[l]) for l in range(lo, hi + 1)])
    result.update(slope=fit.slope, fit=fit, verdicts={L: fit.slope <= -L + 0.2 for L in L_list})
    return result
