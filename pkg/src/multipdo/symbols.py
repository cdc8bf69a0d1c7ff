"""Multilinear symbols sigma(x, xi_1, ..., xi_N) and S^m_{0,0} seminorm estimates.

Evaluator convention: ``sigma(x, Xi)`` with ``x`` of shape ``(..., n)`` (or
``None`` for x-independent symbols) and ``Xi`` of shape ``(..., N, n)``; the
leading axes broadcast against each other and the result is complex.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, ContractError, EvaluationError, ValidationError
from .partitions import UniformWindow, make_uniform_window


def bracket(v: np.ndarray, axis=-1) -> np.ndarray:
    """Japanese bracket <v> = (1 + |v|^2)^(1/2)."""
    v = np.asarray(v, dtype=float)
    return np.sqrt(1.0 + np.sum(v * v, axis=axis))


@dataclass(frozen=True)
class LatticeSum:
    """sum_M c_M <M>^m prod_j phi(xi_j - mu_j) over a finite set of lattice tuples.

    ``members`` has shape (K, N, n) (integers), ``coefficients`` shape (K,).
    """

    members: np.ndarray
    coefficients: np.ndarray
    m: float
    window: UniformWindow

    def __post_init__(self):
        mem = np.asarray(self.members, dtype=np.int64)
        if mem.ndim != 3:
            raise ContractError("members must have shape (K, N, n)", "members")
        c = np.asarray(self.coefficients, dtype=complex).reshape(-1)
        if len(c) != len(mem):
            raise ContractError("one coefficient per member is required", "coefficients")
        order = np.lexsort(mem.reshape(len(mem), -1).T[::-1])
        mem, c = mem[order], c[order]
        mem.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "members", mem)
        object.__setattr__(self, "coefficients", c)
        weights = c * bracket(mem.reshape(len(mem), -1)) ** self.m
        weights.setflags(write=False)
        object.__setattr__(self, "_weights", weights)
        self._build_index()

    def _build_index(self):
        mem = self.members
        reach = int(math.ceil(self.window.support_box - 0.5)) if self.window.support_box > 0.5 else 0
        lo = mem.min(initial=0) - reach - 1
        base = int(mem.max(initial=0) - lo + reach + 2)
        flat = mem.reshape(len(mem), -1) - lo
        keys = np.zeros(len(mem), dtype=np.int64)
        for i in range(flat.shape[1]):
            keys = keys * base + flat[:, i]
        order = np.argsort(keys, kind="stable")
        object.__setattr__(self, "_keys", keys[order])
        object.__setattr__(self, "_order", order)
        object.__setattr__(self, "_lo", int(lo))
        object.__setattr__(self, "_base", base)
        object.__setattr__(self, "_reach", reach)

    @property
    def N(self) -> int:
        return self.members.shape[1]

    @property
    def n(self) -> int:
        return self.members.shape[2]

    def _lookup(self, cand: np.ndarray) -> np.ndarray:
        """Index into members for candidate tuples (shape (..., N*n)), -1 if absent."""
        shifted = cand - self._lo
        ok = np.all((shifted >= 0) & (shifted < self._base), axis=-1)
        keys = np.zeros(cand.shape[:-1], dtype=np.int64)
        for i in range(cand.shape[-1]):
            keys = keys * self._base + np.where(ok, shifted[..., i], 0)
        pos = np.searchsorted(self._keys, keys)
        pos = np.minimum(pos, len(self._keys) - 1)
        hit = ok & (self._keys[pos] == keys) if len(self._keys) else np.zeros(keys.shape, bool)
        return np.where(hit, self._order[pos], -1)

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        shape = xi.shape[:-2]
        flat = xi.reshape(*shape, -1)
        base = np.rint(flat).astype(np.int64)
        out = np.zeros(shape, dtype=complex)
        if len(self.members) == 0:
            return out
        offs = range(-self._reach, self._reach + 1)
        for off in itertools.product(offs, repeat=flat.shape[-1]):
            cand = base + np.asarray(off, dtype=np.int64)
            idx = self._lookup(cand)
            hit = idx >= 0
            if not hit.any():
                continue
            w = self.window(xi[hit] - cand[hit].reshape(-1, self.N, self.n))
            val = np.prod(w.reshape(w.shape[0], -1), axis=-1) if w.ndim > 1 else w
            out[hit] += self._weights[idx[hit]] * val
        return out

    def explicit(self, xi: np.ndarray) -> np.ndarray:
        """Direct evaluation of the finite sum (slow reference)."""
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape[:-2], dtype=complex)
        for mem, w in zip(self.members, self._weights):
            phi = self.window(xi - mem)  # product over the n axes of each slot
            out += w * np.prod(phi, axis=-1)
        return out


@dataclass(frozen=True)
class Symbol:
    N: int
    n: int
    evaluator: Callable
    x_independent: bool = False
    structure: str = "general"
    lattice: LatticeSum | None = None
    factors: tuple | None = None
    amplitude: Callable | None = None
    name: str = ""
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.N < 1 or self.n < 1:
            raise ContractError("N and n must be positive", "N")
        if self.structure not in ("general", "lattice_sum", "separable"):
            raise ContractError(f"unknown structure {self.structure!r}", "structure")

    def __call__(self, x, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if xi.shape[-2:] != (self.N, self.n):
            raise ContractError(f"Xi must end in shape ({self.N}, {self.n}), got {xi.shape}", "xi")
        if x is not None:
            x = np.asarray(x, dtype=float)
        elif not self.x_independent:
            raise ContractError("x is required for an x-dependent symbol", "x")
        return np.asarray(self.evaluator(x, xi), dtype=complex)

    def times_windows(self, nu: np.ndarray, window: UniformWindow) -> "Symbol":
        """sigma(x, Xi) * prod_j window(xi_j - nu_j)."""
        nu = np.asarray(nu, dtype=float).reshape(self.N, self.n)
        base = self

        def ev(x, xi):
            w = np.prod(window(xi - nu), axis=-1)
            return base(x, xi) * w

        return Symbol(self.N, self.n, ev, self.x_independent, "general",
                      name=f"{self.name}*phi(.-{nu.astype(int).tolist()})")


# --- constructors ----------------------------------------------------------

def _as_multiplier(m) -> Callable[[np.ndarray], np.ndarray]:
    if callable(m):
        return m
    if isinstance(m, dict):
        return multiplier_from_config(m)
    raise ValidationError(f"cannot interpret multiplier {m!r}", "multipliers")


def multiplier_from_config(cfg: dict) -> Callable[[np.ndarray], np.ndarray]:
    """Named Fourier multipliers used in symbol configs.

    {"type": "one"} | {"type": "bracket", "power": r} | {"type": "gaussian", "width": w}
    | {"type": "cosine", "freq": a}
    """
    kind = cfg.get("type")
    if kind == "one":
        return lambda xi: np.ones(np.shape(xi)[:-1])
    if kind == "bracket":
        r = float(cfg.get("power", -1.0))
        return lambda xi: bracket(xi) ** r
    if kind == "gaussian":
        w = float(cfg.get("width", 1.0))
        return lambda xi: np.exp(-0.5 * np.sum(np.asarray(xi) ** 2, axis=-1) / w**2)
    if kind == "cosine":
        a = float(cfg.get("freq", 1.0))
        return lambda xi: np.cos(a * np.asarray(xi)[..., 0])
    raise ValidationError(f"unknown multiplier type {kind!r}", "type")


def smooth_periodic_profile(x: np.ndarray) -> np.ndarray:
    """a(x) = exp(-1 / (1 + cos x_1)): smooth, 2*pi-periodic, not analytic at x_1 = pi."""
    c = 1.0 + np.cos(np.asarray(x)[..., 0])
    with np.errstate(divide="ignore"):
        return np.where(c > 0, np.exp(-1.0 / np.where(c > 0, c, 1.0)), 0.0)


def _profile(name) -> Callable[[np.ndarray], np.ndarray]:
    if callable(name):
        return name
    if name == "exp":
        return lambda x: np.exp(1j * np.asarray(x)[..., 0])
    if name == "smooth":
        return smooth_periodic_profile
    if name == "sin":
        return lambda x: 2.0 + np.sin(np.asarray(x)[..., 0])
    raise ValidationError(f"unknown x-profile {name!r}", "profile")


def constant_symbol(c: complex, N: int, n: int = 1) -> Symbol:
    c = complex(c)
    ev = lambda x, xi: np.full(np.asarray(xi).shape[:-2], c, dtype=complex) if x is None else \
        np.full(np.broadcast_shapes(np.shape(x)[:-1], np.asarray(xi).shape[:-2]), c, dtype=complex)
    return Symbol(N, n, ev, True, "separable", factors=None, name=f"const({c})",
                  config={"kind": "constant", "c": [c.real, c.imag]})


def separable_symbol(multipliers: Sequence, amplitude=None, n: int = 1, name: str = "") -> Symbol:
    ms = tuple(_as_multiplier(m) for m in multipliers)
    N = len(ms)
    amp = _profile(amplitude) if amplitude is not None else None

    def ev(x, xi):
        out = ms[0](xi[..., 0, :]).astype(complex)
        for j in range(1, N):
            out = out * ms[j](xi[..., j, :])
        if amp is not None:
            out = amp(x) * out
        return out

    return Symbol(N, n, ev, amp is None, "separable", factors=ms, amplitude=amp,
                  name=name or ("oscillatory_x" if amp is not None else "separable"))


def general_symbol(fn: Callable, N: int, n: int = 1, x_independent: bool = False,
                   name: str = "general") -> Symbol:
    return Symbol(N, n, fn, x_independent, "general", name=name)


def make_test_symbol(kind: str, **params) -> Symbol:
    """Fixtures: 'constant' (c, N, n), 'separable' (multipliers, n),
    'oscillatory_x' (multipliers, profile in {'exp', 'smooth', 'sin'} or callable, n)."""
    n = int(params.get("n", 1))
    if kind == "constant":
        return constant_symbol(params.get("c", 1.0), int(params.get("N", 2)), n)
    if kind == "separable":
        ms = params.get("multipliers") or [{"type": "one"}] * int(params.get("N", 2))
        return separable_symbol(ms, None, n)
    if kind == "oscillatory_x":
        ms = params.get("multipliers") or [{"type": "one"}] * int(params.get("N", 2))
        return separable_symbol(ms, params.get("profile", "exp"), n)
    raise ValidationError(f"unknown test symbol kind {kind!r}", "kind")


def lattice_sum_symbol(members, coefficients, m: float, window: UniformWindow | None = None,
                       name: str = "lattice_sum") -> Symbol:
    window = window or make_uniform_window("phi", "s4")
    ls = LatticeSum(np.asarray(members), np.asarray(coefficients), float(m), window)
    return Symbol(ls.N, ls.n, lambda x, xi: ls(xi), True, "lattice_sum", lattice=ls, name=name)


def make_sharpness_symbol(variant: str, ell: int, delta: float, L: int | None, m: float,
                          coefficients="ones", N: int = 2, n: int = 1, a=None, seed: int = 0,
                          window: UniformWindow | None = None) -> Symbol:
    """Lattice symbols built on the exact index sets D_ell.

    nec1:  sum_{M in D} c_M <M>^m prod_{j=1..N} phi(xi_j - mu_j)
    nec2:  phi(xi_1) * sum_{(mu_2..mu_N) in D} c_M <M>^m prod_{j>=2} phi(xi_j - mu_j)

    ``coefficients``: 'ones', 'oscillating' (prod_j exp(-i |mu_j|^{a_j})),
    'rademacher' (nec2 only: r_{mu_2+...+mu_N} * prod_j exp(-i |mu_j|^{a_j})),
    or an explicit array aligned with the member order of D.
    """
    from .extremal import enumerate_D, rademacher_sample

    D = enumerate_D(variant, ell, delta, L, N, n)
    members = D.members  # (K, N, n) for nec1, (K, N-1, n) for nec2
    K = len(members)
    if K == 0:
        raise ConfigurationError(f"D_{ell} is empty for delta={delta}", "ell")
    if isinstance(coefficients, str):
        c = np.ones(K, dtype=complex)
        if coefficients in ("oscillating", "rademacher"):
            slots = members.shape[1]
            if variant == "nec2" and a is not None and np.size(a) == slots + 1:
                a = np.asarray(a, dtype=float)[1:]  # a_1 belongs to the phi(xi_1) slot
            aj = _a_vector(a, slots)
            norms = np.linalg.norm(members, axis=-1)  # (K, slots)
            c = np.exp(-1j * np.sum(norms ** aj, axis=-1))
        if coefficients == "rademacher":
            if variant != "nec2":
                raise ValidationError("rademacher coefficients belong to the nec2 variant", "coefficients")
            nus = members.sum(axis=1)
            c = c * rademacher_sample(seed, nus)
        elif coefficients not in ("ones", "oscillating"):
            raise ValidationError(f"unknown coefficient rule {coefficients!r}", "coefficients")
    else:
        c = np.asarray(coefficients, dtype=complex).reshape(-1)
        if len(c) != K:
            raise ContractError(f"expected {K} coefficients, got {len(c)}", "coefficients")
    if np.any(np.abs(c) > 1 + 1e-12):
        raise ContractError("coefficients must satisfy |c_M| <= 1", "coefficients")
    if variant == "nec2":
        # prepend mu_1 = 0: the phi(xi_1) factor, <(0, M)> = <M>
        zeros = np.zeros((K, 1, n), dtype=np.int64)
        full = np.concatenate([zeros, members], axis=1)
    else:
        full = members
    sym = lattice_sum_symbol(full, c, m, window, name=f"{variant}_l{ell}")
    cfg = {"kind": "sharpness", "variant": variant, "ell": ell, "delta": delta, "L": D.L,
           "m": m, "N": N, "n": n}
    return Symbol(sym.N, sym.n, sym.evaluator, True, "lattice_sum", lattice=sym.lattice,
                  name=sym.name, config=cfg)


def _a_vector(a, slots: int) -> np.ndarray:
    if a is None:
        return np.full(slots, 0.5)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.size == 1:
        return np.full(slots, float(a[0]))
    if a.size != slots:
        raise ContractError(f"need {slots} exponents a_j, got {a.size}", "a")
    return a


def symbol_from_config(cfg: dict) -> Symbol:
    """Build a symbol from a JSON-style config (see README for the schema)."""
    kind = cfg.get("kind")
    allowed = {"constant": {"kind", "c", "N", "n"},
               "separable": {"kind", "multipliers", "n"},
               "oscillatory_x": {"kind", "multipliers", "profile", "n"},
               "sharpness": {"kind", "variant", "ell", "delta", "L", "m", "N", "n",
                             "coefficients", "a", "seed"}}
    if kind not in allowed:
        raise ValidationError(f"unknown symbol kind {kind!r}", "kind")
    unknown = set(cfg) - allowed[kind]
    if unknown:
        raise ValidationError(f"unknown symbol keys {sorted(unknown)}", sorted(unknown)[0])
    if kind == "constant":
        c = cfg.get("c", 1.0)
        c = complex(*c) if isinstance(c, (list, tuple)) else complex(c)
        return constant_symbol(c, int(cfg.get("N", 2)), int(cfg.get("n", 1)))
    if kind in ("separable", "oscillatory_x"):
        if "multipliers" not in cfg:
            raise ValidationError("separable symbols need 'multipliers'", "multipliers")
        sym = make_test_symbol(kind, **{k: v for k, v in cfg.items() if k != "kind"})
        return Symbol(sym.N, sym.n, sym.evaluator, sym.x_independent, sym.structure,
                      factors=sym.factors, amplitude=sym.amplitude, name=sym.name, config=dict(cfg))
    for key in ("variant", "ell", "delta", "m"):
        if key not in cfg:
            raise ValidationError(f"sharpness symbol needs {key!r}", key)
    return make_sharpness_symbol(cfg["variant"], int(cfg["ell"]), float(cfg["delta"]),
                                 cfg.get("L"), float(cfg["m"]), cfg.get("coefficients", "ones"),
                                 int(cfg.get("N", 2)), int(cfg.get("n", 1)), cfg.get("a"),
                                 int(cfg.get("seed", 0)))


# --- seminorms -------------------------------------------------------------

def _central_weights(order: int, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of the minimal central difference for d^order/dt^order."""
    if order == 0:
        return np.array([0]), np.array([1.0])
    r = (order + 1) // 2
    offs = np.arange(-r, r + 1)
    V = np.vander(offs.astype(float), increasing=True).T  # V[k, i] = offs_i^k
    rhs = np.zeros(len(offs))
    rhs[order] = math.factorial(order)
    w = np.linalg.solve(V, rhs) / h**order
    return offs, w


def _group_multi_indices(n: int, M: int) -> list[tuple[int, ...]]:
    return [a for a in itertools.product(range(M + 1), repeat=n) if sum(a) <= M]


@dataclass
class SeminormReport:
    m: float
    M: int
    values: dict

    def max_entry(self) -> float:
        return max(self.values.values())

    def to_dict(self) -> dict:
        return {"m": self.m, "M": self.M,
                "values": {str(k): v for k, v in self.values.items()}}


def seminorm_estimate(sym: Symbol, m: float, M: int = 2, x_samples=None, xi_samples=None,
                      step: float = 1e-3) -> SeminormReport:
    """Finite-difference estimates of sup |d_x^alpha d_Xi^beta sigma| / (1 + sum|xi_j|)^m.

    ``xi_samples`` has shape (S, N, n); ``x_samples`` shape (S, n) (ignored
    for x-independent symbols, where only alpha = 0 is reported). Keys of
    ``values`` are tuples (alpha, beta_1, ..., beta_N) of per-group multi-indices.
    The difference step grows with the total derivative order to keep
    cancellation error below the truncation error.
    """
    N, n = sym.N, sym.n
    xi = np.asarray(xi_samples, dtype=float)
    if xi.ndim != 3 or xi.shape[1:] != (N, n):
        raise ContractError(f"xi_samples must have shape (S, {N}, {n})", "xi_samples")
    S = xi.shape[0]
    if sym.x_independent:
        x = np.zeros((S, n))
        x_groups = [tuple([0] * n)]
    else:
        if x_samples is None:
            raise ContractError("x_samples required for an x-dependent symbol", "x_samples")
        x = np.broadcast_to(np.asarray(x_samples, dtype=float), (S, n))
        x_groups = _group_multi_indices(n, M)
    xi_groups = _group_multi_indices(n, M)
    weight = (1.0 + np.linalg.norm(xi, axis=-1).sum(axis=-1)) ** m

    base = sym(x, xi)
    if not np.all(np.isfinite(base)):
        bad = int(np.argmin(np.isfinite(base)))
        raise EvaluationError(f"non-finite symbol value at x={x[bad].tolist()}, xi={xi[bad].tolist()}")

    values = {}
    for alpha in x_groups:
        for betas in itertools.product(xi_groups, repeat=N):
            orders = list(alpha) + [b for beta in betas for b in beta]
            total = sum(orders)
            h = step * 10.0 ** (max(0, total - 2) / 2.0)
            stencils = [_central_weights(o, h) for o in orders]
            acc = np.zeros(S, dtype=complex)
            for combo in itertools.product(*[range(len(s[0])) for s in stencils]):
                wgt = 1.0
                shift = np.zeros(n * (N + 1))
                for d, ci in enumerate(combo):
                    wgt *= stencils[d][1][ci]
                    shift[d] = stencils[d][0][ci] * h
                if wgt == 0.0:
                    continue
                xs = x + shift[:n]
                xis = xi + shift[n:].reshape(N, n)
                acc += wgt * sym(xs, xis)
            if not np.all(np.isfinite(acc)):
                raise EvaluationError(f"non-finite derivative estimate for index {alpha, betas}")
            key = (tuple(alpha),) + tuple(tuple(b) for b in betas)
            values[key] = float(np.max(np.abs(acc) / weight))
    return SeminormReport(m, M, values)
