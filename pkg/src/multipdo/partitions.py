"""Littlewood-Paley window families and uniform (unit-lattice) windows.

Every window is built from the C-infinity step

    S(t) = h(t) / (h(t) + h(1 - t)),   h(t) = exp(-a / t) for t > 0, 0 otherwise,

which is exactly 0 for t <= 0, exactly 1 for t >= 1, and satisfies
S(t) + S(1 - t) = 1. Plateaus and supports are therefore exact in floating
point, which the verification routines rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ContractError, ValidationError
from .grid import GridSpec, SpectrumSampler

# transition sharpness used by the uniform partition window; a = 2 gives the
# fastest decay of its Fourier coefficients among the profiles we tried
UNIFORM_SHARPNESS = 2.0


def smooth_step(t, sharpness: float = 1.0) -> np.ndarray:
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-sharpness / t), 0.0)
        b = np.where(t < 1, np.exp(-sharpness / (1.0 - t)), 0.0)
    return a / (a + b)


def _log2_radius(xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = np.linalg.norm(xi, axis=-1)
    with np.errstate(divide="ignore"):
        lr = np.log2(r)
    return r, lr


# --- radial profiles -------------------------------------------------------

def _rho_generic(r: np.ndarray) -> np.ndarray:
    """1 on [0, 1], 0 on [2, inf)."""
    return smooth_step(2.0 - r)


def _rho_sharp(lr: np.ndarray) -> np.ndarray:
    """1 for log2 r <= 1/4, 0 for log2 r >= 3/4 (as a function of log2 r)."""
    return smooth_step((0.75 - lr) / 0.5)


def _tilde_bump(t: np.ndarray) -> np.ndarray:
    """1 for |t| <= 1/8, 0 for |t| >= 1/4 (t is log2 r - l)."""
    return smooth_step((0.25 - np.abs(t)) / 0.125)


def _generic_window(k: int):
    def ev(xi):
        r = np.linalg.norm(xi, axis=-1)
        out = _rho_generic(r / 2.0**k)
        if k > 0:
            out = out - _rho_generic(r / 2.0 ** (k - 1))
        return out
    return ev


def _sharp_window(l: int):
    def ev(xi):
        _, lr = _log2_radius(xi)
        out = _rho_sharp(lr - l)
        if l > 0:
            out = out - _rho_sharp(lr - (l - 1))
        return out
    return ev


def _tilde_window(l: int):
    def ev(xi):
        _, lr = _log2_radius(xi)
        if l == 0:
            return np.where(lr <= 0.125, 1.0, _tilde_bump(lr))
        return _tilde_bump(lr - l)
    return ev


@dataclass(frozen=True)
class WindowFamily:
    """Windows psi_0..psi_K with their support and plateau annuli.

    ``supports[k]`` and ``plateaus[k]`` are closed radial intervals
    ``(lo, hi)``; a plateau of ``None`` means the window has none.
    ``coverage`` is the radius up to which the windows sum to one (``None``
    for families that are not partitions).
    """

    kind: str
    windows: tuple[SpectrumSampler, ...]
    supports: tuple[tuple[float, float], ...]
    plateaus: tuple[tuple[float, float] | None, ...]
    coverage: float | None
    params: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.windows) - 1

    def __getitem__(self, k: int) -> SpectrumSampler:
        return self.windows[k]

    def __len__(self) -> int:
        return len(self.windows)

    def total(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape[:-1])
        for w in self.windows:
            out = out + w(xi)
        return out

    def without(self, k: int) -> "WindowFamily":
        """Copy with window k replaced by zero (used to exercise gap detection)."""
        zero = SpectrumSampler(lambda xi: np.zeros(np.shape(xi)[:-1]), name="zero")
        ws = list(self.windows)
        ws[k] = zero
        return WindowFamily(self.kind, tuple(ws), self.supports, self.plateaus,
                            self.coverage, dict(self.params, removed=k))


def make_lp_family(kind: str, K: int) -> WindowFamily:
    """Build a dyadic window family.

    kind = 'generic_lp'       psi_0 = rho(|xi|), psi_k = rho(2^-k |xi|) - rho(2^-(k-1) |xi|),
                               rho = 1 on [0,1], 0 on [2, inf).
    kind = 'sharp_lp'         psi_l equal to 1 on 2^(l-1/4) <= |xi| <= 2^(l+1/4),
                               supported in 2^(l-3/4) <= |xi| <= 2^(l+3/4).
    kind = 'sharp_lp_tilde'   bumps equal to 1 on 2^(l-1/8) <= |xi| <= 2^(l+1/8),
                               supported in 2^(l-1/4) <= |xi| <= 2^(l+1/4); not a partition.
    """
    if not isinstance(K, (int, np.integer)) or K < 0:
        raise ValidationError(f"K must be a non-negative integer, got {K!r}", "K")
    K = int(K)
    if K > 40:
        raise ValidationError("K larger than 40 is not supported", "K")
    if kind == "generic_lp":
        ws, sup, pla = [], [], []
        for k in range(K + 1):
            ws.append(SpectrumSampler(_generic_window(k), 2.0 ** (k + 1), f"psi_{k}"))
            sup.append((0.0 if k == 0 else 2.0 ** (k - 1), 2.0 ** (k + 1)))
            pla.append((0.0, 1.0) if k == 0 else None)
        return WindowFamily(kind, tuple(ws), tuple(sup), tuple(pla), 2.0**K, {"K": K})
    if kind == "sharp_lp":
        ws, sup, pla = [], [], []
        for l in range(K + 1):
            ws.append(SpectrumSampler(_sharp_window(l), 2.0 ** (l + 0.75), f"psi_{l}"))
            sup.append((0.0 if l == 0 else 2.0 ** (l - 0.75), 2.0 ** (l + 0.75)))
            pla.append((0.0 if l == 0 else 2.0 ** (l - 0.25), 2.0 ** (l + 0.25)))
        return WindowFamily(kind, tuple(ws), tuple(sup), tuple(pla), 2.0 ** (K + 0.25), {"K": K})
    if kind == "sharp_lp_tilde":
        ws, sup, pla = [], [], []
        for l in range(K + 1):
            ws.append(SpectrumSampler(_tilde_window(l), 2.0 ** (l + 0.25), f"psi_tilde_{l}"))
            sup.append((0.0 if l == 0 else 2.0 ** (l - 0.25), 2.0 ** (l + 0.25)))
            pla.append((0.0 if l == 0 else 2.0 ** (l - 0.125), 2.0 ** (l + 0.125)))
        return WindowFamily(kind, tuple(ws), tuple(sup), tuple(pla), None, {"K": K})
    raise ValidationError(f"unknown family kind {kind!r}", "kind")


# --- uniform windows -------------------------------------------------------

def _partition_bump_1d(t: np.ndarray) -> np.ndarray:
    """phi_1(t) = S(1 - |t|): supported in [-1, 1] and sum_nu phi_1(t - nu) = 1."""
    return smooth_step(1.0 - np.abs(t), UNIFORM_SHARPNESS)


def _plateau_1d(t: np.ndarray, plateau: float, support: float) -> np.ndarray:
    return smooth_step((support - np.abs(t)) / (support - plateau))


def _small_bump_1d(t: np.ndarray, width: float) -> np.ndarray:
    return smooth_step(1.0 - np.abs(t) / width)


@dataclass(frozen=True)
class UniformWindow:
    """Tensor-product window phi(xi) = prod_i w(xi_i) on R^n.

    ``support_box`` is the half side of the closed cube outside which the
    window vanishes; ``plateau_box`` the half side of the cube where it is 1.
    """

    kind: str
    variant: str
    profile: object  # 1-D callable
    support_box: float
    plateau_box: float | None = None
    amplitude: float = 1.0
    params: dict = field(default_factory=dict)

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = self.profile(xi[..., 0])
        for i in range(1, xi.shape[-1]):
            out = out * self.profile(xi[..., i])
        return out * self.amplitude ** xi.shape[-1]

    def profile_1d(self, t) -> np.ndarray:
        return self.amplitude * self.profile(np.asarray(t, dtype=float))

    @property
    def support_radius(self) -> float:
        return self.support_box

    def sampler(self) -> SpectrumSampler:
        return SpectrumSampler(self.__call__, None, f"{self.kind}_{self.variant}")

    def integral_1d(self) -> float:
        val, _ = integrate.quad(lambda t: float(self.profile_1d(t)), -self.support_box,
                                self.support_box, limit=200, epsabs=1e-14, epsrel=1e-13)
        return val


def _s4_amplitude(width: float = 0.25, target: float = 1.1) -> float:
    """Amplitude making the inverse transform of the s4 bump >= target on [-1, 1].

    For |x| <= 1 and |xi| <= 1/4, cos(x xi) decreases in |x|, so the minimum is at |x| = 1.
    """
    val, _ = integrate.quad(lambda t: float(_small_bump_1d(np.array(t), width)) * math.cos(t),
                            -width, width, limit=200, epsabs=1e-15)
    return target * 2 * math.pi / val


def make_uniform_window(kind: str, variant: str = "s3") -> UniformWindow:
    """Windows attached to the unit lattice.

    ============  ========  =====================================================
    kind          variant   properties
    ============  ========  =====================================================
    phi           s3        supp in [-1,1]^n, sum over Z^n of translates is 1
    phi_tilde     s3        1 on [-1,1]^n, supp in [-3,3]^n
    phi           s4        supp in [-1/4,1/4]^n, inverse transform >= 1 on [-1,1]^n
    phi_tilde     s4        1 on [-1/4,1/4]^n, supp in [-1/2,1/2]^n
    kappa_wiener  s3        supp in [-1,1]^n, translates sum to 1
    ============  ========  =====================================================
    """
    if variant not in ("s3", "s4"):
        raise ValidationError(f"variant must be 's3' or 's4', got {variant!r}", "variant")
    if kind in ("phi", "kappa_wiener") and variant == "s3":
        return UniformWindow(kind, variant, _partition_bump_1d, 1.0, None)
    if kind == "kappa_wiener":
        raise ValidationError("kappa_wiener only exists as variant s3", "variant")
    if kind == "phi_tilde" and variant == "s3":
        return UniformWindow(kind, variant, lambda t: _plateau_1d(t, 1.0, 3.0), 3.0, 1.0)
    if kind == "phi" and variant == "s4":
        amp = _s4_amplitude()
        return UniformWindow(kind, variant, lambda t: _small_bump_1d(t, 0.25), 0.25, None, amp,
                             {"target_min": 1.1})
    if kind == "phi_tilde" and variant == "s4":
        return UniformWindow(kind, variant, lambda t: _plateau_1d(t, 0.25, 0.5), 0.5, 0.25)
    raise ValidationError(f"unknown window kind {kind!r}", "kind")


# --- verification ----------------------------------------------------------

@dataclass
class Check:
    name: str
    deviation: float
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    subject: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def add(self, name, deviation, passed, **detail):
        self.checks.append(Check(name, float(deviation), bool(passed), detail))

    def to_dict(self) -> dict:
        return {"subject": self.subject, "passed": self.passed,
                "checks": [{"name": c.name, "deviation": c.deviation, "passed": c.passed,
                            "detail": c.detail} for c in self.checks]}


def _sample_freqs(radius: float, n: int, count: int) -> np.ndarray:
    """Grid frequencies of a lattice (1/T)Z^n inside the ball of ``radius``."""
    side = int(math.ceil(count ** (1.0 / n)))
    T = max(side / (2 * radius), 1e-9)
    # power of two scale keeps dyadic radii on the lattice
    T = 2.0 ** math.ceil(math.log2(T))
    axis = np.arange(-math.floor(radius * T), math.floor(radius * T) + 1) / T
    pts = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return pts[np.linalg.norm(pts, axis=-1) <= radius]


def verify_partition(obj, n: int = 1, tol: float = 1e-12, samples: int = 10_000,
                     derivative_orders=(1, 2), tilde: WindowFamily | None = None) -> VerificationReport:
    """Check the defining properties of a window family or uniform window.

    For families: partition of unity (up to the coverage radius), support
    and plateau containment on lattice frequencies, dilation-uniform
    derivative bounds, and for 'sharp_lp' the product relation with the
    tilde family.  For uniform windows: support, plateau, the translate sum
    or the lower bound of the inverse transform.
    """
    if isinstance(obj, WindowFamily):
        return _verify_family(obj, n, tol, samples, derivative_orders, tilde)
    if isinstance(obj, UniformWindow):
        return _verify_uniform(obj, n, tol)
    raise ValidationError("verify_partition expects a WindowFamily or UniformWindow", "obj")


def _verify_family(fam, n, tol, samples, orders, tilde) -> VerificationReport:
    rep = VerificationReport(f"{fam.kind} K={fam.K}")
    top = fam.supports[-1][1]
    pts = _sample_freqs(top * 1.05, n, samples)
    r = np.linalg.norm(pts, axis=-1)
    vals = np.stack([w(pts) for w in fam.windows])

    if fam.coverage is not None:
        inside = r <= fam.coverage
        dev = np.abs(vals[:, inside].sum(axis=0) - 1.0)
        i = int(np.argmax(dev)) if dev.size else 0
        where = pts[inside][i].tolist() if dev.size else None
        rep.add("partition_of_unity", dev.max(initial=0.0), dev.max(initial=0.0) <= tol,
                worst_frequency=where, samples=int(inside.sum()))

    sup_dev, pla_dev = 0.0, 0.0
    bad_sup, bad_pla = [], []
    for k, (lo, hi) in enumerate(fam.supports):
        outside = (r < lo) | (r > hi)
        m = np.abs(vals[k, outside]).max(initial=0.0)
        if m > 0:
            bad_sup.append(k)
        sup_dev = max(sup_dev, m)
        pl = fam.plateaus[k]
        if pl is not None:
            inside = (r >= pl[0]) & (r <= pl[1])
            m = np.abs(vals[k, inside] - 1.0).max(initial=0.0)
            if m > 0:
                bad_pla.append(k)
            pla_dev = max(pla_dev, m)
    rep.add("support_containment", sup_dev, sup_dev == 0.0, failing=bad_sup)
    rep.add("plateau", pla_dev, pla_dev == 0.0, failing=bad_pla)

    if fam.kind == "generic_lp" and fam.K >= 2:
        for a in orders:
            consts = derivative_constants(fam, a)
            # k = 0 has a different profile, uniformity is over the dilated windows
            c = np.array(consts[1:])
            spread = c.max() / c.min() - 1.0 if c.min() > 0 else math.inf
            # the spread only reflects the resolution of the fixed sampling grid
            rep.add(f"derivative_order_{a}", spread, spread <= 1e-3, constants=consts)

    if fam.kind == "sharp_lp":
        tf = tilde if tilde is not None else make_lp_family("sharp_lp_tilde", fam.K)
        worst = 0.0
        for k in range(fam.K + 1):
            for l in range(min(fam.K, tf.K) + 1):
                prod = vals[k] * tf[l](pts)
                target = tf[l](pts) if k == l else 0.0
                worst = max(worst, float(np.abs(prod - target).max()))
        rep.add("product_with_tilde", worst, worst == 0.0)
        norms = tilde_l1_norms(tf)
        # psi_tilde_0 has its own profile; the dilated ones must agree
        dil = norms[1:] or norms
        rep.add("tilde_l1_bounded", max(dil) / min(dil) - 1.0,
                max(dil) / min(dil) < 1.0 + 1e-3, l1_norms=norms)
    return rep


def derivative_constants(fam: WindowFamily, order: int, points: int | None = None) -> list[float]:
    """sup |d^order/dt^order psi_k(t e_1)| * 2^(k*order) for every k.

    Derivatives are computed spectrally, each window on a periodic grid whose
    length is a power of two adapted to its support, with a fixed number of
    points, so the dilated windows are sampled at the dilated nodes.
    """
    M = points or 8192
    out = []
    for k, w in enumerate(fam.windows):
        L = 2.0 ** math.ceil(math.log2(fam.supports[k][1] * 1.25))
        t = (np.arange(M) - M // 2) * (2 * L / M)
        omega = np.fft.fftfreq(M, d=2 * L / M) * 2 * math.pi
        v = w(t[:, None])
        d = np.fft.ifft(np.fft.fft(v) * (1j * omega) ** order).real
        out.append(float(np.abs(d).max() * 2.0 ** (k * order)))
    return out


def tilde_l1_norms(tf: WindowFamily, points: int = 2**16) -> list[float]:
    """L^1 norms of the inverse transforms of the tilde windows (1-D).

    Each window is sampled on a grid adapted to its own scale (the norm is
    dilation invariant, so only resolution matters).
    """
    out = []
    for l, w in enumerate(tf.windows):
        top = tf.supports[l][1]
        spec = GridSpec(1, points, 400.0 / top)
        vals = w.on_grid(spec)
        x = np.fft.ifft(vals) / spec.dx
        out.append(float(np.sum(np.abs(x)) * spec.dx))
    return out


def _verify_uniform(win: UniformWindow, n: int, tol: float) -> VerificationReport:
    rep = VerificationReport(f"{win.kind} {win.variant}")
    h = 1.0 / 64
    span = win.support_box + 1.0
    axis = np.arange(-span, span + h / 2, h)
    pts = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    vals = win(pts)
    sup = np.abs(pts).max(axis=-1)
    out = np.abs(vals[sup > win.support_box]).max(initial=0.0)
    rep.add("support_containment", out, out == 0.0, support_box=win.support_box)
    if win.plateau_box is not None:
        dev = np.abs(vals[sup <= win.plateau_box] - 1.0).max(initial=0.0)
        rep.add("plateau", dev, dev == 0.0, plateau_box=win.plateau_box)
    if win.kind in ("phi", "kappa_wiener") and win.variant == "s3":
        rng = np.random.default_rng(0)
        xi = rng.uniform(-4, 4, size=(2000, n))
        total = np.zeros(len(xi))
        base = np.floor(xi).astype(int)
        offs = np.stack(np.meshgrid(*([np.arange(-1, 3)] * n), indexing="ij"), -1).reshape(-1, n)
        for o in offs:
            total += win(xi - (base + o))
        dev = np.abs(total - 1.0).max()
        rep.add("translate_sum", dev, dev <= tol)
    if win.kind == "phi" and win.variant == "s4":
        lo = fourier_lower_bound(win, n)
        rep.add("inverse_transform_lower_bound", max(0.0, 1.0 - lo), lo >= 1.0, minimum=lo)
    return rep


def fourier_lower_bound(win: UniformWindow, n: int = 1, samples: int = 201) -> float:
    """min over [-1,1]^n of the real part of the inverse transform of a tensor window."""
    xs = np.linspace(-1.0, 1.0, samples)
    vals = []
    for x in xs:
        re, _ = integrate.quad(lambda t: float(win.profile_1d(t)) * math.cos(x * t),
                               -win.support_box, win.support_box, limit=200, epsabs=1e-14)
        vals.append(re / (2 * math.pi))
    return float(min(vals)) ** n
