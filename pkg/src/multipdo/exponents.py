"""Exact exponent arithmetic for Lebesgue/Besov/Hardy parameter profiles.

Exponents are stored through their reciprocal 1/p as a ``Fraction`` (0 for
p = inf), so every derived quantity below is an exact rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import ContractError, ValidationError

INF_TOKENS = {"inf", "infinity", "oo", "∞", "+inf"}


def as_fraction(x, field: str = "value") -> Fraction:
    """Convert ints, floats, strings like '3/2' or Fractions to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ValidationError(f"{field}: boolean is not a number", field)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValidationError(f"{field}: must be finite, got {x}", field)
        # str() keeps the short decimal form, so 0.1 -> 1/10
        return Fraction(str(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"{field}: cannot parse {x!r} as a rational", field) from exc
    raise ValidationError(f"{field}: unsupported type {type(x).__name__}", field)


@dataclass(frozen=True)
class LebesgueExponent:
    """An exponent p in (0, inf], stored as inv = 1/p."""

    inv: Fraction

    def __post_init__(self):
        if self.inv < 0:
            raise ContractError("exponent must be positive", "p")

    @classmethod
    def parse(cls, value, field: str = "p") -> "LebesgueExponent":
        if isinstance(value, LebesgueExponent):
            return value
        if isinstance(value, str) and value.strip().lower() in INF_TOKENS:
            return cls(Fraction(0))
        if isinstance(value, float) and math.isinf(value) and value > 0:
            return cls(Fraction(0))
        p = as_fraction(value, field)
        if p <= 0:
            raise ContractError(f"{field}: exponent must be > 0, got {value!r}", field)
        return cls(1 / p)

    @property
    def is_inf(self) -> bool:
        return self.inv == 0

    @property
    def value(self):
        """p itself as a Fraction, or math.inf."""
        return math.inf if self.is_inf else 1 / self.inv

    def __float__(self) -> float:
        return math.inf if self.is_inf else float(1 / self.inv)

    def __str__(self) -> str:
        if self.is_inf:
            return "inf"
        return str(1 / self.inv)

    def __repr__(self) -> str:
        return f"LebesgueExponent({self})"


def parse_exponent(value, field: str = "p") -> LebesgueExponent:
    return LebesgueExponent.parse(value, field)


def conjugate(p) -> LebesgueExponent:
    """Hoelder conjugate, with p' = inf for every p <= 1."""
    p = parse_exponent(p)
    if p.inv >= 1:
        return LebesgueExponent(Fraction(0))
    return LebesgueExponent(1 - p.inv)


@dataclass(frozen=True)
class ExponentFunctionals:
    alpha: Fraction
    beta: Fraction
    theta: Fraction


def exponent_functionals(p, n: int) -> ExponentFunctionals:
    """alpha(p) = n/2 - min(n/2, n/p), beta(p) = n/2 - max(n/2, n/p), theta = n/2 - beta."""
    p = parse_exponent(p)
    _check_n(n)
    half = Fraction(n, 2)
    np_ = n * p.inv
    alpha = half - min(half, np_)
    beta = half - max(half, np_)
    return ExponentFunctionals(alpha, beta, half - beta)


def _check_n(n):
    if not isinstance(n, int) or n < 1:
        raise ContractError(f"dimension n must be a positive integer, got {n!r}", "n")


@dataclass(frozen=True)
class ExponentProfile:
    """Exponents of a multilinear estimate  prod_j B^{s_j}_{p_j,q_j} -> B^s_{p,q}."""

    N: int
    n: int
    p: LebesgueExponent
    p_j: tuple[LebesgueExponent, ...]
    q: LebesgueExponent
    q_j: tuple[LebesgueExponent, ...]
    s: Fraction
    s_j: tuple[Fraction, ...]

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 2:
            raise ContractError(f"N must be an integer >= 2, got {self.N!r}", "N")
        _check_n(self.n)
        for name in ("p_j", "q_j", "s_j"):
            if len(getattr(self, name)) != self.N:
                raise ContractError(f"{name} must have length N={self.N}", name)

    @classmethod
    def build(cls, N: int, n: int, p, p_j: Iterable, q="2", q_j: Iterable | None = None,
              s=0, s_j: Iterable | None = None) -> "ExponentProfile":
        p_j = tuple(parse_exponent(v, f"p_j[{i}]") for i, v in enumerate(p_j))
        q_j = tuple(parse_exponent(v, f"q_j[{i}]") for i, v in
                    enumerate(q_j if q_j is not None else ["2"] * len(p_j)))
        s_j = tuple(as_fraction(v, f"s_j[{i}]") for i, v in
                    enumerate(s_j if s_j is not None else [0] * len(p_j)))
        return cls(N, n, parse_exponent(p, "p"), p_j, parse_exponent(q, "q"), q_j,
                   as_fraction(s, "s"), s_j)

    @classmethod
    def from_dict(cls, d: dict) -> "ExponentProfile":
        allowed = {"N", "n", "p", "p_j", "q", "q_j", "s", "s_j"}
        unknown = set(d) - allowed
        if unknown:
            raise ValidationError(f"unknown profile keys: {sorted(unknown)}", sorted(unknown)[0])
        for key in ("N", "n", "p", "p_j"):
            if key not in d:
                raise ValidationError(f"profile is missing {key!r}", key)
        return cls.build(int(d["N"]), int(d["n"]), d["p"], d["p_j"], d.get("q", "2"),
                         d.get("q_j"), d.get("s", 0), d.get("s_j"))

    def to_dict(self) -> dict:
        return {"N": self.N, "n": self.n, "p": str(self.p), "p_j": [str(v) for v in self.p_j],
                "q": str(self.q), "q_j": [str(v) for v in self.q_j], "s": str(self.s),
                "s_j": [str(v) for v in self.s_j]}


def _maxhalf(p: LebesgueExponent, n: int) -> Fraction:
    return max(n * p.inv, Fraction(n, 2))


def critical_order(profile: ExponentProfile) -> Fraction:
    """m = min(n/p, n/2) - sum_j max(n/p_j, n/2) + sum_j s_j - s."""
    n = profile.n
    m = min(n * profile.p.inv, Fraction(n, 2))
    m -= sum((_maxhalf(pj, n) for pj in profile.p_j), Fraction(0))
    m += sum(profile.s_j, Fraction(0)) - profile.s
    return m


@dataclass(frozen=True)
class SmoothnessCheck:
    sufficient: bool
    necessary: bool
    margins: dict

    def to_dict(self) -> dict:
        return {"sufficient": self.sufficient, "necessary": self.necessary,
                "margins": {k: str(v) for k, v in self.margins.items()}}


def check_smoothness_conditions(profile: ExponentProfile) -> SmoothnessCheck:
    """Compare the smoothness indices with the boundedness thresholds.

    sufficient:  s_j < max(n/p_j, n/2) for all j  and  s > -max(n/p', n/2)
    necessary:   the same with non-strict inequalities.
    Margins are threshold - s_j and s + max(n/p', n/2) (positive means inside).
    """
    n = profile.n
    margins = {}
    for j, (pj, sj) in enumerate(zip(profile.p_j, profile.s_j), start=1):
        margins[f"s_{j}"] = _maxhalf(pj, n) - sj
    margins["s"] = profile.s + _maxhalf(conjugate(profile.p), n)
    vals = list(margins.values())
    return SmoothnessCheck(all(v > 0 for v in vals), all(v >= 0 for v in vals), margins)
