"""Closed-form Doppler and velocity-composition laws in c-normalized form.

Every speed is a fraction beta = v / c of the speed of light, so
``0 <= beta < 1``. The functions accept Python floats or numpy arrays
(broadcasting like ufuncs) and return the same kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .monotone import ArrayLike, MonotoneMap

BETA_GRID_MAX = 1.0 - 1e-9
_BELOW_ONE = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class SpeedFraction:
    """A speed as a fraction of c, in [0, 1)."""

    beta: float

    def __post_init__(self):
        b = float(self.beta)
        if not 0.0 <= b < 1.0:
            raise DomainError(f"speed fraction must lie in [0, 1), got {b!r}")
        object.__setattr__(self, "beta", b)

    def __float__(self) -> float:
        return self.beta

    def to_text(self) -> str:
        return repr(self.beta)

    @classmethod
    def from_text(cls, text: str) -> "SpeedFraction":
        return cls(float(text))


@dataclass(frozen=True)
class Wavelength:
    """A positive wavelength in arbitrary length units."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not v > 0.0 or not np.isfinite(v):
            raise DomainError(f"wavelength must be positive and finite, got {v!r}")
        object.__setattr__(self, "value", v)

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class Exponent:
    """A positive exponent of a power-law Doppler factor."""

    xi: float

    def __post_init__(self):
        x = float(self.xi)
        if not x > 0.0 or not np.isfinite(x):
            raise DomainError(f"exponent must be positive and finite, got {x!r}")
        object.__setattr__(self, "xi", x)

    def __float__(self) -> float:
        return self.xi


def _beta(b) -> np.ndarray:
    a = np.asarray(float(b) if isinstance(b, SpeedFraction) else b, dtype=float)
    if np.any(~(a >= 0.0)) or np.any(a >= 1.0):
        raise DomainError("speed fraction must lie in [0, 1)")
    return a


def _lam(x) -> np.ndarray:
    a = np.asarray(float(x) if isinstance(x, Wavelength) else x, dtype=float)
    if np.any(~(a > 0.0)) or np.any(~np.isfinite(a)):
        raise DomainError("wavelength must be positive and finite")
    return a


def _xi(x) -> float:
    return Exponent(float(x)).xi


def _out(a: np.ndarray) -> ArrayLike:
    return a if a.ndim else float(a)


def doppler_de(lam, beta) -> ArrayLike:
    """Relativistic Doppler law, ``lam * sqrt((1 - beta) / (1 + beta))``."""
    lam, b = _lam(lam), _beta(beta)
    return _out(lam * np.sqrt((1.0 - b) / (1.0 + b)))


def doppler_star(lam, beta, xi) -> ArrayLike:
    """Doppler law with a free exponent, ``lam * ((1 - beta) / (1 + beta))**xi``."""
    lam, b = _lam(lam), _beta(beta)
    return _out(lam * ((1.0 - b) / (1.0 + b)) ** _xi(xi))


def doppler_general(lam, beta, u: MonotoneMap, xi) -> ArrayLike:
    """Doppler law through a speed map: ``lam * ((1 - u(beta)) / (1 + u(beta)))**xi``.

    Maps that carry a rapidity are evaluated as ``lam * exp(-2 xi artanh u)``.
    Raises DomainError if beta lies outside u's hull.
    """
    lam, b = _lam(lam), _beta(beta)
    xi = _xi(xi)
    if u.has_rapidity:
        return _out(lam * np.exp(-2.0 * xi * np.asarray(u.rapidity(b), dtype=float)))
    ub = np.asarray(u(b), dtype=float)
    return _out(lam * ((1.0 - ub) / (1.0 + ub)) ** xi)


def lorentz_fitzgerald(lam, beta) -> ArrayLike:
    """Length-contraction law ``lam * sqrt(1 - beta**2)``."""
    lam, b = _lam(lam), _beta(beta)
    return _out(lam * np.sqrt((1.0 - b) * (1.0 + b)))


def velocity_add_av(v, w) -> ArrayLike:
    """Einstein addition of collinear speeds, ``(v + w) / (1 + v w)``."""
    v, w = _beta(v), _beta(w)
    return _out(np.minimum((v + w) / (1.0 + v * w), _BELOW_ONE))


def velocity_add_general(v, w, u: MonotoneMap) -> ArrayLike:
    """Einstein addition conjugated by u: ``u^-1(av(u(v), u(w)))``.

    Maps that carry a rapidity add rapidities instead.
    """
    v, w = _beta(v), _beta(w)
    if u.has_rapidity:
        r = np.asarray(u.rapidity(v), dtype=float) + np.asarray(u.rapidity(w), dtype=float)
        return _out(np.asarray(u.from_rapidity(r), dtype=float))
    uv = np.asarray(u(v), dtype=float)
    uw = np.asarray(u(w), dtype=float)
    t = np.minimum((uv + uw) / (1.0 + uv * uw), _BELOW_ONE)
    return _out(np.asarray(u.inverse(t), dtype=float))


def velocity_add_perp(v, w) -> ArrayLike:
    """Composition of perpendicular speeds, ``sqrt(v^2 + w^2 - v^2 w^2)``."""
    v, w = _beta(v), _beta(w)
    s = v * v + w * w * ((1.0 - v) * (1.0 + v))
    return _out(np.sqrt(np.minimum(s, _BELOW_ONE)))


def u_lf(beta) -> ArrayLike:
    """Speed map that turns the general Doppler law into length contraction."""
    b = _beta(beta)
    b2 = b * b
    return _out(b2 / (2.0 - b2))


def u_lf_inverse(t) -> ArrayLike:
    """Inverse of :func:`u_lf`, ``sqrt(2 t / (1 + t))``."""
    t = _beta(t)
    return _out(np.sqrt(2.0 * t / (1.0 + t)))


def u_lf_map() -> MonotoneMap:
    """:func:`u_lf` as an analytic :class:`MonotoneMap`."""
    return MonotoneMap.analytic(
        u_lf, u_lf_inverse, name="u_lf",
        rapidity=lambda b: -0.5 * np.log1p(-b * b),
        rapidity_inverse=lambda r: np.sqrt(-np.expm1(-2.0 * r)),
    )


@dataclass(frozen=True)
class DopplerLaw:
    """Black-box Doppler law ``(lam, beta) -> observed wavelength``."""

    func: Callable[..., ArrayLike] = field(repr=False)
    tag: str = "doppler"

    def __call__(self, lam, beta) -> ArrayLike:
        return self.func(lam, beta)


@dataclass(frozen=True)
class CompositionLaw:
    """Black-box velocity composition ``(beta1, beta2) -> beta3``."""

    func: Callable[..., ArrayLike] = field(repr=False)
    tag: str = "composition"

    def __call__(self, v, w) -> ArrayLike:
        return self.func(v, w)


DE = DopplerLaw(doppler_de, "de")
LF = DopplerLaw(lorentz_fitzgerald, "lf")
AV = CompositionLaw(velocity_add_av, "av")
ASTAR = CompositionLaw(velocity_add_perp, "astar")


def dstar_law(xi) -> DopplerLaw:
    xi = _xi(xi)
    return DopplerLaw(lambda lam, b: doppler_star(lam, b, xi), f"dstar(xi={xi!r})")


def general_doppler_law(u: MonotoneMap, xi) -> DopplerLaw:
    xi = _xi(xi)
    return DopplerLaw(lambda lam, b: doppler_general(lam, b, u, xi), f"dgen(xi={xi!r})")


def general_composition_law(u: MonotoneMap) -> CompositionLaw:
    return CompositionLaw(lambda v, w: velocity_add_general(v, w, u), "agen")
