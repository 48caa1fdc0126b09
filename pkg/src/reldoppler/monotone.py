"""Strictly increasing maps of [0, 1) into itself, with numeric inverses.

A :class:`MonotoneMap` is either tabulated (knots joined by a monotone
piecewise cubic or by straight lines) or analytic (a closed-form callable,
optionally with a closed-form inverse). Both kinds evaluate and invert through
the same interface, so the kinematics code never needs to know which one it
holds.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BisectionError, DomainError, MonotonicityError

ArrayLike = float | np.ndarray

_BISECT_ITERS = 200


def pchip_slopes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Knot derivatives of the shape-preserving (Fritsch-Butland) cubic.

    Interior slopes are weighted harmonic means of the adjacent secants and
    vanish where the data has a local extremum; end slopes use the
    one-sided three-point formula, limited so the end segments stay monotone.
    """
    h = np.diff(x)
    delta = np.diff(y) / h
    n = x.size
    if n == 2:
        return np.array([delta[0], delta[0]])

    d = np.zeros(n)
    w1 = 2.0 * h[1:] + h[:-1]
    w2 = h[1:] + 2.0 * h[:-1]
    same = delta[:-1] * delta[1:] > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        hm = (w1 + w2) / (w1 / delta[:-1] + w2 / delta[1:])
    d[1:-1] = np.where(same, hm, 0.0)
    d[0] = _edge_slope(h[0], h[1], delta[0], delta[1])
    d[-1] = _edge_slope(h[-1], h[-2], delta[-1], delta[-2])
    return d


def _edge_slope(h0: float, h1: float, m0: float, m1: float) -> float:
    d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1)
    if np.sign(d) != np.sign(m0):
        return 0.0
    if np.sign(m0) != np.sign(m1) and abs(d) > abs(3.0 * m0):
        return 3.0 * m0
    return d


def _hermite(y0, y1, d0, d1, h, t):
    t2 = t * t
    t3 = t2 * t
    return (
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
    )


def bisect_increasing(
    func: Callable[[np.ndarray], np.ndarray],
    target: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
) -> np.ndarray:
    """Vectorized bisection for ``func(x) = target`` with ``func`` increasing.

    Runs until every bracket has collapsed to adjacent floats (or
    ``_BISECT_ITERS`` halvings), so the result is as precise as the callable
    allows.
    """
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    f_lo = func(lo) - target
    f_hi = func(hi) - target
    if np.any(f_lo > 0) or np.any(f_hi < 0):
        raise BisectionError("target is not bracketed by the search interval")
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi)
        if not np.any(active):
            break
        below = func(mid) < target
        lo = np.where(active & below, mid, lo)
        hi = np.where(active & ~below, mid, hi)
    # return whichever end of the final bracket is closer in value
    f_lo = np.abs(func(lo) - target)
    f_hi = np.abs(func(hi) - target)
    return np.where(f_lo <= f_hi, lo, hi)


class MonotoneMap:
    """Continuous strictly increasing map from [0, 1) into [0, 1).

    Use the constructor for tabulated maps and :meth:`analytic` for
    closed-form ones. Calling the map evaluates it; :meth:`inverse` solves
    ``map(x) = y``.

    Args:
        x: knot abscissae, strictly increasing, starting at 0.
        y: knot ordinates, strictly increasing, starting at 0.
        kind: ``"pchip"`` (monotone C1 cubic) or ``"linear"``.
    """

    def __init__(self, x: Sequence[float], y: Sequence[float], kind: str = "pchip"):
        x = np.array(x, dtype=float)
        y = np.array(y, dtype=float)
        if kind not in ("pchip", "linear"):
            raise ValueError(f"unknown interpolation kind {kind!r}")
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("need two equally long 1-d knot arrays with at least 2 knots")
        if x[0] != 0.0 or y[0] != 0.0:
            raise ValueError("first knot must be (0, 0)")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0):
            raise MonotonicityError("knots must be strictly increasing in x and y")
        if x[-1] >= 1.0 or y[-1] >= 1.0:
            raise DomainError("knots must lie in [0, 1) x [0, 1)")
        self.kind = kind
        self._x = x
        self._y = y
        self._d = pchip_slopes(x, y) if kind == "pchip" else None
        self._forward = None
        self._backward = None
        self._hull = (0.0, float(x[-1]))
        self._closed_hull = True
        self._rapidity = self._rapidity_inverse = None

    @classmethod
    def analytic(
        cls,
        forward: Callable[[np.ndarray], np.ndarray],
        inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        hull: tuple[float, float] = (0.0, 1.0),
        knots: Optional[tuple[Sequence[float], Sequence[float]]] = None,
        name: str = "analytic",
        rapidity: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        rapidity_inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> "MonotoneMap":
        """Wrap a closed-form increasing callable.

        ``hull`` is half-open, ``[lo, hi)``. Without ``inverse`` the map is
        inverted by bisection over the hull. ``knots`` is an optional
        tabulation kept only for export.

        ``rapidity`` computes ``artanh(forward(x))`` directly and
        ``rapidity_inverse`` undoes it. Supplying both keeps laws built on the
        map accurate where ``forward`` rounds to 1.
        """
        if (rapidity is None) != (rapidity_inverse is None):
            raise ValueError("rapidity and rapidity_inverse go together")
        obj = cls.__new__(cls)
        obj.kind = "analytic"
        obj.name = name
        obj._forward = forward
        obj._backward = inverse
        obj._rapidity = rapidity
        obj._rapidity_inverse = rapidity_inverse
        obj._hull = (float(hull[0]), float(hull[1]))
        obj._closed_hull = False
        obj._d = None
        if knots is not None:
            obj._x = np.asarray(knots[0], dtype=float)
            obj._y = np.asarray(knots[1], dtype=float)
        else:
            obj._x = obj._y = None
        return obj

    @classmethod
    def identity(cls) -> "MonotoneMap":
        return cls.analytic(lambda b: b, lambda t: t, name="identity")

    @property
    def hull(self) -> tuple[float, float]:
        return self._hull

    @property
    def knots(self) -> Optional[np.ndarray]:
        """Knots as an ``(n, 2)`` array, or None for a bare analytic map."""
        if self._x is None:
            return None
        return np.column_stack([self._x, self._y])

    def __repr__(self) -> str:
        if self.kind == "analytic":
            return f"MonotoneMap.analytic(name={self.name!r}, hull={self._hull})"
        return f"MonotoneMap(kind={self.kind!r}, n_knots={self._x.size})"

    def _check_x(self, x: np.ndarray) -> None:
        lo, hi = self._hull
        bad = (x < lo) | (x > hi) if self._closed_hull else (x < lo) | (x >= hi)
        if np.any(bad) or np.any(np.isnan(x)):
            raise DomainError(f"argument outside the map's hull {self._hull}")

    def __call__(self, x: ArrayLike) -> ArrayLike:
        xa = np.asarray(x, dtype=float)
        self._check_x(xa)
        if self.kind == "analytic":
            out = np.asarray(self._forward(xa), dtype=float)
        else:
            out = self._eval_knots(xa)
        return out if out.ndim else float(out)

    def _eval_knots(self, x: np.ndarray) -> np.ndarray:
        xk, yk = self._x, self._y
        i = np.clip(np.searchsorted(xk, x, side="right") - 1, 0, xk.size - 2)
        h = xk[i + 1] - xk[i]
        t = (x - xk[i]) / h
        if self.kind == "linear":
            return yk[i] + t * (yk[i + 1] - yk[i])
        return _hermite(yk[i], yk[i + 1], self._d[i], self._d[i + 1], h, t)

    def inverse(self, y: ArrayLike) -> ArrayLike:
        """Solve ``self(x) = y`` for x."""
        ya = np.asarray(y, dtype=float)
        if self.kind == "analytic":
            out = self._inverse_analytic(ya)
        else:
            if np.any(ya < self._y[0]) or np.any(ya > self._y[-1]) or np.any(np.isnan(ya)):
                raise DomainError("value outside the range of the tabulated map")
            out = self._inverse_knots(ya)
        return out if out.ndim else float(out)

    @property
    def has_rapidity(self) -> bool:
        """Whether the map carries an exact rapidity ``artanh(map(x))``."""
        return self._rapidity is not None

    def rapidity(self, x: ArrayLike) -> ArrayLike:
        """``artanh(self(x))``, exact when the map was built with a rapidity."""
        xa = np.asarray(x, dtype=float)
        self._check_x(xa)
        if self._rapidity is not None:
            out = np.asarray(self._rapidity(xa), dtype=float)
        else:
            out = np.arctanh(np.asarray(self(xa), dtype=float))
        return out if out.ndim else float(out)

    def from_rapidity(self, r: ArrayLike) -> ArrayLike:
        """Solve ``artanh(self(x)) = r`` for x."""
        ra = np.asarray(r, dtype=float)
        if np.any(ra < 0) or np.any(~np.isfinite(ra)):
            raise DomainError("rapidity must be finite and non-negative")
        if self._rapidity_inverse is not None:
            out = np.asarray(self._rapidity_inverse(ra), dtype=float)
        else:
            out = np.asarray(self.inverse(np.tanh(ra)), dtype=float)
        return out if out.ndim else float(out)

    def _inverse_analytic(self, y: np.ndarray) -> np.ndarray:
        if self._backward is not None:
            if np.any(y < 0) or np.any(y >= 1) or np.any(np.isnan(y)):
                raise DomainError("value outside [0, 1)")
            return np.asarray(self._backward(y), dtype=float)
        lo, hi = self._hull
        top = np.nextafter(hi, lo)
        f_top = np.asarray(self._forward(np.asarray(top)), dtype=float)
        if np.any(y < self._forward(np.asarray(lo))) or np.any(y > f_top):
            raise DomainError("value outside the range of the analytic map")
        return bisect_increasing(lambda s: np.asarray(self._forward(s), dtype=float), y, lo, top)

    def _inverse_knots(self, y: np.ndarray) -> np.ndarray:
        xk, yk = self._x, self._y
        i = np.clip(np.searchsorted(yk, y, side="right") - 1, 0, yk.size - 2)
        h = xk[i + 1] - xk[i]
        if self.kind == "linear":
            return xk[i] + h * (y - yk[i]) / (yk[i + 1] - yk[i])
        y0, y1, d0, d1 = yk[i], yk[i + 1], self._d[i], self._d[i + 1]
        t = bisect_increasing(lambda s: _hermite(y0, y1, d0, d1, h, s), y,
                              np.zeros_like(y), np.ones_like(y))
        return xk[i] + t * h


def random_monotone_map(
    rng: np.random.Generator,
    n_knots: int,
    kind: str = "pchip",
    body: float = 0.9,
) -> MonotoneMap:
    """Random strictly increasing map with ``n_knots`` random interior knots.

    Knot gaps are drawn in both coordinates from U(0.5, 1.5) and rescaled to
    fill ``[0, body]``, so secant slopes stay within a factor 9 of each other.
    Above ``body`` the map follows the identity through fixed knots at 0.95,
    0.99 and 1 - 1e-9; this keeps compositions of grid speeds up to 0.99
    inside the knot hull.
    """
    if n_knots < 1:
        raise ValueError("n_knots must be positive")
    gx = rng.uniform(0.5, 1.5, n_knots + 1)
    gy = rng.uniform(0.5, 1.5, n_knots + 1)
    x = np.concatenate([[0.0], np.cumsum(gx) / gx.sum() * body])
    y = np.concatenate([[0.0], np.cumsum(gy) / gy.sum() * body])
    tail = np.array([0.95, 0.99, 1.0 - 1e-9])
    return MonotoneMap(np.concatenate([x, tail]), np.concatenate([y, tail]), kind=kind)
