"""Recover the speed map u and the exponent xi from black-box laws.

The pipeline mirrors the constructive route from a Doppler law L and a
composition law (+) to the pair (u, xi):

1. :func:`extract_f` factors ``L(lam, beta) = lam * f(beta)``.
2. :func:`build_additive_rep` builds the coordinate ``phi`` in which (+)
   becomes ordinary addition, from dyadic halves and doubles of a unit speed.
3. :func:`fix_gauge` and :func:`recover_u` turn ``phi`` into
   ``u = tanh(k * phi)``.
4. xi follows from ``f = exp(-2 xi k phi)``.

(u, xi) is only determined up to ``(tanh(c * artanh u), xi / c)``; the gauge
is pinned by ``u(anchor) = anchor``. Only the rebuilt laws are gauge
invariant, so those are what the residuals measure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .axioms import DEFAULT_GRID, GridSpec
from .errors import (
    BisectionError,
    ConsistencyError,
    DomainError,
    FitError,
    HomogeneityError,
    MonotonicityError,
)
from .kinematics import (
    CompositionLaw,
    DopplerLaw,
    Exponent,
    SpeedFraction,
    doppler_general,
    velocity_add_general,
)
from .monotone import MonotoneMap

HOMOGENEITY_PROBES = (0.5, 3.0)
HOMOGENEITY_LIMIT = 1e-6


@dataclass
class FactorSamples:
    """Samples of the Doppler factor ``f(beta) = L(1, beta)``, starting at beta = 0."""

    betas: np.ndarray
    f_values: np.ndarray
    homogeneity_deviation: float = 0.0

    def __post_init__(self):
        self.betas = np.asarray(self.betas, dtype=float)
        self.f_values = np.asarray(self.f_values, dtype=float)
        if self.betas.shape != self.f_values.shape or self.betas.ndim != 1:
            raise ValueError("betas and f_values must be equally long 1-d arrays")
        if np.any(np.diff(self.betas) <= 0):
            raise MonotonicityError("betas must be strictly increasing")
        if np.any(self.betas < 0) or np.any(self.betas >= 1):
            raise DomainError("betas must lie in [0, 1)")


def extract_f(L: DopplerLaw, betas: Sequence[float],
              probes: Sequence[float] = HOMOGENEITY_PROBES) -> FactorSamples:
    """Sample ``f(beta) = L(1, beta)`` and check ``L(lam, beta) = lam f(beta)``.

    beta = 0 is prepended when missing. The worst relative deviation from
    homogeneity at the probe wavelengths (default 0.5 and 3) is stored on the
    result.

    Raises:
        HomogeneityError: if ``f(0)`` is not 1 or the homogeneity deviation
            exceeds 1e-6, i.e. L is not of the form ``lam * f(beta)``.
    """
    b = np.asarray(betas, dtype=float)
    if b.size == 0 or b[0] != 0.0:
        b = np.concatenate([[0.0], b])
    f = np.asarray(L(1.0, b), dtype=float)
    if abs(f[0] - 1.0) > 1e-12:
        raise HomogeneityError(f"L(1, 0) = {f[0]!r}; the law does not fix wavelengths at zero speed")
    dev = 0.0
    for lam in probes:
        scaled = np.asarray(L(lam, b), dtype=float)
        dev = max(dev, float(np.max(np.abs(scaled - lam * f) / (lam * f))))
    if dev > HOMOGENEITY_LIMIT:
        raise HomogeneityError(
            f"L(lam, beta) deviates from lam * L(1, beta) by {dev:.3g} (relative); "
            "the law is not of the factored form lam * f(beta)")
    if np.any(np.diff(f) >= 0):
        raise MonotonicityError("f = L(1, beta) must be strictly decreasing in beta")
    return FactorSamples(b, f, dev)


def fit_power_exponent(samples: FactorSamples,
                       max_residual: Optional[float] = 1e-8) -> tuple[Exponent, float]:
    """Fit ``f(beta) = ((1 - beta)/(1 + beta))**xi`` by least squares through
    the origin in log-log coordinates.

    beta = 0 carries no information (both logs vanish) and is skipped.
    Returns the exponent and the largest relative residual of ``f`` against
    the refitted curve.

    Raises:
        FitError: on non-positive f, a non-positive slope, or a residual above
            ``max_residual`` (pass None to disable the cap).
    """
    b, f = samples.betas, samples.f_values
    keep = b > 0
    b, f = b[keep], f[keep]
    if b.size == 0:
        raise FitError("need at least one sample with beta > 0")
    if np.any(f <= 0):
        raise FitError("Doppler factor samples must be positive")
    x = np.log((1.0 - b) / (1.0 + b))
    y = np.log(f)
    xi = float(np.dot(x, y) / np.dot(x, x))
    if not xi > 0:
        raise FitError(f"fitted exponent {xi!r} is not positive")
    resid = float(np.max(np.abs(np.exp(xi * x) - f) / f))
    if max_residual is not None and resid > max_residual:
        raise FitError(f"samples are not a power of (1-beta)/(1+beta): "
                       f"relative residual {resid:.3g} exceeds {max_residual:.3g}")
    return Exponent(xi), resid


def _solve_half(op: CompositionLaw, target: float) -> float:
    """Speed h with ``h (+) h == target``, by bisection on [0, target]."""
    lo, hi = 0.0, float(target)
    g_lo = float(op(lo, lo)) - target
    g_hi = float(op(hi, hi)) - target
    if not (g_lo < 0 < g_hi):
        raise BisectionError(
            f"h (+) h = {target!r} is not bracketed on [0, {target!r}]; "
            "the operation is not continuous and strictly increasing with identity 0")
    while True:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if float(op(mid, mid)) < target:
            lo = mid
        else:
            hi = mid
    return lo if abs(float(op(lo, lo)) - target) <= abs(float(op(hi, hi)) - target) else hi


def _quad_fraction(b0, bm, b1, beta):
    """Fraction t of one rung at ``beta``, from the quadratic t(beta) through
    (b0, 0), (bm, 1/2), (b1, 1)."""
    with np.errstate(invalid="ignore", divide="ignore"):
        d1 = 0.5 / (bm - b0)
        d12 = (0.5 / (b1 - bm) - d1) / (b1 - b0)
        t = (beta - b0) * (d1 + (beta - bm) * d12)
    return np.where(b1 > b0, t, 0.0)


def _quad_speed(b0, bm, b1, t):
    """Speed at rung fraction t, from the quadratic beta(t) through
    (0, b0), (1/2, bm), (1, b1)."""
    return b0 + 2.0 * t * (bm - b0) + 2.0 * t * (t - 0.5) * (b1 - 2.0 * bm + b0)


@dataclass
class AdditiveRep:
    """Additive coordinate ``phi`` of a composition law: ``phi(v (+) w) = phi(v) + phi(w)``.

    ``phi`` is normalized by ``phi(unit_point) = 1``. Calling the object
    evaluates phi at arbitrary speeds from the dyadic ladder (the doubles and
    halves of the unit point), using a greedy binary expansion; that is exact
    up to the final sub-``2**-depth`` step, which is interpolated by the
    quadratic through the current point and its compositions with the
    smallest rung and with one further half of it.
    :meth:`inverse` composes ladder rungs to realize a given phi value. The
    ``betas``/``phi`` arrays are a uniform-in-phi tabulation for export.
    """

    betas: np.ndarray
    phi: np.ndarray
    unit_point: float
    depth: int
    op: CompositionLaw = field(repr=False)
    rung_speeds: np.ndarray = field(repr=False)
    rung_values: np.ndarray = field(repr=False)
    sub_rung_speed: float = field(default=0.0, repr=False)
    additivity_residual: float = float("nan")

    def __call__(self, beta):
        b = np.asarray(beta, dtype=float)
        if np.any(b < 0) or np.any(b >= 1):
            raise DomainError("speed fraction must lie in [0, 1)")
        flat = b.ravel()
        cur = np.zeros_like(flat)
        val = np.zeros_like(flat)
        op = self.op
        top, top_val = self.rung_speeds[0], self.rung_values[0]
        for _ in range(100_000):
            cand = np.asarray(op(cur, top), dtype=float)
            take = cand <= flat
            if not take.any():
                break
            cur = np.where(take, cand, cur)
            val = np.where(take, val + top_val, val)
        for speed, v in zip(self.rung_speeds[1:], self.rung_values[1:]):
            cand = np.asarray(op(cur, speed), dtype=float)
            take = cand <= flat
            cur = np.where(take, cand, cur)
            val = np.where(take, val + v, val)
        bm, b1 = self._sub_rung(cur)
        val = val + self.rung_values[-1] * np.clip(_quad_fraction(cur, bm, b1, flat), 0.0, 1.0)
        out = val.reshape(b.shape)
        return out if out.ndim else float(out)

    def inverse(self, value):
        """Speed whose phi equals ``value``."""
        p = np.asarray(value, dtype=float)
        if np.any(p < 0) or np.any(~np.isfinite(p)):
            raise DomainError("phi values must be finite and non-negative")
        flat = p.ravel().copy()
        cur = np.zeros_like(flat)
        op = self.op
        top, top_val = self.rung_speeds[0], self.rung_values[0]
        while True:
            take = flat >= top_val
            if not take.any():
                break
            cur = np.where(take, np.asarray(op(cur, top), dtype=float), cur)
            flat = np.where(take, flat - top_val, flat)
        for speed, v in zip(self.rung_speeds[1:], self.rung_values[1:]):
            take = flat >= v
            if take.any():
                cur = np.where(take, np.asarray(op(cur, speed), dtype=float), cur)
                flat = np.where(take, flat - v, flat)
        bm, b1 = self._sub_rung(cur)
        cur = _quad_speed(cur, bm, b1, flat / self.rung_values[-1])
        out = cur.reshape(p.shape)
        return out if out.ndim else float(out)

    def _sub_rung(self, cur: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """cur (+) h' and cur (+) h for the smallest rung h and its half h'."""
        bm = np.asarray(self.op(cur, self.sub_rung_speed), dtype=float)
        return bm, np.asarray(self.op(cur, self.rung_speeds[-1]), dtype=float)

    def to_pairs(self) -> list[list[float]]:
        return [[float(b), float(v)] for b, v in zip(self.betas, self.phi)]


def build_additive_rep(
    op: CompositionLaw,
    unit_point: float = 0.5,
    depth: int = 20,
    beta_max: float = 0.99,
    resolution: int = 8,
    additivity_tol: float = 1e-10,
    n_pairs: int = 100,
    seed: int = 0,
) -> AdditiveRep:
    """Build the additive coordinate of ``op`` with ``phi(unit_point) = 1``.

    Halves ``h_k`` (phi = 2**-k, k = 1..depth) solve ``h (+) h = h_{k-1}`` by
    bisection; doubles ``d_{n+1} = d_n (+) d_n`` (phi = 2**n) are kept while
    below ``beta_max``. The tabulation is the set of multiples of
    ``2**-resolution`` in phi, up to the first speed at or above ``beta_max``.
    Additivity is then verified on ``n_pairs`` random pairs of tabulated speeds.

    Raises:
        BisectionError: a halving equation is not bracketed.
        MonotonicityError: doubling does not increase the speed, or the
            tabulation is not strictly increasing.
        ConsistencyError: the additivity residual exceeds ``additivity_tol``.
    """
    unit = float(SpeedFraction(unit_point))
    if not 0.0 < unit < beta_max:
        raise DomainError("unit_point must lie strictly between 0 and beta_max")
    if depth < 4:
        raise ValueError("depth must be at least 4")
    if not 0 <= resolution <= depth:
        raise ValueError("resolution must lie in [0, depth]")

    doubles, dvals = [unit], [1.0]
    while True:
        nxt = float(op(doubles[-1], doubles[-1]))
        if not nxt > doubles[-1]:
            raise MonotonicityError(f"{doubles[-1]!r} (+) itself does not exceed {doubles[-1]!r}")
        if nxt >= beta_max:
            break
        doubles.append(nxt)
        dvals.append(dvals[-1] * 2.0)

    halves, hvals = [], []
    target = unit
    for k in range(1, depth + 1):
        target = _solve_half(op, target)
        if not target > 0:
            raise MonotonicityError(f"halving collapsed to zero at level {k}")
        halves.append(target)
        hvals.append(2.0 ** -k)

    rep = AdditiveRep(
        betas=np.empty(0), phi=np.empty(0), unit_point=unit, depth=depth, op=op,
        rung_speeds=np.array(doubles[::-1] + halves), rung_values=np.array(dvals[::-1] + hvals),
        sub_rung_speed=_solve_half(op, target),
    )

    step = 2.0 ** -resolution
    p_max = rep(beta_max)
    grid = np.arange(0, int(np.floor(p_max / step)) + 1) * step
    speeds = rep.inverse(grid)
    if speeds[-1] < beta_max:
        grid = np.append(grid, p_max)
        speeds = np.append(speeds, beta_max)
    if np.any(np.diff(speeds) <= 0):
        raise MonotonicityError("tabulated speeds are not strictly increasing in phi")
    rep.betas, rep.phi = speeds, grid

    rng = np.random.default_rng(seed)
    i = rng.integers(0, speeds.size, n_pairs)
    j = rng.integers(0, speeds.size, n_pairs)
    combined = np.asarray(op(speeds[i], speeds[j]), dtype=float)
    ok = combined <= speeds[-1]
    resid = np.abs(rep(combined[ok]) - grid[i][ok] - grid[j][ok])
    rep.additivity_residual = float(resid.max()) if resid.size else 0.0
    if rep.additivity_residual > additivity_tol:
        raise ConsistencyError(
            f"phi is not additive for this operation: residual {rep.additivity_residual:.3g} "
            f"exceeds {additivity_tol:.3g}")
    return rep


def fix_gauge(phi: AdditiveRep, anchor: float = 0.5) -> float:
    """Gauge constant k with ``tanh(k * phi(anchor)) == anchor``."""
    a = float(SpeedFraction(anchor))
    p = phi(a)
    if not p > 0:
        raise DomainError("phi vanishes at the anchor; choose an anchor above 0")
    return float(np.arctanh(a) / p)


def recover_u(phi: AdditiveRep, gauge_k: float) -> MonotoneMap:
    """The speed map ``u = tanh(k * phi)``.

    The map is evaluated through the dyadic ladder of ``phi`` (not by
    interpolation), so composing through it reproduces the original
    operation to rounding; its knots are the tabulation of ``phi``. Its
    rapidity is ``k * phi`` exactly, which keeps the rebuilt laws accurate
    where u itself rounds to 1.
    """
    if not gauge_k > 0:
        raise DomainError("gauge constant must be positive")
    k = float(gauge_k)
    return MonotoneMap.analytic(
        lambda b: np.tanh(k * np.asarray(phi(b))),
        lambda t: phi.inverse(np.arctanh(t) / k),
        knots=(phi.betas, np.tanh(k * phi.phi)),
        name=f"tanh({k!r} * phi)",
        rapidity=lambda b: k * np.asarray(phi(b)),
        rapidity_inverse=lambda r: phi.inverse(r / k),
    )


@dataclass
class RecoverConfig:
    """Knobs of :func:`recover_representation`.

    ``betas``/``lambdas`` are where xi is estimated and residuals measured;
    by default those of the default grid, with speeds clipped to
    ``beta_max``. ``probes`` are the wavelengths of the homogeneity check.
    """

    unit_point: float = 0.5
    anchor: float = 0.5
    depth: int = 20
    beta_max: float = 0.99
    resolution: int = 8
    spread_tol: float = 1e-4
    additivity_tol: float = 1e-10
    betas: Optional[Sequence[float]] = None
    lambdas: Optional[Sequence[float]] = None
    probes: Sequence[float] = HOMOGENEITY_PROBES


@dataclass
class FitReport:
    xi: Exponent
    gauge_k: float
    u: MonotoneMap
    phi: AdditiveRep
    residual_max_L: float
    residual_max_op: float
    unit_point: float = 0.5
    anchor: float = 0.5
    consistency_residual: float = 0.0
    xi_spread: float = 0.0
    notes: str = ""

    def rebuilt_doppler(self) -> DopplerLaw:
        xi = self.xi.xi
        return DopplerLaw(lambda lam, b: doppler_general(lam, b, self.u, xi), "rebuilt")

    def rebuilt_composition(self) -> CompositionLaw:
        return CompositionLaw(lambda v, w: velocity_add_general(v, w, self.u), "rebuilt")

    def regauged(self, gauge_k: float) -> "FitReport":
        """Same laws in another gauge: ``k -> gauge_k`` and ``xi -> xi k / gauge_k``."""
        xi = self.xi.xi * self.gauge_k / gauge_k
        u = recover_u(self.phi, gauge_k)
        anchor = float(u(self.anchor))
        return FitReport(Exponent(xi), float(gauge_k), u, self.phi, self.residual_max_L,
                         self.residual_max_op, self.unit_point, anchor,
                         self.consistency_residual, self.xi_spread, self.notes)

    def to_dict(self) -> dict:
        k = self.gauge_k
        return {
            "xi": self.xi.xi,
            "gauge_k": k,
            "unit_point": self.unit_point,
            "anchor": self.anchor,
            "residual_max_L": self.residual_max_L,
            "residual_max_op": self.residual_max_op,
            "consistency_residual": self.consistency_residual,
            "xi_spread": self.xi_spread,
            "notes": self.notes,
            "phi": self.phi.to_pairs(),
            "u": [[b, float(np.tanh(k * v))] for b, v in self.phi.to_pairs()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def recover_representation(L: DopplerLaw, op: CompositionLaw,
                           config: Optional[RecoverConfig] = None) -> FitReport:
    """Recover (u, xi) from a Doppler law and a composition law.

    The laws are expected to satisfy the cascade axiom (check with
    :func:`reldoppler.axioms.check_R` first). xi is the median over the
    interior speeds of ``-ln f / (2 k phi)``.

    Raises:
        ConsistencyError: the pointwise xi estimates spread by more than
            ``config.spread_tol`` (relative), so L and op do not share one u.
        plus the errors of :func:`extract_f` and :func:`build_additive_rep`.
    """
    cfg = config or RecoverConfig()
    betas = np.asarray(cfg.betas if cfg.betas is not None else DEFAULT_GRID.betas(), dtype=float)
    betas = betas[betas <= cfg.beta_max]
    lambdas = np.asarray(cfg.lambdas if cfg.lambdas is not None else DEFAULT_GRID.lambdas(),
                         dtype=float)

    samples = extract_f(L, betas, cfg.probes)
    rep = build_additive_rep(op, cfg.unit_point, cfg.depth, cfg.beta_max, cfg.resolution,
                             cfg.additivity_tol)
    k = fix_gauge(rep, cfg.anchor)
    u = recover_u(rep, k)

    inner = samples.betas > 0
    b_in, f_in = samples.betas[inner], samples.f_values[inner]
    phi_in = np.asarray(rep(b_in), dtype=float)
    ratios = -np.log(f_in) / (2.0 * k * phi_in)
    xi = float(np.median(ratios))
    spread = float((ratios.max() - ratios.min()) / xi)
    if spread > cfg.spread_tol:
        raise ConsistencyError(
            f"pointwise exponent estimates spread by {spread:.3g} (relative, limit "
            f"{cfg.spread_tol:.3g}); L and the composition law do not share one speed map")
    consistency = float(np.max(np.abs(np.exp(-2.0 * xi * k * phi_in) - f_in) / f_in))

    Lm, Bm = np.meshgrid(lambdas, samples.betas, indexing="ij")
    given = np.asarray(L(Lm, Bm), dtype=float)
    rebuilt = np.asarray(doppler_general(Lm, Bm, u, xi), dtype=float)
    res_L = float(np.max(np.abs(rebuilt - given) / given))

    V, W = np.meshgrid(samples.betas, samples.betas, indexing="ij")
    composed = np.asarray(op(V, W), dtype=float)
    # (0, 0) composes to 0 and carries no relative information
    inside = (composed <= cfg.beta_max) & ((V > 0) | (W > 0))
    re_op = np.asarray(velocity_add_general(V[inside], W[inside], u), dtype=float)
    res_op = float(np.max(np.abs(re_op - composed[inside]) / composed[inside]))

    notes = (f"phi from {len(rep.rung_values)} ladder rungs (depth {cfg.depth}); "
             f"xi = median of {ratios.size} pointwise estimates; "
             f"op residual over {int(inside.sum())} of {inside.size} speed pairs "
             f"whose composition stays <= {cfg.beta_max}")
    return FitReport(Exponent(xi), k, u, rep, res_L, res_op, float(cfg.unit_point),
                     float(cfg.anchor), consistency, spread, notes)
