"""Grid-based checkers for the invariance axioms and structural hypotheses.

Each checker discretizes the quantifiers of its axiom over a :class:`GridSpec`
and returns a :class:`CheckReport`. Equational checks ([R], group laws)
compare a relative residual against a tolerance. Ordinal checks ([M], [LOI],
[DC]) search for an order counterexample; there the reported violation is the
margin by which the worst counterexample clears the comparison dead-band.

Ties: two values closer than ``DEAD_BAND * max(|a|, |b|)`` compare as equal,
and an equal pair is consistent with either ordering.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .errors import DomainError, RelDopplerError
from .kinematics import BETA_GRID_MAX, CompositionLaw, DopplerLaw

DEAD_BAND = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Finite grid standing in for "for all lam > 0 and all speeds in [0, 1)".

    Speeds are uniform on ``[0, beta_max]``; wavelengths are spaced over
    ``lambda_range`` either geometrically or uniformly.
    """

    n_lambda: int = 5
    n_beta: int = 25
    beta_max: float = 0.99
    lambda_range: tuple[float, float] = (0.5, 8.0)
    spacing: str = "geometric"

    def __post_init__(self):
        if self.n_lambda < 2 or self.n_beta < 2:
            raise ValueError("grids need at least 2 points per axis")
        lo, hi = self.lambda_range
        if not 0 < lo < hi:
            raise ValueError("lambda_range must satisfy 0 < low < high")
        if not 0 < self.beta_max <= BETA_GRID_MAX:
            raise ValueError(f"beta_max must lie in (0, {BETA_GRID_MAX}]")
        if self.spacing not in ("uniform", "geometric"):
            raise ValueError("spacing must be 'uniform' or 'geometric'")
        object.__setattr__(self, "lambda_range", (float(lo), float(hi)))

    def lambdas(self) -> np.ndarray:
        lo, hi = self.lambda_range
        if self.spacing == "geometric":
            return np.geomspace(lo, hi, self.n_lambda)
        return np.linspace(lo, hi, self.n_lambda)

    def betas(self) -> np.ndarray:
        return np.linspace(0.0, self.beta_max, self.n_beta)

    def coarsened(self, n_lambda: int, n_beta: int) -> "GridSpec":
        return GridSpec(min(n_lambda, self.n_lambda), min(n_beta, self.n_beta),
                        self.beta_max, self.lambda_range, self.spacing)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda_range"] = list(self.lambda_range)
        return d


DEFAULT_GRID = GridSpec()
DC_GRID = DEFAULT_GRID.coarsened(4, 8)


@dataclass
class CheckReport:
    axiom: str
    passed: bool
    max_violation: float
    worst_tuple: list
    grid: GridSpec
    tolerance: float
    diagnostic: Optional[str] = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "axiom": self.axiom,
            "passed": bool(self.passed),
            "max_violation": float(self.max_violation),
            "worst_tuple": [float(v) for v in self.worst_tuple],
            "tolerance": float(self.tolerance),
            "grid": self.grid.to_dict(),
            "diagnostic": self.diagnostic,
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def _failed(axiom: str, grid: GridSpec, tol: float, exc: Exception) -> CheckReport:
    return CheckReport(axiom, False, float("inf"), [], grid, tol,
                       diagnostic=f"{type(exc).__name__}: {exc}")


def _worst(violation: np.ndarray, axes: Sequence[np.ndarray]) -> tuple[float, list]:
    """Largest violation and its input tuple; ties go to the first index in
    row-major order, which is lexicographic in the grid axes."""
    flat = np.nan_to_num(violation, nan=np.inf).ravel()
    k = int(np.argmax(flat))
    idx = np.unravel_index(k, violation.shape)
    return float(flat[k]), [float(ax[i]) for ax, i in zip(axes, idx)]


def _order(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sign of ``a - b`` with the dead-band applied, and the relative gap."""
    scale = np.maximum(np.abs(a), np.abs(b))
    gap = a - b
    band = DEAD_BAND * scale
    sign = np.where(gap > band, 1, np.where(gap < -band, -1, 0))
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, np.abs(gap) / scale, 0.0)
    return sign, rel


def check_R(L: DopplerLaw, op: CompositionLaw, grid: GridSpec = DEFAULT_GRID,
            tol: float = 1e-9) -> CheckReport:
    """[R]: ``L(L(lam, v), w) == L(lam, v (+) w)`` up to relative ``tol``.

    worst_tuple is ``(lam, v, w)``.
    """
    lam, b = grid.lambdas(), grid.betas()
    Lm, V, W = np.meshgrid(lam, b, b, indexing="ij")
    try:
        cascade = np.asarray(L(np.asarray(L(Lm, V)), W), dtype=float)
        direct = np.asarray(L(Lm, np.asarray(op(V, W))), dtype=float)
    except (RelDopplerError, ValueError) as exc:
        return _failed("R", grid, tol, exc)
    resid = np.abs(cascade - direct) / np.abs(direct)
    worst, tup = _worst(resid, (lam, b, b))
    return CheckReport("R", worst <= tol, worst, tup, grid, tol)


def check_M(L: DopplerLaw, op: CompositionLaw, grid: GridSpec = DEFAULT_GRID) -> CheckReport:
    """[M]: the order of ``L(lam, v)`` and ``L(lam', v')`` survives composing
    both speeds with a common ``w``.

    worst_tuple is ``(lam, lam', v, v', w)``.
    """
    lam, b = grid.lambdas(), grid.betas()
    try:
        base = np.asarray(L(lam[:, None], b[None, :]), dtype=float)          # (i, j)
        moved_speed = np.asarray(op(b[:, None], b[None, :]), dtype=float)    # (j, k) = v (+) w
        moved = np.asarray(L(lam[:, None, None], moved_speed[None]), dtype=float)  # (i, j, k)
    except (RelDopplerError, ValueError) as exc:
        return _failed("M", grid, DEAD_BAND, exc)
    # axes (lam, lam', v, v', w)
    s1, g1 = _order(base[:, None, :, None, None], base[None, :, None, :, None])
    s2, g2 = _order(moved[:, None, :, None, :], moved[None, :, None, :, :])
    bad = (s1 * s2) < 0
    margin = np.where(bad, np.minimum(g1, g2), 0.0)
    worst, tup = _worst(margin, (lam, lam, b, b, b))
    found = bool(bad.any())
    return CheckReport("M", not found, worst, tup if found else [], grid, DEAD_BAND,
                       details={"counterexamples": int(bad.sum()), "tuples": int(bad.size)})


def check_LOI(L: DopplerLaw, grid: GridSpec = DEFAULT_GRID,
              scales: Sequence[float] = (0.5, 2.0, 7.0)) -> CheckReport:
    """[LOI]: order of ``L(x, y)`` vs ``L(z, w)`` is unchanged when both
    wavelengths are multiplied by a common scale ``a``.

    worst_tuple is ``(x, y, z, w, a)``.
    """
    scales = np.asarray(scales, dtype=float)
    if scales.size == 0 or np.any(scales <= 0):
        raise DomainError("scales must be a non-empty list of positive numbers")
    lam, b = grid.lambdas(), grid.betas()
    try:
        base = np.asarray(L(lam[:, None], b[None, :]), dtype=float)                      # (x, y)
        scaled = np.asarray(L(scales[:, None, None] * lam[None, :, None], b[None, None, :]),
                            dtype=float)                                                   # (a, x, y)
    except (RelDopplerError, ValueError) as exc:
        return _failed("LOI", grid, DEAD_BAND, exc)
    # axes (x, y, z, w, a)
    s1, g1 = _order(base[:, :, None, None, None], base[None, None, :, :, None])
    sc = np.moveaxis(scaled, 0, -1)                                                       # (x, y, a)
    s2, g2 = _order(sc[:, :, None, None, :], sc[None, None, :, :, :])
    bad = (s1 * s2) < 0
    margin = np.where(bad, np.minimum(g1, g2), 0.0)
    worst, tup = _worst(margin, (lam, b, lam, b, scales))
    found = bool(bad.any())
    return CheckReport("LOI", not found, worst, tup if found else [], grid, DEAD_BAND,
                       details={"counterexamples": int(bad.sum()), "scales": scales.tolist()})


def check_DC(L: DopplerLaw, grid: GridSpec = DC_GRID) -> CheckReport:
    """Double cancellation: ``H(x,y) <= H(z,w)`` and ``H(z,s) <= H(t,y)``
    imply ``H(x,s) <= H(t,w)``.

    The sextuple search is degree 6, so callers normally pass a coarse grid
    (the default is 4 wavelengths by 8 speeds). worst_tuple is
    ``(x, z, t, y, w, s)``.
    """
    lam, b = grid.lambdas(), grid.betas()
    try:
        H = np.asarray(L(lam[:, None], b[None, :]), dtype=float)
    except (RelDopplerError, ValueError) as exc:
        return _failed("DC", grid, DEAD_BAND, exc)
    # axes (x, z, t, y, w, s)
    sa, _ = _order(_place(H, 0, 3), _place(H, 1, 4))   # H(x,y) vs H(z,w)
    sb, _ = _order(_place(H, 1, 5), _place(H, 2, 3))   # H(z,s) vs H(t,y)
    sc, gc = _order(_place(H, 0, 5), _place(H, 2, 4))  # H(x,s) vs H(t,w)
    bad = (sa <= 0) & (sb <= 0) & (sc > 0)
    margin = np.where(bad, gc, 0.0)
    worst, tup = _worst(margin, (lam, lam, lam, b, b, b))
    found = bool(bad.any())
    return CheckReport("DC", not found, worst, tup if found else [], grid, DEAD_BAND,
                       details={"counterexamples": int(bad.sum())})


def _place(H: np.ndarray, i_ax: int, j_ax: int) -> np.ndarray:
    shape = [1] * 6
    shape[i_ax], shape[j_ax] = H.shape
    return H.reshape(shape)


def check_group_structure(op: CompositionLaw, grid: GridSpec = DEFAULT_GRID,
                          tol: float = 1e-12) -> CheckReport:
    """Identity, strict monotonicity in each slot, commutativity and
    associativity of ``op`` on the speed grid.

    ``details`` holds one ``{"passed", "max", "worst"}`` entry per sub-check.
    """
    b = grid.betas()
    sub: dict[str, dict] = {}
    try:
        left = np.asarray(op(np.zeros_like(b), b), dtype=float)
        right = np.asarray(op(b, np.zeros_like(b)), dtype=float)
        ident = np.maximum(np.abs(left - b), np.abs(right - b))
        v, t = _worst(ident, (b,))
        sub["identity"] = {"passed": v <= tol, "max": v, "worst": t}

        T = np.asarray(op(b[:, None], b[None, :]), dtype=float)
        # a step up in either slot must raise the result; violation = shortfall
        d1 = T[1:, :] - T[:-1, :]
        d2 = T[:, 1:] - T[:, :-1]
        tiny = np.finfo(float).tiny  # keeps a flat step (d == 0) visible as a violation
        short1 = np.where(d1 > 0, 0.0, np.abs(d1) + tiny)
        short2 = np.where(d2 > 0, 0.0, np.abs(d2) + tiny)
        v1, t1 = _worst(short1, (b[:-1], b))
        v2, t2 = _worst(short2, (b, b[:-1]))
        mono_ok = not (np.any(d1 <= 0) or np.any(d2 <= 0))
        sub["monotone"] = {"passed": mono_ok, "max": max(v1, v2),
                           "worst": t1 if v1 >= v2 else t2}

        comm = np.abs(T - T.T)
        v, t = _worst(comm, (b, b))
        sub["commutative"] = {"passed": v <= tol, "max": v, "worst": t}

        vw = np.asarray(op(T[:, :, None], b[None, None, :]), dtype=float)   # (v(+)w)(+)s
        ws = np.asarray(op(b[:, None, None], T[None, :, :]), dtype=float)   # v(+)(w(+)s)
        assoc = np.abs(vw - ws)
        v, t = _worst(assoc, (b, b, b))
        sub["associative"] = {"passed": v <= tol, "max": v, "worst": t}

        inside = bool(np.all((T >= 0) & (T < 1)))
        sub["closure"] = {"passed": inside, "max": float(np.max(T) if inside else 1.0), "worst": []}
    except (RelDopplerError, ValueError) as exc:
        return _failed("group", grid, tol, exc)

    failing = [k for k, s in sub.items() if not s["passed"]]
    numeric = {k: s for k, s in sub.items() if k != "closure"}
    key = max(numeric, key=lambda k: numeric[k]["max"])
    worst = numeric[failing[0]] if failing and failing[0] != "closure" else numeric[key]
    for s in sub.values():
        s["max"] = float(s["max"])
    return CheckReport("group", not failing, worst["max"], worst["worst"], grid, tol,
                       diagnostic=("failed: " + ", ".join(failing)) if failing else None,
                       details=sub)


def witness_lf_vs_dstar(x1: float, x2: float) -> tuple[float, float]:
    """Exponents at which the power-law Doppler factor matches length
    contraction at two speeds.

    Each value solves ``((1 - x)/(1 + x))**xi == sqrt(1 - x**2)``. Different
    values at two speeds mean no single exponent reproduces length
    contraction.
    """
    out = []
    for x in (x1, x2):
        x = float(x)
        if not 0.0 < x < 1.0:
            raise DomainError(f"witness speeds must lie in (0, 1), got {x!r}")
        out.append(float(0.5 * np.log1p(-x * x) / np.log((1.0 - x) / (1.0 + x))))
    return out[0], out[1]
