"""CSV sample tables and black-box laws interpolated from them.

Three table shapes exist, each with a fixed header:

* ``lambda,beta,L`` -- a Doppler law sampled on a wavelength x speed grid;
* ``v,w,result``    -- a composition law sampled on a speed x speed grid;
* ``x,y``           -- knots of a speed map.

Grid tables are written in row-major order (first column outermost) with 17
significant digits, which round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import NdBSpline, make_interp_spline

from .errors import DomainError, MonotonicityError, RelDopplerError
from .kinematics import CompositionLaw, DopplerLaw
from .monotone import MonotoneMap

DOPPLER_HEADER = ("lambda", "beta", "L")
COMPOSITION_HEADER = ("v", "w", "result")
MAP_HEADER = ("x", "y")


class TableFormatError(RelDopplerError):
    """A CSV table is missing, malformed, or not on a full grid."""


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write(path, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    try:
        Path(path).write_text(buf.getvalue())
    except OSError as exc:
        raise TableFormatError(f"cannot write {path}: {exc}") from exc


def write_doppler_table(path, law: DopplerLaw, lambdas: Sequence[float],
                        betas: Sequence[float], speed_scale: float = 1.0) -> int:
    """Sample ``law`` on ``lambdas x betas`` and write it; returns the row count.

    ``speed_scale`` multiplies the speed column (physical units for c != 1).
    """
    lam = np.asarray(lambdas, dtype=float)
    b = np.asarray(betas, dtype=float)
    Lm, Bm = np.meshgrid(lam, b, indexing="ij")
    vals = np.asarray(law(Lm, Bm), dtype=float)
    rows = zip(Lm.ravel(), Bm.ravel() * speed_scale, vals.ravel())
    _write(path, DOPPLER_HEADER, rows)
    return vals.size


def write_composition_table(path, op: CompositionLaw, betas: Sequence[float],
                            speed_scale: float = 1.0) -> int:
    b = np.asarray(betas, dtype=float)
    V, W = np.meshgrid(b, b, indexing="ij")
    vals = np.asarray(op(V, W), dtype=float)
    rows = zip(V.ravel() * speed_scale, W.ravel() * speed_scale, vals.ravel() * speed_scale)
    _write(path, COMPOSITION_HEADER, rows)
    return vals.size


def write_map_table(path, u: MonotoneMap) -> None:
    knots = u.knots
    if knots is None:
        raise TableFormatError("map has no knots to export")
    _write(path, MAP_HEADER, knots)


def read_table(path, header: Sequence[str]) -> np.ndarray:
    """Read a CSV with exactly the given header into an ``(n, len(header))`` array."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise TableFormatError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != tuple(header):
        raise TableFormatError(f"{path}: expected header {','.join(header)}")
    body = [r for r in rows[1:] if r]
    try:
        data = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise TableFormatError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != len(header) or data.shape[0] == 0:
        raise TableFormatError(f"{path}: expected {len(header)} columns and at least one row")
    if not np.all(np.isfinite(data)):
        raise TableFormatError(f"{path}: non-finite entry")
    return data


def _to_grid(data: np.ndarray, path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a = np.unique(data[:, 0])
    b = np.unique(data[:, 1])
    if a.size * b.size != data.shape[0]:
        raise TableFormatError(f"{path}: rows do not form a full rectangular grid")
    expect_a = np.repeat(a, b.size)
    expect_b = np.tile(b, a.size)
    if not (np.array_equal(expect_a, data[:, 0]) and np.array_equal(expect_b, data[:, 1])):
        raise TableFormatError(f"{path}: rows are not in row-major grid order")
    return a, b, data[:, 2].reshape(a.size, b.size)


def read_doppler_table(path, speed_scale: float = 1.0):
    """Return ``(lambdas, betas, values)`` from a ``lambda,beta,L`` table."""
    lam, b, vals = _to_grid(read_table(path, DOPPLER_HEADER), path)
    return lam, b / speed_scale, vals


def read_composition_table(path, speed_scale: float = 1.0):
    """Return ``(betas, values)`` from a ``v,w,result`` table on a square grid."""
    v, w, vals = _to_grid(read_table(path, COMPOSITION_HEADER), path)
    if not np.array_equal(v, w):
        raise TableFormatError(f"{path}: v and w must share one speed grid")
    return v / speed_scale, vals / speed_scale


def read_map_table(path) -> MonotoneMap:
    data = read_table(path, MAP_HEADER)
    try:
        return MonotoneMap(data[:, 0], data[:, 1])
    except (ValueError, RelDopplerError) as exc:
        raise TableFormatError(f"{path}: not a valid monotone map ({exc})") from exc


def _check_speed_grid(b: np.ndarray, what: str) -> None:
    if b[0] != 0.0 or np.any(b >= 1.0):
        raise TableFormatError(f"{what}: speed grid must start at 0 and stay below 1")
    if b.size < 4:
        raise TableFormatError(f"{what}: need at least 4 speeds for cubic interpolation")


def _tensor_spline(x: np.ndarray, y: np.ndarray, z: np.ndarray, kx: int, ky: int) -> NdBSpline:
    """Tensor-product interpolating spline through ``z[i, j]`` at ``(x[i], y[j])``."""
    sx = make_interp_spline(x, z, k=kx, axis=0)
    sy = make_interp_spline(y, sx.c, k=ky, axis=1)
    # BSpline keeps the interpolation axis first; put it back second
    return NdBSpline((sx.t, sy.t), np.moveaxis(sy.c, 0, 1), (kx, ky))


def _grid_eval(spline: NdBSpline, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    X, Y = np.meshgrid(x, y, indexing="ij")
    return spline(np.stack([X, Y], axis=-1))


def _check_refined_monotone(f, a: np.ndarray, b: np.ndarray, axis: int, sign: int, what: str):
    """Probe monotonicity of the interpolant on a 4x refined grid along ``axis``."""
    fine = np.unique(np.concatenate([np.linspace(lo, hi, 5) for lo, hi in zip(b[:-1], b[1:])]))
    vals = f(a, fine) if axis == 1 else f(fine, a)
    steps = np.diff(vals, axis=axis) * sign
    if np.any(steps <= 0):
        raise MonotonicityError(f"{what}: interpolated table is not strictly monotone")


def doppler_law_from_table(lambdas: np.ndarray, betas: np.ndarray, values: np.ndarray,
                           tag: str = "table") -> DopplerLaw:
    """Black-box Doppler law interpolated from grid samples.

    ``ln L`` is interpolated piecewise linearly in ``ln lambda`` and by a cubic
    spline in beta. The log-log linear part reproduces any law homogeneous in
    lambda without error, so the factorization checks see the data, not the
    interpolant. Evaluation outside the sampled box raises DomainError.
    """
    lam = np.asarray(lambdas, dtype=float)
    b = np.asarray(betas, dtype=float)
    vals = np.asarray(values, dtype=float)
    _check_speed_grid(b, tag)
    if lam.size < 2 or np.any(lam <= 0) or np.any(vals <= 0):
        raise TableFormatError(f"{tag}: need >= 2 positive wavelengths and positive values")
    spline = _tensor_spline(np.log(lam), b, np.log(vals), 1, 3)
    lo_l, hi_l, hi_b = lam[0], lam[-1], b[-1]
    _check_refined_monotone(lambda x, y: _grid_eval(spline, np.log(x), y), lam, b,
                            axis=1, sign=-1, what=tag)

    def law(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if np.any(x < lo_l * (1 - 1e-12)) or np.any(x > hi_l * (1 + 1e-12)):
            raise DomainError(f"wavelength outside the sampled range [{lo_l}, {hi_l}]")
        if np.any(y < 0) or np.any(y > hi_b):
            raise DomainError(f"speed outside the sampled range [0, {hi_b}]")
        lx = np.clip(np.log(x), np.log(lo_l), np.log(hi_l))
        out = np.exp(spline(np.stack([lx, y], axis=-1)))
        return out if out.ndim else float(out)

    return DopplerLaw(law, tag)


def composition_law_from_table(betas: np.ndarray, values: np.ndarray,
                               tag: str = "table") -> CompositionLaw:
    """Black-box composition law interpolated from grid samples.

    The squared result is interpolated by a bicubic spline through the samples
    and the square root taken afterwards. Squaring is monotone on [0, 1) and
    removes the conical point at the origin of laws such as perpendicular
    composition, where the deep halvings of the recovery ladder are computed.
    """
    b = np.asarray(betas, dtype=float)
    vals = np.asarray(values, dtype=float)
    _check_speed_grid(b, tag)
    spline = _tensor_spline(b, b, vals * vals, 3, 3)
    hi = b[-1]
    for axis in (0, 1):
        _check_refined_monotone(lambda x, y: _grid_eval(spline, x, y), b, b,
                                axis=axis, sign=1, what=tag)

    def op(v, w):
        v, w = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(w, dtype=float))
        if np.any(v < 0) or np.any(w < 0) or np.any(v > hi) or np.any(w > hi):
            raise DomainError(f"speed outside the sampled range [0, {hi}]")
        out = np.sqrt(np.maximum(spline(np.stack([v, w], axis=-1)), 0.0))
        return out if out.ndim else float(out)

    return CompositionLaw(op, tag)
