"""Piecewise reflection charts over the cusp boundary and their Jacobians.

Every chart piece is axisymmetric and has the form

    (t, x)  |->  ( T(t, r),  phi(t, r) * x/|x| ),      r = |x|,

so its differential splits into a 2x2 profile block [[T_t, T_r],
[phi_t, phi_r]] acting on (t, radial) directions plus an (n-2)-fold
tangential stretch phi/r.  Determinants, operator norms and the full n x n
matrices are assembled from those five scalars; the closed forms below were
derived from the map formulas and are cross-checked against central finite
differences by the test suite.

Charts:

  R1Outer  on A u B u C   (collar minus the closed domain, scheme R1)
      A: (-t, |t|^(s-1) x / 6)
      B: (|x|, (t/6)|x|^(s-2) x + (1/3)|x|^(s-1) x)
      C: (t, lam(t) x + mu(t) x/|x|),
         lam = t^(s-1) / (2(t^(s-1)-1)),  mu = t^s - t^(2s-1)/(2(t^(s-1)-1))

  R1Inner  on the cusp core {0 < t <= 1/2, |x| < t^s}, radius bands
      |x| <  t^s/6 :  (-t, 6x/t^(s-1))
      |x| <  t^s/3 :  (12|x|/t^(s-1) - 3t, t x/|x|)
      |x| <  t^s   :  (t, a(t) x + b(t) x/|x|),
                      a = 3(t^s - t)/(2 t^s),  b = (3t - t^s)/2

  R2Outer  on D u E (scheme R2 collar)
      D: (-t, x/2)
      E: (|x|^(1/s), (t/4) x/|x|^(1/s) + (3/4) x)

All charts restrict to the identity on the cusp boundary |x| = t^s, and the
outer charts map their collar onto the cusp core with image radius bands
[0, 1/6], [1/6, 1/2], [1/2, 1] (R1) and [0, 1/2], [1/2, 1] (R2) in units of
t^s.  The charts are orientation reversing: det < 0 everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ChartDomainError, InterfaceError, SingularityError, WindowError
from .geometry import (
    REL_TOL,
    CuspParams,
    Point,
    RegionLabel,
    as_point,
    classify,
)


class ChartId(Enum):
    R1Outer = "R1Outer"
    R1Inner = "R1Inner"
    R2Outer = "R2Outer"


# Piece keys, in dispatch order (ties go to the earlier piece).
_CHART_PIECES: dict[ChartId, tuple[str, ...]] = {
    ChartId.R1Outer: ("A", "B", "C"),
    ChartId.R1Inner: ("P1", "P2", "P3"),
    ChartId.R2Outer: ("D", "E"),
}

_PIECE_REGION: dict[str, RegionLabel] = {
    "A": RegionLabel.RegionA,
    "B": RegionLabel.RegionB,
    "C": RegionLabel.RegionC,
    "D": RegionLabel.RegionD,
    "E": RegionLabel.RegionE,
    "P1": RegionLabel.InnerPiece1,
    "P2": RegionLabel.InnerPiece2,
    "P3": RegionLabel.InnerPiece3,
}

_REGION_PIECE = {v: k for k, v in _PIECE_REGION.items()}

# Test hook: when set to (i, j), the assembled analytic differential matrix
# has that entry negated, so oracle comparisons must fail.
_perturb_entry: tuple[int, int] | None = None


def piece_of_region(label: RegionLabel) -> str:
    try:
        return _REGION_PIECE[label]
    except KeyError:
        raise ValueError(f"{label.value} is not a chart piece") from None


def chart_of_region(label: RegionLabel) -> ChartId:
    for chart, pieces in _CHART_PIECES.items():
        if _REGION_PIECE.get(label) in pieces:
            return chart
    raise ValueError(f"{label.value} does not belong to any chart")


# ---------------------------------------------------------------------------
# Profile evaluators: (T, T_t, T_r, phi, phi_t, phi_r), vectorised
# ---------------------------------------------------------------------------

def _eval_A(params: CuspParams, t, r):
    s = params.s
    xi = -t  # |t| on A
    one = np.ones_like(xi)
    T = -t
    phi = xi ** (s - 1.0) * r / 6.0
    phi_t = -(s - 1.0) * xi ** (s - 2.0) * r / 6.0
    phi_r = xi ** (s - 1.0) / 6.0
    return T, -one, 0.0 * one, phi, phi_t, phi_r


def _eval_B(params: CuspParams, t, r):
    s = params.s
    one = np.ones_like(np.asarray(r, dtype=float))
    T = r + 0.0 * one
    phi = (t / 6.0) * r ** (s - 1.0) + r**s / 3.0
    phi_t = r ** (s - 1.0) / 6.0
    phi_r = (s - 1.0) * (t / 6.0) * r ** (s - 2.0) + s * r ** (s - 1.0) / 3.0
    return T, 0.0 * one, one, phi, phi_t, phi_r


def _lam_mu(s: float, t):
    g = t ** (s - 1.0)
    den = 2.0 * (g - 1.0)
    lam = g / den
    mu = t**s - t ** (2.0 * s - 1.0) / den
    lam_p = -(s - 1.0) * t ** (s - 2.0) / (2.0 * (g - 1.0) ** 2)
    mu_p = (
        s * g
        - (2.0 * s - 1.0) * t ** (2.0 * s - 2.0) / den
        + (s - 1.0) * t ** (3.0 * s - 3.0) / (2.0 * (g - 1.0) ** 2)
    )
    return lam, mu, lam_p, mu_p


def _eval_C(params: CuspParams, t, r):
    s = params.s
    lam, mu, lam_p, mu_p = _lam_mu(s, t)
    one = np.ones_like(np.asarray(t, dtype=float))
    T = t + 0.0 * one
    phi = lam * r + mu
    phi_t = lam_p * r + mu_p
    phi_r = lam + 0.0 * one
    return T, one, 0.0 * one, phi, phi_t, phi_r


def _eval_D(params: CuspParams, t, r):
    one = np.ones_like(np.asarray(t, dtype=float))
    return -t + 0.0 * one, -one, 0.0 * one, r / 2.0 + 0.0 * one, 0.0 * one, 0.5 * one


def _eval_E(params: CuspParams, t, r):
    s = params.s
    one = np.ones_like(np.asarray(r, dtype=float))
    T = r ** (1.0 / s)
    T_r = r ** (1.0 / s - 1.0) / s
    phi = (t / 4.0) * r ** (1.0 - 1.0 / s) + 0.75 * r
    phi_t = r ** (1.0 - 1.0 / s) / 4.0
    phi_r = (t / 4.0) * (1.0 - 1.0 / s) * r ** (-1.0 / s) + 0.75
    return T, 0.0 * one, T_r, phi, phi_t, phi_r


def _eval_P1(params: CuspParams, t, r):
    s = params.s
    one = np.ones_like(np.asarray(t, dtype=float))
    T = -t + 0.0 * one
    phi = 6.0 * r * t ** (1.0 - s)
    phi_t = 6.0 * (1.0 - s) * r * t ** (-s)
    phi_r = 6.0 * t ** (1.0 - s) + 0.0 * one
    return T, -one, 0.0 * one, phi, phi_t, phi_r


def _eval_P2(params: CuspParams, t, r):
    s = params.s
    one = np.ones_like(np.asarray(t, dtype=float))
    T = 12.0 * r * t ** (1.0 - s) - 3.0 * t
    T_t = 12.0 * (1.0 - s) * r * t ** (-s) - 3.0
    T_r = 12.0 * t ** (1.0 - s) + 0.0 * one
    phi = t + 0.0 * one
    return T, T_t, T_r, phi, one, 0.0 * one


def _eval_P3(params: CuspParams, t, r):
    s = params.s
    one = np.ones_like(np.asarray(t, dtype=float))
    a = 1.5 * (1.0 - t ** (1.0 - s))
    a_p = 1.5 * (s - 1.0) * t ** (-s)
    b = (3.0 * t - t**s) / 2.0
    b_p = (3.0 - s * t ** (s - 1.0)) / 2.0
    T = t + 0.0 * one
    phi = a * r + b
    phi_t = a_p * r + b_p
    phi_r = a + 0.0 * one
    return T, one, 0.0 * one, phi, phi_t, phi_r


_EVALS = {
    "A": _eval_A,
    "B": _eval_B,
    "C": _eval_C,
    "D": _eval_D,
    "E": _eval_E,
    "P1": _eval_P1,
    "P2": _eval_P2,
    "P3": _eval_P3,
}


def piece_profile(piece: str, params: CuspParams, t, r):
    """(T, T_t, T_r, phi, phi_t, phi_r) for a piece on arrays (t, r)."""
    return _EVALS[piece](params, np.asarray(t, dtype=float), np.asarray(r, dtype=float))


def profile_jet(piece: str, params: CuspParams, t, r):
    """Vectorised (T, phi, opnorm, det) of a piece at profile points.

    The operator norm is the largest singular value: the max of the profile
    2x2 block's top singular value and the tangential stretch phi/r.  The
    determinant carries the orientation sign: det2x2 * (phi/r)^(n-2).
    """
    n = params.n
    T, T_t, T_r, phi, phi_t, phi_r = piece_profile(piece, params, t, r)
    r = np.asarray(r, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        tang = np.where(r > 0.0, phi / np.where(r > 0.0, r, 1.0), phi_r)
    det2 = T_t * phi_r - T_r * phi_t
    ssum = T_t**2 + T_r**2 + phi_t**2 + phi_r**2
    disc = np.sqrt(np.maximum(ssum**2 - 4.0 * det2**2, 0.0))
    sig_max = np.sqrt((ssum + disc) / 2.0)
    opnorm = np.maximum(sig_max, np.abs(tang))
    det = det2 * tang ** (n - 2)
    return T, phi, opnorm, det


# ---------------------------------------------------------------------------
# Chart dispatch
# ---------------------------------------------------------------------------

def _on_cusp_wall(params: CuspParams, t: float, r: float) -> bool:
    if not (0.0 < t <= 1.0):
        return False
    ts = t**params.s
    return abs(r - ts) <= REL_TOL * max(ts, r)


def _chart_piece(chart: ChartId, params: CuspParams, t: float, r: float) -> str | None:
    """Piece key of the chart containing (t, r), closures included.

    Returns None off the chart.  The inner chart accepts the closure edge
    t = 1/2 (the formulas are regular there) even though the open core used
    by `classify` stops strictly below it.
    """
    s = params.s
    if chart is ChartId.R1Outer:
        if -0.5 < t <= 0.0 and r <= -t:
            return "A"
        if abs(t) < 0.5 and abs(t) <= r < 0.5:
            return "B"
        if 0.0 <= t < 0.5 and t**s <= r <= t:
            return "C"
        return None
    if chart is ChartId.R1Inner:
        if not (0.0 < t <= 0.5) or r >= t**s:
            return None
        ts = t**s
        if r <= ts / 6.0:
            return "P1"
        if r <= ts / 3.0:
            return "P2"
        return "P3"
    if -0.5 < t <= 0.0 and r <= (-t) ** s:
        return "D"
    if abs(t) < 0.5 and abs(t) ** s <= r < 0.5**s:
        return "E"
    return None


def _domain_error(chart: ChartId, params: CuspParams, z: Point) -> ChartDomainError:
    label = classify(params, "R2" if chart is ChartId.R2Outer else "R1", z)
    return ChartDomainError(
        f"point {z!r} is outside the domain of {chart.value}: it classifies to {label.value}",
        label=label,
    )


def apply(chart: ChartId, params: CuspParams, z) -> Point:
    """Evaluate the chart at z; cusp-boundary points map to themselves.

    The image direction x/|x| is preserved (all pieces are axisymmetric).
    Points off the chart raise ChartDomainError carrying their region label.
    """
    p = as_point(z, params)
    t, r = p.t, p.r
    if _on_cusp_wall(params, t, r):
        return Point(p.t, p.x.copy())
    piece = _chart_piece(chart, params, t, r)
    if piece is None:
        raise _domain_error(chart, params, p)
    T, phi, _, _ = profile_jet(piece, params, t, r)
    if r > 0.0:
        x_img = float(phi) * (p.x / r)
    else:
        x_img = np.zeros_like(p.x)
    return Point(float(T), x_img)


@dataclass(frozen=True)
class Jet:
    """Image point, full n x n differential, its determinant and spectral norm."""

    image: Point
    differential: np.ndarray
    det: float
    opnorm: float


def _assemble_matrix(params: CuspParams, u_hat: np.ndarray, T_t, T_r, phi_t, phi_r, tang) -> np.ndarray:
    n = params.n
    M = np.zeros((n, n))
    M[0, 0] = T_t
    M[0, 1:] = T_r * u_hat
    M[1:, 0] = phi_t * u_hat
    M[1:, 1:] = tang * (np.eye(n - 1) - np.outer(u_hat, u_hat)) + phi_r * np.outer(u_hat, u_hat)
    return M


def _interface_gap(params: CuspParams, piece: str, t: float, r: float) -> float:
    """Coordinatewise distance from (t, r) to the nearest surface where the
    chart switches formula (piece-to-piece interfaces and the cusp wall).

    Domain closure edges (t = -1/2, t = 1/2, r = 1/2, ...) are not included:
    the piece formulas are one-sidedly analytic there.
    """
    s = params.s
    if piece == "A":
        return (-t) - r
    if piece == "B":
        return r - abs(t)
    if piece == "C":
        return min(r - t**s, t - r)
    if piece == "D":
        return (-t) ** s - r
    if piece == "E":
        return r - abs(t) ** s
    ts = t**s
    if piece == "P1":
        return ts / 6.0 - r
    if piece == "P2":
        return min(r - ts / 6.0, ts / 3.0 - r)
    return min(r - ts / 3.0, ts - r)


def _smoothness_gap(piece: str, t: float, r: float) -> float:
    """Coordinatewise distance from (t, r) to the kinks of the piece's own
    formula (t = 0 for fractional powers of t, r = 0 for x/|x| factors).

    The formulas extend analytically across the piece interfaces, so finite
    differencing one piece's formula only has to avoid these kinks.
    """
    if piece == "A":
        return -t
    if piece in ("B", "E"):
        return r
    if piece == "D":
        return math.inf
    if piece == "P1":
        return t
    return min(t, r)  # C, P2, P3


def differential(chart: ChartId, params: CuspParams, z) -> Jet:
    """Analytic differential at a point strictly inside one chart piece."""
    p = as_point(z, params)
    t, r = p.t, p.r
    if _on_cusp_wall(params, t, r):
        raise InterfaceError(f"differential undefined on the cusp boundary at {p!r}")
    piece = _chart_piece(chart, params, t, r)
    if piece is None:
        raise _domain_error(chart, params, p)
    if _interface_gap(params, piece, t, r) <= 0.0:
        raise InterfaceError(f"point {p!r} sits on an interface of piece {piece}")
    T, T_t, T_r, phi, phi_t, phi_r = piece_profile(piece, params, t, r)
    if r > 0.0:
        u_hat = p.x / r
        tang = float(phi) / r
        x_img = float(phi) * u_hat
    else:
        u_hat = np.zeros(params.n - 1)
        u_hat[0] = 1.0
        tang = float(phi_r)  # pieces containing the axis have phi ~ r
        x_img = np.zeros(params.n - 1)
    M = _assemble_matrix(params, u_hat, float(T_t), float(T_r), float(phi_t), float(phi_r), tang)
    if _perturb_entry is not None:
        M = M.copy()
        M[_perturb_entry] = -M[_perturb_entry]
    det2 = float(T_t) * float(phi_r) - float(T_r) * float(phi_t)
    det = det2 * tang ** (params.n - 2)
    ssum = float(T_t) ** 2 + float(T_r) ** 2 + float(phi_t) ** 2 + float(phi_r) ** 2
    disc = math.sqrt(max(ssum**2 - 4.0 * det2**2, 0.0))
    opnorm = max(math.sqrt((ssum + disc) / 2.0), abs(tang))
    return Jet(Point(float(T), x_img), M, det, opnorm)


def fd_step(z: Point) -> float:
    """Central-difference step: h = max(1e-6, 1e-6 * |z|)."""
    return max(1e-6, 1e-6 * z.norm)


def _apply_piece_formula(piece: str, params: CuspParams, coords: np.ndarray) -> np.ndarray:
    """Evaluate one piece's closed-form map on a raw coordinate vector."""
    t = float(coords[0])
    x = coords[1:]
    r = float(np.linalg.norm(x))
    T, _, _, phi, _, _ = piece_profile(piece, params, t, r)
    img = np.empty_like(coords)
    img[0] = float(T)
    img[1:] = float(phi) * (x / r) if r > 0.0 else 0.0
    return img


def differential_fd(chart: ChartId, params: CuspParams, z, h: float | None = None) -> np.ndarray:
    """Finite-difference oracle: componentwise central differences of the
    piece map containing z.

    The point must lie in (the closure of) one piece, with its interface
    gaps and the formula kinks at least 2h away so the stencil samples a
    single smooth formula.
    """
    p = as_point(z, params)
    if h is None:
        h = fd_step(p)
    piece = _chart_piece(chart, params, p.t, p.r)
    if piece is None:
        raise _domain_error(chart, params, p)
    gap = min(_smoothness_gap(piece, p.t, p.r), _interface_gap(params, piece, p.t, p.r))
    if gap <= 2.0 * h:
        raise InterfaceError(
            f"point {p!r} is within 2h={2 * h:.3g} of an interface/kink of piece {piece}"
        )
    n = params.n
    base = p.as_array()
    M = np.zeros((n, n))
    for j in range(n):
        zp, zm = base.copy(), base.copy()
        zp[j] += h
        zm[j] -= h
        fp = _apply_piece_formula(piece, params, zp)
        fm = _apply_piece_formula(piece, params, zm)
        M[:, j] = (fp - fm) / (2.0 * h)
    return M


def invert(chart: ChartId, params: CuspParams, w) -> Point:
    """Closed-form inverse of the chart, dispatched on the image bands.

    R1Outer and R2Outer invert from the cusp core (radius bands in units of
    t^s: [0,1/6]/[1/6,1/2]/[1/2,1] and [0,1/2]/[1/2,1]); R1Inner inverts
    from the R1 collar.  Cusp-boundary points return themselves.
    """
    p = as_point(w, params)
    s = params.s
    t, r = p.t, p.r
    if _on_cusp_wall(params, t, r):
        return Point(p.t, p.x.copy())
    u_hat = p.x / r if r > 0.0 else np.zeros(params.n - 1)

    if chart in (ChartId.R1Outer, ChartId.R2Outer):
        if not (0.0 < t <= 0.5) or r > t**s:
            raise _domain_error(chart, params, p)
        ts = t**s
        if chart is ChartId.R1Outer:
            if r <= ts / 6.0:
                # A: t' = -t, x' = |t'|^(s-1) x / 6
                src_t = -t
                src_r = 6.0 * r * t ** (1.0 - s)
            elif r <= ts / 2.0:
                # B: radial profile (tau/6) t'^(s-1) + t'^s/3 at |x| = t'
                src_t = (6.0 * r - 2.0 * ts) * t ** (1.0 - s)
                src_r = t
            else:
                lam, mu, _, _ = _lam_mu(s, t)
                src_t = t
                src_r = (r - mu) / lam
        else:
            if r <= ts / 2.0:
                src_t = -t
                src_r = 2.0 * r
            else:
                src_t = 4.0 * t * r / ts - 3.0 * t
                src_r = ts
        return Point(float(src_t), float(src_r) * u_hat if r > 0.0 else np.zeros(params.n - 1))

    # R1Inner: image is the R1 collar; dispatch mirrors the piece images.
    if t <= 0.0 and r <= -t and t > -0.5:
        src_t = -t
        src_r = r * src_t ** (s - 1.0) / 6.0
    elif 0.0 < t < 0.5 and t**s <= r <= t:
        a = 1.5 * (1.0 - t ** (1.0 - s))
        b = (3.0 * t - t**s) / 2.0
        src_t = t
        src_r = (r - b) / a
    elif abs(t) <= r < 0.5 and abs(t) < 0.5:
        src_t = r
        src_r = (t + 3.0 * r) * r ** (s - 1.0) / 12.0
    else:
        raise _domain_error(chart, params, p)
    return Point(float(src_t), float(src_r) * u_hat if r > 0.0 else np.zeros(params.n - 1))


def distortion(chart: ChartId, params: CuspParams, z, p: float) -> float:
    """Pointwise p-distortion opnorm^p / |det| of the chart at z."""
    if p < 1.0:
        raise WindowError(f"distortion exponent must satisfy p >= 1, got {p}")
    jet = differential(chart, params, z)
    adet = abs(jet.det)
    if adet < 1e-300:
        raise SingularityError(f"Jacobian determinant underflow at {z!r}")
    return jet.opnorm**p / adet
