"""Geometry of the model cusp domain, its reflection collars, and samplers.

The model domain in R^n = R x R^{n-1} (points z = (t, x), n >= 3) is an
outward cusp of degree s > 1 glued to a ball:

    domain = {0 < t <= 1, |x| < t^s}  u  B((2, 0), sqrt(2)).

Two collar neighbourhoods support the reflection charts:

    scheme R1:  collar  = {-1/2 < t < 1/2, |x| < 1/2}      u  domain
    scheme R2:  collar' = {-1/2 < t < 1/2, |x| < (1/2)^s}  u  domain

`classify` partitions collar \\ closure(domain) into pieces A, B, C (R1) or
D, E (R2), and under R1 splits the cusp core {0 < t < 1/2, |x| < t^s} into
three inner bands with radius breakpoints t^s/6 and t^s/3.  Everything here
is axisymmetric in x, so the heavy lifting happens in profile coordinates
(t, r) with r = |x|; a point contributes Lebesgue measure with the weight
of the (n-2)-sphere of radius r.

Dyadic shells stratify the singular integrals: shell k covers the region's
scale variable (|t| for A, C, D, E and the inner bands; |x| for B) in
[2^-(k+1), 2^-k].
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyRegionError, WindowError

BALL_CENTER_T = 2.0
BALL_RADIUS = math.sqrt(2.0)

# Absolute tolerance for the origin label; boundary tolerance is relative
# to the local cusp radius (see classify).
ORIGIN_TOL = 1e-12
REL_TOL = 1e-12


@dataclass(frozen=True)
class CuspParams:
    """Dimension n >= 3 and cusp degree s > 1; every formula depends on both."""

    n: int
    s: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 3:
            raise WindowError(f"dimension n must be an integer >= 3, got {self.n}")
        if not math.isfinite(self.s) or self.s <= 1.0:
            raise WindowError(f"cusp degree s must satisfy s > 1, got {self.s}")


@dataclass(frozen=True, eq=False)
class Point:
    """A point z = (t, x) with horizontal coordinate t and cross-section x."""

    t: float
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(-1))
        if not (math.isfinite(self.t) and np.all(np.isfinite(self.x))):
            raise ValueError("point has non-finite coordinates")

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.x))

    @property
    def norm(self) -> float:
        return math.hypot(self.t, self.r)

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.t], self.x))

    def __iter__(self):
        yield self.t
        yield self.x

    def __repr__(self):  # keeps failure output short in tests
        xs = ",".join(f"{v:.6g}" for v in self.x)
        return f"Point(t={self.t:.6g}, x=({xs}))"


@dataclass(frozen=True)
class ProfilePoint:
    """Axisymmetric reduction (t, r) of a point, r = |x| >= 0."""

    t: float
    r: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("profile radius must be >= 0")


def as_point(z, params: CuspParams | None = None) -> Point:
    """Coerce a Point, a (t, x) pair, or a flat coordinate sequence."""
    if isinstance(z, Point):
        p = z
    elif isinstance(z, (tuple, list)) and len(z) == 2 and np.ndim(z[1]) >= 1:
        p = Point(float(z[0]), z[1])
    else:
        arr = np.asarray(z, dtype=float).reshape(-1)
        p = Point(float(arr[0]), arr[1:])
    if params is not None and p.x.size != params.n - 1:
        raise ValueError(f"expected {params.n - 1} cross-section coordinates, got {p.x.size}")
    return p


class RegionLabel(Enum):
    CuspInterior = "CuspInterior"
    BallInterior = "BallInterior"
    BoundaryCusp = "BoundaryCusp"
    RegionA = "RegionA"
    RegionB = "RegionB"
    RegionC = "RegionC"
    RegionD = "RegionD"
    RegionE = "RegionE"
    InnerPiece1 = "InnerPiece1"
    InnerPiece2 = "InnerPiece2"
    InnerPiece3 = "InnerPiece3"
    OutsideNeighborhood = "OutsideNeighborhood"
    Origin = "Origin"


@dataclass(frozen=True)
class Shell:
    """Dyadic shell k >= 1: the scale variable lies in [2^-(k+1), 2^-k]."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"shell index must be >= 1, got {self.k}")

    @property
    def lo(self) -> float:
        return 2.0 ** (-self.k - 1)

    @property
    def hi(self) -> float:
        return 2.0 ** (-self.k)


def unit_ball_volume(dim: int) -> float:
    """Lebesgue volume of the unit ball in R^dim."""
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


def sphere_area(dim: int) -> float:
    """Surface area of the unit sphere S^dim in R^{dim+1}."""
    return (dim + 1) * unit_ball_volume(dim + 1)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

_R1_REGIONS = (RegionLabel.RegionA, RegionLabel.RegionB, RegionLabel.RegionC)
_R2_REGIONS = (RegionLabel.RegionD, RegionLabel.RegionE)
_INNER_PIECES = (RegionLabel.InnerPiece1, RegionLabel.InnerPiece2, RegionLabel.InnerPiece3)


def _inside_ball(t, r, slack: float = 0.0):
    return np.hypot(t - BALL_CENTER_T, r) < BALL_RADIUS * (1.0 - slack)


def classify_profile(params: CuspParams, scheme: str, t, r):
    """Vectorised region classification in profile coordinates.

    Tie-break rule: interface points go to the earlier region in the order
    A, B, C (resp. D, E; inner band 1, 2, 3), implemented by the mask order
    below.  Points within REL_TOL (relative to the local cusp radius) of
    |x| = t^s with 0 < t <= 1 report BoundaryCusp.
    """
    scheme = _check_scheme(scheme)
    s = params.s
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    out = np.full(np.broadcast(t, r).shape, RegionLabel.OutsideNeighborhood, dtype=object)
    unset = np.ones(out.shape, dtype=bool)

    def take(mask, label):
        nonlocal unset
        m = mask & unset
        out[m] = label
        unset &= ~m

    take(np.hypot(t, r) <= ORIGIN_TOL, RegionLabel.Origin)

    with np.errstate(invalid="ignore"):
        ts = np.where(t > 0, t, np.nan) ** s
    on_wall = (t > 0) & (t <= 1.0) & (np.abs(r - ts) <= REL_TOL * np.maximum(ts, r))
    take(on_wall & ~_inside_ball(t, r, REL_TOL), RegionLabel.BoundaryCusp)

    in_cusp = (t > 0) & (t <= 1.0) & (r < ts)
    if scheme == "R1":
        core = in_cusp & (t < 0.5)
        take(core & (r <= ts / 6.0), RegionLabel.InnerPiece1)
        take(core & (r <= ts / 3.0), RegionLabel.InnerPiece2)
        take(core, RegionLabel.InnerPiece3)
    take(in_cusp, RegionLabel.CuspInterior)
    take(_inside_ball(t, r), RegionLabel.BallInterior)

    if scheme == "R1":
        take((t > -0.5) & (t <= 0) & (r <= -t), RegionLabel.RegionA)
        take((np.abs(t) < 0.5) & (np.abs(t) <= r) & (r < 0.5), RegionLabel.RegionB)
        take((t >= 0) & (t < 0.5) & (ts <= r) & (r <= t), RegionLabel.RegionC)
    else:
        abs_ts = np.abs(t) ** s
        take((t > -0.5) & (t <= 0) & (r <= abs_ts), RegionLabel.RegionD)
        take((np.abs(t) < 0.5) & (abs_ts < r) & (r < 0.5**s), RegionLabel.RegionE)
    return out


def classify(params: CuspParams, scheme: str, z) -> RegionLabel:
    """Classify a point into exactly one region label for the given scheme."""
    p = as_point(z, params)
    return classify_profile(params, scheme, p.t, p.r).item()


def _check_scheme(scheme: str) -> str:
    name = str(scheme).upper()
    if name not in ("R1", "R2"):
        raise ValueError(f"scheme must be 'R1' or 'R2', got {scheme!r}")
    return name


# ---------------------------------------------------------------------------
# Shell measures and region volumes
# ---------------------------------------------------------------------------

def _pow_integral(lo: float, hi: float, m: float) -> float:
    """Integral of x^m over [lo, hi], lo >= 0 (log branch at m = -1)."""
    if hi <= lo:
        return 0.0
    if abs(m + 1.0) < 1e-14:
        return math.log(hi / lo)
    return (hi ** (m + 1.0) - lo ** (m + 1.0)) / (m + 1.0)


# Per-region quadrature structure: the scale variable, its exact (or
# proposal) power, and the conditional radial band at fixed scale.
# kind:  'cone'   -> r in [c_lo*xi, c_hi*xi],        t = sign*xi
#        'band'   -> r in [c_lo*xi^s, c_hi*xi^s],    t = sign*xi
#        'slab'   -> r = xi, t uniform in [-xi, xi]          (region B)
#        'cwedge' -> r in [xi^s, xi], t = xi                 (region C)
#        'ering'  -> r in [xi^s, (1/2)^s], t = +/-xi         (region E)

@dataclass(frozen=True)
class _RegionQuad:
    kind: str
    sign: int = 1
    c_lo: float = 0.0
    c_hi: float = 1.0
    scale_hi: float = 0.5


_QUAD: dict[RegionLabel, _RegionQuad] = {
    RegionLabel.RegionA: _RegionQuad("cone", sign=-1),
    RegionLabel.RegionB: _RegionQuad("slab"),
    RegionLabel.RegionC: _RegionQuad("cwedge"),
    RegionLabel.RegionD: _RegionQuad("band", sign=-1),
    RegionLabel.RegionE: _RegionQuad("ering"),
    RegionLabel.CuspInterior: _RegionQuad("band", scale_hi=1.0),
    RegionLabel.InnerPiece1: _RegionQuad("band", c_hi=1.0 / 6.0),
    RegionLabel.InnerPiece2: _RegionQuad("band", c_lo=1.0 / 6.0, c_hi=1.0 / 3.0),
    RegionLabel.InnerPiece3: _RegionQuad("band", c_lo=1.0 / 3.0),
}

SAMPLEABLE = tuple(_QUAD)


def _scheme_of_label(label: RegionLabel) -> str | None:
    if label in _R1_REGIONS or label in _INNER_PIECES:
        return "R1"
    if label in _R2_REGIONS:
        return "R2"
    return None  # CuspInterior is scheme-agnostic


def _require_sampleable(label: RegionLabel, scheme: str | None = None):
    if label not in _QUAD:
        raise ValueError(f"{label.value} is not a sampleable open region")
    if scheme is not None:
        want = _scheme_of_label(label)
        if want is not None and want != _check_scheme(scheme):
            raise ValueError(f"{label.value} belongs to scheme {want}, not {scheme}")


def _shell_scale_interval(label: RegionLabel, lo: float, hi: float) -> tuple[float, float]:
    q = _QUAD[label]
    return max(lo, 0.0), min(hi, q.scale_hi)


def shell_measure(params: CuspParams, label: RegionLabel, shell: Shell) -> float:
    """Exact Lebesgue volume of region /\\ shell from the closed-form slices.

    Cross sections are (n-1)-balls or annuli: the cusp slice at height t has
    radius t^s, a cone slice radius |t|; region B integrates |x| with the
    slab length 2|x| in t; region E slices are annuli capped at (1/2)^s.
    """
    _require_sampleable(label)
    n, s = params.n, params.s
    a, b = _shell_scale_interval(label, shell.lo, shell.hi)
    if b <= a:
        return 0.0
    cn = unit_ball_volume(n - 1)
    q = _QUAD[label]
    if q.kind == "cone":
        return cn * _pow_integral(a, b, n - 1)
    if q.kind == "slab":
        # t-range 2*xi at radius xi; area weight (n-1)*cn*xi^(n-2)
        return 2.0 * (n - 1) * cn * _pow_integral(a, b, n - 1)
    if q.kind == "cwedge":
        return cn * (_pow_integral(a, b, n - 1) - _pow_integral(a, b, s * (n - 1)))
    if q.kind == "ering":
        cap = 0.5 ** (s * (n - 1))
        return 2.0 * cn * (cap * (b - a) - _pow_integral(a, b, s * (n - 1)))
    # 'band': annulus [c_lo*xi^s, c_hi*xi^s]
    frac = q.c_hi ** (n - 1) - q.c_lo ** (n - 1)
    return cn * frac * _pow_integral(a, b, s * (n - 1))


def region_volume(params: CuspParams, label: RegionLabel, scale_cap: float | None = None) -> float:
    """Closed-form volume of the region, optionally capped in its scale
    variable (the dyadic shells cover scale <= 1/2 only)."""
    _require_sampleable(label)
    n, s = params.n, params.s
    q = _QUAD[label]
    a, b = 0.0, q.scale_hi if scale_cap is None else min(q.scale_hi, scale_cap)
    cn = unit_ball_volume(n - 1)
    if q.kind == "cone":
        return cn * _pow_integral(a, b, n - 1)
    if q.kind == "slab":
        return 2.0 * (n - 1) * cn * _pow_integral(a, b, n - 1)
    if q.kind == "cwedge":
        return cn * (_pow_integral(a, b, n - 1) - _pow_integral(a, b, s * (n - 1)))
    if q.kind == "ering":
        cap = 0.5 ** (s * (n - 1))
        return 2.0 * cn * (cap * (b - a) - _pow_integral(a, b, s * (n - 1)))
    frac = q.c_hi ** (n - 1) - q.c_lo ** (n - 1)
    return cn * frac * _pow_integral(a, b, s * (n - 1))


# ---------------------------------------------------------------------------
# Deterministic samplers
# ---------------------------------------------------------------------------

def derive_rng(seed: int, k: int, label, salt: str = "") -> np.random.Generator:
    """Per-shell generator from a stable hash of (seed, k, label[, salt])."""
    name = label.value if isinstance(label, RegionLabel) else str(label)
    key = f"{seed}|{k}|{name}|{salt}".encode()
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return np.random.default_rng(int.from_bytes(digest, "little"))


def _power_icdf(lo, hi, m: float, u):
    """Inverse CDF of the density ~ x^m on [lo, hi] (log branch at m=-1)."""
    if abs(m + 1.0) < 1e-14:
        return lo * (hi / lo) ** u
    p = m + 1.0
    return (lo**p + u * (hi**p - lo**p)) ** (1.0 / p)


@dataclass
class ProfileSample:
    """Weighted profile samples of region /\\ shell for quadrature.

    mean(weight * f(t, r)) estimates the measure-average of f; multiplying
    by `measure` gives the shell integral.  `weight` absorbs any mismatch
    between the sampling law and the true normalised measure.
    """

    t: np.ndarray
    r: np.ndarray
    weight: np.ndarray
    measure: float
    count: int


def _strata(m1: int, m2: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Jittered m1 x m2 grid in the unit square, one sample per cell."""
    i = np.repeat(np.arange(m1), m2)
    j = np.tile(np.arange(m2), m1)
    u1 = (i + rng.random(m1 * m2)) / m1
    u2 = (j + rng.random(m1 * m2)) / m2
    return u1, u2


def _grid_shape(count: int) -> tuple[int, int]:
    m1 = max(1, math.isqrt(count))
    m2 = max(1, math.ceil(count / m1))
    return m1, m2


def sample_profile(
    params: CuspParams,
    label: RegionLabel,
    shell: Shell,
    count: int,
    rng: np.random.Generator,
    radial_tilt: float = 0.0,
    stratify: bool = True,
) -> ProfileSample:
    """Draw weighted (t, r) quadrature samples from region /\\ shell.

    The scale coordinate follows its exact power law when the normalisation
    is closed form (cone/slab/band); otherwise (C, E) a closed-form proposal
    plus an importance weight is used.  `radial_tilt` reshapes the
    conditional radial density to ~ r^(n-2-tilt), compensated by weights,
    which kills the variance of integrands with a known radial power
    singularity (region E).  Stratification is a jittered 2-D grid, so the
    effective count is the enclosing m1*m2 grid size.
    """
    _require_sampleable(label)
    n, s = params.n, params.s
    a, b = _shell_scale_interval(label, shell.lo, shell.hi)
    if b <= a:
        raise EmptyRegionError(f"shell {shell.k} misses the scale range of {label.value}")
    q = _QUAD[label]
    measure = shell_measure(params, label, shell)

    if stratify:
        m1, m2 = _grid_shape(count)
        u1, u2 = _strata(m1, m2, rng)
        m = m1 * m2
    else:
        m = count
        u1, u2 = rng.random(m), rng.random(m)
    # keep the conditional coordinate strictly inside its band, so samples
    # never sit exactly on a region interface (bias ~ 1e-9, far below MC noise)
    u2 = 1e-9 + (1.0 - 2e-9) * u2

    w = np.ones(m)
    nm2 = float(n - 2)

    if q.kind == "cone":
        xi = _power_icdf(a, b, n - 1.0, u1)
        lo_r, hi_r = np.zeros(m), xi
        t = q.sign * xi
    elif q.kind == "band":
        xi = _power_icdf(a, b, s * (n - 1.0), u1)
        lo_r, hi_r = q.c_lo * xi**s, q.c_hi * xi**s
        t = q.sign * xi
    elif q.kind == "slab":
        xi = _power_icdf(a, b, n - 1.0, u1)
        t = -xi + 2.0 * xi * u2
        r = xi
        return ProfileSample(t, r, w, measure, m)
    elif q.kind == "cwedge":
        # proposal ~ xi^(n-1); true density ~ xi^(n-1) - xi^(s(n-1))
        xi = _power_icdf(a, b, n - 1.0, u1)
        zp = _pow_integral(a, b, n - 1.0)
        zt = zp - _pow_integral(a, b, s * (n - 1.0))
        w = w * (1.0 - xi ** ((s - 1.0) * (n - 1.0))) * (zp / zt)
        lo_r, hi_r = xi**s, xi
        t = xi
    else:  # 'ering'
        xi = a + (b - a) * u1  # uniform proposal
        cap = 0.5 ** (s * (n - 1))
        zt = cap * (b - a) - _pow_integral(a, b, s * (n - 1.0))
        w = w * (cap - xi ** (s * (n - 1.0))) * ((b - a) / zt)
        lo_r, hi_r = xi**s, np.full(m, 0.5**s)
        t = xi * np.where(rng.random(m) < 0.5, 1.0, -1.0)

    if radial_tilt != 0.0:
        # Cap the tilt so lo^(m+1) stays in float range; the cells that need
        # variance reduction sit near the critical curve where the natural
        # tilt is about (n-1) + 1/s, far below the cap.
        lo_min = float(np.min(lo_r))
        if lo_min <= 0.0:
            cap = nm2 + 0.99
        else:
            cap = (nm2 + 1.0) + 600.0 / max(1.0, -math.log(lo_min))
        radial_tilt = min(radial_tilt, cap)
    m_r = nm2 - radial_tilt
    r = _power_icdf(lo_r, hi_r, m_r, u2)
    if radial_tilt != 0.0:
        # weight = (true radial density) / (tilted density), both normalised
        if abs(m_r + 1.0) < 1e-14:
            z_m = np.log(hi_r / lo_r)
        else:
            z_m = (hi_r ** (m_r + 1.0) - lo_r ** (m_r + 1.0)) / (m_r + 1.0)
        z_r = (hi_r ** (nm2 + 1.0) - lo_r ** (nm2 + 1.0)) / (nm2 + 1.0)
        w = w * r**radial_tilt * z_m / z_r
    return ProfileSample(np.asarray(t, dtype=float), r, w, measure, m)


def random_directions(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform unit vectors on S^{dim-1}, rows of shape (count, dim)."""
    g = rng.standard_normal((count, dim))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return g / norms


def sample_region(
    params: CuspParams,
    scheme: str,
    label: RegionLabel,
    shell: Shell,
    count: int,
    seed: int,
) -> list[Point]:
    """Deterministically sample `count` points of region /\\ shell.

    Every returned point classifies back to `label` under the scheme; the
    per-shell stream is derived from (seed, shell.k, label) so reruns and
    out-of-order shell evaluation reproduce identical points.
    """
    _require_sampleable(label, scheme)
    if count <= 0:
        raise ValueError("count must be positive")
    rng = derive_rng(seed, shell.k, label)
    prof = sample_profile(params, label, shell, count, rng, stratify=False)
    dirs = random_directions(prof.count, params.n - 1, rng)
    pts = [Point(float(t), r * d) for t, r, d in zip(prof.t, prof.r, dirs)]
    return pts[:count]


def shells(k_min: int, k_max: int) -> list[Shell]:
    """Ascending shells k_min..k_max inclusive."""
    if k_max < k_min:
        raise ValueError("k_max must be >= k_min")
    return [Shell(k) for k in range(k_min, k_max + 1)]
