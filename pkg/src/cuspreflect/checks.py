"""Invariant suite behind `cuspreflect verify` and the acceptance tests.

Each check returns an InvariantResult row (name, samples, worst observed
error, threshold, pass flag); `run_all` executes every suite for one
parameter set.  Budgets are arguments so the CLI can run a fast profile
while the acceptance tests run the full-size one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import extension, reflections, sobolev
from .extension import ClampT, Direction, ExtensionSpec, PowerAlpha
from .geometry import (
    CuspParams,
    Point,
    RegionLabel,
    Shell,
    classify,
    classify_profile,
    derive_rng,
    random_directions,
    region_volume,
    sample_profile,
    sample_region,
    shell_measure,
    shells,
)
from .reflections import ChartId


@dataclass
class InvariantResult:
    name: str
    samples: int
    worst_error: float
    threshold: float
    passed: bool

    @classmethod
    def of(cls, name, samples, worst, threshold):
        worst = float(worst)
        return cls(name, int(samples), worst, float(threshold), bool(worst <= threshold))


_R1_REGIONS = (RegionLabel.RegionA, RegionLabel.RegionB, RegionLabel.RegionC)
_R2_REGIONS = (RegionLabel.RegionD, RegionLabel.RegionE)
_ALL_PIECES = ("A", "B", "C", "D", "E", "P1", "P2", "P3")


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def _region_predicates(params: CuspParams, scheme: str, t, r):
    """Defining inequalities of each collar region, as boolean arrays."""
    s = params.s
    if scheme == "R1":
        return {
            RegionLabel.RegionA: (-0.5 < t) & (t <= 0) & (r <= -t),
            RegionLabel.RegionB: (np.abs(t) < 0.5) & (np.abs(t) <= r) & (r < 0.5),
            RegionLabel.RegionC: (0 <= t) & (t < 0.5) & (t_pow(t, s) <= r) & (r <= t),
        }
    return {
        RegionLabel.RegionD: (-0.5 < t) & (t <= 0) & (r <= np.abs(t) ** s),
        RegionLabel.RegionE: (np.abs(t) < 0.5) & (np.abs(t) ** s < r) & (r < 0.5**s),
    }


def t_pow(t, s):
    with np.errstate(invalid="ignore"):
        return np.where(t > 0, np.abs(t) ** s, np.nan)


def check_partition(params: CuspParams, scheme: str, samples: int = 100_000, seed: int = 7):
    """Collar points away from interfaces satisfy exactly one region's
    inequalities, and classify returns that region."""
    rng = derive_rng(seed, 0, f"partition-{scheme}")
    cap = 0.5 if scheme == "R1" else 0.5 ** params.s
    t = rng.uniform(-0.5, 0.5, samples * 2)
    r = rng.uniform(0.0, cap, samples * 2)
    s = params.s
    # keep points clearly off every interface and outside the closed domain
    margin = 1e-6
    ts = t_pow(t, s)
    off = (
        (np.abs(r - np.abs(t)) > margin)
        & (np.abs(r - np.nan_to_num(ts, nan=-1.0)) > margin)
        & (np.abs(t) > margin)
        & (r > margin)
        & (np.abs(r - np.abs(t) ** s) > margin)
        & (cap - r > margin)
        & (0.5 - np.abs(t) > margin)
        & ((t < 0) | (r - np.nan_to_num(ts, nan=-1.0) > margin))
    )
    t, r = t[off][:samples], r[off][:samples]
    preds = _region_predicates(params, scheme, t, r)
    hits = np.sum([p.astype(int) for p in preds.values()], axis=0)
    bad_multi = int(np.sum(hits != 1))
    labels = classify_profile(params, scheme, t, r)
    bad_label = 0
    for lab, pred in preds.items():
        bad_label += int(np.sum(pred & (labels != lab)))
    worst = bad_multi + bad_label
    return InvariantResult.of(f"geometry.partition.{scheme}", t.size, worst, 0)


def check_boundary_consistency(params: CuspParams, samples: int = 10_000, seed: int = 7):
    """Every point with |x| = t^s, 0 < t < 1/2 classifies BoundaryCusp."""
    rng = derive_rng(seed, 0, "boundary")
    t = np.exp(rng.uniform(np.log(2.0**-20), np.log(0.5), samples))
    bad = 0
    for scheme in ("R1", "R2"):
        labels = classify_profile(params, scheme, t, t**params.s)
        bad += int(np.sum(labels != RegionLabel.BoundaryCusp))
    return InvariantResult.of("geometry.boundary_consistency", 2 * samples, bad, 0)


def check_shell_measure_sums(params: CuspParams, k_max: int = 40):
    """Sum of shell measures k=1..K converges to the closed-form volume."""
    worst = 0.0
    for label in (*_R1_REGIONS, *_R2_REGIONS, RegionLabel.CuspInterior,
                  RegionLabel.InnerPiece1, RegionLabel.InnerPiece2, RegionLabel.InnerPiece3):
        total = sum(shell_measure(params, label, Shell(k)) for k in range(1, k_max + 1))
        exact = region_volume(params, label, scale_cap=0.5)
        worst = max(worst, abs(total - exact) / exact)
    return InvariantResult.of("geometry.shell_measure_sums", 9 * k_max, worst, 1e-6)


def check_sampler_hit_rate(params: CuspParams, count: int = 400, seed: int = 7):
    """sample_region output classifies back to its region, every time."""
    misses = 0
    total = 0
    cases = [("R1", lab) for lab in (*_R1_REGIONS, RegionLabel.InnerPiece1,
                                     RegionLabel.InnerPiece2, RegionLabel.InnerPiece3)]
    cases += [("R2", lab) for lab in _R2_REGIONS]
    # under R1 the cusp core splits into the inner pieces, so the plain
    # cusp-interior label is only reachable through scheme R2 here
    cases += [("R2", RegionLabel.CuspInterior)]
    for scheme, label in cases:
        for k in (1, 3, 8, 20):
            pts = sample_region(params, scheme, label, Shell(k), count, seed)
            total += len(pts)
            misses += sum(classify(params, scheme, p) is not label for p in pts)
    return InvariantResult.of("geometry.sampler_hit_rate", total, misses, 0)


# ---------------------------------------------------------------------------
# reflections
# ---------------------------------------------------------------------------

def check_boundary_fixity(params: CuspParams, samples: int = 10_000, seed: int = 7):
    """All charts restrict to the identity on the cusp wall."""
    rng = derive_rng(seed, 0, "fixity")
    t = np.exp(rng.uniform(np.log(2.0**-20), np.log(0.5), samples))
    dirs = random_directions(samples, params.n - 1, rng)
    worst = 0.0
    for chart in ChartId:
        for i in range(samples):
            z = Point(float(t[i]), t[i] ** params.s * dirs[i])
            img = reflections.apply(chart, params, z)
            worst = max(worst, float(np.max(np.abs(img.as_array() - z.as_array()))))
    return InvariantResult.of("reflections.boundary_fixity", 3 * samples, worst, 1e-12)


# (piece-minus, piece-plus, interface radius as function of t, t-range)
def _interfaces(params: CuspParams):
    s = params.s
    return [
        ("A", "B", lambda t: -t, (-0.49, -0.01)),
        ("B", "C", lambda t: t, (0.01, 0.49)),
        ("C", None, lambda t: t**s, (0.01, 0.49)),
        ("P1", "P2", lambda t: t**s / 6.0, (0.01, 0.49)),
        ("P2", "P3", lambda t: t**s / 3.0, (0.01, 0.49)),
        ("P3", None, lambda t: t**s, (0.01, 0.49)),
        ("D", "E", lambda t: (-t) ** s, (-0.49, -0.01)),
        ("E", None, lambda t: t**s, (0.01, 0.49)),
    ]


def check_interface_continuity(params: CuspParams, pairs_per_interface: int = 1000, seed: int = 7):
    """Adjacent piece formulas agree in the limit at every interface.

    Evaluated as the two formulas at the common interface point: the
    one-sided limits of `apply` equal these values, without the O(|DR| * h)
    error a straddling stencil would inject on the strongly expanding
    inner pieces.
    """
    rng = derive_rng(seed, 0, "interface")
    worst = 0.0
    count = 0
    for minus, plus, radius, (t_lo, t_hi) in _interfaces(params):
        t = rng.uniform(t_lo, t_hi, pairs_per_interface)
        r = radius(t)
        Tm, _, _, Pm, _, _ = reflections.piece_profile(minus, params, t, r)
        if plus is None:
            Tp, Pp = t, r  # cusp wall: identity
        else:
            Tp, _, _, Pp, _, _ = reflections.piece_profile(plus, params, t, r)
        worst = max(worst, float(np.max(np.hypot(Tm - Tp, Pm - Pp))))
        count += pairs_per_interface
    return InvariantResult.of("reflections.interface_continuity", count, worst, 1e-9)


def check_straddle_continuity(params: CuspParams, pairs_per_interface: int = 200, seed: int = 7):
    """Straddle check (radial offsets 1e-10) across the outer-chart
    interfaces at moderate heights |t| in (0.3, 0.45), where the chart
    Lipschitz constants are O(1) and the offset injects < 1e-9."""
    rng = derive_rng(seed, 0, "straddle")
    eps = 1e-10
    worst = 0.0
    count = 0
    for minus, plus, radius, (t_lo, _) in _interfaces(params):
        if minus.startswith("P"):
            continue  # inner pieces expand by ~ t^(1-s); the limit check covers them
        sign = -1.0 if t_lo < 0 else 1.0
        t = sign * rng.uniform(0.3, 0.45, pairs_per_interface)
        r = radius(t)
        Tm, _, _, Pm, _, _ = reflections.piece_profile(minus, params, t, r - eps)
        if plus is None:
            Tp, Pp = t, r + eps  # cusp wall: identity on the outer side
        else:
            Tp, _, _, Pp, _, _ = reflections.piece_profile(plus, params, t, r + eps)
        worst = max(worst, float(np.max(np.hypot(Tm - Tp, Pm - Pp))))
        count += pairs_per_interface
    return InvariantResult.of("reflections.straddle_continuity", count, worst, 1e-9)


_BANDS = {
    RegionLabel.RegionA: ("A", 0.0, 1.0 / 6.0),
    RegionLabel.RegionB: ("B", 1.0 / 6.0, 0.5),
    RegionLabel.RegionC: ("C", 0.5, 1.0),
    RegionLabel.RegionD: ("D", 0.0, 0.5),
    RegionLabel.RegionE: ("E", 0.5, 1.0),
}


def check_image_bands(params: CuspParams, samples: int = 2000, seed: int = 7):
    """Outer charts land in the advertised radius bands of the cusp core."""
    worst = 0.0
    total = 0
    for label, (piece, lo, hi) in _BANDS.items():
        for k in (1, 4, 9):
            rng = derive_rng(seed, k, label, salt="bands")
            prof = sample_profile(params, label, Shell(k), samples, rng)
            T, phi, _, _ = reflections.profile_jet(piece, params, prof.t, prof.r)
            ts = T**params.s
            viol = np.maximum(lo * ts - phi, phi - hi * ts) / ts
            worst = max(worst, float(np.max(viol)))
            total += prof.count
    return InvariantResult.of("reflections.image_bands", total, worst, 1e-9)


def check_equivariance(params: CuspParams, samples: int = 200, seed: int = 7):
    """apply commutes with rotations of the cross-section."""
    rng = derive_rng(seed, 0, "equivariance")
    n = params.n
    worst = 0.0
    total = 0
    cases = [(ChartId.R1Outer, lab) for lab in _R1_REGIONS]
    cases += [(ChartId.R2Outer, lab) for lab in _R2_REGIONS]
    cases += [(ChartId.R1Inner, lab) for lab in (RegionLabel.InnerPiece1,
                                                 RegionLabel.InnerPiece2,
                                                 RegionLabel.InnerPiece3)]
    for chart, label in cases:
        pts = sample_region(params, "R2" if chart is ChartId.R2Outer else "R1",
                            label, Shell(3), samples, seed)
        q, _ = np.linalg.qr(rng.standard_normal((n - 1, n - 1)))
        for z in pts:
            img = reflections.apply(chart, params, z)
            rot = reflections.apply(chart, params, Point(z.t, q @ z.x))
            worst = max(worst, float(np.max(np.abs(rot.as_array()
                        - np.concatenate(([img.t], q @ img.x))))))
            total += 1
    return InvariantResult.of("reflections.equivariance", total, worst, 1e-12)


def check_jacobian_scaling(params: CuspParams, samples: int = 2048, seed: int = 7):
    """log-log slope of |J| in the scale variable: exact (n-1)(s-1) on A,
    within 0.02 on B and C."""
    out = []
    for label, tol, krange in (
        (RegionLabel.RegionA, 1e-6, range(8, 25)),
        (RegionLabel.RegionB, 0.02, range(8, 25)),
        (RegionLabel.RegionC, 0.02, range(8, 25)),
    ):
        rows = sobolev.scaling_profile(params, label, [Shell(k) for k in krange], samples, seed)
        slope, _, _ = sobolev.scaling_fit([(r["scale"], r["absdet_gmean"]) for r in rows])
        target = sobolev.det_scaling_target(label, params.n, params.s)
        out.append(InvariantResult.of(
            f"reflections.jacobian_scaling.{label.value}", samples * len(rows),
            abs(slope - target), tol))
    return out


def check_boundedness(params: CuspParams, samples: int = 2048, seed: int = 7):
    """Sampled opnorm on the R1 collar does not grow as shells refine."""
    worst = 0.0
    total = 0
    for label in _R1_REGIONS:
        piece = reflections.piece_of_region(label)
        running = 0.0
        for k in range(5, 21):
            rng = derive_rng(seed, k, label, salt="bound")
            prof = sample_profile(params, label, Shell(k), samples, rng)
            _, _, opnorm, _ = reflections.profile_jet(piece, params, prof.t, prof.r)
            mx = float(np.max(opnorm))
            if running > 0.0:
                worst = max(worst, mx / running)
            running = max(running, mx)
            total += prof.count
    return InvariantResult.of("reflections.boundedness_outer", total, worst, 1.05)


def check_e_opnorm_factor(params: CuspParams, samples: int = 2048, seed: int = 7,
                          max_factor: float = 4.0):
    """opnorm * |x|^((s-1)/s) on region E stays within a fixed factor."""
    rows = sobolev.scaling_profile(params, RegionLabel.RegionE,
                                   [Shell(k) for k in range(5, 21)], samples, seed)
    vals = [r["opnorm_comp_mean"] for r in rows]
    factor = max(vals) / min(vals)
    res = InvariantResult.of("reflections.e_opnorm_factor", samples * len(rows),
                             factor, max_factor)
    return res


def _fd_points(params: CuspParams, piece: str, count: int, seed: int):
    """Piece-interior points with comfortable margins for the FD stencil."""
    label = reflections._PIECE_REGION[piece]
    scheme = "R2" if piece in ("D", "E") else "R1"
    pts = []
    k = 2
    while len(pts) < count and k < 7:
        got = sample_region(params, scheme, label, Shell(k), count, seed + k)
        for z in got:
            gap = min(
                reflections._interface_gap(params, piece, z.t, z.r),
                reflections._smoothness_gap(piece, z.t, z.r),
            )
            if gap > 4.0 * reflections.fd_step(z):
                pts.append(z)
            if len(pts) >= count:
                break
        k += 1
    return pts


def check_fd_agreement(params: CuspParams, per_piece: int = 1000, seed: int = 7):
    """Analytic differentials match central finite differences."""
    worst = 0.0
    total = 0
    for piece in _ALL_PIECES:
        chart = reflections.chart_of_region(reflections._PIECE_REGION[piece])
        for z in _fd_points(params, piece, per_piece, seed):
            jet = reflections.differential(chart, params, z)
            fd = reflections.differential_fd(chart, params, z)
            scale = float(np.max(np.abs(jet.differential)))
            worst = max(worst, float(np.max(np.abs(jet.differential - fd))) / scale)
            total += 1
    return InvariantResult.of("reflections.fd_agreement", total, worst, 1e-5)


def check_round_trip(params: CuspParams, per_piece: int = 400, seed: int = 7):
    """invert(apply(z)) = z and apply(invert(w)) = w within 1e-8."""
    worst = 0.0
    total = 0
    for piece in _ALL_PIECES:
        label = reflections._PIECE_REGION[piece]
        chart = reflections.chart_of_region(label)
        scheme = "R2" if chart is ChartId.R2Outer else "R1"
        for k in (1, 4, 9):
            for z in sample_region(params, scheme, label, Shell(k), per_piece // 3 + 1, seed):
                w = reflections.apply(chart, params, z)
                back = reflections.invert(chart, params, w)
                worst = max(worst, float(np.max(np.abs(back.as_array() - z.as_array()))))
                fwd = reflections.apply(chart, params, reflections.invert(chart, params, w))
                worst = max(worst, float(np.max(np.abs(fwd.as_array() - w.as_array()))))
                total += 1
    return InvariantResult.of("reflections.round_trip", total, worst, 1e-8)


# ---------------------------------------------------------------------------
# sobolev
# ---------------------------------------------------------------------------

def sweep_grid(params: CuspParams, scheme: str, grid: int = 21, p_hi: float = 6.0):
    """The acceptance (p, q) grid: p in [1.1 p_min, p_hi], q in [1, p - 0.05]."""
    pmin = sobolev.p_min_r1(params.n, params.s) if scheme == "R1" else sobolev.p_min_r2(params.n, params.s)
    ps = np.linspace(1.1 * pmin, p_hi, grid)
    return [(float(p), float(q)) for p in ps for q in np.linspace(1.0, p - 0.05, grid)]


def region_prediction(region: RegionLabel, p: float, q: float, n: int, s: float) -> bool:
    """Whether the region's own distortion integral converges (e > -1)."""
    return sobolev.predicted_shell_exponent(region, p, q, n, s) > -1.0


def check_window_consistency(
    params: CuspParams,
    samples_per_shell: int = 1024,
    k_min: int = 5,
    k_max: int = 26,
    margin: float = 0.05,
    grid: int = 21,
    seed: int = 42,
):
    """Verdicts agree with the per-region analytic predicate away from the
    critical curve; Inconclusive cells appear only within the margin."""
    n, s = params.n, params.s
    shl = shells(k_min, k_max)
    bad = 0
    cells = 0
    for scheme, chart, regions in (
        ("R1", ChartId.R1Outer, _R1_REGIONS),
        ("R2", ChartId.R2Outer, _R2_REGIONS),
    ):
        for p, q in sweep_grid(params, scheme, grid=grid):
            qm = sobolev.q_max(scheme, p, n, s)
            for region in regions:
                cells += 1
                ss = sobolev.distortion_integral(
                    params, chart, region, p, q, shl, samples_per_shell, seed
                )
                verdict = sobolev.convergence_verdict(ss)
                predicted = region_prediction(region, p, q, n, s)
                near_curve = abs(q - qm) < margin and region is not RegionLabel.RegionD
                if verdict.kind == "Inconclusive":
                    if not near_curve:
                        bad += 1
                elif (verdict.kind == "Convergent") != predicted:
                    if not near_curve or region is RegionLabel.RegionD:
                        bad += 1
    return InvariantResult.of("sobolev.window_consistency", cells, bad, 0)


def check_shell_exponent_match(params: CuspParams, n_pairs: int = 10, seed: int = 11,
                               samples_per_shell: int = 4096):
    """Fitted log2 shell ratio equals -(e+1) within 0.05 for in-window pairs.

    Region E is tested on the singular-dominated side (e in (-0.9, -0.35)):
    for e > 0 its shells are dominated by the regular outer-radius mass and
    decay like plain volume, so the pure power law only rules near the
    critical curve (where the verdicts live).
    """
    n, s = params.n, params.s
    rng = derive_rng(seed, 0, "expmatch")
    worst = 0.0
    total = 0
    for scheme, chart, regions in (
        ("R1", ChartId.R1Outer, _R1_REGIONS),
        ("R2", ChartId.R2Outer, _R2_REGIONS),
    ):
        pmin = sobolev.p_min_r1(n, s) if scheme == "R1" else sobolev.p_min_r2(n, s)
        for region in regions:
            made = 0
            attempts = 0
            while made < n_pairs:
                attempts += 1
                if attempts > 200 * n_pairs:  # pragma: no cover
                    raise RuntimeError(f"could not draw in-window pairs for {region.value}")
                p = float(rng.uniform(max(1.2, 1.1 * pmin), 6.0))
                qm = sobolev.q_max(scheme, p, n, s)
                if qm <= 1.1:
                    continue
                if region is RegionLabel.RegionE:
                    # solve q from a target exponent on the singular side
                    e_target = float(rng.uniform(-0.9, -0.35))
                    w = ((n - 1) * s - e_target) / (s - 1.0)
                    q = w * p / (p + w)
                    if not (1.0 <= q < qm - 0.05):
                        continue
                else:
                    q = float(rng.uniform(1.0, qm - 0.1))
                e = sobolev.predicted_shell_exponent(region, p, q, n, s)
                ss = sobolev.distortion_integral(
                    params, chart, region, p, q, shells(5, 32), samples_per_shell, seed
                )
                tail = ss.ratios[-8:]
                fitted = float(np.mean(np.log2(tail)))
                worst = max(worst, abs(fitted + (e + 1.0)))
                made += 1
                total += 1
    return InvariantResult.of("sobolev.shell_exponent_match", total, worst, 0.05)


def check_qmax_curves(params: CuspParams):
    """q_max_r1 linear increasing; q_max_r2 increasing, concave, asymptoting;
    curves cross at p* where both equal n-1."""
    n, s = params.n, params.s
    ps = np.linspace(1.05 * max(sobolev.p_min_r1(n, s), sobolev.p_min_r2(n, s)), 40.0, 400)
    q1 = np.array([sobolev.q_max_r1(p, n, s) for p in ps])
    q2 = np.array([sobolev.q_max_r2(p, n, s) for p in ps])
    worst = 0.0
    worst = max(worst, float(np.max(np.abs(np.diff(q1, 2)))))        # linear
    worst = max(worst, float(np.max(-np.diff(q1))))                  # increasing
    worst = max(worst, float(np.max(-np.diff(q2))))                  # increasing
    worst = max(worst, float(np.max(np.diff(q2, 2))))                # concave
    asym = sobolev.q_max_asymptote_r2(n, s)
    worst = max(worst, float(np.max(q2 - asym)))                     # below asymptote
    crossing = sobolev.qmax_crossing(n, s)
    pstar = sobolev.p_star(n, s)
    worst = max(worst, abs(crossing - pstar))
    worst = max(worst, abs(sobolev.q_max_r1(pstar, n, s) - (n - 1)))
    worst = max(worst, abs(sobolev.q_max_r2(pstar, n, s) - (n - 1)))
    return InvariantResult.of("sobolev.qmax_curves", ps.size, worst, 1e-9)


def check_dual_roundtrip(params: CuspParams, samples: int = 200, seed: int = 7):
    """dual_exponent composed with its Moebius inverse is the identity, and
    p = n is the self-dual point."""
    n = params.n
    rng = derive_rng(seed, 0, "dual")
    ps = n - 1 + np.exp(rng.uniform(np.log(1e-3), np.log(40.0), samples))
    worst = 0.0
    for p in ps:
        d = sobolev.dual_exponent(float(p), n)
        worst = max(worst, abs(sobolev.dual_exponent_inverse(d, n) - p) / p)
    worst = max(worst, abs(sobolev.dual_exponent(float(n), n) - n))
    return InvariantResult.of("sobolev.dual_roundtrip", samples, worst, 1e-12)


# ---------------------------------------------------------------------------
# extension
# ---------------------------------------------------------------------------

def check_native_identity(params: CuspParams, samples: int = 300, seed: int = 7):
    """The extension equals u exactly on the native side."""
    u = PowerAlpha(0.7)
    spec = ExtensionSpec("R1", Direction.FromInside)
    worst = 0.0
    total = 0
    for label in (RegionLabel.CuspInterior, RegionLabel.InnerPiece2, RegionLabel.InnerPiece3):
        for z in sample_region(params, "R1", label, Shell(2), samples, seed):
            worst = max(worst, abs(extension.extend_eval(spec, params, u, z) - u.value(z)))
            total += 1
    spec_out = ExtensionSpec("R1", Direction.FromOutside)
    u2 = ClampT()
    for label in _R1_REGIONS:
        for z in sample_region(params, "R1", label, Shell(2), samples, seed):
            worst = max(worst, abs(extension.extend_eval(spec_out, params, u2, z) - u2.value(z)))
            total += 1
    return InvariantResult.of("extension.native_identity", total, worst, 0.0)


def check_trace_matching(params: CuspParams, samples: int = 500, seed: int = 7):
    """For continuous u the two-sided extension limits agree on the wall."""
    u = ClampT()
    eps = 1e-10
    rng = derive_rng(seed, 0, "trace")
    t = np.exp(rng.uniform(np.log(1e-4), np.log(0.49), samples))
    worst = 0.0
    e1 = np.zeros(params.n - 1)
    e1[0] = 1.0
    for scheme in ("R1", "R2"):
        spec = ExtensionSpec(scheme, Direction.FromInside)
        for ti in t:
            wall = ti**params.s
            inner = extension.extend_eval(spec, params, u, Point(ti, (wall * (1 - eps)) * e1))
            outer = extension.extend_eval(spec, params, u, Point(ti, (wall * (1 + eps)) * e1))
            worst = max(worst, abs(inner - outer))
    return InvariantResult.of("extension.trace_matching", 2 * samples, worst, 1e-8)


def check_cutoff_product(params: CuspParams, samples: int = 200, seed: int = 7):
    """psi * E(u) equals u on the domain and vanishes outside the collar."""
    u = PowerAlpha(0.4)
    spec = ExtensionSpec("R1", Direction.FromInside)
    worst = 0.0
    total = 0
    for z in sample_region(params, "R1", RegionLabel.CuspInterior, Shell(2), samples, seed):
        worst = max(worst, abs(extension.extend_global(spec, params, u, z) - u.value(z)))
        total += 1
    rng = derive_rng(seed, 0, "cutoffout")
    for _ in range(samples):
        z = Point(float(rng.uniform(-2.0, -0.6)), rng.uniform(0.6, 2.0, params.n - 1))
        worst = max(worst, abs(extension.extend_global(spec, params, u, z)))
        total += 1
    return InvariantResult.of("extension.cutoff_product", total, worst, 0.0)


def check_winfty_positive(params: CuspParams, per_shell: int = 120, seed: int = 7):
    """Lipschitz data stays Lipschitz under outward extension: shell maxima
    of the extension gradient do not grow."""
    u = ClampT()
    spec = ExtensionSpec("R1", Direction.FromInside)
    maxima = []
    total = 0
    for k in range(5, 21):
        mx = 0.0
        for label in _R1_REGIONS:
            for z in sample_region(params, "R1", label, Shell(k), per_shell, seed):
                g = extension.extend_gradient(spec, params, u, z)
                mx = max(mx, float(np.linalg.norm(g)))
                total += 1
        maxima.append(mx)
    early = max(maxima[:8])
    worst = max(maxima) / early
    return InvariantResult.of("extension.winfty_positive", total, worst, 1.05)


def check_holder_negative(params: CuspParams):
    """The inward extension of the ramp obeys osc ~ diam^(1/s)."""
    probe = extension.holder_probe(params, [2.0 ** (-k) for k in range(3, 11)])
    nsamples = len(probe.t_values) * 64
    return [
        InvariantResult.of("extension.holder_exponent", nsamples,
                           abs(probe.exponent - 1.0 / params.s), 0.02),
        InvariantResult.of("extension.holder_residual", nsamples, probe.residual, 1e-3),
    ]


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def run_all(params: CuspParams, quick: bool = True, seed: int = 42) -> list[InvariantResult]:
    """Run every module invariant; `quick` shrinks the Monte Carlo budgets to
    keep the CLI profile under a minute."""
    part = 20_000 if quick else 100_000
    fix = 2_000 if quick else 10_000
    fd = 150 if quick else 1000
    sps = 1024 if quick else 4096
    grid = 11 if quick else 21
    results = [
        check_partition(params, "R1", part, seed),
        check_partition(params, "R2", part, seed),
        check_boundary_consistency(params, fix, seed),
        check_shell_measure_sums(params),
        check_sampler_hit_rate(params, 200 if quick else 400, seed),
        check_boundary_fixity(params, fix, seed),
        check_interface_continuity(params, 1000, seed),
        check_straddle_continuity(params, 200, seed),
        check_image_bands(params, 1000 if quick else 2000, seed),
        check_equivariance(params, 60 if quick else 200, seed),
        *check_jacobian_scaling(params, 1024 if quick else 4096, seed),
        check_boundedness(params, 1024 if quick else 2048, seed),
        check_e_opnorm_factor(params, 1024 if quick else 2048, seed),
        check_fd_agreement(params, fd, seed),
        check_round_trip(params, 120 if quick else 400, seed),
        check_window_consistency(params, sps, grid=grid, seed=seed),
        check_shell_exponent_match(params, 4 if quick else 10, seed, sps),
        check_qmax_curves(params),
        check_dual_roundtrip(params, 100, seed),
        check_native_identity(params, 150 if quick else 300, seed),
        check_trace_matching(params, 200 if quick else 500, seed),
        check_cutoff_product(params, 100 if quick else 200, seed),
        check_winfty_positive(params, 60 if quick else 120, seed),
        *check_holder_negative(params),
    ]
    return results
