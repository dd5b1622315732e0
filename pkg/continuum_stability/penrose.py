"""
Penrose contour u -> eps_R(k,u) + i eps_I(k,u) of a homogeneous equilibrium.

    eps_I(u) = -(pi / k^2) f0'(u)
    eps_R(u) = 1 + H[eps_I](u) = 1 - (pi / k^2) H[f0'](u)

The winding number is computed with the ray rule (zeros of eps_I where eps_R < 0,
+1 where f0' turns from negative to positive, -1 the other way) and
cross-checked with the discrete argument accumulated along the sampled contour.
"""

import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .equilibria import (
    CriticalPoint,
    EquilibriumProfile,
    ProfileFamily,
    critical_points,
    galilean_frame,
    tangencies,
)
from .errors import ConfigError, CriticalContourError, CriticalStateNotFound, WindingMismatchWarning

ORIGIN_TOL = 1e-8
POINT_TOL = 1e-11
CONTOUR_POINTS = 2001


@dataclass(frozen=True, eq=False)
class DielectricSamples:
    profile: EquilibriumProfile
    k: float
    u: np.ndarray
    eps_I: np.ndarray
    eps_R: np.ndarray
    tol: float = POINT_TOL

    @property
    def abs_sq(self) -> np.ndarray:
        return self.eps_R ** 2 + self.eps_I ** 2

    def rows(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.u.tolist(), self.eps_R.tolist(), self.eps_I.tolist()))


@dataclass(frozen=True)
class CrossingEvent:
    u_c: float
    kind: str
    eps_R_at: float
    contributes: int

    def to_dict(self) -> Dict[str, Any]:
        return {"u_c": self.u_c, "kind": self.kind, "eps_R_at": self.eps_R_at, "contributes": self.contributes}


@dataclass
class WindingReport:
    winding: Optional[int]
    crossings: List[CrossingEvent]
    stable: Optional[bool]
    contour_winding: Optional[int] = None
    consistent: Optional[bool] = None
    critical: bool = False
    k: float = float("nan")

    @property
    def verdict(self) -> str:
        if self.critical:
            return "critical"
        return "stable" if self.stable else "unstable"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "winding": self.winding,
            "stable": self.stable,
            "critical": self.critical,
            "contour_winding": self.contour_winding,
            "consistent": self.consistent,
            "crossings": [c.to_dict() for c in self.crossings],
        }


@dataclass
class SignatureProfile:
    intervals: List[Tuple[float, float, int]]
    neutral_points: List[float]
    frame_shift: float = 0.0

    @property
    def changes(self) -> int:
        return max(len(self.intervals) - 1, 0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "frame_shift": self.frame_shift,
            "changes": self.changes,
            "neutral_points": self.neutral_points,
            "intervals": [{"u_lo": lo, "u_hi": hi, "sigma": s} for lo, hi, s in self.intervals],
        }


@dataclass
class CriticalState:
    kind: str
    u_c: float
    k_c: float
    embedded_mode_signature: int
    eta_c: float = float("nan")
    eps_R_slope: float = float("nan")
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "kind": self.kind,
            "u_c": self.u_c,
            "k_c": self.k_c,
            "eta_c": self.eta_c,
            "embedded_mode_signature": self.embedded_mode_signature,
            "eps_R_slope": self.eps_R_slope,
        }
        out.update(self.extra)
        return out


def _check_k(k: float):
    if not k > 0:
        raise ConfigError(f"wavenumber must be positive, got {k}")


def default_u_grid(profile: EquilibriumProfile, n: int = CONTOUR_POINTS, pad: float = 0.25) -> np.ndarray:
    lo, hi = profile.domain
    width = hi - lo
    return np.linspace(lo - pad * width, hi + pad * width, n)


def eps_values(profile: EquilibriumProfile, k: float, u, method: str = "auto", tol: float = POINT_TOL):
    """(eps_R, eps_I) at u; scalars in, scalars out."""
    _check_k(k)
    scale = np.pi / (k * k)
    eps_i = -scale * np.asarray(profile.derivative(u, 1), dtype=float)
    hilb = profile.derivative_hilbert(u, method=method, tol=tol)
    eps_r = 1.0 - scale * np.asarray(hilb, dtype=float)
    if np.ndim(u) == 0:
        return float(eps_r), float(eps_i)
    return eps_r, eps_i


def dielectric(
    profile: EquilibriumProfile,
    k: float,
    u_grid: Optional[Sequence[float]] = None,
    method: str = "auto",
    tol: float = POINT_TOL,
) -> DielectricSamples:
    """
    Sample eps_I and eps_R on u_grid (default: the profile domain padded by 25%).

    method: "auto" (closed forms where the profile has them), "quadrature"
    (pointwise adaptive principal-value integrals) or "discrete".
    """
    _check_k(k)
    u = default_u_grid(profile) if u_grid is None else np.asarray(u_grid, dtype=float)
    if method == "quadrature":
        method = "adaptive"
    eps_r, eps_i = eps_values(profile, k, u, method=method, tol=tol)
    return DielectricSamples(profile, float(k), u, np.asarray(eps_i), np.asarray(eps_r), tol=tol)


def _f2_scale(profile: EquilibriumProfile) -> float:
    lo, hi = profile.domain
    try:
        return float(np.max(np.abs(profile.derivative(np.linspace(lo, hi, 801), 2)))) or 1.0
    except Exception:
        return 1.0


def _crossing(profile, k, point: CriticalPoint, sign_change: int, tol: float = POINT_TOL) -> CrossingEvent:
    eps_r, _ = eps_values(profile, k, point.location, tol=tol)
    # orientation from the direction of the sign change; f0'' can be
    # discontinuous at the located root (steep chi cores)
    if sign_change == 0:
        kind = "tangency"
    else:
        kind = "transverse_up" if sign_change > 0 else "transverse_down"
    contributes = 0
    if eps_r < 0 and kind != "tangency":
        contributes = 1 if kind == "transverse_up" else -1
    return CrossingEvent(point.location, kind, eps_r, contributes)


def crossings(profile: EquilibriumProfile, k: float, tol: float = POINT_TOL) -> List[CrossingEvent]:
    """Zeros of eps_I (sign changes and tangencies of f0'), in increasing u."""
    events = []
    for point in critical_points(profile):
        sign_change = 1 if point.type == "minimum" else -1
        if point.type == "inflection_degenerate":
            # a degenerate zero still changes sign; recover the direction from neighbours
            h = 1e-6 * max(1.0, abs(point.location))
            left = float(profile.derivative(point.location - h, 1))
            sign_change = 1 if left < 0 else -1
        events.append(_crossing(profile, k, point, sign_change, tol))
    for u_t in tangencies(profile):
        f2 = float(profile.derivative(u_t, 2))
        events.append(_crossing(profile, k, CriticalPoint(u_t, "inflection_degenerate", f2), 0, tol))
    return sorted(events, key=lambda e: e.u_c)


def _closing_angle(eps_r: float, eps_i: float) -> float:
    return float(np.arctan2(abs(eps_i), eps_r))


def contour_winding(
    d: DielectricSamples, extra_points: Sequence[float] = (), max_refinements: int = 12, origin_tol: float = ORIGIN_TOL
) -> Tuple[int, float]:
    """
    Winding number from the total argument accumulated along the sampled contour.

    The contour is closed through eps = 1 at both ends: below the origin at
    u -> -infinity (eps_I <= 0 there) and above it at u -> +infinity. Returns the
    rounded winding and the raw argument / 2 pi.
    """
    profile, k = d.profile, d.k
    u = np.unique(np.concatenate([d.u, np.asarray(list(extra_points), dtype=float)]))
    eps_r, eps_i = eps_values(profile, k, u, tol=d.tol)
    eps = np.asarray(eps_r) + 1j * np.asarray(eps_i)

    for _ in range(max_refinements):
        steps = np.angle(eps[1:] / eps[:-1])
        coarse = np.flatnonzero((np.abs(steps) > np.pi / 2) & (np.diff(u) > 1e-12 * max(1.0, np.max(np.abs(u)))))
        if coarse.size == 0:
            break
        mids = 0.5 * (u[coarse] + u[coarse + 1])
        mr, mi = eps_values(profile, k, mids, tol=d.tol)
        u = np.concatenate([u, mids])
        eps = np.concatenate([eps, np.asarray(mr) + 1j * np.asarray(mi)])
        order = np.argsort(u)
        u, eps = u[order], eps[order]

    if np.min(np.abs(eps)) < origin_tol:
        at = float(u[np.argmin(np.abs(eps))])
        raise CriticalContourError(f"Penrose contour passes within {origin_tol:g} of the origin at u={at:.6g}", at)

    start = -_closing_angle(eps[0].real, eps[0].imag)
    end = _closing_angle(eps[-1].real, eps[-1].imag)
    total = start + float(np.sum(np.angle(eps[1:] / eps[:-1]))) - end
    raw = total / (2.0 * np.pi)
    return int(round(raw)), raw


def winding_number(
    d: DielectricSamples, origin_tol: float = ORIGIN_TOL, cross_check: bool = True
) -> WindingReport:
    """
    Winding number by the ray rule, with the discrete argument cross-check.

    A crossing with |eps_R| < origin_tol means the contour touches the origin; the
    report is then marked critical and carries no integer winding.
    """
    events = crossings(d.profile, d.k, tol=d.tol)
    if any(abs(e.eps_R_at) < origin_tol for e in events):
        return WindingReport(None, events, None, critical=True, k=d.k)

    winding = int(sum(e.contributes for e in events))
    report = WindingReport(winding, events, winding == 0, k=d.k)
    if cross_check:
        try:
            discrete, raw = contour_winding(d, extra_points=[e.u_c for e in events], origin_tol=origin_tol)
        except CriticalContourError:
            report.critical = True
            report.winding = None
            report.stable = None
            return report
        report.contour_winding = discrete
        report.consistent = discrete == winding and abs(raw - discrete) < 0.05
        if not report.consistent:
            warnings.warn(
                f"ray-rule winding {winding} disagrees with contour argument {raw:.3f} at k={d.k:g}",
                WindingMismatchWarning,
                stacklevel=2,
            )
    return report


def penrose_winding(
    profile: EquilibriumProfile, k: float, cross_check: bool = False, tol: float = POINT_TOL
) -> WindingReport:
    return winding_number(dielectric(profile, k, tol=tol), cross_check=cross_check)


def signature_profile(d: DielectricSamples) -> SignatureProfile:
    """
    Partition of the u line by sigma(u) = sgn(u eps_I(u)).

    The signature is defined in a frame where f0'(0) = 0, so other profiles are
    shifted to the nearest critical point first (frame_shift records by how much).
    Adjacent intervals always carry different signs.
    """
    profile, shift = galilean_frame(d.profile)
    u = d.u + shift
    lo, hi = float(u[0]), float(u[-1])
    neutral = sorted({0.0} | {c.location for c in critical_points(profile) if lo < c.location < hi})
    neutral = [x for x in neutral if lo < x < hi]

    edges = [lo] + neutral + [hi]
    intervals: List[Tuple[float, float, int]] = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        sigma = int(np.sign(mid * -float(profile.derivative(mid, 1))))
        if sigma == 0:
            continue
        if intervals and intervals[-1][2] == sigma and intervals[-1][1] == a:
            intervals[-1] = (intervals[-1][0], b, sigma)
        else:
            intervals.append((a, b, sigma))
    return SignatureProfile(intervals, neutral, frame_shift=shift)


def epsilon_r_slope(profile: EquilibriumProfile, k: float, u: float, h: float = 1e-3) -> float:
    """d eps_R / du at u by central differences with one Richardson step."""

    def eps_r(x):
        return eps_values(profile, k, x)[0]

    def central(step):
        return (eps_r(u + step) - eps_r(u - step)) / (2.0 * step)

    return (4.0 * central(h / 2.0) - central(h)) / 3.0


def critical_wavenumber(profile: EquilibriumProfile, u_c: float) -> float:
    """k at which eps_R(u_c) = 0, i.e. k^2 = pi H[f0'](u_c)."""
    value = float(profile.derivative_hilbert(u_c, tol=POINT_TOL))
    if value <= 0:
        raise CriticalStateNotFound(f"H[f0'] is not positive at u={u_c:.6g}; no real critical wavenumber")
    return float(np.sqrt(np.pi * value))


def _embedded_signature(profile, k, u_c) -> Tuple[int, float]:
    slope = epsilon_r_slope(profile, k, u_c)
    if abs(u_c) < 1e-8:
        return 0, slope
    return int(np.sign(u_c * slope)), slope


def _newborn_pair(before: List[CriticalPoint], after: List[CriticalPoint]) -> float:
    # the two points in `after` with no counterpart in `before`, closest to each other
    locations = [c.location for c in after]
    best = None
    for a, b in zip(locations[:-1], locations[1:]):
        gap = b - a
        if best is None or gap < best[0]:
            best = (gap, 0.5 * (a + b))
    if best is None:
        raise CriticalStateNotFound("critical-point birth could not be located")
    return best[1]


def _bisect(predicate, lo: float, hi: float, tol: float, verbose: bool, label: str):
    p_lo = predicate(lo)
    for i in range(200):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if predicate(mid) == p_lo:
            lo = mid
        else:
            hi = mid
        if verbose:
            print(f"   [{label}] step {i + 1}: eta in [{lo:.12g}, {hi:.12g}]")
    return lo, hi


def find_critical_state(
    family: ProfileFamily,
    eta_range: Tuple[float, float],
    k: Optional[float] = None,
    k_range: Optional[Tuple[float, float]] = None,
    tol: float = 1e-10,
    verbose: bool = False,
) -> CriticalState:
    """
    Locate the critical state of a one-parameter family.

    With a scalar k, bisects eta on the change of Penrose winding. With a k_range,
    bisects eta on the birth of a critical-point pair (the inflection-point mode)
    and solves for the critical wavenumber; when no pair is born but a valley's
    critical wavenumber reaches zero inside the range, returns that k = 0 state.

    Raises:
        CriticalStateNotFound: the endpoints do not straddle a stability change
    """
    lo, hi = float(eta_range[0]), float(eta_range[1])
    if not lo < hi:
        raise ConfigError(f"eta range must be increasing, got {eta_range}")

    if k is not None:
        return _critical_at_fixed_k(family, lo, hi, float(k), tol, verbose)
    if k_range is None:
        raise ConfigError("find_critical_state needs either k or k_range")
    return _critical_over_k(family, lo, hi, k_range, tol, verbose)


def _critical_at_fixed_k(family, lo, hi, k, tol, verbose) -> CriticalState:
    def winding(eta):
        report = penrose_winding(family.at(eta), k)
        return "critical" if report.critical else report.winding

    w_lo, w_hi = winding(lo), winding(hi)
    if verbose:
        print(f"🔍 Critical-state search at k={k:g}: winding {w_lo} at eta={lo:g}, {w_hi} at eta={hi:g}")
    if w_lo == w_hi or "critical" in (w_lo, w_hi):
        raise CriticalStateNotFound(f"winding does not change over eta in [{lo:g}, {hi:g}] at k={k:g}")

    lo, hi = _bisect(winding, lo, hi, tol, verbose, "winding")
    eta_c = 0.5 * (lo + hi)
    before = critical_points(family.at(lo))
    after = critical_points(family.at(hi))

    if len(before) != len(after):
        born_side = before if len(before) > len(after) else after
        other = after if born_side is before else before
        u_c = _newborn_pair(other, born_side)
        kind = "k_nonzero_inflection"
    else:
        profile = family.at(eta_c)
        events = [e for e in crossings(profile, k) if e.kind != "tangency"]
        nearest = min(events, key=lambda e: abs(e.eps_R_at))
        u_c = nearest.u_c
        f2 = float(profile.derivative(u_c, 2))
        kind = "k_nonzero_inflection" if abs(f2) < 1e-3 * _f2_scale(profile) else "k_zero_valley"

    profile = family.at(eta_c)
    signature, slope = _embedded_signature(profile, k, u_c)
    return CriticalState(kind, float(u_c), k, signature, eta_c=eta_c, eps_R_slope=slope)


def _critical_over_k(family, lo, hi, k_range, tol, verbose) -> CriticalState:
    k_lo, k_hi = float(k_range[0]), float(k_range[1])
    count_lo = len(critical_points(family.at(lo)))
    count_hi = len(critical_points(family.at(hi)))

    if count_lo != count_hi:
        lo, hi = _bisect(lambda eta: len(critical_points(family.at(eta))), lo, hi, tol, verbose, "birth")
        more = hi if count_hi > count_lo else lo
        fewer = lo if more == hi else hi
        u_c = _newborn_pair(critical_points(family.at(fewer)), critical_points(family.at(more)))
        eta_c = 0.5 * (lo + hi)
        profile = family.at(eta_c)
        k_c = critical_wavenumber(profile, u_c)
        if not k_lo <= k_c <= k_hi:
            raise CriticalStateNotFound(f"critical wavenumber {k_c:.6g} lies outside [{k_lo:g}, {k_hi:g}]")
        signature, slope = _embedded_signature(profile, k_c, u_c)
        if verbose:
            print(f"✅ Inflection-point mode at u_c={u_c:.8g}, k_c={k_c:.8g}, eta_c={eta_c:.10g}")
        return CriticalState("k_nonzero_inflection", float(u_c), k_c, signature, eta_c=eta_c, eps_R_slope=slope)

    def valley_hilbert_sign(eta):
        profile = family.at(eta)
        valleys = [c for c in critical_points(profile) if c.type == "minimum"]
        if not valleys:
            return 0
        return int(np.sign(max(float(profile.derivative_hilbert(c.location, tol=POINT_TOL)) for c in valleys)))

    s_lo, s_hi = valley_hilbert_sign(lo), valley_hilbert_sign(hi)
    if s_lo == s_hi or k_lo > 0:
        raise CriticalStateNotFound(
            f"no critical-point birth and no k=0 valley crossing for eta in [{lo:g}, {hi:g}] with k in [{k_lo:g}, {k_hi:g}]"
        )
    lo, hi = _bisect(valley_hilbert_sign, lo, hi, tol, verbose, "valley")
    eta_c = 0.5 * (lo + hi)
    profile = family.at(eta_c)
    valley = min((c for c in critical_points(profile) if c.type == "minimum"), key=lambda c: abs(c.location))
    return CriticalState("k_zero_valley", valley.location, 0.0, 0 if abs(valley.location) < 1e-8 else int(np.sign(valley.location)), eta_c=eta_c)
