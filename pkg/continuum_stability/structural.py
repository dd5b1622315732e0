"""
Structural stability: the piecewise-linear destabilizer chi(p; h, d, eps) and
what it does to the Penrose winding of an equilibrium.

In the shifted variable q = p - p_c, chi is odd and for q >= 0

    h q / eps                      0 <= q < eps
    h                              eps <= q < d + eps
    h + (d + eps)/2 - q/2          d + eps <= q < 2h + d + eps
    0                              beyond

The perturbed equilibrium has derivative f0' + a chi for an amplitude a.
"""

import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .equilibria import CriticalPoint, EquilibriumProfile, PerturbedProfile, critical_points
from .errors import ConfigError, DomainError, RefinementRequired, UncheckedRegimeWarning
from .penrose import dielectric, eps_values, signature_profile, winding_number

CENTER_BAND_C = 2.5
SERIES_RATIO = 1e3
EPS_FLOOR = 1e-300

VERDICTS = ("destabilized", "still_stable", "rejected_inaccessible")


def _safe_log_abs(x):
    x = np.abs(x)
    with np.errstate(divide="ignore"):
        return np.where(x > 0, np.log(np.where(x > 0, x, 1.0)), 0.0)


@dataclass(frozen=True)
class ChiPerturbation:
    h: float
    d: float
    eps: float
    center: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        for name in ("h", "d", "eps"):
            value = float(getattr(self, name))
            if not (value > 0 and np.isfinite(value)):
                raise ConfigError(f"chi parameter {name} must be positive and finite, got {value}")
            object.__setattr__(self, name, value)
        if not np.isfinite(self.center) or not np.isfinite(self.amplitude):
            raise ConfigError("chi center and amplitude must be finite")
        object.__setattr__(self, "center", float(self.center))
        object.__setattr__(self, "amplitude", float(self.amplitude))

    @property
    def outer(self) -> float:
        return 2.0 * self.h + self.d + self.eps

    @property
    def support(self) -> Tuple[float, float]:
        return self.center - self.outer, self.center + self.outer

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        c = self.center
        edges = (self.eps, self.d + self.eps, self.outer)
        return tuple(sorted({c} | {c + e for e in edges} | {c - e for e in edges}))

    def value(self, p):
        q = np.asarray(p, dtype=float) - self.center
        a = np.abs(q)
        with np.errstate(over="ignore", invalid="ignore"):
            inner = self.h * np.clip(q / self.eps, -1.0, 1.0)
        ramp = np.sign(q) * 0.5 * (self.outer - a)
        out = np.where(a < self.d + self.eps, inner, np.where(a < self.outer, ramp, 0.0))
        return self.amplitude * out if np.ndim(p) else float(self.amplitude * out)

    def derivative(self, p):
        a = np.abs(np.asarray(p, dtype=float) - self.center)
        out = np.select(
            [a < self.eps, a < self.d + self.eps, a < self.outer],
            [self.h / self.eps, 0.0, -0.5],
            0.0,
        )
        return self.amplitude * out if np.ndim(p) else float(self.amplitude * out)

    def antiderivative(self, p):
        """int_{-inf}^p chi, even about the center and zero outside the support."""
        a = np.abs(np.asarray(p, dtype=float) - self.center)
        h, d, eps, outer = self.h, self.d, self.eps, self.outer
        with np.errstate(over="ignore", invalid="ignore"):
            core = h * h + h * d + 0.5 * h * eps * (1.0 - np.minimum(a / eps, 1.0) ** 2)
        plateau = h * h + h * (d + eps - a)
        ramp = 0.25 * (outer - a) ** 2
        tail = np.select([a < eps, a < d + eps, a < outer], [core, plateau, ramp], 0.0)
        out = -self.amplitude * tail
        return out if np.ndim(p) else float(out)

    def _segments(self):
        # (lo, hi, slope, intercept) of chi/amplitude in q, left to right
        h, d, eps, outer = self.h, self.d, self.eps, self.outer
        return [
            (-outer, -(d + eps), -0.5, -0.5 * outer),
            (-(d + eps), -eps, 0.0, -h),
            (-eps, eps, h / eps, 0.0),
            (eps, d + eps, 0.0, h),
            (d + eps, outer, -0.5, 0.5 * outer),
        ]

    def pv_integral(self, u):
        """PV int chi(p) / (p - u) dp for real u, in closed form."""
        z = np.asarray(u, dtype=float) - self.center
        h, eps = self.h, self.eps
        total = np.zeros_like(z)
        for lo, hi, slope, icpt in self._segments():
            if lo == -eps:
                far = np.abs(z) > SERIES_RATIO * eps
                with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                    exact = 2.0 * h + (h * z / eps) * (_safe_log_abs(eps - z) - _safe_log_abs(-eps - z))
                    series = -2.0 * h * eps * eps / (3.0 * np.where(far, z, 1.0) ** 2)
                total = total + np.where(far, series, exact)
                continue
            coeff = slope * z + icpt
            total = total + slope * (hi - lo) + coeff * (_safe_log_abs(hi - z) - _safe_log_abs(lo - z))
        out = self.amplitude * total
        return out if np.ndim(u) else float(out)

    def cauchy_integral(self, z):
        """int chi(p) / (p - z) dp for complex z off the real axis."""
        w = np.asarray(z, dtype=complex) - self.center
        h, eps = self.h, self.eps
        total = np.zeros_like(w)
        for lo, hi, slope, icpt in self._segments():
            if lo == -eps:
                far = np.abs(w) > SERIES_RATIO * eps
                safe = np.where(far, w, 1.0)
                near = np.where(far, 0.0, w)
                series = -2.0 * h * eps * eps / (3.0 * safe ** 2)
                exact = 2.0 * h + (h * near / eps) * (np.log(eps - near + 0j) - np.log(-eps - near + 0j))
                total = total + np.where(far, series, exact)
                continue
            coeff = slope * w + icpt
            total = total + slope * (hi - lo) + coeff * (np.log(hi - w) - np.log(lo - w))
        out = self.amplitude * total
        return out if np.ndim(z) else complex(out)

    def scaled(self, amplitude: float) -> "ChiPerturbation":
        return ChiPerturbation(self.h, self.d, self.eps, self.center, amplitude)

    def shifted(self, v: float) -> "ChiPerturbation":
        return ChiPerturbation(self.h, self.d, self.eps, self.center + v, self.amplitude)

    def descriptor(self) -> Dict[str, Any]:
        return {"kind": "chi", "h": self.h, "d": self.d, "eps": self.eps, "center": self.center, "amplitude": self.amplitude}

    @staticmethod
    def from_descriptor(desc: Dict[str, Any]) -> "ChiPerturbation":
        try:
            return ChiPerturbation(
                desc["h"], desc["d"], desc["eps"], desc.get("center", 0.0), desc.get("amplitude", 1.0)
            )
        except KeyError as exc:
            raise ConfigError(f"chi descriptor is missing {exc}")


@dataclass
class PerturbationReport:
    chi: ChiPerturbation
    k: float
    w11_norm: float
    sup_norm: float
    hilbert_at_center: float
    winding_before: Optional[int]
    winding_after: Optional[int]
    accessible: bool
    verdict: str
    crossings_after: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "chi": self.chi.descriptor(),
            "k": self.k,
            "w11_norm": self.w11_norm,
            "sup_norm": self.sup_norm,
            "hilbert_at_center": self.hilbert_at_center,
            "winding_before": self.winding_before,
            "winding_after": self.winding_after,
            "accessible": self.accessible,
            "verdict": self.verdict,
            "crossings_after": self.crossings_after,
        }


@dataclass
class StructuralVerdict:
    verdict: str
    critical_points: List[CriticalPoint]
    destabilizable: List[PerturbationReport] = field(default_factory=list)
    searched: List[PerturbationReport] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "critical_points": [c.to_dict() for c in self.critical_points],
            "destabilizable": [
                {"location": r.chi.center, "amplitude": r.chi.amplitude, "winding_after": r.winding_after}
                for r in self.destabilizable
            ],
            "searched": [r.to_dict() for r in self.searched],
        }


def chi_evaluate(chi: ChiPerturbation, p):
    return chi.value(p)


def chi_derivative(chi: ChiPerturbation, p):
    return chi.derivative(p)


def chi_hilbert(chi: ChiPerturbation, u):
    return chi.pv_integral(u)


def chi_norms(chi: ChiPerturbation) -> Tuple[float, float]:
    """(W^{1,1} norm, sup norm): |a| (2h^2 + 2hd + h eps + 4h) and |a| h."""
    h, d, eps = chi.h, chi.d, chi.eps
    scale = abs(chi.amplitude)
    return scale * (2.0 * h * h + 2.0 * h * d + h * eps + 4.0 * h), scale * h


def chi_norms_quadrature(chi: ChiPerturbation) -> Tuple[float, float]:
    """Both norms by direct quadrature of |chi| + |chi'| piece by piece."""
    edges = np.array(chi.breakpoints)
    w11 = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        mass, _ = integrate.quad(lambda p: abs(chi.value(p)), lo, hi, epsabs=1e-14, epsrel=1e-12)
        w11 += mass + abs(chi.derivative(0.5 * (lo + hi))) * (hi - lo)
    samples = np.concatenate([edges, np.linspace(edges[0], edges[-1], 4001)])
    return w11, float(np.max(np.abs(chi.value(samples))))


def chi_hilbert_quadrature(chi: ChiPerturbation, u: float) -> float:
    """
    PV int chi / (p - u) by quadrature after subtracting chi(u):
    int (chi(p) - chi(u)) / (p - u) dp + chi(u) log|(R - u) / (L - u)|.
    """
    lo, hi = chi.support
    u = float(u)
    base = chi.value(u)
    points = sorted({x for x in chi.breakpoints if lo < x < hi} | ({u} if lo < u < hi else set()))
    edges = [lo] + points + [hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        part, _ = integrate.quad(lambda p: (chi.value(p) - base) / (p - u) if p != u else 0.0, a, b, limit=200, epsabs=1e-13)
        total += part
    if base != 0.0:
        total += base * float(np.log(abs(hi - u) / abs(lo - u)))
    return total


def chi_hilbert_center(chi: ChiPerturbation) -> float:
    """
    PV int chi(p) / (p - p_c) dp. In the regime d = h, eps = exp(-1/h) this is
    2 + O(h log h) per unit amplitude; outside it an UncheckedRegimeWarning is
    raised and the value is still returned.
    """
    h = chi.h
    in_regime = abs(chi.d - h) <= 1e-9 * h and abs(np.log(chi.eps) + 1.0 / h) <= 1e-9 / h
    if not in_regime:
        warnings.warn(
            f"chi(h={h:g}, d={chi.d:g}, eps={chi.eps:.3g}) is outside d = h, eps = exp(-1/h); "
            "the 2 + O(h log h) band is not checked",
            UncheckedRegimeWarning,
            stacklevel=2,
        )
    return chi.pv_integral(chi.center)


def center_band(h: float) -> float:
    return CENTER_BAND_C * h * abs(np.log(h))


def _center_value(h: float, d: float, log_eps: float) -> float:
    eps = np.exp(log_eps)
    return 2.0 * h * (np.log(d + eps) - log_eps) + (2.0 * h + d + eps) * np.log((2.0 * h + d + eps) / (d + eps))


def eps_for_center_value(h: float, d: float, target: float) -> float:
    """
    eps such that the unit-amplitude chi(h, d, eps) has PV integral `target` at its
    center. The value decreases in eps, so the root is bracketed on log eps between
    EPS_FLOOR and d.
    """
    lo, hi = np.log(EPS_FLOOR), np.log(d)
    f_lo, f_hi = _center_value(h, d, lo) - target, _center_value(h, d, hi) - target
    if f_lo < 0:
        raise DomainError(f"centre value {target:g} needs eps below {EPS_FLOOR:g} for h={h:g}, d={d:g}")
    if f_hi > 0:
        raise DomainError(f"centre value {target:g} is below the eps = d value {target + f_hi:g}")
    return float(np.exp(brentq(lambda x: _center_value(h, d, x) - target, lo, hi, xtol=1e-14)))


def accessibility_gate(profile: EquilibriumProfile, chi: ChiPerturbation) -> bool:
    """True iff f0' + chi has the same critical-point count and type sequence as f0'."""
    before = [c.type for c in critical_points(profile)]
    after = [c.type for c in critical_points(PerturbedProfile(profile, chi))]
    return before == after


def _winding(profile, k):
    report = winding_number(dielectric(profile, k))
    if report.consistent is False:
        raise RefinementRequired(
            f"ray-rule winding {report.winding} and contour winding {report.contour_winding} disagree at k={k:g}; "
            "the perturbed contour is not resolved"
        )
    return report


def destabilize(
    profile: EquilibriumProfile, k: float, chi: ChiPerturbation, require_accessible: bool = False
) -> PerturbationReport:
    """
    Apply chi to f0' and recompute the Penrose winding end to end.

    The verdict is "destabilized" when the perturbed winding is at least 1. With
    require_accessible, a chi that fails the accessibility gate is reported as
    "rejected_inaccessible" instead.

    Raises:
        RefinementRequired: the two winding computations disagree on the perturbed
            contour
    """
    before = winding_number(dielectric(profile, k), cross_check=False)
    perturbed = PerturbedProfile(profile, chi)
    after = _winding(perturbed, k)
    accessible = accessibility_gate(profile, chi)
    w11, sup = chi_norms(chi)

    if require_accessible and not accessible:
        verdict = "rejected_inaccessible"
    elif after.winding is not None and after.winding >= 1:
        verdict = "destabilized"
    else:
        verdict = "still_stable"

    return PerturbationReport(
        chi=chi,
        k=float(k),
        w11_norm=w11,
        sup_norm=sup,
        hilbert_at_center=chi.pv_integral(chi.center),
        winding_before=before.winding,
        winding_after=after.winding,
        accessible=accessible,
        verdict=verdict,
        crossings_after=[c.to_dict() for c in after.crossings],
    )


def _default_center(profile: EquilibriumProfile) -> float:
    points = critical_points(profile)
    if not points:
        raise DomainError("profile has no critical point to centre chi on")
    return max(points, key=lambda c: float(profile.derivative(c.location, 0))).location


def persistence_sweep(
    profile: EquilibriumProfile,
    k: float,
    hs: Sequence[float] = (0.1, 0.05, 0.02),
    center: Optional[float] = None,
    amplitude: float = 1.0,
    eps_exponent: float = 3.0,
    verbose: bool = False,
) -> List[PerturbationReport]:
    """Destabilize with d = h, eps = exp(-eps_exponent / h) for each h in hs."""
    center = _default_center(profile) if center is None else center
    reports = []
    for h in hs:
        chi = ChiPerturbation(h, h, max(np.exp(-eps_exponent / h), EPS_FLOOR), center, amplitude)
        report = destabilize(profile, k, chi)
        if verbose:
            print(f"   h={h:<8g} W11={report.w11_norm:.4f} winding {report.winding_before} -> {report.winding_after}")
        reports.append(report)
    return reports


def small_norm_destabilizer(
    profile: EquilibriumProfile,
    k: float,
    h: float = 0.01,
    center: Optional[float] = None,
    amplitude: float = 1.0,
    margin: float = 0.5,
) -> PerturbationReport:
    """
    A chi of W^{1,1} norm about 4h|a| that drives eps_R at its centre to -margin,
    with eps solved from the required centre value.
    """
    center = _default_center(profile) if center is None else center
    eps_r, _ = eps_values(profile, k, center)
    target = k * k * (eps_r + margin) / abs(amplitude)
    eps = eps_for_center_value(h, h, target) if target > _center_value(h, h, np.log(h)) else h
    return destabilize(profile, k, ChiPerturbation(h, h, eps, center, abs(amplitude)))


def destabilizer_search(
    profile: EquilibriumProfile, k: float, amplitude: float = 1.0, margin: float = 0.5, verbose: bool = False
) -> List[PerturbationReport]:
    """
    Try chi of both amplitude signs at every critical point of f0, sized to stay
    inside the gap to the neighbouring critical points. Every report is computed
    with require_accessible, so accessible destabilizers are exactly the reports
    with verdict "destabilized".
    """
    points = critical_points(profile)
    locations = [c.location for c in points]
    reports = []
    for c in points:
        others = [abs(c.location - x) for x in locations if x != c.location]
        gap = min(others) if others else np.inf
        h = min(0.05, gap / 8.0)
        eps_r, _ = eps_values(profile, k, c.location)
        target = k * k * (abs(eps_r) + margin) / abs(amplitude)
        try:
            eps = eps_for_center_value(h, h, target) if target > _center_value(h, h, np.log(h)) else h
        except DomainError as exc:
            if verbose:
                print(f"   ⚠️ skipping {c.type} at {c.location:.6g}: {exc}")
            continue
        for sign in (1.0, -1.0):
            chi = ChiPerturbation(h, h, eps, c.location, sign * abs(amplitude))
            report = destabilize(profile, k, chi, require_accessible=True)
            if verbose:
                print(f"   {c.type:<9} p={c.location:+.6f} amplitude {sign * abs(amplitude):+g}: {report.verdict}")
            reports.append(report)
    return reports


def krein_like_verdict(profile: EquilibriumProfile, k: float, verbose: bool = False) -> StructuralVerdict:
    """
    Structural stability under dynamically accessible perturbations.

    A Penrose-stable profile with a single critical point is structurally stable;
    with several it is structurally unstable, and the critical points where an
    accessible chi flips the winding are listed.

    Raises:
        DomainError: the profile is not Penrose-stable at k
    """
    report = winding_number(dielectric(profile, k), cross_check=False)
    if not report.stable:
        raise DomainError(f"profile is not Penrose-stable at k={k:g} (winding {report.winding})")
    points = critical_points(profile)
    if len(points) == 1:
        return StructuralVerdict("structurally_stable_DA", points)

    searched = destabilizer_search(profile, k, verbose=verbose)
    found = [r for r in searched if r.verdict == "destabilized"]
    return StructuralVerdict("structurally_unstable_DA", points, destabilizable=found, searched=searched)


def signature_change_count(profile: EquilibriumProfile, k: float) -> int:
    return signature_profile(dielectric(profile, k)).changes
