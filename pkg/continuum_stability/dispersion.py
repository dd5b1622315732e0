"""
Dispersion relation off the real axis, argument-principle root counting and
root classification.

For Im omega > 0 and u = omega / k,

    eps(k, omega) = 1 + (1/k^2) int f0'(p) / (u - p) dp

whose limit onto the real axis is eps_R + i eps_I of the penrose module. Gaussian
components are evaluated with the plasma dispersion function
Z(zeta) = i sqrt(pi) w(zeta); every other kind by adaptive quadrature.
"""

import warnings
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.optimize import brentq
from scipy.special import wofz

from .equilibria import EquilibriumProfile, PerturbedProfile, galilean_frame, is_reflection_symmetric
from .errors import (
    ConfigError,
    DomainError,
    NoConvergenceError,
    PoleLikeError,
    RegionDegenerateError,
    SymmetryViolationError,
    VanishingIntegralWarning,
)
from .hilbert import cauchy_transform
from .penrose import epsilon_r_slope, eps_values

ROOT_RESIDUAL = 1e-10
IM_MARGIN = 1e-4
BOUNDARY_TOL = 1e-10
COUNT_SLACK = 0.05
SIDE_POINTS = 32
MAX_ARG_STEP = np.pi / 4
MARGINAL_TOL = 1e-8
CAUCHY_TOL = 1e-13

CLASSES = ("quartet_member", "octet_member", "css_pair_member", "real_embedded")


class _Indeterminate:
    def __repr__(self):
        return "indeterminate"

    def __str__(self):
        return "indeterminate"

    def __bool__(self):
        return False


INDETERMINATE = _Indeterminate()


@dataclass
class DispersionRoot:
    omega: complex
    k: float
    residual: float
    multiplicity: int = 1
    symmetry_class: Optional[str] = None

    @property
    def omega_R(self) -> float:
        return float(self.omega.real)

    @property
    def gamma(self) -> float:
        return float(self.omega.imag)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "omega_R": self.omega_R,
            "gamma": self.gamma,
            "residual": self.residual,
            "multiplicity": self.multiplicity,
            "class": self.symmetry_class,
        }


@dataclass
class RootCountRegion:
    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float
    count: int = 0
    raw: float = 0.0

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.re_lo - pad <= z.real <= self.re_hi + pad) and (self.im_lo - pad <= z.imag <= self.im_hi + pad)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "re_lo": self.re_lo,
            "re_hi": self.re_hi,
            "im_lo": self.im_lo,
            "im_hi": self.im_hi,
            "count": self.count,
            "raw": self.raw,
        }


def _plasma_z(zeta):
    return 1j * np.sqrt(np.pi) * wofz(zeta)


def _cauchy_quadrature(profile: EquilibriumProfile, z: complex, tol: float = CAUCHY_TOL) -> complex:
    return cauchy_transform(lambda p: profile.derivative(p, 1), z, profile.domain, profile.feature_points, tol=tol)


def _cauchy(profile: EquilibriumProfile, z: complex, method: str, tol: float = CAUCHY_TOL) -> complex:
    if method in ("auto", "closed_form"):
        components = profile.gaussian_components
        if components:
            total = 0j
            for amp, center, width in components:
                zeta = (z - center) / width
                total -= 2.0 * np.sqrt(np.pi) * amp / width * (1.0 + zeta * _plasma_z(zeta))
            return complex(total)
        if isinstance(profile, PerturbedProfile):
            return _cauchy(profile.base, z, method, tol) + profile.perturbation.cauchy_integral(z)
        if method == "closed_form":
            raise ConfigError(f"{profile.kind} profiles have no closed-form dispersion function")
    elif method != "quadrature":
        raise ConfigError(f"unknown dispersion method '{method}'")
    return _cauchy_quadrature(profile, z, tol)


def epsilon_complex(
    profile: EquilibriumProfile, k: float, omega: complex, method: str = "auto", tol: float = CAUCHY_TOL
) -> complex:
    """
    eps(k, omega) for Im omega > 0.

    Raises:
        DomainError: Im omega <= 0; the lower half plane is reached only through the
            real-axis limit of the penrose module
    """
    if not k > 0:
        raise ConfigError(f"wavenumber must be positive, got {k}")
    omega = complex(omega)
    if not omega.imag > 0:
        raise DomainError(f"epsilon_complex needs Im(omega) > 0, got {omega}")
    u = omega / k
    return 1.0 - _cauchy(profile, u, method, tol) / (k * k)


def _evaluate(func: Callable[[complex], complex], zs: np.ndarray) -> np.ndarray:
    return np.array([func(complex(z)) for z in zs], dtype=complex)


def count_zeros(
    func: Callable[[complex], complex],
    region: RootCountRegion,
    side_points: int = SIDE_POINTS,
    boundary_tol: float = BOUNDARY_TOL,
    max_rounds: int = 30,
) -> RootCountRegion:
    """
    Zeros minus poles of func inside the rectangle, from the argument accumulated
    counterclockwise along its boundary. Boundary samples are bisected until no
    step turns the argument by more than pi/4.

    Raises:
        RegionDegenerateError: |func| < boundary_tol on the boundary, or the
            accumulated argument does not settle within 0.05 of an integer
    """
    if not (region.re_lo < region.re_hi and region.im_lo < region.im_hi):
        raise ConfigError(f"empty counting rectangle {region.to_dict()}")
    corners = [
        complex(region.re_lo, region.im_lo),
        complex(region.re_hi, region.im_lo),
        complex(region.re_hi, region.im_hi),
        complex(region.re_lo, region.im_hi),
    ]
    edges = [np.linspace(corners[i], corners[(i + 1) % 4], side_points, endpoint=False) for i in range(4)]
    z = np.concatenate(edges + [np.array([corners[0]])])
    values = _evaluate(func, z[:-1])
    values = np.append(values, values[0])

    for _ in range(max_rounds):
        small = np.abs(values) < boundary_tol
        if np.any(small):
            raise RegionDegenerateError(
                f"|f| < {boundary_tol:g} on the counting boundary", complex(z[np.argmax(small)])
            )
        steps = np.angle(values[1:] / values[:-1])
        bad = np.flatnonzero(np.abs(steps) > MAX_ARG_STEP)
        if bad.size == 0:
            break
        mids = 0.5 * (z[bad] + z[bad + 1])
        z = np.insert(z, bad + 1, mids)
        values = np.insert(values, bad + 1, _evaluate(func, mids))
    else:
        worst = int(np.argmax(np.abs(np.angle(values[1:] / values[:-1]))))
        raise RegionDegenerateError("argument along the counting boundary did not resolve", complex(z[worst]))

    raw = float(np.sum(np.angle(values[1:] / values[:-1]))) / (2.0 * np.pi)
    count = int(round(raw))
    if abs(raw - count) > COUNT_SLACK:
        raise RegionDegenerateError(f"accumulated argument {raw:.4f} is not an integer", region.center)
    return replace(region, count=count, raw=raw)


def default_region(profile: EquilibriumProfile, k: float) -> RootCountRegion:
    """A tall rectangle in omega covering the profile support, above Im = IM_MARGIN."""
    lo, hi = profile.domain
    width = hi - lo
    return RootCountRegion(k * (lo - 0.25 * width), k * (hi + 0.25 * width), IM_MARGIN, k * 0.5 * width)


def count_roots(
    profile: EquilibriumProfile,
    k: float,
    region: Optional[RootCountRegion] = None,
    method: str = "auto",
    tol: float = CAUCHY_TOL,
) -> RootCountRegion:
    """
    Number of dispersion roots in a rectangle of the upper omega half plane. A
    degenerate boundary is retried once with the rectangle jittered by 10%.
    """
    region = region or default_region(profile, k)
    if region.im_lo < IM_MARGIN:
        raise ConfigError(f"counting rectangles must stay above Im(omega) = {IM_MARGIN:g}")

    def func(w):
        return epsilon_complex(profile, k, w, method=method, tol=tol)

    try:
        return count_zeros(func, region)
    except RegionDegenerateError:
        dx = 0.1 * (region.re_hi - region.re_lo)
        dy = 0.1 * (region.im_hi - region.im_lo)
        jittered = RootCountRegion(region.re_lo - dx, region.re_hi + dx, region.im_lo, region.im_hi + dy)
        return count_zeros(func, jittered)


def newton(
    func: Callable[[complex], complex],
    seed: complex,
    tol_residual: float = ROOT_RESIDUAL,
    max_iter: int = 60,
    keep_upper: bool = True,
) -> Tuple[complex, float, List[complex]]:
    """
    Newton iteration with a central-difference derivative, h = 1e-6 max(1, |z|).
    Steps that would leave the upper half plane are halved when keep_upper is set.
    """
    z = complex(seed)
    trace = [z]
    for _ in range(max_iter):
        f = func(z)
        if abs(f) < tol_residual:
            return z, abs(f), trace
        h = 1e-6 * max(1.0, abs(z))
        df = (func(z + h) - func(z - h)) / (2.0 * h)
        if df == 0 or not np.isfinite(df):
            raise NoConvergenceError(f"vanishing derivative at {z}", trace)
        step = f / df
        new = z - step
        halvings = 0
        while keep_upper and new.imag <= 0 and halvings < 40:
            step *= 0.5
            new = z - step
            halvings += 1
        if keep_upper and new.imag <= 0:
            raise NoConvergenceError(f"Newton iteration left the upper half plane from {z}", trace)
        z = new
        trace.append(z)
    f = func(z)
    if abs(f) < tol_residual:
        return z, abs(f), trace
    raise NoConvergenceError(f"no convergence from seed {seed} after {max_iter} steps (|f|={abs(f):.3e})", trace)


def _multiplicity(func, omega: complex) -> int:
    half = min(1e-3 * max(1.0, abs(omega)), 0.5 * omega.imag)
    box = RootCountRegion(omega.real - half, omega.real + half, omega.imag - half, omega.imag + half)
    try:
        return max(count_zeros(func, box).count, 1)
    except RegionDegenerateError:
        return 1


def refine_root(
    profile: EquilibriumProfile,
    k: float,
    seed: complex,
    tol_residual: float = ROOT_RESIDUAL,
    method: str = "auto",
    max_iter: int = 60,
    tol: float = CAUCHY_TOL,
) -> DispersionRoot:
    """
    Newton refinement of a dispersion root from a seed in the upper half plane;
    the multiplicity comes from the count in a small box around the converged root.

    Raises:
        NoConvergenceError: divergence; the error carries the iterate trace
    """

    def func(w):
        return epsilon_complex(profile, k, w, method=method, tol=tol)

    omega, residual, _ = newton(func, seed, tol_residual, max_iter)
    return DispersionRoot(omega, float(k), residual, _multiplicity(func, omega))


def _quarter(func, rect: RootCountRegion) -> List[RootCountRegion]:
    # off-centre split lines keep the cuts away from symmetry axes of the profile
    for fx, fy in ((0.4671, 0.5129), (0.4171, 0.5629), (0.5571, 0.4429), (0.3771, 0.6129)):
        xm = rect.re_lo + fx * (rect.re_hi - rect.re_lo)
        ym = rect.im_lo + fy * (rect.im_hi - rect.im_lo)
        boxes = [
            RootCountRegion(rect.re_lo, xm, rect.im_lo, ym),
            RootCountRegion(xm, rect.re_hi, rect.im_lo, ym),
            RootCountRegion(rect.re_lo, xm, ym, rect.im_hi),
            RootCountRegion(xm, rect.re_hi, ym, rect.im_hi),
        ]
        try:
            counted = [count_zeros(func, b) for b in boxes]
        except RegionDegenerateError:
            continue
        if sum(b.count for b in counted) == rect.count:
            return counted
    raise RegionDegenerateError("could not split the counting rectangle cleanly", rect.center)


def search_roots(
    func: Callable[[complex], complex],
    region: RootCountRegion,
    tol_residual: float = ROOT_RESIDUAL,
    max_depth: int = 14,
    keep_upper: bool = True,
    verbose: bool = False,
) -> Tuple[RootCountRegion, List[Tuple[complex, float, int]]]:
    """
    Adaptive quadtree of counting rectangles until each holds at most one zero,
    then Newton from the rectangle centre. Returns the top-level count and
    (root, residual, multiplicity) triples.
    """
    top = count_zeros(func, region)
    if verbose:
        print(f"🔍 {top.count} zero(s) in [{region.re_lo:g}, {region.re_hi:g}] x [{region.im_lo:g}, {region.im_hi:g}]")
    stack = [(top, 0)]
    found: List[Tuple[complex, float, int]] = []
    while stack:
        rect, depth = stack.pop()
        if rect.count <= 0:
            continue
        if rect.count == 1 or depth >= max_depth:
            try:
                omega, residual, _ = newton(func, rect.center, tol_residual, keep_upper=keep_upper)
                pad = 1e-9 * max(1.0, abs(omega))
                if rect.contains(omega, pad):
                    found.append((omega, residual, rect.count if rect.count > 1 else _multiplicity(func, omega)))
                    if verbose:
                        print(f"   root {omega.real:+.10f} {omega.imag:+.10f}i (|f|={residual:.2e})")
                    continue
            except NoConvergenceError:
                if depth >= max_depth:
                    raise
            if depth >= max_depth:
                raise NoConvergenceError(f"root in box around {rect.center} not isolated at depth {depth}")
        stack.extend((child, depth + 1) for child in _quarter(func, rect))
    found.sort(key=lambda r: (r[0].real, r[0].imag))
    return top, found


def symmetry_center(profile: EquilibriumProfile) -> Optional[float]:
    """v such that f0(v + p) = f0(v - p), or None."""
    if is_reflection_symmetric(profile):
        return 0.0
    shifted, shift = galilean_frame(profile)
    if shift != 0.0 and is_reflection_symmetric(shifted):
        return -shift
    return None


def find_roots(
    profile: EquilibriumProfile,
    k: float,
    region: Optional[RootCountRegion] = None,
    tol_residual: float = ROOT_RESIDUAL,
    method: str = "auto",
    verbose: bool = False,
    tol: float = CAUCHY_TOL,
) -> List[DispersionRoot]:
    """All upper-half-plane roots in the region, classified as members of their multiplet."""
    region = region or default_region(profile, k)

    def func(w):
        return epsilon_complex(profile, k, w, method=method, tol=tol)

    _, triples = search_roots(func, region, tol_residual, verbose=verbose)
    roots = [DispersionRoot(w, float(k), res, mult) for w, res, mult in triples]

    center = symmetry_center(profile)
    full = complete_spectrum(roots, include_mirror_k=False)
    classify_multiplet(full, symmetric=center is not None, center_velocity=center or 0.0)
    lookup = {(r.omega.real, r.omega.imag): r.symmetry_class for r in full}
    for r in roots:
        r.symmetry_class = lookup[(r.omega.real, r.omega.imag)]
        if center is not None and r.symmetry_class == "octet_member":
            symmetry_integral(profile, k, r.omega, center)
    return roots


def complete_spectrum(roots: Sequence[DispersionRoot], include_mirror_k: bool = True) -> List[DispersionRoot]:
    """
    Add the conjugate of every root and, with include_mirror_k, the images at -k
    (omega -> -conj(omega)), which together close the spectrum under the
    Hamiltonian symmetries.
    """
    out: List[DispersionRoot] = []

    def add(root: DispersionRoot):
        for r in out:
            if r.k == root.k and abs(r.omega - root.omega) <= 1e-12 * max(1.0, abs(root.omega)):
                return
        out.append(root)

    for r in roots:
        add(r)
        add(replace(r, omega=r.omega.conjugate()))
        if include_mirror_k:
            add(replace(r, k=-r.k, omega=-r.omega.conjugate()))
            add(replace(r, k=-r.k, omega=-r.omega))
    return out


def classify_multiplet(
    roots: Sequence[DispersionRoot], symmetric: bool, tol: float = 1e-8, center_velocity: float = 0.0
) -> List[str]:
    """
    Tag every root: real_embedded (gamma = 0), css_pair_member (pure growth in the
    symmetric frame), octet_member (symmetric, omega_R != 0) or quartet_member.

    Raises:
        SymmetryViolationError: a root has no conjugate partner at the same k
    """
    classes = []
    for r in roots:
        scale = tol * max(1.0, abs(r.omega))
        partner = any(q.k == r.k and abs(q.omega - r.omega.conjugate()) <= 1e3 * scale for q in roots)
        if not partner:
            raise SymmetryViolationError(f"root {r.omega} at k={r.k:g} has no conjugate partner")
        shifted_real = r.omega.real - r.k * center_velocity
        if abs(r.omega.imag) <= scale:
            cls = "real_embedded"
        elif abs(shifted_real) <= 1e3 * scale:
            cls = "css_pair_member"
        elif symmetric:
            cls = "octet_member"
        else:
            cls = "quartet_member"
        r.symmetry_class = cls
        classes.append(cls)
    return classes


def marginal_frequencies(
    profile: EquilibriumProfile, k: float, u_range: Optional[Tuple[float, float]] = None, n: int = 4001
) -> List[float]:
    """Real zeros omega_R = k u of eps_R(k, u), the candidates of the marginality relation."""
    lo, hi = u_range or profile.domain
    u = np.linspace(lo, hi, n)
    eps_r, _ = eps_values(profile, k, u)
    signs = np.sign(eps_r)
    out = []
    for i in np.flatnonzero(signs[:-1] * signs[1:] < 0):
        root = brentq(lambda x: eps_values(profile, k, x)[0], u[i], u[i + 1], xtol=1e-13)
        out.append(k * root)
    out.extend(k * u[i] for i in np.flatnonzero(signs == 0))
    return sorted(out)


def marginal_growth_rate(
    profile: EquilibriumProfile,
    k: float,
    omega_R: float,
    numerator_tol: float = MARGINAL_TOL,
    denominator_tol: float = MARGINAL_TOL,
):
    """
    gamma = -eps_I(k, omega_R) / (d eps_R / d omega_R), valid where eps_R(k, omega_R)
    is close to zero. Returns INDETERMINATE when numerator and denominator both
    vanish.

    Raises:
        PoleLikeError: the denominator vanishes but the numerator does not
    """
    u = omega_R / k
    _, eps_i = eps_values(profile, k, u)
    slope = epsilon_r_slope(profile, k, u) / k
    if abs(slope) < denominator_tol:
        if abs(eps_i) < numerator_tol:
            return INDETERMINATE
        raise PoleLikeError(f"d eps_R/d omega vanishes at omega_R={omega_R:g} while eps_I={eps_i:.3e}")
    return -eps_i / slope


def symmetry_integral(profile: EquilibriumProfile, k: float, omega: complex, center: float = 0.0) -> float:
    """
    int_0^inf 2 p f0'(p) / |u^2 - p^2|^2 dp in the symmetric frame. For a
    reflection-symmetric profile Im eps = -(2 u_R u_I / k^2) times this integral,
    so a root with omega_R gamma != 0 requires it to vanish; that case is reported
    with a VanishingIntegralWarning.
    """
    u = complex(omega) / k - center
    lo, hi = profile.domain
    reach = max(abs(lo - center), abs(hi - center))
    u2 = u * u

    def integrand(p):
        return 2.0 * p * float(profile.derivative(center + p, 1)) / abs(u2 - p * p) ** 2

    value, _ = integrate.quad(integrand, 0.0, reach, limit=400, epsabs=1e-13)
    scale, _ = integrate.quad(lambda p: abs(integrand(p)), 0.0, reach, limit=400, epsabs=1e-13)
    if scale == 0.0 or abs(value) < 1e-8 * scale:
        warnings.warn(
            f"symmetry integral vanishes at omega={omega}; omega_R * gamma != 0 is not excluded",
            VanishingIntegralWarning,
            stacklevel=2,
        )
    return value
