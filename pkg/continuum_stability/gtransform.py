"""
G-transform pair on a uniform velocity grid

    G[g]     = eps_R g + eps_I H[g]
    Ghat[f]  = (eps_R f - eps_I H[f]) / |eps|^2

Ghat turns the linearized Vlasov-Poisson dynamics into free streaming,
dg/dt + i k u g = 0, so evolution is exact in time. H is the discrete odd-offset
rule and eps_R is built from the same rule, so that the pair inverts to
quadrature accuracy.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import find_peaks

from .equilibria import EquilibriumProfile
from .errors import ConfigError, EmbeddedModeError
from .hilbert import discrete_hilbert
from .penrose import DielectricSamples, dielectric, signature_profile, winding_number

ABS_SQ_FLOOR = 1e-10
DEFAULT_SPACING = 0.005


@dataclass(frozen=True, eq=False)
class ComplexSampledFunction:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.shape != values.shape:
            raise ConfigError("grid and values must have the same shape")
        if not np.all(np.isfinite(values)):
            raise ConfigError("sampled values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)


Sampled = Union[ComplexSampledFunction, np.ndarray, Callable]


@dataclass(frozen=True, eq=False)
class TransformContext:
    dielectric: DielectricSamples
    spacing: float

    @property
    def u(self) -> np.ndarray:
        return self.dielectric.u

    @property
    def k(self) -> float:
        return self.dielectric.k

    @property
    def eps_R(self) -> np.ndarray:
        return self.dielectric.eps_R

    @property
    def eps_I(self) -> np.ndarray:
        return self.dielectric.eps_I

    @property
    def abs_sq(self) -> np.ndarray:
        return self.dielectric.abs_sq

    def hilbert(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if np.iscomplexobj(values):
            return discrete_hilbert(values.real) + 1j * discrete_hilbert(values.imag)
        return discrete_hilbert(values)

    def sample(self, g: Sampled) -> np.ndarray:
        if isinstance(g, ComplexSampledFunction):
            if g.grid.shape != self.u.shape or not np.allclose(g.grid, self.u):
                raise ConfigError("sampled function does not live on the context grid")
            return g.values
        if callable(g):
            return np.asarray(g(self.u), dtype=complex)
        values = np.asarray(g, dtype=complex)
        if values.shape != self.u.shape:
            raise ConfigError(f"expected {self.u.size} samples, got {values.size}")
        return values


def transform_context(
    profile: EquilibriumProfile,
    k: float,
    window: Optional[Tuple[float, float]] = None,
    spacing: float = DEFAULT_SPACING,
    check_stable: bool = True,
) -> TransformContext:
    """
    Sample eps on a uniform grid and check that the pair is invertible.

    Raises:
        EmbeddedModeError: |eps|^2 drops below 1e-10 of its median somewhere on the
            grid, or (with check_stable) the profile has discrete modes at k
    """
    if not k > 0:
        raise ConfigError(f"wavenumber must be positive, got {k}")
    lo, hi = profile.domain
    window = window or (min(-8.0, lo - 1.0), max(8.0, hi + 1.0))
    n = int(round((window[1] - window[0]) / spacing)) + 1
    u = np.linspace(window[0], window[1], n)

    eps_i = -np.pi / (k * k) * np.asarray(profile.derivative(u, 1), dtype=float)
    eps_r = 1.0 + discrete_hilbert(eps_i)
    samples = DielectricSamples(profile, float(k), u, eps_i, eps_r)

    abs_sq = samples.abs_sq
    floor = ABS_SQ_FLOOR * float(np.median(abs_sq))
    if np.min(abs_sq) < floor:
        at = float(u[np.argmin(abs_sq)])
        raise EmbeddedModeError(f"|eps|^2 falls below {floor:.3e} at u={at:.6g}; the G-transform is not invertible")
    if check_stable:
        report = winding_number(dielectric(profile, k), cross_check=False)
        if report.critical or report.winding != 0:
            raise EmbeddedModeError(f"profile has discrete modes at k={k:g} (winding {report.winding})")
    return TransformContext(samples, float(u[1] - u[0]))


def g_forward(ctx: TransformContext, g: Sampled) -> ComplexSampledFunction:
    values = ctx.sample(g)
    return ComplexSampledFunction(ctx.u, ctx.eps_R * values + ctx.eps_I * ctx.hilbert(values))


def g_inverse(ctx: TransformContext, f: Sampled) -> ComplexSampledFunction:
    values = ctx.sample(f)
    out = (ctx.eps_R * values - ctx.eps_I * ctx.hilbert(values)) / ctx.abs_sq
    return ComplexSampledFunction(ctx.u, out)


def evolve(ctx: TransformContext, zeta0: Sampled, t: float) -> ComplexSampledFunction:
    """zeta_t = G[exp(-i k u t) Ghat[zeta0]]."""
    g0 = g_inverse(ctx, zeta0).values
    return g_forward(ctx, np.exp(-1j * ctx.k * ctx.u * t) * g0)


def field_moment(ctx: TransformContext, zeta0: Sampled, times: Sequence[float]) -> np.ndarray:
    """
    E(t) = int zeta_t dp = int exp(-i k u t) Ghat[zeta0](u) du for every t, by the
    trapezoid rule on the context grid.
    """
    g0 = g_inverse(ctx, zeta0).values
    weights = np.full(ctx.u.size, ctx.spacing)
    weights[[0, -1]] *= 0.5
    phases = np.exp(-1j * ctx.k * np.outer(np.asarray(times, dtype=float), ctx.u))
    return phases @ (weights * g0)


def landau_rate(times: Sequence[float], field: Sequence[complex], window: Optional[Tuple[float, float]] = None) -> float:
    """Exponential rate of the peak envelope of |E(t)| fitted over the window."""
    times = np.asarray(times, dtype=float)
    amplitude = np.abs(np.asarray(field))
    if window is not None:
        keep = (times >= window[0]) & (times <= window[1])
        times, amplitude = times[keep], amplitude[keep]
    peaks, _ = find_peaks(amplitude)
    if peaks.size < 2:
        raise ConfigError("need at least two envelope peaks in the fit window")
    slope, _ = np.polyfit(times[peaks], np.log(amplitude[peaks]), 1)
    return float(slope)


def canonical_pair(ctx: TransformContext, g: Sampled) -> Tuple[np.ndarray, np.ndarray]:
    values = ctx.sample(g)
    return np.sqrt(2.0) * values.real, np.sqrt(2.0) * values.imag


def signature_weights(ctx: TransformContext) -> np.ndarray:
    """sigma(u) on the context grid from the signature profile; 0 at neutral points."""
    profile = signature_profile(ctx.dielectric)
    u = ctx.u + profile.frame_shift
    sigma = np.zeros(u.size)
    for lo, hi, s in profile.intervals:
        sigma[(u > lo) & (u < hi)] = s
    return sigma


def diagonal_energy(ctx: TransformContext, Q: np.ndarray, P: np.ndarray) -> float:
    """(1/2) int sigma(u) |k u| (Q^2 + P^2) du."""
    Q = np.asarray(Q, dtype=float)
    P = np.asarray(P, dtype=float)
    density = signature_weights(ctx) * np.abs(ctx.k * ctx.u) * (Q * Q + P * P)
    return 0.5 * float(trapezoid(density, ctx.u))
