"""
Principal-value Hilbert transform

    H[g](u) = (1/pi) PV int g(p) / (p - u) dp

with the (p - u) denominator convention used throughout the package. Every
downstream sign (eps_R = 1 + H[eps_I], the G-transform, the chi analysis) inherits it.
"""

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.special import dawsn

from .errors import ConfigError, HilbertAccuracyError, TailTruncationWarning

DEFAULT_TOL = 1e-8
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


@dataclass(frozen=True)
class SampledRealFunction:
    """A real function known on a strictly increasing grid; zero outside it."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ConfigError("grid and values must be 1-D sequences of equal length")
        if grid.size < 4:
            raise ConfigError("at least 4 samples are required")
        if np.any(np.diff(grid) <= 0):
            raise ConfigError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ConfigError("values must be finite")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_spline", CubicSpline(grid, values, extrapolate=False))

    @property
    def window(self):
        return float(self.grid[0]), float(self.grid[-1])

    @property
    def spacing(self) -> float:
        return float(np.min(np.diff(self.grid)))

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        steps = np.diff(self.grid)
        return bool(np.all(np.abs(steps - steps[0]) <= rtol * abs(steps[0])))

    def __call__(self, p):
        out = self._spline(np.asarray(p, dtype=float))
        return np.nan_to_num(out, nan=0.0)


@dataclass(frozen=True)
class PointValues:
    """Values at arbitrary points, for output sets too small or unordered to interpolate."""

    grid: np.ndarray
    values: np.ndarray


RealFunction = Union[SampledRealFunction, Callable]


def hilbert_gaussian(u):
    """Closed form H[exp(-p^2)](u) = -(2/sqrt(pi)) * D(u), D the Dawson function."""
    return -2.0 / np.sqrt(np.pi) * dawsn(u)


def _odd_integral(g, u: float, a: float, b: float) -> float:
    # int_a^b [g(u+s) - g(u-s)] / s ds on Gauss-Legendre nodes
    s = 0.5 * (b - a) * _GL_NODES + 0.5 * (b + a)
    vals = (np.asarray(g(u + s), dtype=float) - np.asarray(g(u - s), dtype=float)) / s
    return 0.5 * (b - a) * float(np.dot(_GL_WEIGHTS, vals))


def _warn_if_truncated(g: SampledRealFunction):
    scale = float(np.max(np.abs(g.values)))
    edge = max(abs(g.values[0]), abs(g.values[-1]))
    if scale > 0 and edge > 1e-8 * scale:
        warnings.warn(
            f"tabulated data is treated as zero outside [{g.grid[0]:g}, {g.grid[-1]:g}] "
            f"but does not decay there (edge/peak = {edge / scale:.2e})",
            TailTruncationWarning,
            stacklevel=3,
        )


def hilbert_at(
    g: RealFunction,
    u: float,
    tol: float = DEFAULT_TOL,
    window: Optional[Sequence[float]] = None,
    points: Optional[Sequence[float]] = None,
    tail: Optional[Callable] = None,
    delta: Optional[float] = None,
    max_halvings: int = 8,
) -> float:
    """
    Hilbert transform of g at a single point u.

    The singular neighbourhood |p-u| <= delta is handled through the odd part
    g(u+s) - g(u-s), which is smooth and integrated by Gauss-Legendre; the rest is
    adaptive quadrature. delta is halved until two successive values agree to tol.

    Args:
        g: SampledRealFunction (zero outside its grid) or a vectorised callable
        u: evaluation point
        tol: absolute error target on the returned value
        window: support of a callable g; defaults to the whole real line
        points: p-locations where g has kinks, passed on to the quadrature
        tail: optional correction added to the result for g beyond its window
        delta: initial half-width of the excised neighbourhood

    Raises:
        HilbertAccuracyError: when the quadrature or the delta refinement fails to
            reach tol
    """
    u = float(u)
    if isinstance(g, SampledRealFunction):
        _warn_if_truncated(g)
        window = g.window
        spacing = g.spacing
        delta = delta or 2.0 * spacing
        floor = 1e-6 * spacing
        points = list(points or []) + [x for x in g.grid if abs(x - u) > 0]
    else:
        delta = delta or 0.5
        floor = 1e-6 * delta

    if window is None:
        reach = np.inf
    else:
        reach = max(window[1] - u, u - window[0])

    breaks = []
    for x in points or []:
        s = abs(x - u)
        if 0 < s < reach:
            breaks.append(s)

    def integrand(s):
        return (float(g(u + s)) - float(g(u - s))) / s

    def attempt(d):
        if d >= reach:
            return _odd_integral(g, u, 0.0, reach), 0.0
        inner = _odd_integral(g, u, 0.0, d)
        inner_breaks = sorted(s for s in breaks if d < s)
        if np.isinf(reach):
            # finite part first so quad sees the features, then the tail to infinity
            edge = max([d * 2.0, 10.0] + inner_breaks)
            finite, err1 = integrate.quad(
                integrand, d, edge, points=inner_breaks or None, limit=400, epsabs=tol / 4, epsrel=0.0
            )
            rest, err2 = integrate.quad(integrand, edge, np.inf, limit=400, epsabs=tol / 4, epsrel=0.0)
            return inner + finite + rest, err1 + err2
        if len(inner_breaks) > 300:
            inner_breaks = inner_breaks[:: int(np.ceil(len(inner_breaks) / 300))]
        outer, err = integrate.quad(
            integrand, d, reach, points=inner_breaks or None, limit=600, epsabs=tol / 4, epsrel=0.0
        )
        return inner + outer, err

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        previous, quad_err = attempt(delta)
        estimate = np.inf
        for _ in range(max_halvings):
            delta *= 0.5
            if delta < floor:
                break
            current, quad_err = attempt(delta)
            estimate = abs(current - previous) / np.pi
            previous = current
            if estimate < tol:
                break

    estimate = max(estimate, quad_err / np.pi)
    if not np.isfinite(previous) or estimate > tol:
        raise HilbertAccuracyError(f"Hilbert transform at u={u:g} did not converge to tol={tol:g}", estimate)

    value = previous / np.pi
    if tail is not None:
        value += float(tail(u))
    return value


def _uniform(g: SampledRealFunction) -> SampledRealFunction:
    if g.is_uniform():
        return g
    # shape-preserving resample onto the finest spacing present
    n = int(np.ceil((g.grid[-1] - g.grid[0]) / g.spacing)) + 1
    grid = np.linspace(g.grid[0], g.grid[-1], n)
    return SampledRealFunction(grid, PchipInterpolator(g.grid, g.values)(grid))


def discrete_hilbert(values: np.ndarray) -> np.ndarray:
    """
    Hilbert transform at the nodes of a uniform grid.

    Odd-offset trapezoid rule: H_j = sum over odd m of 2 g_{j+m} / (pi m). The sum is
    evaluated as a direct convolution; its discrete symbol is -i sgn, so applying it
    twice returns -g up to the truncation of the window.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    offsets = np.arange(-(n - 1), n)
    kernel = np.zeros(offsets.size)
    odd = offsets % 2 != 0
    kernel[odd] = -2.0 / (np.pi * offsets[odd])
    return np.convolve(values, kernel, mode="full")[n - 1 : 2 * n - 1]


def hilbert_on_grid(
    g: SampledRealFunction,
    output_grid: Sequence[float],
    method: str = "adaptive",
    tol: float = DEFAULT_TOL,
    tail: Optional[Callable] = None,
) -> Union[SampledRealFunction, PointValues]:
    """
    Hilbert transform of sampled data on an output grid.

    method="adaptive" applies hilbert_at pointwise. method="discrete" uses the
    odd-offset rule on a uniform version of the input grid, spline interpolation for
    outputs inside the window and the plain trapezoid sum outside it.

    The result is a SampledRealFunction when the output points form a valid grid
    (at least 4, strictly increasing) and PointValues otherwise.
    """
    out = np.atleast_1d(np.asarray(output_grid, dtype=float))
    if out.ndim != 1:
        raise ConfigError("output points must be a 1-D sequence")

    if method == "adaptive":
        values = np.array([hilbert_at(g, x, tol=tol) for x in out])
    elif method == "discrete":
        _warn_if_truncated(g)
        base = _uniform(g)
        h = base.grid[1] - base.grid[0]
        nodal = discrete_hilbert(base.values)
        inside = (out >= base.grid[0]) & (out <= base.grid[-1])
        values = np.empty(out.size)
        if np.any(inside):
            x = out[inside]
            idx = np.clip(np.rint((x - base.grid[0]) / h).astype(int), 0, base.grid.size - 1)
            on_node = np.abs(x - base.grid[idx]) < 1e-9 * h
            values[inside] = np.where(on_node, nodal[idx], CubicSpline(base.grid, nodal)(x))
        for j in np.flatnonzero(~inside):
            values[j] = h * np.sum(base.values / (base.grid - out[j])) / np.pi
    else:
        raise ConfigError(f"unknown Hilbert method '{method}'")

    if tail is not None:
        values = values + np.asarray(tail(out), dtype=float)
    if out.size >= 4 and np.all(np.diff(out) > 0):
        return SampledRealFunction(out, values)
    return PointValues(out, values)


def cauchy_transform(
    g: Callable,
    z: complex,
    window: Sequence[float],
    points: Optional[Sequence[float]] = None,
    tol: float = 1e-13,
) -> complex:
    """
    int_window g(p) / (p - z) dp for z off the real axis.

    g(Re z) is subtracted under the integral and added back through the exact
    logarithm, so the integrand stays bounded as Im z -> 0.
    """
    lo, hi = float(window[0]), float(window[1])
    z = complex(z)
    a, b = z.real, z.imag
    ga = float(g(a)) if lo <= a <= hi else 0.0

    def real_part(p):
        return (float(g(p)) - ga) * (p - a) / ((p - a) ** 2 + b * b)

    def imag_part(p):
        return (float(g(p)) - ga) * b / ((p - a) ** 2 + b * b)

    breaks = sorted({x for x in tuple(points or ()) + (a,) if lo < x < hi}) or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, _ = integrate.quad(real_part, lo, hi, points=breaks, limit=500, epsabs=tol, epsrel=1e-11)
        im, _ = integrate.quad(imag_part, lo, hi, points=breaks, limit=500, epsabs=tol, epsrel=1e-11)
    return complex(re, im) + ga * (np.log(hi - z) - np.log(lo - z))
