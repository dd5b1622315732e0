"""
Homogeneous equilibria f0(p), their derivatives, critical points and families.

Analytic kinds (Gaussian sums and parsed expressions) evaluate f0, f0' and f0''
from closed forms. Tabulated kinds use shape-preserving (PCHIP) interpolation so
that interpolation never invents critical points.
"""

import csv
import json
import os
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar
from scipy.special import dawsn, erfcinv

from .errors import ConfigError, TailTruncationWarning, UnsupportedOrderError
from .expressions import parse_expression
from .hilbert import DEFAULT_TOL, SampledRealFunction, hilbert_at, hilbert_on_grid

TOL_ROOT = 1e-10
DEGENERACY_TOL = 1e-8
TAIL_MASS = 1e-12
SCAN_POINTS = 4001
HILBERT_SAMPLES = 8193

KINDS = ("maxwellian", "bi_maxwellian", "maxwellian_sum", "tabulated", "expression", "perturbed")


@dataclass(frozen=True)
class CriticalPoint:
    location: float
    type: str
    second_derivative: float

    def to_dict(self) -> Dict[str, Any]:
        return {"location": self.location, "type": self.type, "second_derivative": self.second_derivative}


class EquilibriumProfile:
    """
    Common interface of all equilibrium kinds.

    Subclasses implement derivative(p, order), the exact value of f0^(order) at any
    p, plus the domain used for scans and principal-value integrals.
    """

    kind = "abstract"

    @property
    def domain(self) -> Tuple[float, float]:
        raise NotImplementedError

    @property
    def feature_points(self) -> Tuple[float, ...]:
        return ()

    @property
    def gaussian_components(self) -> Optional[Tuple[Tuple[float, float, float], ...]]:
        return None

    def derivative(self, p, order: int = 1):
        raise NotImplementedError

    def evaluate(self, p, order: int = 0):
        """
        f0, f0' or f0'' at p. Points outside the domain return 0 and raise a
        TailTruncationWarning.
        """
        if order not in (0, 1, 2):
            raise UnsupportedOrderError(f"order must be 0, 1 or 2, got {order}")
        arr = np.asarray(p, dtype=float)
        lo, hi = self.domain
        outside = (arr < lo) | (arr > hi)
        values = np.asarray(self.derivative(arr, order), dtype=float)
        if np.any(outside):
            warnings.warn(
                f"evaluated {self.kind} profile outside its domain [{lo:g}, {hi:g}]; returning 0 there",
                TailTruncationWarning,
                stacklevel=2,
            )
            values = np.where(outside, 0.0, values)
        return values if arr.ndim else float(values)

    def derivative_samples(self, n: int = HILBERT_SAMPLES) -> SampledRealFunction:
        lo, hi = self.domain
        grid = np.linspace(lo, hi, n)
        return SampledRealFunction(grid, self.derivative(grid, 1))

    def derivative_hilbert(self, u, method: str = "auto", tol: float = DEFAULT_TOL):
        """
        H[f0'](u). "auto" uses a closed form when the kind has one, the discrete
        rule for long arrays, and adaptive quadrature otherwise.
        """
        arr = np.asarray(u, dtype=float)
        closed = self._closed_hilbert(arr) if method in ("auto", "closed_form") else None
        if closed is not None:
            return closed if arr.ndim else float(closed)
        if method == "closed_form":
            raise ConfigError(f"{self.kind} profiles have no closed-form Hilbert transform")
        flat = np.atleast_1d(arr)
        if method == "discrete" or (method == "auto" and flat.size > 64):
            values = hilbert_on_grid(self.derivative_samples(), flat, method="discrete").values
        else:
            values = np.array(
                [
                    hilbert_at(
                        lambda q: self.derivative(q, 1),
                        x,
                        tol=tol,
                        window=self.domain,
                        points=self.feature_points,
                    )
                    for x in flat
                ]
            )
        return values.reshape(arr.shape) if arr.ndim else float(values[0])

    def _closed_hilbert(self, u):
        return None

    def shifted(self, v: float) -> "EquilibriumProfile":
        raise NotImplementedError

    def descriptor(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianSumProfile(EquilibriumProfile):
    """f0(p) = sum_j A_j exp(-((p - c_j) / w_j)^2), components given as (A, c, w)."""

    components: Tuple[Tuple[float, float, float], ...]
    kind: str = "maxwellian_sum"

    def __post_init__(self):
        comps = tuple((float(a), float(c), float(w)) for a, c, w in self.components)
        if not comps:
            raise ConfigError("a Gaussian-sum profile needs at least one component")
        for a, _, w in comps:
            if w <= 0 or not np.isfinite(w):
                raise ConfigError(f"component width must be positive, got {w}")
            if a < 0 or not np.isfinite(a):
                raise ConfigError(f"component amplitude must be non-negative, got {a}")
        object.__setattr__(self, "components", comps)

    @property
    def gaussian_components(self):
        return self.components

    @cached_property
    def domain(self):
        lo, hi = np.inf, -np.inf
        for a, c, w in self.components:
            mass = a * w * np.sqrt(np.pi) / 2.0
            reach = 1.0 if mass <= TAIL_MASS else float(erfcinv(TAIL_MASS / mass))
            lo = min(lo, c - reach * w)
            hi = max(hi, c + reach * w)
        return float(lo), float(hi)

    def derivative(self, p, order: int = 1):
        if order not in (0, 1, 2):
            raise UnsupportedOrderError(f"order must be 0, 1 or 2, got {order}")
        p = np.asarray(p, dtype=float)
        out = np.zeros_like(p)
        for a, c, w in self.components:
            s = (p - c) / w
            e = a * np.exp(-s * s)
            if order == 0:
                out = out + e
            elif order == 1:
                out = out - 2.0 * s / w * e
            else:
                out = out + (4.0 * s * s - 2.0) / (w * w) * e
        return out

    def _closed_hilbert(self, u):
        # H[A exp(-s^2)]' = -(2A / (sqrt(pi) w)) (1 - 2 s D(s))
        out = np.zeros_like(u)
        for a, c, w in self.components:
            s = (u - c) / w
            out = out - 2.0 * a / (np.sqrt(np.pi) * w) * (1.0 - 2.0 * s * dawsn(s))
        return out

    def shifted(self, v: float):
        return GaussianSumProfile(tuple((a, c + v, w) for a, c, w in self.components), kind=self.kind)

    def descriptor(self):
        if self.kind == "maxwellian":
            a, c, w = self.components[0]
            return {"kind": "maxwellian", "amplitude": a, "center": c, "width": w}
        if self.kind == "bi_maxwellian":
            (a, c1, w), (_, c2, _) = self.components
            return {
                "kind": "bi_maxwellian",
                "amplitude": a,
                "center": 0.5 * (c1 + c2),
                "separation": 0.5 * (c2 - c1),
                "width": w,
            }
        return {
            "kind": "maxwellian_sum",
            "components": [{"amplitude": a, "center": c, "width": w} for a, c, w in self.components],
        }


def maxwellian(center: float = 0.0, width: float = 1.0, amplitude: float = 1.0) -> GaussianSumProfile:
    return GaussianSumProfile(((amplitude, center, width),), kind="maxwellian")


def bi_maxwellian(separation: float, width: float = 1.0, amplitude: float = 1.0, center: float = 0.0):
    """exp(-((p - c - p1)/w)^2) + exp(-((p - c + p1)/w)^2), scaled by amplitude."""
    return GaussianSumProfile(
        ((amplitude, center - separation, width), (amplitude, center + separation, width)),
        kind="bi_maxwellian",
    )


def maxwellian_sum(components: Sequence[Tuple[float, float, float]]) -> GaussianSumProfile:
    return GaussianSumProfile(tuple(tuple(c) for c in components), kind="maxwellian_sum")


@dataclass(frozen=True, eq=False)
class TabulatedProfile(EquilibriumProfile):
    """Sampled f0 with optional f0' data; zero outside the sampled grid."""

    grid: np.ndarray
    values: np.ndarray
    derivative_values: Optional[np.ndarray] = None
    kind: str = "tabulated"

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 4:
            raise ConfigError("tabulated profiles need matching 1-D p and f0 columns with at least 4 rows")
        if np.any(np.diff(grid) <= 0):
            raise ConfigError("tabulated p column must be strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ConfigError("tabulated f0 values must be finite and non-negative")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.derivative_values is not None:
            deriv = np.array(self.derivative_values, dtype=float)
            if deriv.shape != grid.shape or not np.all(np.isfinite(deriv)):
                raise ConfigError("tabulated f0' column must be finite and match the p column")
            object.__setattr__(self, "derivative_values", deriv)
        peak = float(np.max(values))
        if peak > 0 and max(values[0], values[-1]) > 1e-6 * peak:
            warnings.warn(
                "tabulated profile does not decay at the ends of its grid; tail mass is truncated",
                TailTruncationWarning,
                stacklevel=3,
            )

    @cached_property
    def _f0(self):
        return PchipInterpolator(self.grid, self.values, extrapolate=False)

    @cached_property
    def _f1(self):
        if self.derivative_values is not None:
            return PchipInterpolator(self.grid, self.derivative_values, extrapolate=False)
        return self._f0.derivative()

    @property
    def domain(self):
        return float(self.grid[0]), float(self.grid[-1])

    def derivative(self, p, order: int = 1):
        if order == 0:
            interp = self._f0
        elif order == 1:
            interp = self._f1
        elif order == 2:
            if self.derivative_values is None:
                raise UnsupportedOrderError("f0'' needs a derivative column in the tabulated data")
            interp = self._f1.derivative()
        else:
            raise UnsupportedOrderError(f"order must be 0, 1 or 2, got {order}")
        return np.nan_to_num(interp(np.asarray(p, dtype=float)), nan=0.0)

    def derivative_samples(self, n: int = HILBERT_SAMPLES):
        return SampledRealFunction(self.grid, self.derivative(self.grid, 1))

    def derivative_hilbert(self, u, method: str = "auto", tol: float = DEFAULT_TOL):
        """
        H[f0'](u) from the table itself. The interpolated f0' has a kink at every
        node, so "auto" always takes the discrete rule; "adaptive" integrates the
        sampled derivative with a tolerance no finer than the table resolves.
        """
        if method == "closed_form":
            raise ConfigError("tabulated profiles have no closed-form Hilbert transform")
        arr = np.asarray(u, dtype=float)
        flat = np.atleast_1d(arr)
        samples = self.derivative_samples()
        if method in ("auto", "discrete"):
            values = hilbert_on_grid(samples, flat, method="discrete").values
        elif method == "adaptive":
            values = hilbert_on_grid(samples, flat, method="adaptive", tol=max(tol, self.resolution_tol)).values
        else:
            raise ConfigError(f"unknown Hilbert method '{method}'")
        return values.reshape(arr.shape) if arr.ndim else float(values[0])

    @property
    def resolution_tol(self) -> float:
        # interpolation error of the sampled derivative, h^2 |f0'|_max
        spacing = float(np.max(np.diff(self.grid)))
        return max(DEFAULT_TOL, spacing * spacing * float(np.max(np.abs(self.derivative(self.grid, 1)))))

    def shifted(self, v: float):
        return TabulatedProfile(self.grid + v, self.values, self.derivative_values)

    def descriptor(self):
        out = {"kind": "tabulated", "p": self.grid.tolist(), "values": self.values.tolist()}
        if self.derivative_values is not None:
            out["derivative"] = self.derivative_values.tolist()
        return out


@dataclass(frozen=True)
class ExpressionProfile(EquilibriumProfile):
    """A closed form parsed from text, e.g. "exp(-p^2) + 0.05*exp(-((p-3)/0.5)^2)"."""

    expression: str
    window: Tuple[float, float] = (-10.0, 10.0)
    offset: float = 0.0
    kind: str = "expression"

    def __post_init__(self):
        lo, hi = (float(x) for x in self.window)
        if not lo < hi:
            raise ConfigError(f"expression profile domain must be increasing, got {self.window}")
        object.__setattr__(self, "window", (lo, hi))
        object.__setattr__(self, "_orders", self._derivatives(parse_expression(self.expression)))

    @staticmethod
    def _derivatives(expr):
        first = expr.derivative()
        return (expr, first, first.derivative())

    @property
    def domain(self):
        return self.window[0] + self.offset, self.window[1] + self.offset

    def derivative(self, p, order: int = 1):
        if order not in (0, 1, 2):
            raise UnsupportedOrderError(f"order must be 0, 1 or 2, got {order}")
        return self._orders[order](np.asarray(p, dtype=float) - self.offset)

    def shifted(self, v: float):
        return ExpressionProfile(self.expression, self.window, self.offset + v)

    def descriptor(self):
        return {"kind": "expression", "expression": self.expression, "domain": list(self.domain)}


@dataclass(frozen=True, eq=False)
class PerturbedProfile(EquilibriumProfile):
    """
    Base profile whose derivative is replaced by f0' + chi.

    The perturbation object supplies value(p), derivative(p), antiderivative(p),
    pv_integral(u) and breakpoints; f0 itself is base + antiderivative.
    """

    base: EquilibriumProfile
    perturbation: Any
    kind: str = "perturbed"

    @property
    def domain(self):
        lo, hi = self.base.domain
        s_lo, s_hi = self.perturbation.support
        return min(lo, s_lo), max(hi, s_hi)

    @property
    def feature_points(self):
        return tuple(self.base.feature_points) + tuple(self.perturbation.breakpoints)

    def derivative(self, p, order: int = 1):
        p = np.asarray(p, dtype=float)
        if order == 0:
            return self.base.derivative(p, 0) + self.perturbation.antiderivative(p)
        if order == 1:
            return self.base.derivative(p, 1) + self.perturbation.value(p)
        if order == 2:
            return self.base.derivative(p, 2) + self.perturbation.derivative(p)
        raise UnsupportedOrderError(f"order must be 0, 1 or 2, got {order}")

    def derivative_hilbert(self, u, method: str = "auto", tol: float = DEFAULT_TOL):
        arr = np.asarray(u, dtype=float)
        base = np.asarray(self.base.derivative_hilbert(arr, method=method, tol=tol), dtype=float)
        extra = np.asarray(self.perturbation.pv_integral(arr), dtype=float) / np.pi
        out = base + extra
        return out if arr.ndim else float(out)

    def shifted(self, v: float):
        return PerturbedProfile(self.base.shifted(v), self.perturbation.shifted(v))

    def descriptor(self):
        return {"kind": "perturbed", "base": self.base.descriptor(), "perturbation": self.perturbation.descriptor()}


def _scan_grid(profile: EquilibriumProfile, n: int) -> np.ndarray:
    lo, hi = profile.domain
    grid = [np.linspace(lo, hi, n)]
    scale = hi - lo
    for x in profile.feature_points:
        if lo <= x <= hi:
            nudge = 1e-9 * max(1.0, abs(x), scale)
            grid.append(np.array([x - nudge, x, x + nudge]))
    return np.unique(np.concatenate(grid))


def _classify(location: float, left_sign: float, f2: Optional[float]) -> CriticalPoint:
    if f2 is not None and abs(f2) < DEGENERACY_TOL:
        kind = "inflection_degenerate"
    else:
        kind = "minimum" if left_sign < 0 else "maximum"
    return CriticalPoint(float(location), kind, float("nan") if f2 is None else float(f2))


def _second(profile: EquilibriumProfile, p: float) -> Optional[float]:
    try:
        return float(profile.derivative(p, 2))
    except UnsupportedOrderError:
        return None


def critical_points(profile: EquilibriumProfile, tol_root: float = TOL_ROOT, n: int = SCAN_POINTS) -> List[CriticalPoint]:
    """
    All sign changes of f0' on the sampled domain, located by bracketing and
    bisection to tol_root, in increasing order of p.
    """
    grid = _scan_grid(profile, n)
    values = np.asarray(profile.derivative(grid, 1), dtype=float)
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    if scale == 0.0:
        return []
    signs = np.sign(np.where(np.abs(values) <= 1e-14 * scale, 0.0, values))

    # exact zeros are attached to the nearest non-zero neighbours on each side
    nonzero = np.flatnonzero(signs != 0)
    points = []
    for i, j in zip(nonzero[:-1], nonzero[1:]):
        if signs[i] == signs[j]:
            continue
        if j - i > 1:
            location = 0.5 * (grid[i + 1] + grid[j - 1])
        else:
            location = brentq(
                lambda q: float(profile.derivative(q, 1)), grid[i], grid[j], xtol=tol_root, rtol=4 * np.finfo(float).eps
            )
        points.append(_classify(location, signs[i], _second(profile, location)))
    return points


def tangencies(profile: EquilibriumProfile, tol: float = 1e-8, n: int = SCAN_POINTS) -> List[float]:
    """Double zeros of f0' (|f0'| touches zero without a sign change)."""
    grid = _scan_grid(profile, n)
    values = np.asarray(profile.derivative(grid, 1), dtype=float)
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        return []
    mags = np.abs(values)
    found = []
    for i in range(1, grid.size - 1):
        if not (mags[i] <= mags[i - 1] and mags[i] <= mags[i + 1]):
            continue
        if np.sign(values[i - 1]) != np.sign(values[i + 1]):
            continue
        res = minimize_scalar(
            lambda q: abs(float(profile.derivative(q, 1))),
            bounds=(grid[i - 1], grid[i + 1]),
            method="bounded",
            options={"xatol": TOL_ROOT},
        )
        if res.fun < tol * scale:
            found.append(float(res.x))
    return found


def is_reflection_symmetric(profile: EquilibriumProfile, tol: float = 1e-10, n: int = SCAN_POINTS) -> bool:
    lo, hi = profile.domain
    reach = max(abs(lo), abs(hi))
    grid = np.linspace(-reach, reach, n)
    f = np.asarray(profile.derivative(grid, 0), dtype=float)
    return bool(np.max(np.abs(f - f[::-1])) < tol)


def galilean_frame(profile: EquilibriumProfile, tol: float = 1e-12) -> Tuple[EquilibriumProfile, float]:
    """
    Shift to a frame with f0'(0) = 0, moving the critical point nearest the origin
    to 0. Returns the shifted profile and the applied shift (already 0 when
    f0'(0) vanishes).
    """
    scale = float(np.max(np.abs(profile.derivative(np.linspace(*profile.domain, 257), 1))))
    if scale == 0.0 or abs(float(profile.derivative(0.0, 1))) <= tol * scale:
        return profile, 0.0
    points = critical_points(profile)
    if not points:
        return profile, 0.0
    nearest = min(points, key=lambda c: abs(c.location))
    return profile.shifted(-nearest.location), -nearest.location


@dataclass
class ProfileFamily:
    """One-parameter family f_eta built by overriding one descriptor entry."""

    descriptor: Dict[str, Any]
    parameter: str
    name: str = ""
    base_dir: str = "."
    builder: Optional[Callable[[float], EquilibriumProfile]] = field(default=None, repr=False)

    def at(self, eta: float) -> EquilibriumProfile:
        if self.builder is not None:
            return self.builder(eta)
        desc = json.loads(json.dumps(self.descriptor))
        _set_path(desc, self.parameter, float(eta))
        return profile_from_descriptor(desc, base_dir=self.base_dir)


def _set_path(desc: Dict[str, Any], path: str, value: float):
    # dotted path into the descriptor, list indices as integers: "components.1.amplitude"
    parts = path.split(".")
    node = desc
    try:
        for part in parts[:-1]:
            node = node[int(part)] if isinstance(node, list) else node[part]
        last = parts[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            node[last] = value
    except (KeyError, IndexError, ValueError, TypeError):
        raise ConfigError(f"family parameter '{path}' does not name a descriptor entry")


def _read_table(path: str) -> np.ndarray:
    rows = []
    with open(path, newline="") as handle:
        for row in csv.reader(handle):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                if rows:
                    raise ConfigError(f"non-numeric row in {path}: {row}")
                continue  # header
    table = np.array(rows, dtype=float)
    if table.ndim != 2 or table.shape[1] not in (2, 3):
        raise ConfigError(f"{path} must have two or three columns (p, f0[, f0'])")
    return table


def load_table(path: str) -> TabulatedProfile:
    table = _read_table(path)
    return TabulatedProfile(table[:, 0], table[:, 1], table[:, 2] if table.shape[1] == 3 else None)


def profile_from_descriptor(desc: Dict[str, Any], base_dir: str = ".") -> EquilibriumProfile:
    """Build a profile from a JSON-style descriptor dictionary."""
    kind = desc.get("kind")
    try:
        if kind == "maxwellian":
            return maxwellian(desc.get("center", 0.0), desc.get("width", 1.0), desc.get("amplitude", 1.0))
        if kind == "bi_maxwellian":
            return bi_maxwellian(
                desc["separation"], desc.get("width", 1.0), desc.get("amplitude", 1.0), desc.get("center", 0.0)
            )
        if kind == "maxwellian_sum":
            return maxwellian_sum([(c.get("amplitude", 1.0), c.get("center", 0.0), c.get("width", 1.0)) for c in desc["components"]])
        if kind == "tabulated":
            if "file" in desc:
                return load_table(os.path.join(base_dir, desc["file"]))
            return TabulatedProfile(desc["p"], desc["values"], desc.get("derivative"))
        if kind == "expression":
            return ExpressionProfile(desc["expression"], tuple(desc.get("domain", (-10.0, 10.0))))
        if kind == "perturbed":
            from .structural import ChiPerturbation

            return PerturbedProfile(
                profile_from_descriptor(desc["base"], base_dir), ChiPerturbation.from_descriptor(desc["perturbation"])
            )
    except KeyError as exc:
        raise ConfigError(f"{kind} descriptor is missing {exc}")
    raise ConfigError(f"unknown profile kind '{kind}', expected one of {', '.join(KINDS)}")


def load_profile(path: str) -> EquilibriumProfile:
    if not os.path.exists(path):
        raise ConfigError(f"profile file not found: {path}")
    if path.lower().endswith(".csv"):
        return load_table(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            desc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}")
    return profile_from_descriptor(desc, base_dir=os.path.dirname(os.path.abspath(path)))
