"""
A single oscillator of frequency Omega coupled linearly to a continuum of bath
oscillators of frequency x >= 0,

    dQ/dt = s Omega P               dq/dt = x p
    dP/dt = -s Omega Q - int f q    dp/dt = -x q - Q f

where s = -1 is a negative-energy oscillator and s = +1 the ordinary one. Normal
modes exp(-i omega t) satisfy

    D_s(omega) = Omega^2 - omega^2 + s Omega int_0^inf x f^2 / (omega^2 - x^2) dx = 0

and the Nyquist function used for counting is eps_s = -D_s / (omega^2 + Omega^2),
which tends to 1 at infinity and has one upper-half-plane pole at i Omega.
"""

import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.integrate import solve_ivp
from scipy.linalg import eigvals
from scipy.sparse import csr_matrix

from .dispersion import ROOT_RESIDUAL, RootCountRegion, count_zeros, search_roots
from .errors import ConfigError, CriticalModelError, DomainError, TailTruncationWarning
from .expressions import parse_expression
from .hilbert import DEFAULT_TOL, SampledRealFunction, cauchy_transform, hilbert_at, hilbert_on_grid

SUPPORT_MASS = 1e-12
SCAN_LIMIT = 200.0
POINTWISE_LIMIT = 64
SAMPLES = 8193
MAX_ARG_STEP = np.pi / 4


@dataclass(frozen=True, eq=False)
class BathModel:
    """
    Oscillator plus bath. coupling(x) is f(x)^2 on x >= 0; x_max is the
    truncation of the bath, found from the coupling when not given.
    """

    Omega: float
    coupling: Callable
    oscillator_sign: int = -1
    coupling_text: str = ""
    x_max: Optional[float] = None

    def __post_init__(self):
        if not self.Omega > 0:
            raise ConfigError(f"oscillator frequency must be positive, got {self.Omega}")
        if self.oscillator_sign not in (-1, 1):
            raise ConfigError(f"oscillator sign must be -1 or +1, got {self.oscillator_sign}")
        x = np.linspace(0.0, SCAN_LIMIT, 20001)
        values = np.asarray(self.coupling(x), dtype=float) * np.ones_like(x)
        if not np.all(np.isfinite(values)):
            raise ConfigError("coupling must be finite on x >= 0")
        if np.min(values) < -1e-14:
            raise ConfigError(f"coupling f(x)^2 must be non-negative, got {np.min(values):.3e}")
        if self.x_max is None:
            object.__setattr__(self, "x_max", _support_edge(x, values, self.Omega))
        elif not self.x_max > 0:
            raise ConfigError(f"x_max must be positive, got {self.x_max}")

    @staticmethod
    def from_cfg(cfg: Dict[str, Any]) -> "BathModel":
        osc = cfg.get("oscillator", {})
        bath = cfg.get("bath", {})
        text = str(bath.get("coupling", "0.4*x*exp(-0.25*x^2)"))
        x_max = bath.get("x_max")
        return BathModel(
            Omega=float(osc.get("omega", 1.0)),
            oscillator_sign=int(osc.get("sign", -1)),
            coupling=parse_expression(text, variables=("x",)),
            coupling_text=text,
            x_max=None if x_max is None else float(x_max),
        )

    @property
    def window(self) -> Tuple[float, float]:
        return (-float(self.x_max), float(self.x_max))

    def coupling_sq(self, x):
        return np.clip(np.asarray(self.coupling(np.abs(x)), dtype=float), 0.0, None)

    def antisymmetric(self, x):
        """sgn(x) f(|x|)^2, the odd extension used by the full-line form."""
        x = np.asarray(x, dtype=float)
        return np.sign(x) * self.coupling_sq(x)

    def with_coupling(self, text: str) -> "BathModel":
        return BathModel(self.Omega, parse_expression(text, variables=("x",)), self.oscillator_sign, text)

    def descriptor(self) -> Dict[str, Any]:
        return {
            "oscillator": {"omega": self.Omega, "sign": self.oscillator_sign},
            "bath": {"coupling": self.coupling_text, "x_max": self.x_max},
        }


def _support_edge(x: np.ndarray, values: np.ndarray, omega: float) -> float:
    peak = float(np.max(values))
    if peak <= 0.0:
        return max(10.0, 3.0 * omega)
    above = np.flatnonzero(values > SUPPORT_MASS * peak)
    last = int(above[-1])
    if last >= x.size - 1:
        warnings.warn(
            f"coupling has not decayed by x={SCAN_LIMIT:g}; the bath is truncated there",
            TailTruncationWarning,
            stacklevel=3,
        )
        return SCAN_LIMIT
    return max(float(x[last + 1]), 1.5 * omega)


@dataclass
class BathRoot:
    omega: complex
    residual: float
    multiplicity: int = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "omega_R": float(self.omega.real),
            "gamma": float(self.omega.imag),
            "residual": self.residual,
            "multiplicity": self.multiplicity,
        }


@dataclass
class NyquistReport:
    omega: np.ndarray
    eps: np.ndarray
    winding: int
    poles: int
    zeros_upper: int
    indent: float
    sign: int
    raw: float = 0.0
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "winding": self.winding,
            "poles_upper": self.poles,
            "zeros_upper": self.zeros_upper,
            "indent": self.indent,
            "oscillator_sign": self.sign,
            "raw_winding": self.raw,
            "samples": int(self.omega.size),
        }

    def rows(self) -> List[Tuple[float, float, float, float]]:
        return [
            (float(w.real), float(w.imag), float(e.real), float(e.imag)) for w, e in zip(self.omega, self.eps)
        ]


def _bath_hilbert(model: BathModel, omega: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if omega.size <= POINTWISE_LIMIT:
        return np.array(
            [hilbert_at(model.antisymmetric, float(w), tol=tol, window=model.window, points=(0.0,)) for w in omega]
        )
    grid = np.linspace(*model.window, SAMPLES)
    sampled = SampledRealFunction(grid, model.antisymmetric(grid))
    return hilbert_on_grid(sampled, omega, method="discrete").values


def cl_epsilon_real(model: BathModel, omega, tol: float = DEFAULT_TOL):
    """
    Boundary value of eps_s on the real axis,

        (w^2 - Omega^2 + s Omega (pi/2) (H[f_-^2](w) + i f_-^2(w))) / (w^2 + Omega^2)
    """
    scalar = np.ndim(omega) == 0
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    om2 = model.Omega ** 2
    bath = _bath_hilbert(model, w, tol) + 1j * model.antisymmetric(w)
    out = (w * w - om2 + model.oscillator_sign * model.Omega * 0.5 * np.pi * bath) / (w * w + om2)
    return complex(out[0]) if scalar else out


def _full_line_coupling(model: BathModel, omega: complex) -> complex:
    """J(w) = (1/2) int f_-^2(x) / (w - x) dx over the bath window."""
    return -0.5 * cauchy_transform(model.antisymmetric, omega, model.window, points=(0.0,))


def _half_line_coupling(model: BathModel, omega: complex) -> complex:
    w2 = omega * omega

    def part(x, take):
        return take(x * model.coupling_sq(x) / (w2 - x * x))

    breaks = [abs(omega.real)] if 0.0 < abs(omega.real) < model.x_max else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, _ = integrate.quad(part, 0.0, model.x_max, args=(np.real,), points=breaks, limit=500, epsabs=1e-13)
        im, _ = integrate.quad(part, 0.0, model.x_max, args=(np.imag,), points=breaks, limit=500, epsabs=1e-13)
    return complex(re, im)


def cl_dispersion(model: BathModel, omega: complex) -> complex:
    """
    D_s(omega) from the half-line integral.

    Raises:
        DomainError: omega on the real axis, where the integral is singular
    """
    omega = complex(omega)
    if omega.imag == 0.0:
        raise DomainError(f"cl_dispersion needs Im(omega) != 0, got {omega}")
    return model.Omega ** 2 - omega * omega + model.oscillator_sign * model.Omega * _half_line_coupling(model, omega)


def _numerator(model: BathModel, omega: complex) -> complex:
    return omega * omega - model.Omega ** 2 - model.oscillator_sign * model.Omega * _full_line_coupling(model, omega)


def cl_epsilon_complex(model: BathModel, omega: complex) -> complex:
    """eps_s(omega) for Im omega > 0 from the full-line form."""
    omega = complex(omega)
    if not omega.imag > 0:
        raise DomainError(f"cl_epsilon_complex needs Im(omega) > 0, got {omega}")
    return _numerator(model, omega) / (omega * omega + model.Omega ** 2)


def _segment_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    length = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(length > 0, -np.real(np.conj(a) * d) / length, 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(a + t * d)


def cl_nyquist(
    model: BathModel,
    omega_grid: Optional[np.ndarray] = None,
    indent: float = 0.0,
    tol: float = 1e-8,
    max_refinements: int = 12,
    verbose: bool = False,
) -> NyquistReport:
    """
    Winding of eps_s around the origin as omega runs along the real axis
    (indent = 0) or along Im omega = indent, closed at infinity where eps_s -> 1.
    zeros_upper = winding + 1, the 1 being the pole at i Omega.

    Raises:
        CriticalModelError: the real-axis contour passes within tol of the origin
    """
    if indent < 0:
        raise ConfigError(f"indent must be non-negative, got {indent}")
    if omega_grid is None:
        reach = 1.5 * max(model.x_max, 2.0 * model.Omega)
        omega_grid = np.linspace(-reach, reach, 4001 if indent == 0 else 801)
    x = np.sort(np.asarray(omega_grid, dtype=float))

    def evaluate(xs):
        if indent == 0:
            return np.atleast_1d(cl_epsilon_real(model, xs))
        return np.array([cl_epsilon_complex(model, complex(v, indent)) for v in xs])

    eps = evaluate(x)
    for _ in range(max_refinements):
        if indent == 0:
            near = _segment_distance(eps[:-1], eps[1:])
            if np.min(near) < tol:
                at = float(x[int(np.argmin(near))])
                raise CriticalModelError(f"Nyquist contour passes within {tol:g} of the origin near omega={at:.6g}")
        steps = np.angle(eps[1:] / eps[:-1])
        bad = np.flatnonzero(np.abs(steps) > MAX_ARG_STEP)
        if bad.size == 0:
            break
        mids = 0.5 * (x[bad] + x[bad + 1])
        x = np.insert(x, bad + 1, mids)
        eps = np.insert(eps, bad + 1, evaluate(mids))

    total = float(np.sum(np.angle(eps[1:] / eps[:-1]))) + float(np.angle(eps[0] / eps[-1]))
    raw = total / (2.0 * np.pi)
    winding = int(round(raw))
    report = NyquistReport(
        omega=x + 1j * indent,
        eps=eps,
        winding=winding,
        poles=1,
        zeros_upper=winding + 1,
        indent=float(indent),
        sign=model.oscillator_sign,
        raw=raw,
    )
    if verbose:
        print(f"🌀 Nyquist winding {winding} ({raw:+.4f}), {report.zeros_upper} zero(s) in the upper half plane")
    return report


def default_bath_region(model: BathModel) -> RootCountRegion:
    reach = max(model.x_max, 2.0 * model.Omega)
    return RootCountRegion(-reach, reach, 1e-4, reach)


def cl_count_roots(model: BathModel, region: Optional[RootCountRegion] = None) -> RootCountRegion:
    """Zeros of the analytic numerator omega^2 - Omega^2 - s Omega J inside the rectangle."""
    return count_zeros(lambda w: _numerator(model, w), region or default_bath_region(model))


def cl_find_roots(
    model: BathModel,
    region: Optional[RootCountRegion] = None,
    tol_residual: float = ROOT_RESIDUAL,
    verbose: bool = False,
) -> List[BathRoot]:
    _, found = search_roots(
        lambda w: _numerator(model, w), region or default_bath_region(model), tol_residual, verbose=verbose
    )
    return [BathRoot(omega, residual, mult) for omega, residual, mult in found]


def discretize(model: BathModel, n_bath: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes x_j on [0, x_max] and couplings c_j = sqrt(w_j) f(x_j)."""
    if n_bath < 1:
        raise ConfigError(f"need at least one bath oscillator, got {n_bath}")
    nodes, weights = np.polynomial.legendre.leggauss(n_bath)
    half = 0.5 * model.x_max
    x = half * (nodes + 1.0)
    c = np.sqrt(half * weights) * np.sqrt(model.coupling_sq(x))
    return x, c


def cl_matrix(model: BathModel, n_bath: int) -> np.ndarray:
    """Generator of the discretized dynamics on (Q, P, q_1..q_N, p_1..p_N)."""
    x, c = discretize(model, n_bath)
    s, om = model.oscillator_sign, model.Omega
    n = n_bath
    a = np.zeros((2 * n + 2, 2 * n + 2))
    a[0, 1] = s * om
    a[1, 0] = -s * om
    a[1, 2 : n + 2] = -c
    idx = np.arange(n)
    a[2 + idx, n + 2 + idx] = x
    a[n + 2 + idx, 2 + idx] = -x
    a[n + 2 :, 0] = -c
    return a


def cl_spectrum(model: BathModel, n_bath: int = 400) -> np.ndarray:
    """All frequencies omega = i lambda of the discretized system, sorted by Im then Re."""
    omega = 1j * eigvals(cl_matrix(model, n_bath))
    return omega[np.lexsort((omega.real, -omega.imag))]


def cl_matrix_oracle(model: BathModel, n_bath: int = 400, threshold: float = 1e-4) -> List[complex]:
    """Unstable frequencies of the discretized system, Im omega > threshold Omega."""
    omega = cl_spectrum(model, n_bath)
    unstable = omega[omega.imag > threshold * model.Omega]
    return sorted((complex(w) for w in unstable), key=lambda w: (w.real, w.imag))


def cl_time_integrate(
    model: BathModel,
    n_bath: int = 400,
    t_final: float = 200.0,
    chunk: float = 10.0,
    samples_per_chunk: int = 20,
    verbose: bool = False,
) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Integrate the discretized system from Q = 1 with DOP853 and renormalize the
    state after every chunk. Returns (times, log of the state norm, growth rate)
    with the rate fitted over [t_final/2, t_final].
    """
    a = csr_matrix(cl_matrix(model, n_bath))
    y = np.zeros(a.shape[0])
    y[0] = 1.0
    times: List[float] = []
    logs: List[float] = []
    offset = 0.0
    t0 = 0.0
    while t0 < t_final - 1e-12:
        t1 = min(t0 + chunk, t_final)
        t_eval = np.linspace(t0, t1, samples_per_chunk + 1)[1:]
        sol = solve_ivp(lambda t, v: a @ v, (t0, t1), y, method="DOP853", t_eval=t_eval, rtol=1e-9, atol=1e-12)
        if not sol.success:
            raise DomainError(f"time integration failed at t={t0:g}: {sol.message}")
        norms = np.linalg.norm(sol.y, axis=0)
        times.extend(sol.t.tolist())
        logs.extend((offset + np.log(norms)).tolist())
        end = norms[-1]
        offset += float(np.log(end))
        y = sol.y[:, -1] / end
        t0 = t1
    times_arr = np.array(times)
    logs_arr = np.array(logs)
    keep = times_arr >= 0.5 * t_final
    rate, _ = np.polyfit(times_arr[keep], logs_arr[keep], 1)
    if verbose:
        print(f"⏱️  growth rate over [{0.5 * t_final:g}, {t_final:g}]: {rate:.6f}")
    return times_arr, logs_arr, float(rate)
