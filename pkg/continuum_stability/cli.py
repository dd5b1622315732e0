"""
Command-line front end.

    python run_analysis.py penrose  --profile profiles/maxwellian.json --k 1.0
    python run_analysis.py perturb  --profile profiles/maxwellian.json --k 1.0 --h 0.1 --eps-exp -10 --center 0 --amplitude 3
    python run_analysis.py caldeira --omega 1.0 --coupling "0.4*x*exp(-0.25*x^2)"

Every subcommand writes its artifacts under --out and, where a stability verdict
exists, prints it as a single `VERDICT: ...` line. Exit status is 0 on success,
1 on a configuration error and 2 on an analysis error.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .caldeira import BathModel, cl_find_roots, cl_matrix_oracle, cl_nyquist
from .dispersion import (
    RootCountRegion,
    complete_spectrum,
    find_roots,
    marginal_frequencies,
    marginal_growth_rate,
)
from .equilibria import EquilibriumProfile, PerturbedProfile, ProfileFamily, load_profile
from .errors import AnalysisError, ConfigError, PoleLikeError
from .expressions import parse_expression
from .gtransform import evolve, field_moment, landau_rate, transform_context
from .hilbert import SampledRealFunction, hilbert_on_grid
from .launcher import SweepLauncher
from .outputs import output_path, write_csv, write_json
from .penrose import (
    dielectric,
    default_u_grid,
    find_critical_state,
    penrose_winding,
    signature_profile,
    winding_number,
)
from .settings import Settings, load_settings
from .structural import ChiPerturbation, destabilize, krein_like_verdict, persistence_sweep

COMMANDS = ("penrose", "signature", "roots", "critical", "perturb", "verdict", "evolve", "caldeira", "hilbert")
BANNER = "=" * 60


@dataclass
class RunConfig:
    command: str
    out: str
    profile: Optional[str] = None
    family: Optional[str] = None
    parameter: Optional[str] = None
    k: Optional[float] = None
    k_range: Optional[Tuple[float, ...]] = None
    eta_range: Optional[Tuple[float, ...]] = None
    threads: int = 1
    hilbert_tol: float = 1e-8
    root_residual: float = 1e-10
    verbose: bool = False
    options: Dict[str, Any] = field(default_factory=dict)

    @staticmethod
    def from_args(args: argparse.Namespace, settings: Optional[Settings] = None) -> "RunConfig":
        settings = settings or load_settings()
        skip = {"command", "out", "profile", "family", "parameter", "k", "k_range", "eta_range", "verbose", "tol"}
        options = {key: value for key, value in vars(args).items() if key not in skip}
        return RunConfig(
            command=args.command,
            out=args.out or settings.out_dir,
            profile=getattr(args, "profile", None),
            family=getattr(args, "family", None),
            parameter=getattr(args, "parameter", None),
            k=getattr(args, "k", None),
            k_range=_tuple(getattr(args, "k_range", None)),
            eta_range=_tuple(getattr(args, "eta_range", None)),
            threads=settings.threads,
            hilbert_tol=getattr(args, "tol", None) or settings.hilbert_tol,
            root_residual=settings.root_residual,
            verbose=bool(getattr(args, "verbose", False)),
            options=options,
        )

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command '{self.command}'")
        for path in (self.profile, self.family):
            if path is not None and not os.path.exists(path):
                raise ConfigError(f"file not found: {path}")
        if self.k is not None and not self.k > 0:
            raise ConfigError(f"--k must be positive, got {self.k}")
        for name, span in (("--k-range", self.k_range), ("--eta-range", self.eta_range)):
            if span is None:
                continue
            if len(span) not in (2, 3):
                raise ConfigError(f"{name} takes LO HI [N], got {len(span)} values")
            if not span[0] < span[1]:
                raise ConfigError(f"{name} must be non-empty, got [{span[0]:g}, {span[1]:g}]")
            if len(span) == 3 and (span[2] < 2 or span[2] != int(span[2])):
                raise ConfigError(f"{name} point count must be an integer >= 2, got {span[2]:g}")
        if self.k_range is not None and not self.k_range[0] >= 0:
            raise ConfigError("--k-range must lie in k >= 0")
        if not (self.hilbert_tol > 0 and self.root_residual > 0):
            raise ConfigError("tolerances must be positive")
        return self


def _tuple(values: Optional[Sequence[float]]) -> Optional[Tuple[float, ...]]:
    return None if values is None else tuple(float(v) for v in values)


def _sweep_points(span: Tuple[float, ...], default_n: int = 11) -> List[float]:
    n = int(span[2]) if len(span) == 3 else default_n
    return [float(v) for v in np.linspace(span[0], span[1], n)]


def _require(config: RunConfig, *names: str):
    for name in names:
        if getattr(config, name) is None:
            raise ConfigError(f"'{config.command}' needs --{name.replace('_', '-')}")


def _load(config: RunConfig) -> EquilibriumProfile:
    _require(config, "profile")
    return load_profile(config.profile)


def _read_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}")


def _family(config: RunConfig) -> ProfileFamily:
    if config.family is not None:
        family_cfg = _read_json(config.family)
        if "descriptor" not in family_cfg or "parameter" not in family_cfg:
            raise ConfigError(f"{config.family} must hold 'descriptor' and 'parameter'")
        base = os.path.dirname(os.path.abspath(config.family))
        return ProfileFamily(family_cfg["descriptor"], family_cfg["parameter"], family_cfg.get("name", ""), base)
    _require(config, "profile", "parameter")
    desc = _read_json(config.profile)
    base = os.path.dirname(os.path.abspath(config.profile))
    return ProfileFamily(desc, config.parameter, os.path.basename(config.profile), base)


def _verdict(line: str) -> int:
    """Print the verdict line; a critical state is an analysis failure (exit 2)."""
    print(f"VERDICT: {line}")
    return 2 if line == "critical" else 0


def _quadrature_tol(config: RunConfig) -> float:
    # Cauchy integrals must resolve eps below the root residual target
    return min(config.hilbert_tol, config.root_residual)


def _worst(verdicts: Sequence[str]) -> str:
    for v in ("critical", "unstable"):
        if v in verdicts:
            return v
    return "stable"


def _header(title: str):
    print(f"\n{BANNER}")
    print(title)
    print(f"{BANNER}\n")


def _sweep(config: RunConfig, label: str, func: Callable[..., Any], points: Sequence[Dict[str, Any]]):
    launcher = SweepLauncher(threads=config.threads, verbose=config.verbose)
    for params in points:
        launcher.add_job(label.format(**params), func, **params)
    results = launcher.run_all()
    return [{key: r[key] for key in ("index", "params", "success", "result", "error") if key in r} for r in results]


def _cmd_penrose(config: RunConfig) -> int:
    if config.k_range is None and config.eta_range is None:
        _require(config, "k")
        profile = _load(config)
        d = dielectric(profile, config.k, tol=config.hilbert_tol)
        report = winding_number(d, cross_check=True)
        _header(f"📈 Penrose contour of {profile.kind} at k={config.k:g}")
        print(f"Winding: {report.winding}  (contour check {report.contour_winding}, consistent {report.consistent})")
        for c in report.crossings:
            print(f"   crossing u={c.u_c:+.8f} {c.kind:<16} eps_R={c.eps_R_at:+.6e} contributes {c.contributes:+d}")
        write_csv(output_path(config.out, "penrose", "contour.csv"), ("u", "eps_R", "eps_I"), d.rows())
        write_json(
            output_path(config.out, "penrose", "report.json"),
            {"profile": profile.descriptor(), "report": report.to_dict(), "verdict": report.verdict},
        )
        return _verdict(report.verdict)

    if config.eta_range is not None:
        _require(config, "k")
        family = _family(config)
        ks = [config.k] if config.k_range is None else _sweep_points(config.k_range)
        points = [{"eta": eta, "k": k} for eta in _sweep_points(config.eta_range) for k in ks]

        def job(eta, k):
            return penrose_winding(family.at(eta), k, tol=config.hilbert_tol).to_dict()

        results = _sweep(config, "eta={eta:g} k={k:g}", job, points)
    else:
        profile = _load(config)
        points = [{"k": k} for k in _sweep_points(config.k_range) if k > 0]

        def job(k):
            return penrose_winding(profile, k, tol=config.hilbert_tol).to_dict()

        results = _sweep(config, "k={k:g}", job, points)

    verdicts = []
    _header(f"📊 Penrose sweep over {len(results)} points")
    for r in results:
        if r["success"]:
            rep = r["result"]
            v = "critical" if rep["critical"] else ("stable" if rep["stable"] else "unstable")
            print(f"   {r['params']}: winding {rep['winding']} ({v})")
        else:
            v = "critical"
            print(f"   {r['params']}: ❌ {r['error']}")
        verdicts.append(v)
    write_json(output_path(config.out, "penrose", "sweep.json"), {"points": results})
    return _verdict(_worst(verdicts))


def _cmd_signature(config: RunConfig) -> int:
    _require(config, "k")
    profile = _load(config)
    sig = signature_profile(dielectric(profile, config.k, tol=config.hilbert_tol))
    _header(f"🧭 Signature of the continuous spectrum, {profile.kind} at k={config.k:g}")
    for lo, hi, s in sig.intervals:
        print(f"   ({lo:+.6g}, {hi:+.6g}): sigma = {s:+d}")
    print(f"Signature changes: {sig.changes}")
    write_json(output_path(config.out, "signature.json"), {"profile": profile.descriptor(), "k": config.k, **sig.to_dict()})
    return 0


def _cmd_roots(config: RunConfig) -> int:
    _require(config, "k")
    profile = _load(config)
    region = None
    if config.options.get("region"):
        region = RootCountRegion(*config.options["region"])
    roots = find_roots(
        profile, config.k, region, tol_residual=config.root_residual, tol=_quadrature_tol(config), verbose=config.verbose
    )
    listed = complete_spectrum(roots) if config.options.get("complete") else roots
    _header(f"🔍 Dispersion roots of {profile.kind} at k={config.k:g}")
    for r in listed:
        print(f"   k={r.k:+g} omega = {r.omega_R:+.10f} {r.gamma:+.10f}i  [{r.symmetry_class}]")
    write_csv(
        output_path(config.out, "roots.csv"),
        ("k", "omega_R", "gamma", "residual", "multiplicity", "class"),
        [(r.k, r.omega_R, r.gamma, r.residual, r.multiplicity, r.symmetry_class) for r in listed],
    )
    write_json(output_path(config.out, "roots.json"), {"profile": profile.descriptor(), "roots": [r.to_dict() for r in listed]})
    return _verdict("unstable" if roots else "stable")


def _cmd_critical(config: RunConfig) -> int:
    _require(config, "eta_range")
    if config.k is None and config.k_range is None:
        raise ConfigError("'critical' needs --k or --k-range")
    family = _family(config)
    k_range = None if config.k_range is None else config.k_range[:2]
    state = find_critical_state(
        family, config.eta_range[:2], k=config.k, k_range=k_range, tol=config.options.get("eta_tol", 1e-10), verbose=config.verbose
    )
    _header(f"🎯 Critical state of family '{family.name or family.parameter}'")
    print(f"Kind: {state.kind}")
    print(f"eta_c = {state.eta_c:.12g}, u_c = {state.u_c:+.10f}, k_c = {state.k_c:.10f}")
    print(f"Embedded-mode signature: {state.embedded_mode_signature:+d}")
    write_json(output_path(config.out, "critical.json"), {"family": family.descriptor, "parameter": family.parameter, **state.to_dict()})
    # the located state is the result of this command, not a failure
    _verdict("critical")
    return 0


def _chi(config: RunConfig, h: float) -> ChiPerturbation:
    opts = config.options
    d = opts.get("d") if opts.get("d") is not None else h
    if opts.get("eps") is not None:
        eps = opts["eps"]
    elif opts.get("eps_exp") is not None:
        eps = float(np.exp(opts["eps_exp"]))
    else:
        eps = float(np.exp(-1.0 / h))
    return ChiPerturbation(h, d, eps, opts.get("center", 0.0), opts.get("amplitude", 1.0))


def _perturbed_contour(config: RunConfig, profile: EquilibriumProfile, chi: ChiPerturbation):
    perturbed = PerturbedProfile(profile, chi)
    lo, hi = chi.support
    u = np.union1d(default_u_grid(perturbed), np.concatenate([chi.breakpoints, np.linspace(lo, hi, 2001)]))
    d = dielectric(perturbed, config.k, u, tol=config.hilbert_tol)
    rows = [(x, float(perturbed.derivative(x, 1)), r, i) for x, r, i in d.rows()]
    write_csv(output_path(config.out, "perturb", "contour.csv"), ("u", "df0", "eps_R", "eps_I"), rows)


def _cmd_perturb(config: RunConfig) -> int:
    _require(config, "k")
    profile = _load(config)
    opts = config.options
    hs = opts.get("sweep_h")
    _header(f"🧪 chi perturbation of {profile.kind} at k={config.k:g}")
    if hs:
        reports = persistence_sweep(
            profile, config.k, hs, opts.get("center"), opts.get("amplitude", 1.0), verbose=True
        )
    else:
        reports = [destabilize(profile, config.k, _chi(config, opts.get("h", 0.1)), opts.get("require_accessible", False))]
    for r in reports:
        print(f"h={r.chi.h:g} d={r.chi.d:g} eps={r.chi.eps:.3e} a={r.chi.amplitude:+g}")
        print(f"   W11 norm {r.w11_norm:.6f}, sup norm {r.sup_norm:.6f}, PV at centre {r.hilbert_at_center:.6f}")
        print(f"   winding {r.winding_before} -> {r.winding_after} ({r.verdict})")
    write_json(output_path(config.out, "perturb.json"), {"profile": profile.descriptor(), "reports": [r.to_dict() for r in reports]})
    if not hs:
        _perturbed_contour(config, profile, reports[0].chi)

    last = reports[-1]
    if last.verdict == "rejected_inaccessible":
        return _verdict("stable")
    if last.winding_after is None:
        return _verdict("critical")
    return _verdict("unstable" if last.winding_after >= 1 else "stable")


def _cmd_verdict(config: RunConfig) -> int:
    _require(config, "k")
    profile = _load(config)
    report = penrose_winding(profile, config.k, tol=config.hilbert_tol)
    _header(f"🏛️  Structural verdict for {profile.kind} at k={config.k:g}")
    if not report.stable:
        print(f"Profile is not Penrose-stable (winding {report.winding}); no structural verdict")
        write_json(output_path(config.out, "verdict.json"), {"verdict": report.verdict, "report": report.to_dict()})
        return _verdict(report.verdict)
    verdict = krein_like_verdict(profile, config.k, verbose=config.verbose)
    print(f"Critical points: {', '.join(f'{c.type}@{c.location:+.6f}' for c in verdict.critical_points)}")
    for r in verdict.destabilizable:
        print(f"   accessible destabilizer at p={r.chi.center:+.6f} (amplitude {r.chi.amplitude:+g})")
    write_json(output_path(config.out, "verdict.json"), {"profile": profile.descriptor(), "k": config.k, **verdict.to_dict()})
    return _verdict(verdict.verdict)


def _cmd_evolve(config: RunConfig) -> int:
    _require(config, "k")
    profile = _load(config)
    opts = config.options
    zeta0 = parse_expression(opts.get("initial") or "exp(-p^2)")
    ctx = transform_context(profile, config.k, spacing=opts.get("spacing") or 0.005)
    times = np.arange(0.0, opts.get("t_max", 50.0) + 1e-12, opts.get("dt", 0.05))
    field_values = field_moment(ctx, zeta0, times)
    window = tuple(opts["fit_window"]) if opts.get("fit_window") else (0.25 * times[-1], times[-1])
    rate = landau_rate(times, field_values, window)

    estimate = None
    frequencies = [w for w in marginal_frequencies(profile, config.k, (0.0, profile.domain[1])) if w > 0]
    if frequencies:
        try:
            estimate = marginal_growth_rate(profile, config.k, max(frequencies))
        except PoleLikeError:
            estimate = None
        estimate = estimate if isinstance(estimate, float) else None

    _header(f"🌊 Free-streaming evolution of {profile.kind} at k={config.k:g}")
    print(f"Fitted decay rate over [{window[0]:g}, {window[1]:g}]: {rate:.6f}")
    if estimate is not None:
        print(f"Marginality estimate: {estimate:.6f}")
    write_csv(
        output_path(config.out, "field.csv"),
        ("t", "E_re", "E_im", "E_abs"),
        [(t, e.real, e.imag, abs(e)) for t, e in zip(times, field_values)],
    )
    write_json(
        output_path(config.out, "evolve.json"),
        {"profile": profile.descriptor(), "k": config.k, "rate": rate, "fit_window": list(window), "marginal_estimate": estimate},
    )
    snapshots = opts.get("snapshots") or (0.0, 0.5 * times[-1], float(times[-1]))
    rows = []
    for t in snapshots:
        zeta = evolve(ctx, zeta0, t)
        rows.extend((t, u, z.real, z.imag) for u, z in zip(zeta.grid, zeta.values))
    write_csv(output_path(config.out, "evolve", "snapshots.csv"), ("t", "u", "zeta_re", "zeta_im"), rows)
    return 0


def _bath(config: RunConfig) -> BathModel:
    opts = config.options
    if opts.get("config"):
        if not os.path.exists(opts["config"]):
            raise ConfigError(f"file not found: {opts['config']}")
        return BathModel.from_cfg(_read_json(opts["config"]))
    cfg = {
        "oscillator": {"omega": opts.get("omega", 1.0), "sign": opts.get("sign", -1)},
        "bath": {"coupling": opts.get("coupling") or "0.4*x*exp(-0.25*x^2)"},
    }
    return BathModel.from_cfg(cfg)


def _cmd_caldeira(config: RunConfig) -> int:
    opts = config.options
    model = _bath(config)
    report = cl_nyquist(model, indent=opts.get("indent", 0.0), verbose=config.verbose)
    out = {"model": model.descriptor(), "nyquist": report.to_dict()}

    _header(f"🔗 Oscillator (sign {model.oscillator_sign:+d}, Omega={model.Omega:g}) coupled to a bath")
    print(f"Winding {report.winding}, poles {report.poles}, zeros in the upper half plane {report.zeros_upper}")
    if opts.get("find_roots"):
        roots = cl_find_roots(model, tol_residual=config.root_residual, verbose=config.verbose)
        out["roots"] = [r.to_dict() for r in roots]
        for r in roots:
            print(f"   root {r.omega.real:+.10f} {r.omega.imag:+.10f}i")
    if opts.get("oracle"):
        eigen = cl_matrix_oracle(model, opts["oracle"])
        out["oracle"] = {"n_bath": opts["oracle"], "unstable": [{"omega_R": w.real, "gamma": w.imag} for w in eigen]}
        print(f"Matrix oracle (N={opts['oracle']}): {len(eigen)} unstable eigenvalue(s)")

    write_csv(output_path(config.out, "nyquist.csv"), ("omega_re", "omega_im", "eps_re", "eps_im"), report.rows())
    write_json(output_path(config.out, "caldeira.json"), out)
    return _verdict("unstable" if report.zeros_upper > 0 else "stable")


def _cmd_hilbert(config: RunConfig) -> int:
    opts = config.options
    span = opts.get("u_range") or (-8.0, 8.0, 801)
    u = np.linspace(span[0], span[1], int(span[2]) if len(span) == 3 else 801)
    if config.profile:
        profile = _load(config)
        values = profile.derivative_hilbert(u, method=opts.get("method", "auto"), tol=config.hilbert_tol)
        source = profile.descriptor()
    elif opts.get("expression"):
        g = parse_expression(opts["expression"])
        lo, hi = opts.get("domain") or (-10.0, 10.0)
        grid = np.linspace(lo, hi, 8193)
        method = opts.get("method", "adaptive")
        method = "adaptive" if method == "auto" else method
        values = hilbert_on_grid(SampledRealFunction(grid, g(grid)), u, method=method, tol=config.hilbert_tol).values
        source = {"expression": opts["expression"], "domain": [lo, hi]}
    else:
        raise ConfigError("'hilbert' needs --profile or --expression")
    _header("〰️  Hilbert transform")
    print(f"{u.size} points on [{u[0]:g}, {u[-1]:g}]")
    write_csv(output_path(config.out, "hilbert.csv"), ("u", "H"), zip(u, np.atleast_1d(values)))
    write_json(output_path(config.out, "hilbert.json"), {"source": source, "points": int(u.size)})
    return 0


HANDLERS: Dict[str, Callable[[RunConfig], int]] = {
    "penrose": _cmd_penrose,
    "signature": _cmd_signature,
    "roots": _cmd_roots,
    "critical": _cmd_critical,
    "perturb": _cmd_perturb,
    "verdict": _cmd_verdict,
    "evolve": _cmd_evolve,
    "caldeira": _cmd_caldeira,
    "hilbert": _cmd_hilbert,
}


def run(config: RunConfig) -> int:
    """Validate and run one analysis. Returns the process exit status."""
    try:
        config.validate()
        return HANDLERS[config.command](config)
    except ConfigError as e:
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return 1
    except AnalysisError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return 2


def _profile_args(p: argparse.ArgumentParser, k: bool = True):
    p.add_argument("--profile", help="profile descriptor (.json) or table (.csv)")
    if k:
        p.add_argument("--k", type=float, help="wavenumber")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="run_analysis.py", description="Stability of systems with continuous spectra")
    parser.add_argument("--out", help="output directory (default: CHH_OUT_DIR or ./results)")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--tol", type=float, help="Hilbert-transform tolerance override")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("penrose", help="Penrose winding, single k or sweep")
    _profile_args(p)
    p.add_argument("--k-range", type=float, nargs="+", metavar="V", help="LO HI [N]")
    p.add_argument("--eta-range", type=float, nargs="+", metavar="V", help="LO HI [N], needs --parameter or --family")
    p.add_argument("--parameter", help="dotted descriptor entry swept by --eta-range")
    p.add_argument("--family", help="family file with 'descriptor' and 'parameter'")

    p = sub.add_parser("signature", help="signature intervals of the continuous spectrum")
    _profile_args(p)

    p = sub.add_parser("roots", help="discrete modes in the upper half plane")
    _profile_args(p)
    p.add_argument("--region", type=float, nargs=4, metavar=("RE_LO", "RE_HI", "IM_LO", "IM_HI"))
    p.add_argument("--complete", action="store_true", help="add conjugates and -k images")

    p = sub.add_parser("critical", help="critical state of a one-parameter family")
    _profile_args(p)
    p.add_argument("--parameter", help="dotted descriptor entry, e.g. separation")
    p.add_argument("--family", help="family file with 'descriptor' and 'parameter'")
    p.add_argument("--eta-range", type=float, nargs="+", metavar="V", help="LO HI")
    p.add_argument("--k-range", type=float, nargs="+", metavar="V", help="LO HI")
    p.add_argument("--eta-tol", type=float, default=1e-10)

    p = sub.add_parser("perturb", help="apply a chi perturbation to f0'")
    _profile_args(p)
    p.add_argument("--h", type=float, default=0.1)
    p.add_argument("--d", type=float, help="plateau half-width (default: h)")
    p.add_argument("--eps", type=float, help="core half-width")
    p.add_argument("--eps-exp", type=float, help="core half-width as exp(EPS_EXP)")
    p.add_argument("--center", type=float, default=0.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--require-accessible", action="store_true")
    p.add_argument("--sweep-h", type=float, nargs="+", metavar="H", help="persistence sweep with eps = exp(-3/h)")

    p = sub.add_parser("verdict", help="structural stability under accessible perturbations")
    _profile_args(p)

    p = sub.add_parser("evolve", help="free-streaming evolution and Landau rate")
    _profile_args(p)
    p.add_argument("--initial", help="initial perturbation, an expression in p")
    p.add_argument("--t-max", type=float, default=50.0)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--spacing", type=float)
    p.add_argument("--fit-window", type=float, nargs=2, metavar=("T0", "T1"))
    p.add_argument("--snapshots", type=float, nargs="+", metavar="T", help="times of the zeta(t) snapshots (default 0, t_max/2, t_max)")

    p = sub.add_parser("caldeira", help="oscillator coupled to a heat bath")
    p.add_argument("--config", help="JSON with 'oscillator' and 'bath' sections")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--sign", type=int, default=-1, choices=(-1, 1))
    p.add_argument("--coupling", help="f(x)^2 as an expression in x")
    p.add_argument("--indent", type=float, default=0.0, help="contour height above the real axis")
    p.add_argument("--find-roots", action="store_true")
    p.add_argument("--oracle", type=int, metavar="N", help="bath size of the matrix oracle")

    p = sub.add_parser("hilbert", help="tabulate a Hilbert transform")
    _profile_args(p, k=False)
    p.add_argument("--expression", help="g as an expression in p")
    p.add_argument("--domain", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--u-range", type=float, nargs="+", metavar="V", help="LO HI [N]")
    p.add_argument("--method", default="auto", choices=("auto", "adaptive", "discrete", "closed_form"))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_args(args)
    except ConfigError as e:
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return 1
    return run(config)
