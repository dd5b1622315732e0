"""test_structural.py - chi destabilizers, accessibility and structural verdicts"""

import numpy as np
import pytest

from continuum_stability.equilibria import PerturbedProfile, bi_maxwellian, maxwellian
from continuum_stability.errors import ConfigError, DomainError, UncheckedRegimeWarning
from continuum_stability.structural import (
    ChiPerturbation,
    accessibility_gate,
    center_band,
    chi_derivative,
    chi_evaluate,
    chi_hilbert,
    chi_hilbert_center,
    chi_hilbert_quadrature,
    chi_norms,
    chi_norms_quadrature,
    destabilize,
    eps_for_center_value,
    krein_like_verdict,
    persistence_sweep,
    signature_change_count,
    small_norm_destabilizer,
)


@pytest.mark.parametrize("h", [0.01, 0.03, 0.1, 0.3, 1.0])
@pytest.mark.parametrize("d", [0.01, 0.1, 0.5, 1.0, 2.0])
def test_norms_closed_form_against_quadrature(h, d):
    chi = ChiPerturbation(h, d, 0.1 * h)
    w11, sup = chi_norms(chi)
    w11_q, sup_q = chi_norms_quadrature(chi)
    assert w11 == pytest.approx(2 * h * h + 2 * h * d + 0.1 * h * h + 4 * h, rel=1e-12)
    assert w11_q == pytest.approx(w11, rel=1e-8)
    assert sup == pytest.approx(h)
    assert sup_q == pytest.approx(h)


def test_norms_scale_with_amplitude():
    chi = ChiPerturbation(0.1, 0.2, 0.01, amplitude=-3.0)
    w11, sup = chi_norms(chi)
    assert w11 == pytest.approx(3.0 * chi_norms(chi.scaled(1.0))[0])
    assert sup == pytest.approx(0.3)


def test_chi_shape():
    chi = ChiPerturbation(0.1, 0.2, 0.05, center=1.0)
    q = np.array([0.0, 0.025, 0.05, 0.2, 0.3, 0.45, 0.6])
    assert np.allclose(chi.value(1.0 + q), [0.0, 0.05, 0.1, 0.1, 0.075, 0.0, 0.0])
    assert np.allclose(chi.value(1.0 - q), -chi.value(1.0 + q))
    assert chi.breakpoints[0] == pytest.approx(0.55)
    assert chi.breakpoints[-1] == pytest.approx(1.45)
    assert np.allclose(chi_evaluate(chi, 1.0 + q), chi.value(1.0 + q))
    assert chi_derivative(chi, 1.01) == pytest.approx(2.0)
    assert chi_derivative(chi, 1.4) == pytest.approx(-0.5)


@pytest.mark.parametrize("p", [-0.4, -0.1, 0.01, 0.2, 0.33])
def test_antiderivative_is_consistent(p):
    chi = ChiPerturbation(0.1, 0.2, 0.05)
    step = 1e-7
    slope = (chi.antiderivative(p + step) - chi.antiderivative(p - step)) / (2 * step)
    assert slope == pytest.approx(chi.value(p), abs=1e-6)
    assert chi.antiderivative(1.0) == 0.0


@pytest.mark.parametrize("u", [0.0, 0.02, -0.1, 0.17, 0.31, 1.0, -2.5])
def test_hilbert_closed_form_against_quadrature(u):
    chi = ChiPerturbation(0.1, 0.1, 0.05)
    assert chi_hilbert(chi, u) == pytest.approx(chi_hilbert_quadrature(chi, u), abs=1e-8)


def test_far_field_series_matches_exact_form():
    chi = ChiPerturbation(0.1, 0.1, 1e-6)
    u = 2e-3
    assert chi.pv_integral(u) == pytest.approx(chi_hilbert_quadrature(chi, u), abs=1e-7)


@pytest.mark.parametrize("h", [0.2, 0.1, 0.05, 0.02])
def test_center_value_stays_in_band(h):
    chi = ChiPerturbation(h, h, np.exp(-1.0 / h))
    assert abs(chi_hilbert_center(chi) - 2.0) <= center_band(h)


def test_center_value_outside_regime_warns():
    with pytest.warns(UncheckedRegimeWarning):
        value = chi_hilbert_center(ChiPerturbation(0.1, 0.3, 0.01))
    assert np.isfinite(value)


def test_eps_for_center_value():
    h = 0.05
    eps = eps_for_center_value(h, h, chi_hilbert_center(ChiPerturbation(h, h, np.exp(-20.0))))
    assert np.log(eps) == pytest.approx(-20.0, abs=1e-6)
    with pytest.raises(DomainError):
        eps_for_center_value(h, h, 1e6)
    with pytest.raises(DomainError):
        eps_for_center_value(h, h, 1e-3)


def test_bad_chi_parameters():
    with pytest.raises(ConfigError):
        ChiPerturbation(0.0, 0.1, 0.01)
    with pytest.raises(ConfigError):
        ChiPerturbation(0.1, 0.1, float("inf"))
    with pytest.raises(ConfigError):
        ChiPerturbation.from_descriptor({"h": 0.1, "d": 0.1})


def test_maxwellian_is_destabilized_by_a_steep_chi():
    chi = ChiPerturbation(0.05, 0.05, np.exp(-20.0), 0.0, 3.0)
    report = destabilize(maxwellian(), 1.0, chi)
    assert report.winding_before == 0
    assert report.winding_after == 1
    assert report.verdict == "destabilized"
    assert not report.accessible
    assert report.sup_norm == pytest.approx(0.15)
    assert [c["kind"] for c in report.crossings_after] == ["transverse_down", "transverse_up", "transverse_down"]

    gated = destabilize(maxwellian(), 1.0, chi, require_accessible=True)
    assert gated.verdict == "rejected_inaccessible"


def test_instability_persists_as_the_norm_shrinks():
    reports = persistence_sweep(maxwellian(), 1.0, hs=(0.1, 0.05, 0.02))
    assert [r.verdict for r in reports] == ["destabilized"] * 3
    norms = [r.w11_norm for r in reports]
    assert norms[0] > norms[1] > norms[2]
    assert norms[2] < 0.1


def test_small_norm_destabilizer():
    report = small_norm_destabilizer(maxwellian(), 1.0, h=0.01)
    assert report.verdict == "destabilized"
    assert report.w11_norm < 0.05


def test_accessibility_gate():
    assert not accessibility_gate(maxwellian(), ChiPerturbation(0.05, 0.05, 1e-6, 0.0, 3.0))
    assert accessibility_gate(maxwellian(), ChiPerturbation(0.05, 0.05, 1e-6, 0.0, -1.0))


def test_perturbed_profile_derivative():
    chi = ChiPerturbation(0.1, 0.1, 0.01, 0.0, 2.0)
    profile = PerturbedProfile(maxwellian(), chi)
    assert profile.derivative(0.05, 1) == pytest.approx(-0.1 * np.exp(-0.0025) + 0.2)
    assert profile.derivative(5.0, 0) == pytest.approx(np.exp(-25.0))


def test_single_hump_is_structurally_stable():
    verdict = krein_like_verdict(maxwellian(), 1.0)
    assert verdict.verdict == "structurally_stable_DA"
    assert len(verdict.critical_points) == 1
    assert signature_change_count(maxwellian(), 1.0) == 0


def test_double_hump_is_structurally_unstable():
    verdict = krein_like_verdict(bi_maxwellian(0.8), 0.5)
    assert verdict.verdict == "structurally_unstable_DA"
    assert len(verdict.critical_points) == 3
    assert verdict.destabilizable
    assert all(r.accessible for r in verdict.destabilizable)
    assert any(abs(r.chi.center) < 1e-6 for r in verdict.destabilizable)
    assert {r.verdict for r in verdict.searched} <= {"destabilized", "still_stable", "rejected_inaccessible"}


def test_verdict_needs_a_stable_profile():
    with pytest.raises(DomainError):
        krein_like_verdict(bi_maxwellian(1.5), 0.5)


def test_narrow_chi_flips_the_maxwellian():
    chi = ChiPerturbation(0.1, 0.1, np.exp(-10.0), 0.0, 3.0)
    report = destabilize(maxwellian(), 1.0, chi)
    assert report.winding_before == 0
    assert report.winding_after == 1
    assert report.w11_norm == pytest.approx(3.0 * (0.02 + 0.02 + 0.1 * np.exp(-10.0) + 0.4))
    crossings = report.crossings_after
    assert [c["kind"] for c in crossings] == ["transverse_down", "transverse_up", "transverse_down"]
    # -2p exp(-p^2) meets the ramp 3 (h - (p - d - eps) / 2) at |p| = 0.1298
    assert [c["u_c"] for c in crossings] == pytest.approx([-0.1298, 0.0, 0.1298], abs=1e-3)
    assert crossings[1]["eps_R_at"] < 0
    assert crossings[0]["eps_R_at"] > 0 and crossings[2]["eps_R_at"] > 0


@pytest.mark.parametrize(
    "profile, k",
    [
        (maxwellian(), 0.5),
        (maxwellian(), 1.0),
        (maxwellian(center=0.7), 1.0),
        (maxwellian(width=2.0), 0.5),
        (bi_maxwellian(0.5), 0.5),
    ],
)
def test_every_stable_profile_is_destabilized_at_shrinking_norm(profile, k):
    reports = persistence_sweep(profile, k, hs=(0.1, 0.05, 0.02))
    assert all(r.winding_before == 0 for r in reports)
    assert [r.verdict for r in reports] == ["destabilized"] * 3


def test_norm_increases_in_each_parameter():
    base = dict(h=0.1, d=0.2, eps=0.01)
    for name in ("h", "d", "eps"):
        norms = []
        for scale in (1.0, 1.5, 2.0, 3.0):
            params = dict(base)
            params[name] *= scale
            norms.append(chi_norms(ChiPerturbation(params["h"], params["d"], params["eps"]))[0])
        assert all(a < b for a, b in zip(norms[:-1], norms[1:])), name


@pytest.mark.parametrize("h", [0.01, 0.1, 0.5, 2.0])
@pytest.mark.parametrize("d", [0.01, 0.5, 3.0])
def test_sup_norm_is_bounded_by_the_sobolev_norm(h, d):
    # sup / W11 = 1 / (2h + 2d + eps + 4) <= 1/4
    for amplitude in (0.3, -2.0):
        w11, sup = chi_norms(ChiPerturbation(h, d, 0.1 * h, amplitude=amplitude))
        assert sup <= 0.25 * w11


@pytest.mark.parametrize("profile, k", [(maxwellian(), 1.0), (bi_maxwellian(0.8), 0.5)])
def test_accessible_perturbations_keep_the_signature_changes(profile, k):
    before = signature_change_count(profile, k)
    outcomes = set()
    for center in (0.0, 1.0, -1.5):
        for amplitude in (0.2, -0.2, 3.0, -3.0, 20.0):
            chi = ChiPerturbation(0.05, 0.05, 1e-4, center, amplitude)
            accessible = accessibility_gate(profile, chi)
            outcomes.add(accessible)
            if accessible:
                assert signature_change_count(PerturbedProfile(profile, chi), k) == before
    assert outcomes == {True, False}
