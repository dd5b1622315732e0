"""test_penrose.py - winding numbers, signatures and critical states"""

import numpy as np
import pytest
from scipy.special import dawsn

from continuum_stability.dispersion import count_roots
from continuum_stability.equilibria import (
    ExpressionProfile,
    ProfileFamily,
    TabulatedProfile,
    bi_maxwellian,
    maxwellian,
    maxwellian_sum,
)
from continuum_stability.errors import ConfigError, CriticalStateNotFound
from continuum_stability.penrose import (
    contour_winding,
    critical_wavenumber,
    crossings,
    dielectric,
    default_u_grid,
    eps_values,
    find_critical_state,
    penrose_winding,
    signature_profile,
    winding_number,
)

BUMP_ON_TAIL = [(1.0, 0.0, 1.0), (0.05, 3.0, 0.5)]
SHOULDERS = [(1.0, 0.0, 1.0), (0.05, 3.0, 0.5), (0.05, -3.0, 0.5)]


def test_maxwellian_contour_values_at_origin():
    eps_r, eps_i = eps_values(maxwellian(), 1.0, 0.0)
    assert eps_r == pytest.approx(1.0 + 2.0 * np.sqrt(np.pi), rel=1e-10)
    assert eps_i == pytest.approx(0.0, abs=1e-14)


def test_maxwellian_is_stable_with_one_signature():
    d = dielectric(maxwellian(), 1.0)
    report = winding_number(d)
    assert report.winding == 0
    assert report.stable
    assert report.contour_winding == 0
    assert report.consistent
    assert signature_profile(d).changes == 0


def test_supercritical_bi_maxwellian():
    d = dielectric(bi_maxwellian(1.5), 0.5)
    report = winding_number(d)
    assert report.winding == 1
    assert report.verdict == "unstable"
    assert report.consistent
    kinds = [e.kind for e in report.crossings]
    assert kinds == ["transverse_down", "transverse_up", "transverse_down"]
    assert report.crossings[1].eps_R_at < 0

    sig = signature_profile(d)
    assert sig.changes == 2
    assert [s for _, _, s in sig.intervals] == [1, -1, 1]


def test_subcritical_bi_maxwellian_is_stable():
    report = penrose_winding(bi_maxwellian(0.8), 0.5, cross_check=True)
    assert report.winding == 0
    assert report.stable
    assert report.consistent


def test_discrete_and_closed_form_contours_agree():
    u = np.linspace(-4, 4, 81)
    closed = dielectric(bi_maxwellian(1.5), 0.5, u)
    discrete = dielectric(bi_maxwellian(1.5), 0.5, u, method="discrete")
    assert np.max(np.abs(closed.eps_R - discrete.eps_R)) < 1e-6
    assert np.array_equal(closed.eps_I, discrete.eps_I)


def test_tangency_does_not_contribute():
    # f0' = -(p-1)^2 (6p+4) exp(-p^2): a maximum at -2/3 and a double zero at 1
    profile = ExpressionProfile("(3*p^2 - 4*p + 2)*exp(-p^2)", window=(-8.0, 8.0))
    events = crossings(profile, 0.3)
    assert [e.kind for e in events] == ["transverse_down", "tangency"]
    assert events[1].u_c == pytest.approx(1.0, abs=1e-3)
    assert events[1].contributes == 0


def test_critical_wavenumber_of_the_valley():
    s = 1.5
    hilbert_at_zero = 2.0 * (2.0 / np.sqrt(np.pi)) * (2.0 * s * dawsn(s) - 1.0)
    k_c = critical_wavenumber(bi_maxwellian(s), 0.0)
    assert k_c == pytest.approx(np.sqrt(np.pi * hilbert_at_zero), rel=1e-8)

    report = penrose_winding(bi_maxwellian(s), k_c)
    assert report.critical
    assert report.verdict == "critical"
    assert report.winding is None


def test_maxwellian_has_no_critical_wavenumber():
    with pytest.raises(CriticalStateNotFound):
        critical_wavenumber(maxwellian(), 0.0)


def test_contour_winding_returns_raw_argument():
    winding, raw = contour_winding(dielectric(bi_maxwellian(1.5), 0.5))
    assert winding == 1
    assert raw == pytest.approx(1.0, abs=0.05)


def test_rejects_nonpositive_wavenumber():
    with pytest.raises(ConfigError):
        dielectric(maxwellian(), 0.0)


def test_shifted_profile_keeps_winding_and_reports_frame_shift():
    d = dielectric(bi_maxwellian(1.5, center=0.7), 0.5)
    assert winding_number(d).winding == 1
    sig = signature_profile(d)
    assert sig.frame_shift == pytest.approx(-0.7, abs=1e-8)
    assert sig.changes == 2


@pytest.mark.parametrize(
    "profile, k, expected",
    [
        (maxwellian(), 1.0, 0),
        (maxwellian(), 0.5, 0),
        (maxwellian(), 2.0, 0),
        (bi_maxwellian(0.5), 0.5, 0),
        (bi_maxwellian(0.8), 0.5, 0),
        (bi_maxwellian(1.0), 0.5, 1),
        (bi_maxwellian(1.5), 0.5, 1),
        (bi_maxwellian(1.5), 1.0, 1),
        (bi_maxwellian(1.5, center=0.5), 0.5, 1),
        (maxwellian_sum(BUMP_ON_TAIL), 0.5, 1),
        (maxwellian_sum(SHOULDERS), 0.5, 2),
    ],
)
def test_winding_counts_upper_half_plane_roots(profile, k, expected):
    report = penrose_winding(profile, k)
    assert report.winding == expected
    assert count_roots(profile, k).count == expected


def test_critical_state_at_fixed_wavenumber():
    family = ProfileFamily({"kind": "bi_maxwellian", "separation": 0.0}, "separation")
    state = find_critical_state(family, (0.8, 1.2), k=0.5)
    assert state.eta_c == pytest.approx(0.958, abs=5e-3)
    assert state.u_c == pytest.approx(0.0, abs=1e-8)
    assert state.kind == "k_zero_valley"
    assert state.embedded_mode_signature == 0
    assert penrose_winding(family.at(state.eta_c - 1e-6), 0.5).winding == 0
    assert penrose_winding(family.at(state.eta_c + 1e-6), 0.5).winding == 1


def test_inflection_point_mode_of_the_shoulder_family():
    descriptor = {
        "kind": "maxwellian_sum",
        "components": [
            {"amplitude": 1.0, "center": 0.0, "width": 1.0},
            {"amplitude": 0.0, "center": 3.0, "width": 0.5},
        ],
    }
    family = ProfileFamily(descriptor, "components.1.amplitude")
    state = find_critical_state(family, (0.0, 0.05), k_range=(0.1, 2.0), tol=1e-8)
    assert state.kind == "k_nonzero_inflection"
    # f0' = f0'' = 0 at u_c: eta = u e^{-u^2} / (4 (3 - u) e^{-4 (u-3)^2}) and its minimum near u = 2.85
    assert 0.0014 < state.eta_c < 0.0017
    assert 2.75 < state.u_c < 2.95
    profile = family.at(state.eta_c)
    assert abs(profile.derivative(state.u_c, 1)) < 1e-6
    assert abs(profile.derivative(state.u_c, 2)) < 1e-2
    assert state.k_c ** 2 == pytest.approx(np.pi * profile.derivative_hilbert(state.u_c), rel=1e-8)
    assert 0.45 < state.k_c < 0.55
    # eps_R increases through the embedded mode on the positive side
    assert state.eps_R_slope > 0
    assert state.embedded_mode_signature == 1


def test_k_zero_valley_over_a_wavenumber_range():
    family = ProfileFamily({"kind": "bi_maxwellian", "separation": 0.0}, "separation")
    state = find_critical_state(family, (0.8, 1.2), k_range=(0.0, 2.0), tol=1e-9)
    assert state.kind == "k_zero_valley"
    assert state.k_c == 0.0
    # 2 s D(s) = 1 at the k = 0 threshold
    assert 2.0 * state.eta_c * dawsn(state.eta_c) == pytest.approx(1.0, abs=1e-6)


def test_no_critical_state_in_a_stable_range():
    family = ProfileFamily({"kind": "bi_maxwellian", "separation": 0.0}, "separation")
    with pytest.raises(CriticalStateNotFound):
        find_critical_state(family, (0.1, 0.5), k=0.5)
    with pytest.raises(ConfigError):
        find_critical_state(family, (0.5, 0.1), k=0.5)
    with pytest.raises(ConfigError):
        find_critical_state(family, (0.1, 0.5))


def maxwellian_table(n=1601, reparametrize=None, with_derivative=False):
    p = np.linspace(-8.0, 8.0, n)
    q = p if reparametrize is None else reparametrize(p)
    values = np.exp(-q * q)
    derivative = -2.0 * p * np.exp(-p * p) if with_derivative else None
    return TabulatedProfile(p, values, derivative)


@pytest.mark.parametrize(
    "table",
    [
        maxwellian_table(),
        maxwellian_table(with_derivative=True),
        maxwellian_table(reparametrize=lambda p: p + 0.3 * np.tanh(p)),
    ],
)
def test_tabulated_profiles_have_a_winding(table):
    report = winding_number(dielectric(table, 0.5))
    assert report.winding == 0
    assert report.stable
    assert report.consistent
    assert len(report.crossings) == 1


def test_tabulated_contour_follows_the_closed_form():
    table = maxwellian_table()
    u = np.linspace(-4.0, 4.0, 161)
    closed = dielectric(maxwellian(), 0.5, u)
    sampled = dielectric(table, 0.5, u)
    assert np.max(np.abs(sampled.eps_R - closed.eps_R)) < 1e-2 * np.max(np.abs(closed.eps_R))
    assert eps_values(table, 0.5, 0.0)[0] == pytest.approx(1.0 + 2.0 * np.sqrt(np.pi) / 0.25, rel=1e-2)


def test_tabulated_bi_maxwellian_is_unstable():
    p = np.linspace(-9.0, 9.0, 1801)
    profile = bi_maxwellian(1.5)
    table = TabulatedProfile(p, profile.derivative(p, 0))
    assert winding_number(dielectric(table, 0.5)).winding == 1


@pytest.mark.parametrize("profile, k", [(bi_maxwellian(1.5), 0.5), (maxwellian_sum(SHOULDERS), 0.5), (maxwellian(), 1.0)])
def test_winding_survives_grid_refinement(profile, k):
    coarse = winding_number(dielectric(profile, k))
    fine = winding_number(dielectric(profile, k, default_u_grid(profile, n=4001)))
    assert fine.winding == coarse.winding
    assert fine.contour_winding == coarse.contour_winding
    assert fine.consistent and coarse.consistent


@pytest.mark.parametrize("v", [-1.2, 0.5])
def test_galilean_shift_moves_every_crossing(v):
    profile = maxwellian_sum(BUMP_ON_TAIL)
    before = penrose_winding(profile, 0.5)
    after = penrose_winding(profile.shifted(v), 0.5)
    assert after.winding == before.winding
    assert [e.u_c for e in after.crossings] == pytest.approx([e.u_c + v for e in before.crossings], abs=1e-8)
    assert [e.kind for e in after.crossings] == [e.kind for e in before.crossings]
