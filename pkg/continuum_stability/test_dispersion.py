"""test_dispersion.py - analytic continuation, root counting and multiplets"""

import numpy as np
import pytest

from continuum_stability.dispersion import (
    INDETERMINATE,
    DispersionRoot,
    RootCountRegion,
    classify_multiplet,
    complete_spectrum,
    count_roots,
    count_zeros,
    epsilon_complex,
    find_roots,
    marginal_frequencies,
    marginal_growth_rate,
    newton,
    refine_root,
)
from continuum_stability.equilibria import bi_maxwellian, maxwellian, maxwellian_sum
from continuum_stability.errors import (
    DomainError,
    NoConvergenceError,
    PoleLikeError,
    RegionDegenerateError,
    SymmetryViolationError,
    VanishingIntegralWarning,
)
from continuum_stability.penrose import critical_wavenumber

BUMP_ON_TAIL = [(1.0, 0.0, 1.0), (0.05, 3.0, 0.5)]
SHOULDERS = [(1.0, 0.0, 1.0), (0.05, 3.0, 0.5), (0.05, -3.0, 0.5)]


def test_count_zeros_of_a_polynomial():
    def func(z):
        return (z - (0.3 + 0.5j)) * (z - (-1.0 + 0.2j)) * (z - (0.0 + 3.0j))

    region = RootCountRegion(-2.0, 2.0, 0.1, 1.0)
    assert count_zeros(func, region).count == 2


def test_count_zeros_subtracts_poles():
    region = RootCountRegion(-1.0, 1.0, -1.0, 1.0)
    assert count_zeros(lambda z: 1.0 / (z - 0.2j), region).count == -1


def test_zero_on_the_boundary_is_degenerate():
    region = RootCountRegion(-1.0, 1.0, 0.0, 1.0)
    with pytest.raises(RegionDegenerateError):
        count_zeros(lambda z: z - 0.5, region)


def test_newton_reports_its_trace():
    with pytest.raises(NoConvergenceError) as exc:
        newton(lambda z: 1.0 + 0j, 1.0 + 1.0j)
    assert exc.value.trace == [1.0 + 1.0j]


@pytest.mark.parametrize("omega", [0.3 + 0.2j, -1.1 + 0.05j, 2.0 + 1.5j])
def test_closed_form_and_quadrature_agree(omega):
    profile = maxwellian_sum(BUMP_ON_TAIL)
    closed = epsilon_complex(profile, 0.5, omega)
    quad = epsilon_complex(profile, 0.5, omega, method="quadrature")
    assert abs(closed - quad) < 1e-8 * max(1.0, abs(closed))


def test_lower_half_plane_is_out_of_domain():
    with pytest.raises(DomainError):
        epsilon_complex(maxwellian(), 1.0, 0.5 - 0.1j)
    with pytest.raises(DomainError):
        epsilon_complex(maxwellian(), 1.0, 0.5)


def test_maxwellian_has_no_growing_roots():
    assert count_roots(maxwellian(), 0.5).count == 0
    assert find_roots(maxwellian(), 0.5) == []


def test_supercritical_bi_maxwellian_has_a_css_pair():
    roots = find_roots(bi_maxwellian(1.5), 0.5)
    assert len(roots) == 1
    root = roots[0]
    assert root.symmetry_class == "css_pair_member"
    assert root.gamma > 0
    assert abs(root.omega_R) < 1e-8
    assert root.residual < 1e-10
    w2 = root.omega ** 2
    assert abs(w2.imag) < 1e-6 * abs(w2)
    assert len(complete_spectrum(roots, include_mirror_k=False)) == 2


def test_galilean_shift_moves_roots_by_k_v():
    k, v = 0.5, 0.5
    [rest] = find_roots(bi_maxwellian(1.5), k)
    [moving] = find_roots(bi_maxwellian(1.5, center=v), k)
    assert abs(moving.omega - (rest.omega + k * v)) < 1e-8
    assert moving.symmetry_class == "css_pair_member"


def test_bump_on_tail_gives_a_quartet():
    roots = find_roots(maxwellian_sum(BUMP_ON_TAIL), 0.5)
    assert len(roots) == 1
    assert roots[0].symmetry_class == "quartet_member"
    assert roots[0].omega_R > 0
    assert len(complete_spectrum(roots)) == 4


def test_symmetric_shoulders_give_an_octet():
    with pytest.warns(VanishingIntegralWarning):
        roots = find_roots(maxwellian_sum(SHOULDERS), 0.5)
    assert len(roots) == 2
    assert {r.symmetry_class for r in roots} == {"octet_member"}
    left, right = roots
    assert abs(left.omega + right.omega.conjugate()) < 1e-8
    assert len(complete_spectrum(roots)) == 8


def test_missing_conjugate_partner_is_a_symmetry_violation():
    with pytest.raises(SymmetryViolationError):
        classify_multiplet([DispersionRoot(1.0 + 1.0j, 0.5, 0.0)], symmetric=False)


def test_refine_root_from_a_nearby_seed():
    [root] = find_roots(bi_maxwellian(1.5), 0.5)
    refined = refine_root(bi_maxwellian(1.5), 0.5, root.omega + 0.01 + 0.01j)
    assert abs(refined.omega - root.omega) < 1e-8
    assert refined.multiplicity == 1


def test_marginality_is_indeterminate_at_the_symmetric_critical_state():
    profile = bi_maxwellian(1.5)
    k_c = critical_wavenumber(profile, 0.0)
    assert marginal_growth_rate(profile, k_c, 0.0) is INDETERMINATE


def test_pole_like_marginality():
    with pytest.raises(PoleLikeError):
        marginal_growth_rate(maxwellian(), 1.0, 1.5, denominator_tol=10.0)


def test_marginality_error_is_second_order():
    # weak bump on the Maxwellian tail: growth from eps_R = 0 and the local slope
    k = 0.4
    errors, rates = [], []
    for eta in (0.01, 0.02, 0.05):
        profile = maxwellian_sum([(1.0, 0.0, 1.0), (0.05 * eta, 4.0, 1.0)])
        [omega_r] = marginal_frequencies(profile, k, u_range=(2.5, 6.0))
        gamma = marginal_growth_rate(profile, k, omega_r)
        assert gamma > 0
        root = refine_root(profile, k, complex(omega_r, gamma))
        errors.append(abs(root.omega - complex(omega_r, gamma)))
        rates.append(root.gamma)

    assert errors[0] < errors[1] < errors[2]
    assert 12.0 < errors[2] / errors[0] < 50.0
    assert errors[0] < 0.25 * rates[0]
