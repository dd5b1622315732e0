"""test_caldeira.py - oscillator coupled to a bath continuum"""

import json
import os

import numpy as np
import pytest

from continuum_stability.caldeira import (
    BathModel,
    cl_count_roots,
    cl_dispersion,
    cl_epsilon_complex,
    cl_epsilon_real,
    cl_find_roots,
    cl_matrix,
    cl_matrix_oracle,
    cl_nyquist,
    cl_time_integrate,
)
from continuum_stability.errors import ConfigError, CriticalModelError, DomainError, TailTruncationWarning
from continuum_stability.expressions import parse_expression

CONFIG = os.path.join(os.path.dirname(__file__), "..", "profiles", "caldeira.json")


@pytest.fixture(scope="module")
def negative_energy():
    with open(CONFIG) as f:
        return BathModel.from_cfg(json.load(f))


@pytest.fixture(scope="module")
def positive_energy(negative_energy):
    return BathModel(1.0, negative_energy.coupling, oscillator_sign=1, coupling_text=negative_energy.coupling_text)


@pytest.fixture(scope="module")
def unstable_roots(negative_energy):
    return cl_find_roots(negative_energy)


def test_config_round_trip(negative_energy):
    assert negative_energy.Omega == 1.0
    assert negative_energy.oscillator_sign == -1
    assert 8.0 < negative_energy.x_max < 15.0
    desc = negative_energy.descriptor()
    assert desc["bath"]["coupling"] == "0.4*x*exp(-0.25*x^2)"
    assert BathModel.from_cfg(desc).x_max == negative_energy.x_max


def test_bad_models():
    with pytest.raises(ConfigError):
        BathModel(0.0, lambda x: x * 0.0)
    with pytest.raises(ConfigError):
        BathModel(1.0, lambda x: x * 0.0, oscillator_sign=0)
    with pytest.raises(ConfigError):
        BathModel(1.0, lambda x: np.sin(x))
    with pytest.warns(TailTruncationWarning):
        model = BathModel(1.0, parse_expression("1/(1+x)", variables=("x",)))
    assert model.x_max == 200.0


@pytest.mark.parametrize("omega", [0.9 + 0.3j, -2.0 + 0.05j, 0.5 + 1.5j])
def test_half_line_and_full_line_forms_agree(negative_energy, omega):
    half = cl_dispersion(negative_energy, omega)
    full = -cl_epsilon_complex(negative_energy, omega) * (omega * omega + 1.0)
    assert abs(half - full) < 1e-8 * max(1.0, abs(half))


def test_real_axis_is_out_of_domain(negative_energy):
    with pytest.raises(DomainError):
        cl_dispersion(negative_energy, 0.7)
    with pytest.raises(DomainError):
        cl_epsilon_complex(negative_energy, 0.7 - 0.1j)


def test_boundary_value_is_the_limit_from_above(negative_energy):
    on_axis = cl_epsilon_real(negative_energy, 0.7)
    above = cl_epsilon_complex(negative_energy, 0.7 + 1e-7j)
    assert abs(on_axis - above) < 1e-5


def test_negative_energy_oscillator_is_unstable(negative_energy, unstable_roots):
    report = cl_nyquist(negative_energy)
    assert report.winding == 1
    assert report.poles == 1
    assert report.zeros_upper == 2
    assert abs(report.raw - 1.0) < 0.05
    assert cl_count_roots(negative_energy).count == 2

    assert len(unstable_roots) == 2
    left, right = unstable_roots
    assert abs(left.omega + right.omega.conjugate()) < 1e-8
    assert right.omega.imag > 0.05


def test_positive_energy_oscillator_is_damped(positive_energy):
    report = cl_nyquist(positive_energy)
    assert report.winding == -1
    assert report.zeros_upper == 0
    assert cl_count_roots(positive_energy).count == 0
    assert cl_find_roots(positive_energy) == []


@pytest.mark.parametrize("strength", [0.4, 0.1, 0.03, 0.01])
def test_weak_coupling_still_gives_two_unstable_roots(negative_energy, strength):
    weak = negative_energy.with_coupling(f"{strength}*x*exp(-0.25*x^2)")
    report = cl_nyquist(weak)
    assert report.winding == 1
    assert report.zeros_upper == 2
    assert abs(report.raw - 1.0) < 0.05

    flipped = BathModel(weak.Omega, weak.coupling, oscillator_sign=1, coupling_text=weak.coupling_text)
    assert cl_nyquist(flipped).zeros_upper == 0


def test_uncoupled_oscillator_touches_the_origin():
    free = BathModel(1.0, lambda x: 0.0 * np.asarray(x))
    with pytest.raises(CriticalModelError):
        cl_nyquist(free)
    report = cl_nyquist(free, indent=0.1)
    assert report.winding == -1
    assert report.zeros_upper == 0


def test_negative_indent_is_rejected(negative_energy):
    with pytest.raises(ConfigError):
        cl_nyquist(negative_energy, indent=-0.1)


def test_generator_structure(negative_energy):
    a = cl_matrix(negative_energy, 5)
    assert a.shape == (12, 12)
    assert a[0, 1] == -1.0 and a[1, 0] == 1.0
    assert np.allclose(a[1, 2:7], a[7:, 0])


def test_matrix_oracle_matches_the_dispersion_roots(negative_energy, unstable_roots):
    oracle = cl_matrix_oracle(negative_energy, n_bath=400)
    assert len(oracle) == 2
    for computed, root in zip(oracle, unstable_roots):
        assert abs(computed - root.omega) < 1e-3


@pytest.mark.slow
def test_time_integration_growth_rate(negative_energy, unstable_roots):
    times, logs, rate = cl_time_integrate(negative_energy, n_bath=400, t_final=200.0)
    assert times.size == logs.size == 400
    assert rate == pytest.approx(max(r.omega.imag for r in unstable_roots), rel=0.01)
