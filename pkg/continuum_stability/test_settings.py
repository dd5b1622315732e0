"""test_settings.py - environment configuration"""

import pytest

from continuum_stability.errors import ConfigError
from continuum_stability.settings import Settings, load_settings

VARIABLES = ("CHH_THREADS", "CHH_HILBERT_TOL", "CHH_ROOT_RESIDUAL", "CHH_OUT_DIR")


@pytest.fixture
def clean_env(monkeypatch):
    for name in VARIABLES:
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


def test_defaults(clean_env):
    assert load_settings() == Settings()


def test_overrides(clean_env):
    clean_env.setenv("CHH_THREADS", "4")
    clean_env.setenv("CHH_HILBERT_TOL", "1e-10")
    clean_env.setenv("CHH_ROOT_RESIDUAL", "1e-12")
    clean_env.setenv("CHH_OUT_DIR", "/tmp/chh")
    settings = load_settings()
    assert settings.threads == 4
    assert settings.hilbert_tol == 1e-10
    assert settings.root_residual == 1e-12
    assert settings.out_dir == "/tmp/chh"


@pytest.mark.parametrize(
    "name, value",
    [("CHH_THREADS", "x"), ("CHH_THREADS", "0"), ("CHH_THREADS", "2.5"), ("CHH_HILBERT_TOL", "-1e-8")],
)
def test_malformed_values(clean_env, name, value):
    clean_env.setenv(name, value)
    with pytest.raises(ConfigError, match=name):
        load_settings()
