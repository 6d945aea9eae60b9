import pytest

from trajcheck.config import DEFAULT_CONFIG_FILE, DEFAULT_SETTINGS, \
    Settings, resolve
from trajcheck.errors import ConfigurationError


def test_settings_defaults():
    settings = Settings.from_dict({})
    assert settings == DEFAULT_SETTINGS
    assert settings.legendre_degree_cap == 60
    assert settings.general_degree_cap == 12
    assert settings.escalation_factor == 10.0
    assert settings.kernel_threshold == 1e-8
    assert settings.sup_norm_grid == 1024
    assert settings.sup_norm_warning == 1.5
    assert settings.support_slack == 0.05
    assert settings.workers == 0


def test_settings_overrides():
    settings = Settings.from_dict(
        {'workers': 4},
        defaults={'marginal_tolerance': 1e-6, 'workers': 2})
    assert settings.workers == 4
    assert settings.marginal_tolerance == 1e-6


def test_settings_none():
    assert Settings.from_dict(None) == DEFAULT_SETTINGS


def test_settings_string_exponent():
    # YAML 1.1 reads 1e-9 without a dot as a string
    settings = Settings.from_dict({'series_tolerance': '1e-9'})
    assert settings.series_tolerance == 1e-9


@pytest.mark.parametrize('data', [
    'not-a-dict',
    {'unknown_key': 1},
    {'workers': -1},
    {'workers': 1.5},
    {'sup_norm_grid': 1},
    {'marginal_tolerance': 0},
    {'marginal_tolerance': 'tiny'},
    {'escalation_factor': True},
])
def test_settings_invalid(data):
    with pytest.raises(ConfigurationError):
        Settings.from_dict(data)


def test_settings_invalid_defaults():
    with pytest.raises(ConfigurationError):
        Settings.from_dict({}, defaults={'colour': 'red'})


def test_settings_load(tmpdir):
    path = tmpdir.join('settings.yml')
    path.write('general_degree_cap: 8\nkernel_threshold: 1.0e-6\n')
    settings = Settings.load(str(path))
    assert settings.general_degree_cap == 8
    assert settings.kernel_threshold == 1e-6


def test_settings_load_default_file(tmpdir, monkeypatch):
    monkeypatch.chdir(tmpdir)
    assert Settings.load() is DEFAULT_SETTINGS

    tmpdir.join(DEFAULT_CONFIG_FILE).write('workers: 3\n')
    assert Settings.load().workers == 3


def test_settings_load_unparseable(tmpdir):
    path = tmpdir.join('settings.yml')
    path.write('workers: [1\n')
    with pytest.raises(ConfigurationError):
        Settings.load(str(path))


def test_settings_to_dict():
    d = DEFAULT_SETTINGS.to_dict()
    assert set(d) == set(Settings.DEFAULTS)
    assert Settings.from_dict(d) == DEFAULT_SETTINGS


def test_resolve():
    custom = Settings.from_dict({'workers': 2})
    assert resolve(None) is DEFAULT_SETTINGS
    assert resolve(custom) is custom
