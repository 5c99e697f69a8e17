""" Unit tests for configmodel. """

###########
# Imports #
###########
# Standard library
import json

# Testing
import pytest

# Custom Modules
from exceptions.config_exceptions import ConfigError
from models import configmodel
from models.configmodel import RunConfigModel


#########
# Setup #
#########
@pytest.fixture
def config():
    return RunConfigModel()


##############
# Unit Tests #
##############
def test_defaults_are_not_shared(config):
    config.set('network.rows', 4)
    assert RunConfigModel().get('network.rows') == 1
    assert RunConfigModel.fields['network']['rows']['value'] == 1


def test_reference_design_matches_builtin(config):
    assert RunConfigModel.reference_design().to_dict() == config.to_dict()


def test_load_known_keys(tmp_path, config):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({
        'solver': {'n_k': 12, 'f_max_GHz': 3},
        'mystery': {'x': 1},
        'resonator': {'colour': 'red'},
    }))
    loaded = RunConfigModel(path)
    assert loaded.get('solver.n_k') == 12
    assert loaded.get('solver.f_max_GHz') == 3.0
    assert isinstance(loaded.get('solver.f_max_GHz'), float)
    assert loaded.get('resonator.s_um') == config.get('resonator.s_um')


@pytest.mark.parametrize("text", ['{"solver": ', '[1, 2]',
                                  '{"solver": 5}',
                                  '{"solver": {"n_k": "many"}}'])
def test_load_errors(tmp_path, text):
    path = tmp_path / 'bad.json'
    path.write_text(text)
    with pytest.raises(ConfigError):
        RunConfigModel(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfigModel(tmp_path / 'nothing.json')


def test_save_and_reload(tmp_path, config):
    config.set('devices.label', 'A')
    path = tmp_path / 'saved.json'
    config.save(path)
    assert RunConfigModel(path).to_dict() == config.to_dict()
    with pytest.raises(ConfigError):
        RunConfigModel().save()


@pytest.mark.parametrize("dotted, value", [
    ('solver.n_k', 2.5),
    ('shield.enabled', 'yes'),
    ('devices.label', 3),
    ('solver', 1),
    ('solver.unknown', 1),
])
def test_set_rejects(config, dotted, value):
    with pytest.raises(ConfigError):
        config.set(dotted, value)


@pytest.mark.parametrize("assignment, dotted, expected", [
    ('solver.n_k=12', 'solver.n_k', 12),
    ('solver.tol = 1e-8', 'solver.tol', 1e-8),
    ('shield.enabled=Yes', 'shield.enabled', True),
    ('output.plot=0', 'output.plot', False),
    ('sweep.param=b', 'sweep.param', 'b'),
])
def test_override(config, assignment, dotted, expected):
    config.override(assignment)
    assert config.get(dotted) == expected


@pytest.mark.parametrize("assignment", ['solver.n_k', 'solver.n_k=1.5',
                                        'shield.enabled=maybe',
                                        'nothing.here=1'])
def test_override_rejects(config, assignment):
    with pytest.raises(ConfigError):
        config.override(assignment)


def test_config_hash_tracks_values(config):
    first = config.config_hash()
    assert RunConfigModel().config_hash() == first
    config.override('solver.n_k=30')
    assert config.config_hash() != first


def test_threads_precedence(monkeypatch, config):
    monkeypatch.delenv(configmodel.THREADS_ENV, raising=False)
    config.set('solver.threads', 3)
    assert config.threads() == 3
    monkeypatch.setenv(configmodel.THREADS_ENV, '5')
    assert config.threads() == 5
    monkeypatch.setenv(configmodel.THREADS_ENV, 'lots')
    with pytest.raises(ConfigError):
        config.threads()


def test_threads_must_be_positive(monkeypatch, config):
    monkeypatch.delenv(configmodel.THREADS_ENV, raising=False)
    config.set('solver.threads', 0)
    with pytest.raises(ConfigError):
        config.threads()


def test_builders(config):
    material = config.material()
    assert material.youngs_modulus == pytest.approx(1.05e12)
    assert config.waveguide('B').period_d == pytest.approx(4e-6)
    assert config.resonator().side_s == pytest.approx(21e-6)
    assert config.shield().period_h == pytest.approx(3.8e-6)
    spec = config.network()
    assert spec.validate() is spec
    assert spec.L_C == pytest.approx(91.2e-6)
    with pytest.raises(ConfigError):
        config.waveguide('D')


def test_automatic_mesh_size(config):
    opts = config.solver_opts()
    assert opts['target_h'] is None
    assert opts['f_max'] == pytest.approx(2.5e9)
    assert config.resonator_h() is None
    config.override('solver.target_h_um=0.5')
    assert config.solver_opts()['target_h'] == pytest.approx(0.5e-6)


def test_mode_targets_and_window(config):
    targets = config.mode_targets()
    assert targets['mode_c'] == pytest.approx(1.3388e9)
    assert set(targets) == {'mode_a', 'mode_b', 'mode_c', 'mode_d'}
    lo, hi = config.device_window()
    assert lo < targets['mode_b'] < targets['mode_a'] < hi


def test_min_gap_width(config):
    assert config.min_gap_width() == 0.0
    config.override('solver.min_gap_kHz=2.5')
    assert config.min_gap_width() == pytest.approx(2.5e3)
    config.set('solver.min_gap_kHz', -1.0)
    with pytest.raises(ConfigError):
        config.min_gap_width()
