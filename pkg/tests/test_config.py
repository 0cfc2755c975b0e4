import json

import numpy as np
import pytest

import cmt
import nanosphere
import quantum
from config import (DEFAULTS, apply_overrides, default_threads, dump_config, load_config,
                    parse_value, resolve_threads, validate)
from util import ConfigParseError, ConfigValidationError

def test_defaults_build_reference_models():
  config = load_config()
  assert config.cmt_params() == cmt.CmtParams()
  assert config.sphere_system() == nanosphere.SphereSystem()
  assert config.quantum_params() == quantum.QuantumParams()
  assert config.space() == quantum.build_space(2, 2)
  np.testing.assert_allclose(config.grid(), np.linspace(2.5, 4.0, 601))

def test_empty_file_gives_defaults(tmp_path):
  path = tmp_path / 'empty.json'
  path.write_text('\n')
  assert load_config(str(path)).tree == load_config().tree

def test_partial_file_is_merged(tmp_path):
  path = tmp_path / 'run.json'
  path.write_text(json.dumps({'cmt': {'g_D': 0.2}, 'grid': {'points': 11}}))
  config = load_config(str(path))
  assert config.cmt_params().g_D == 0.2
  assert config.cmt_params().g_B == DEFAULTS['cmt']['g_B']
  assert config.grid().size == 11

def test_unknown_key_suggests_closest(tmp_path):
  with pytest.raises(ConfigValidationError, match='gamma_B_rad'):
    validate({'cmt': {'gammaB': 0.1}})

def test_unknown_section():
  with pytest.raises(ConfigValidationError, match='cmt'):
    validate({'cmtt': {}})

def test_parse_error_carries_position(tmp_path):
  path = tmp_path / 'bad.json'
  path.write_text('{"cmt": }')
  with pytest.raises(ConfigParseError, match=':1:'):
    load_config(str(path))

def test_validation_error_names_the_file(tmp_path):
  path = tmp_path / 'neg.json'
  path.write_text(json.dumps({'cmt': {'g_D': -1}}))
  with pytest.raises(ConfigValidationError, match='cmt.g_D') as info:
    load_config(str(path))
  assert any(str(path) in note for note in info.value.__notes__)

@pytest.mark.parametrize('tree', [
  {'cmt': {'omega_B': 0.0}},
  {'cmt': {'g_B': float('nan')}},
  {'cmt': {'g_D': True}},
  {'grid': {'omega_min': False}},
  {'sphere': {'eps_b': 0.5}},
  {'sphere': {'n_max': 1}},
  {'quantum': {'N_B': True}},
  {'quantum': {'N_D': 0}},
  {'quantum': {'E_L': -1.0}},
  {'quantum': {'solver': 'mesolve'}},
  {'grid': {'omega_min': 4.0, 'omega_max': 3.0}},
  {'schema_version': 2},
])
def test_invalid_values_are_rejected(tree):
  with pytest.raises(ConfigValidationError):
    validate(tree)

def test_round_trip(tmp_path):
  config = apply_overrides(load_config(), ['cmt.g_D=0.25', 'quantum.solver=lindblad'])
  path = tmp_path / 'out.json'
  dump_config(config, str(path))
  assert load_config(str(path)).tree == config.tree

def test_overrides_parse_json_literals():
  config = apply_overrides(load_config(), ['quantum.E_L=1e-6', 'quantum.N_B=3',
                                           'quantum.drive=lower'])
  assert config.quantum_params().E_L == 1e-6
  assert config.space().N_B == 3
  assert config.get('quantum.drive') == 'lower'
  assert apply_overrides(config, ['quantum.E_L=null']).quantum_params().E_L is None

def test_override_typo_suggests_closest():
  with pytest.raises(ConfigValidationError, match='g_D'):
    apply_overrides(load_config(), ['cmt.gD=0.2'])

def test_override_needs_equals_sign():
  with pytest.raises(ConfigValidationError):
    apply_overrides(load_config(), ['cmt.g_D'])

def test_parse_value():
  assert parse_value('0.5') == 0.5
  assert parse_value('true') is True
  assert parse_value('lindblad') == 'lindblad'

def test_threads_from_environment(monkeypatch):
  monkeypatch.delenv('DARKPLEX_THREADS', raising=False)
  assert default_threads() == 1
  monkeypatch.setenv('DARKPLEX_THREADS', '3')
  assert default_threads() == 3
  for bad in ('0', 'many'):
    monkeypatch.setenv('DARKPLEX_THREADS', bad)
    with pytest.raises(ConfigValidationError):
      default_threads()

def test_thread_flag_overrides_environment(monkeypatch):
  monkeypatch.setenv('DARKPLEX_THREADS', '3')
  assert resolve_threads(None) == 3
  assert resolve_threads(2) == 2
  for bad in (0, -2):
    with pytest.raises(ConfigValidationError, match='--threads'):
      resolve_threads(bad)
