"""Run configuration: a JSON tree with cmt, sphere, quantum and grid sections.

Missing keys take the defaults below, unknown keys are rejected with the
closest known key as a hint, and every value is checked with `schema` before
the module dataclasses run their own invariants.
"""

import copy
import difflib
import json
import math
import os
from dataclasses import dataclass

import numpy as np
from schema import And, Or, Schema, SchemaError, Use

import cmt
import nanosphere
import quantum
from util import ConfigParseError, ConfigValidationError, ParameterError

SCHEMA_VERSION = 1
THREADS_ENV = 'DARKPLEX_THREADS'

DEFAULTS = {
  'schema_version': SCHEMA_VERSION,
  'cmt': {
    'omega_B': 3.0,
    'omega_D': 3.4,
    'omega_E': 3.4,
    'gamma_B_rad': 0.05,
    'gamma_B_nonrad': 0.0,
    'gamma_D_rad': 0.0,
    'gamma_D_nonrad': 0.05,
    'gamma_E_rad': 0.0,
    'gamma_E_nonrad': 0.1,
    'g_B': 0.05,
    'g_D': 0.4,
  },
  'sphere': {
    'R': 5.0,
    'h': 1.0,
    'eps_b': 1.0,
    'eps_inf': 2.515625,
    'omega_p': 6.375,
    'gamma_p': 0.1,
    'mu_E': 100.0,
    'omega_E': 3.4,
    'n_max': 100,
    'gamma_E_nonrad': 0.1,
  },
  'quantum': {
    'omega_E': 3.5,
    'omega_B': 3.0,
    'omega_D': 3.5,
    'gamma_E': 0.1,
    'gamma_B': 0.2,
    'gamma_D': 0.2,
    'g_B': 0.24,
    'g_D': 0.8,
    'mu_E': 100.0,
    'mu_B': 450.0,
    'omega_L': 3.0,
    'E_L': None,
    'drive_D': 0.0,
    'N_B': 2,
    'N_D': 2,
    'solver': 'weak_pump',
    'drive': 'fixed',
  },
  'grid': {
    'omega_min': 2.5,
    'omega_max': 4.0,
    'points': 601,
  },
}

def _number(name, check=None, what=None):
  def ok(v):
    return math.isfinite(v) and (check is None or check(v))
  return And(Or(int, float), lambda v: not isinstance(v, bool), Use(float), ok,
             error=f'{name} must be a finite number{" " + what if what else ""}')

def _nonneg(name):
  return _number(name, lambda v: v >= 0, '>= 0')

def _positive(name):
  return _number(name, lambda v: v > 0, '> 0')

def _count(name, low):
  return And(int, lambda v: not isinstance(v, bool) and v >= low,
             error=f'{name} must be an integer >= {low}')

def _section_schema(section):
  rules = {}
  for key in DEFAULTS[section]:
    name = f'{section}.{key}'
    if key.startswith(('gamma', 'g_', 'mu_')):
      rules[key] = _nonneg(name)
    elif key == 'E_L':
      rules[key] = Or(None, _nonneg(name), error=f'{name} must be null or a number >= 0')
    elif key in ('N_B', 'N_D'):
      rules[key] = _count(name, 1)
    elif key == 'n_max':
      rules[key] = _count(name, 2)
    elif key == 'points':
      rules[key] = _count(name, 2)
    elif key == 'solver':
      rules[key] = Or('weak_pump', 'lindblad', error=f'{name} must be weak_pump or lindblad')
    elif key == 'drive':
      rules[key] = Or('fixed', 'lower', error=f'{name} must be fixed or lower')
    elif key == 'eps_b':
      rules[key] = _number(name, lambda v: v >= 1, '>= 1')
    elif key == 'eps_inf':
      rules[key] = _number(name, lambda v: v >= 1, '>= 1')
    elif key in ('drive_D', 'omega_min', 'omega_max') or section == 'quantum':
      rules[key] = _number(name)
    else:
      rules[key] = _positive(name)
  return rules

CONFIG_SCHEMA = Schema({
  'schema_version': And(int, lambda v: v == SCHEMA_VERSION,
                        error=f'schema_version must be {SCHEMA_VERSION}'),
  **{section: _section_schema(section) for section in ('cmt', 'sphere', 'quantum', 'grid')},
})

def _suggest(key, known):
  close = difflib.get_close_matches(key, known, n=1)
  return f" (did you mean '{close[0]}'?)" if close else ''

def _merge(tree, defaults, prefix=''):
  merged = copy.deepcopy(defaults)
  if not isinstance(tree, dict):
    raise ConfigValidationError(f'{prefix or "configuration"} must be an object')
  for key, value in tree.items():
    if key not in defaults:
      where = f'{prefix}.{key}' if prefix else key
      raise ConfigValidationError(f'unknown key {where!r}{_suggest(key, list(defaults))}')
    if isinstance(defaults[key], dict):
      merged[key] = _merge(value, defaults[key], f'{prefix}.{key}' if prefix else key)
    else:
      merged[key] = value
  return merged

@dataclass(frozen=True)
class RunConfig:
  tree: dict

  def cmt_params(self):
    return cmt.CmtParams(**self.tree['cmt'])

  def sphere_system(self):
    s = self.tree['sphere']
    metal = nanosphere.DrudeMetal(eps_inf=s['eps_inf'], omega_p=s['omega_p'],
                                  gamma_p=s['gamma_p'])
    return nanosphere.SphereSystem(R=s['R'], h=s['h'], eps_b=s['eps_b'], metal=metal,
                                   mu_E=s['mu_E'], omega_E=s['omega_E'],
                                   n_max=s['n_max'])

  def quantum_params(self):
    q = self.tree['quantum']
    fields = {k: v for k, v in q.items() if k not in ('N_B', 'N_D', 'solver', 'drive')}
    return quantum.QuantumParams(**fields)

  def space(self):
    return quantum.build_space(self.tree['quantum']['N_B'], self.tree['quantum']['N_D'])

  def grid(self):
    g = self.tree['grid']
    return np.linspace(g['omega_min'], g['omega_max'], g['points'])

  def get(self, path):
    return resolve_path(self.tree, path)

  def to_dict(self):
    return copy.deepcopy(self.tree)

def validate(tree):
  merged = _merge(tree, DEFAULTS)
  try:
    merged = CONFIG_SCHEMA.validate(merged)
  except SchemaError as e:
    raise ConfigValidationError(e.code) from None
  g = merged['grid']
  if g['omega_min'] >= g['omega_max']:
    raise ConfigValidationError('grid.omega_min must be below grid.omega_max')
  config = RunConfig(tree=merged)
  try:
    config.cmt_params()
    config.sphere_system()
    config.quantum_params()
    config.space()
  except ParameterError as e:
    raise ConfigValidationError(str(e)) from e
  return config

def load_config(path=None):
  if path is None:
    return validate({})
  with open(path) as f:
    text = f.read()
  if not text.strip():
    return validate({})
  try:
    tree = json.loads(text)
  except json.JSONDecodeError as e:
    raise ConfigParseError(f'{path}:{e.lineno}:{e.colno}: {e.msg}') from None
  try:
    return validate(tree)
  except ConfigValidationError as e:
    e.add_note(f'while loading {path}')
    raise

def dump_config(config, path):
  with open(path, 'w') as f:
    json.dump(config.tree, f, indent=2, sort_keys=True)
    f.write('\n')

def resolve_path(tree, path):
  node = tree
  parts = path.split('.')
  for k, part in enumerate(parts):
    if not isinstance(node, dict) or part not in node:
      known = list(node) if isinstance(node, dict) else []
      where = '.'.join(parts[:k + 1])
      raise ConfigValidationError(f'unknown parameter {where!r}{_suggest(part, known)}')
    node = node[part]
  return node

def parse_value(text):
  try:
    return json.loads(text)
  except json.JSONDecodeError:
    return text

def set_path(tree, path, value):
  resolve_path(tree, path)
  tree = copy.deepcopy(tree)
  *head, last = path.split('.')
  node = tree
  for part in head:
    node = node[part]
  node[last] = value
  return tree

def apply_overrides(config, overrides):
  "Apply `section.key=value` strings; values are JSON literals or bare strings"
  tree = config.to_dict()
  for item in overrides or ():
    key, sep, value = item.partition('=')
    if not sep:
      raise ConfigValidationError(f'override {item!r} is not of the form key=value')
    tree = set_path(tree, key.strip(), parse_value(value.strip()))
  return validate(tree)

def default_threads():
  value = os.environ.get(THREADS_ENV, '1')
  try:
    threads = int(value)
  except ValueError:
    raise ConfigValidationError(f'{THREADS_ENV}={value!r} is not an integer') from None
  if threads < 1:
    raise ConfigValidationError(f'{THREADS_ENV} must be >= 1')
  return threads

def resolve_threads(threads=None):
  "Worker count from --threads, falling back to the environment"
  if threads is None:
    return default_threads()
  if threads < 1:
    raise ConfigValidationError(f'--threads must be >= 1, got {threads}')
  return threads
