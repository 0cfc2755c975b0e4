import math

import numpy as np
from scipy import constants
from tqdm import tqdm

# unit constants, frozen here and nowhere else
HBAR_C = 197.327  # eV nm
DEBYE = 1e-21 / constants.c  # C m
EV = constants.e  # J
# (1 D)^2 / (4 pi eps0 (1 nm)^3) in eV
C_DIP = DEBYE**2 / (4 * math.pi * constants.epsilon_0 * 1e-27) / EV
HBAR_C_SI = HBAR_C * EV * 1e-9  # J m

FLOAT_FORMAT = '%.9g'

class DarkplexError(Exception):
  "Base class for every error raised by the toolkit"
  pass

class ParameterError(DarkplexError, ValueError):
  "Raised when an input violates a documented invariant"
  pass

class SingularSystemError(DarkplexError):
  "Raised when a linear solve is too ill-conditioned to trust"
  pass

class EigenConvergenceError(DarkplexError):
  "Raised when an eigenpair cannot be refined to the residual target"
  pass

class UndefinedLimitError(DarkplexError):
  "Raised when a closed form is evaluated exactly at a 0/0 point"
  pass

class PoleError(DarkplexError):
  "Raised when a lossless response is evaluated on its pole"
  pass

class DispersionError(DarkplexError):
  "Raised when the permittivity has anomalous dispersion where normal is required"
  pass

class FitError(DarkplexError):
  "Raised when the pseudomode Lorentzian cannot be extracted"
  pass

class WeakPumpError(DarkplexError):
  "Raised when the drive is too strong for the weak-pump steady state"
  pass

class UndefinedStatisticsError(DarkplexError):
  "Raised when a correlation function has a vanishing denominator"
  pass

class DegenerateSteadyStateError(DarkplexError):
  "Raised when the Liouvillian null space is not one-dimensional"
  pass

class ConfigError(DarkplexError):
  "Raised when a run configuration cannot be used"
  pass

class ConfigParseError(ConfigError):
  "Raised when a configuration file is not valid JSON"
  pass

class ConfigValidationError(ConfigError, ValueError):
  "Raised when a configuration value violates an invariant"
  pass

class PresetNotFoundError(ConfigError):
  "Raised when a preset name is unknown"
  pass

class TruncationWarning(UserWarning):
  "Mode ladder truncated too early"
  pass

class FitQualityWarning(UserWarning):
  "Dark density far from the Lorentzian of the fitted pseudomode"
  pass

class WeakPumpResidualWarning(UserWarning):
  "The dropped ground-state row of the weak-pump system is not satisfied"
  pass

VERBOSITY = {'warn': False, 'verbose': False}

def set_verbosity(warn=False, verbose=False):
  VERBOSITY['verbose'] = verbose
  VERBOSITY['warn'] = warn or verbose

def info(msg):
  if VERBOSITY['verbose']:
    tqdm.write(f'[INFO] {msg}')

def warn(msg):
  if VERBOSITY['warn']:
    tqdm.write(f'[WARN] {msg}')

def require_finite(**values):
  for name, value in values.items():
    if not np.all(np.isfinite(value)):
      raise ParameterError(f'{name} must be finite, got {value}')

def require_nonnegative(**values):
  require_finite(**values)
  for name, value in values.items():
    if np.any(np.asarray(value) < 0):
      raise ParameterError(f'{name} must be >= 0, got {value}')

def require_positive(**values):
  require_finite(**values)
  for name, value in values.items():
    if np.any(np.asarray(value) <= 0):
      raise ParameterError(f'{name} must be > 0, got {value}')

def require_increasing(grid, name='grid'):
  grid = np.asarray(grid, dtype=float)
  if grid.ndim != 1 or grid.size < 1:
    raise ParameterError(f'{name} must be a non-empty 1D array')
  require_finite(**{name: grid})
  if np.any(np.diff(grid) <= 0):
    raise ParameterError(f'{name} must be strictly increasing')
  return grid

def format_value(value):
  if value is None:
    return ''
  if isinstance(value, (bool, np.bool_)):
    return '1' if value else '0'
  if isinstance(value, (int, np.integer)):
    return str(int(value))
  if isinstance(value, (float, np.floating)):
    if math.isnan(value):
      return 'nan'
    return FLOAT_FORMAT % value
  return str(value).replace(',', ';').replace('\n', ' ')

def condition_guard(matrix, limit=1e14, what='linear system'):
  cond = np.linalg.cond(matrix)
  if not np.isfinite(cond) or cond > limit:
    raise SingularSystemError(f'{what} is singular (condition estimate {cond:.3g})')
  return cond
