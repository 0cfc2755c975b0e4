"""Closed-form polariton algebra of the lossless three-level problem.

Everything is written in the emitter frame: Delta_D = omega_D - omega_E and
Delta_B = omega_B - omega_E. The emitter/dark-mode block is diagonalized
exactly; the lower dark polariton then meets the bright mode.

Sign conventions: the emitter-relative optimum delta_E^opt = g_D^2/(omega_D -
omega_B) and the bright-relative optimum Delta_B^opt = -g_D^2/(omega_D -
omega_B) describe the same point, Delta_B^opt = -delta_E^opt.
"""

import math
from dataclasses import dataclass

import numpy as np

from util import ParameterError, UndefinedLimitError, require_finite, require_nonnegative

@dataclass(frozen=True)
class DarkBlockResult:
  delta_minus: float
  delta_plus: float
  upsilon: float
  cos_half: float
  sin_half: float

def dark_block_eigenvalues(delta_D, g_D):
  require_finite(delta_D=delta_D)
  require_nonnegative(g_D=g_D)
  upsilon = math.sqrt(delta_D**2 + 4 * g_D**2)
  if upsilon == 0:
    # fully degenerate block, any rotation diagonalizes it
    ratio = 0.0
  else:
    ratio = delta_D / upsilon
  cos_half = math.sqrt(max(0.0, 1 + ratio) / 2)
  sin_half = math.sqrt(max(0.0, 1 - ratio) / 2)
  return DarkBlockResult(delta_minus=(delta_D - upsilon) / 2,
                         delta_plus=(delta_D + upsilon) / 2,
                         upsilon=upsilon, cos_half=cos_half, sin_half=sin_half)

def mixing_transform(delta_D, g_D):
  "Orthogonal T whose columns are the lower and upper dark polaritons"
  r = dark_block_eigenvalues(delta_D, g_D)
  return np.array([[r.cos_half, r.sin_half],
                   [-r.sin_half, r.cos_half]])

def lossless_hamiltonian(g_B, g_D, delta_D, delta_B):
  "Single-excitation Hamiltonian in the basis {|e,0,0>, |g,1_D,0>, |g,0,1_B>}"
  return np.array([[0.0, g_D, g_B],
                   [g_D, delta_D, 0.0],
                   [g_B, 0.0, delta_B]])

def partial_diagonalize(g_B, g_D, delta_D, delta_B):
  require_nonnegative(g_B=g_B, g_D=g_D)
  r = dark_block_eigenvalues(delta_D, g_D)
  lower = g_B * r.cos_half
  upper = g_B * r.sin_half
  return np.array([[r.delta_minus, 0.0, lower],
                   [0.0, r.delta_plus, upper],
                   [lower, upper, delta_B]])

def bright_rabi_splitting(g_B, g_D, omega_D, omega_E):
  require_nonnegative(g_B=g_B, g_D=g_D)
  require_finite(omega_D=omega_D, omega_E=omega_E)
  delta_D = omega_D - omega_E
  root = math.sqrt(4 * g_D**2 + delta_D**2)
  if root == 0:
    raise UndefinedLimitError('splitting is 0/0 for g_D = 0 and omega_D = omega_E')
  return math.sqrt(2) * g_B * math.sqrt(1 + delta_D / root)

def reduced_bright_splitting(g_B, g_D, delta_D):
  """Gap of the lower-dark-polariton/bright two-level problem at resonance.

  Drops the upper polariton row of the partially diagonalized matrix; the
  result is the closed-form splitting without approximation.
  """
  r = dark_block_eigenvalues(delta_D, g_D)
  block = np.array([[r.delta_minus, g_B * r.cos_half],
                    [g_B * r.cos_half, r.delta_minus]])
  low, high = np.linalg.eigvalsh(block)
  return high - low

def optimal_detuning(g_D, omega_B, omega_D):
  require_nonnegative(g_D=g_D)
  require_finite(omega_B=omega_B, omega_D=omega_D)
  if omega_D == omega_B:
    raise ParameterError('optimal detuning diverges for omega_D = omega_B')
  return g_D**2 / (omega_D - omega_B)

def optimal_bright_detuning(g_D, omega_B, omega_D):
  return -optimal_detuning(g_D, omega_B, omega_D)

def optimal_emitter_frequency(g_D, omega_B, omega_D):
  return omega_B + optimal_detuning(g_D, omega_B, omega_D)
