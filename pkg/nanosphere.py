"""Quasistatic Drude nanosphere coupled to a radially oriented point emitter.

The sphere supports one plasmon per multipole order n. The n = 1 mode is the
bright (dipolar) mode; all n >= 2 modes are lumped into one dark pseudomode
whose coupling is the quadrature sum of the individual couplings and whose
frequency and width are read off the dark part of the spectral density.

Lengths are in nm, energies in eV, dipole moments in Debye.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import constants
from scipy.optimize import brentq, minimize_scalar

from util import (C_DIP, DEBYE, EV, HBAR_C, HBAR_C_SI, ParameterError, PoleError,
                  DispersionError, FitError, FitQualityWarning, TruncationWarning,
                  require_finite, require_nonnegative, require_positive)

TRUNCATION_TOL = 1e-6
FIT_QUALITY_TOL = 0.5
FIT_GRID = (2.8, 3.8, 2001)

@dataclass(frozen=True)
class DrudeMetal:
  eps_inf: float = 2.515625
  omega_p: float = 6.375
  gamma_p: float = 0.1

  def __post_init__(self):
    require_finite(eps_inf=self.eps_inf)
    if self.eps_inf < 1:
      raise ParameterError(f'eps_inf must be >= 1, got {self.eps_inf}')
    require_positive(omega_p=self.omega_p)
    require_nonnegative(gamma_p=self.gamma_p)

  @classmethod
  def calibrated(cls, omega_1, omega_inf, eps_b=1.0, gamma_p=0.1):
    """Drude metal whose dipole and n -> infinity resonances sit at the given
    frequencies in a medium eps_b."""
    if not 0 < omega_1 < omega_inf:
      raise ParameterError('need 0 < omega_1 < omega_inf')
    eps_inf = eps_b * (2 * omega_1**2 - omega_inf**2) / (omega_inf**2 - omega_1**2)
    omega_p = omega_inf * math.sqrt(eps_inf + eps_b)
    return cls(eps_inf=eps_inf, omega_p=omega_p, gamma_p=gamma_p)

  @classmethod
  def silver_surrogate(cls, gamma_p=0.1):
    return cls.calibrated(3.0, 3.4, eps_b=1.0, gamma_p=gamma_p)

@dataclass(frozen=True)
class SphereSystem:
  R: float = 5.0
  h: float = 1.0
  eps_b: float = 1.0
  metal: DrudeMetal = field(default_factory=DrudeMetal)
  mu_E: float = 100.0
  omega_E: float = 3.4
  n_max: int = 100

  def __post_init__(self):
    require_positive(R=self.R, h=self.h, omega_E=self.omega_E)
    require_nonnegative(mu_E=self.mu_E)
    if self.eps_b < 1:
      raise ParameterError(f'eps_b must be >= 1, got {self.eps_b}')
    if int(self.n_max) != self.n_max or self.n_max < 2:
      raise ParameterError(f'n_max must be an integer >= 2, got {self.n_max}')

  @property
  def d(self):
    "Emitter distance from the sphere centre"
    return self.R + self.h

@dataclass(frozen=True)
class Mode:
  n: int
  omega_n: float
  gamma_n: float
  g_n: float

@dataclass(frozen=True)
class ModeLadder:
  modes: tuple

  @property
  def n(self):
    return np.array([m.n for m in self.modes])

  @property
  def omega(self):
    return np.array([m.omega_n for m in self.modes])

  @property
  def gamma(self):
    return np.array([m.gamma_n for m in self.modes])

  @property
  def g(self):
    return np.array([m.g_n for m in self.modes])

  def rows(self):
    return [(m.n, m.omega_n, m.gamma_n, m.g_n) for m in self.modes]

@dataclass(frozen=True)
class EffectiveParams:
  g_B: float
  g_D: float
  omega_B: float
  omega_D: float
  gamma_B: float
  gamma_D: float
  mu_B: float
  gamma_E_rad: float
  gamma_B_rad: float = 0.0

def drude_epsilon(m, omega):
  omega = np.asarray(omega, dtype=float)
  require_positive(omega=omega)
  return m.eps_inf - m.omega_p**2 / (omega * (omega + 1j * m.gamma_p))

def drude_epsilon_derivative(m, omega):
  "d Re eps / d omega"
  return 2 * omega * m.omega_p**2 / (omega**2 + m.gamma_p**2)**2

def mode_frequency(m, eps_b, n):
  n = np.asarray(n, dtype=float)
  if np.any(n < 1):
    raise ParameterError('multipole order must be >= 1')
  return m.omega_p * np.sqrt(n / (n * m.eps_inf + (n + 1) * eps_b))

def multipole_polarizability(m, eps_b, R, n, omega):
  if n < 1:
    raise ParameterError('multipole order must be >= 1')
  require_positive(R=R)
  eps = drude_epsilon(m, omega)
  denom = n * eps + (n + 1) * eps_b
  scale = n * np.abs(eps) + (n + 1) * eps_b
  if np.any(np.abs(denom) <= 1e-12 * scale):
    raise PoleError(f'lossless polarizability of order {n} evaluated on its pole')
  return R**(2 * n + 1) * n * (eps - eps_b) / denom

def coupling_strength(sys, n):
  """Emitter coupling to the order-n plasmon, in eV.

  From the residue of the Drude pole of alpha_n, normalized so the mode's
  Lorentzian in the spectral density integrates to g_n^2. Evaluated in log
  space because (R/d)^(2n+1) underflows for large n.
  """
  if n < 1:
    raise ParameterError('multipole order must be >= 1')
  if sys.mu_E == 0:
    return 0.0
  m = sys.metal
  omega_n = float(mode_frequency(m, sys.eps_b, n))
  log_g2 = (math.log(C_DIP * sys.mu_E**2)
            + 2 * math.log(n + 1)
            - (2 * n + 4) * math.log(sys.d)
            + math.log(2 * n + 1)
            + (2 * n + 1) * math.log(sys.R)
            + 3 * math.log(omega_n)
            - math.log(2 * n * m.omega_p**2)
            - math.log(sys.eps_b))
  return math.exp(log_g2 / 2)

def mode_ladder(sys):
  modes = []
  for n in range(1, int(sys.n_max) + 1):
    modes.append(Mode(n=n, omega_n=float(mode_frequency(sys.metal, sys.eps_b, n)),
                      gamma_n=sys.metal.gamma_p, g_n=coupling_strength(sys, n)))
  return ModeLadder(modes=tuple(modes))

def _lorentzians(ladder, omega):
  omega = np.atleast_1d(np.asarray(omega, dtype=float))
  w = ladder.omega[:, None]
  gam = ladder.gamma[:, None]
  return (ladder.g[:, None]**2 / (2 * math.pi)) * gam / ((omega[None, :] - w)**2 + gam**2 / 4)

def _dark_density(ladder, omega):
  return _lorentzians(ladder, omega)[1:].sum(axis=0)

def truncation_ratio(ladder, omega):
  "Share of the last ladder mode in the dark density at omega"
  terms = _lorentzians(ladder, omega)
  return terms[-1] / terms[1:].sum(axis=0)

def spectral_density(sys, omega, ladder=None):
  """Total, dipolar and dark parts of J(omega) in eV.

  J(omega) = sum_n (g_n^2 / 2 pi) gamma_n / ((omega - omega_n)^2 + gamma_n^2/4)
  """
  ladder = ladder if ladder is not None else mode_ladder(sys)
  terms = _lorentzians(ladder, omega)
  dipole = terms[0]
  dark = terms[1:].sum(axis=0)
  peak = int(np.argmax(dark))
  if dark[peak] > 0 and terms[-1][peak] / dark[peak] > TRUNCATION_TOL:
    warnings.warn(f'n_max={sys.n_max} contributes {terms[-1][peak] / dark[peak]:.2g} '
                  'of the dark density at its peak', TruncationWarning, stacklevel=2)
  return dipole + dark, dipole, dark

def quasistatic_decay_rate(sys, omega, ladder=None):
  total, _, _ = spectral_density(sys, omega, ladder)
  return 2 * math.pi * total

def purcell_spectrum(sys, omega, ladder=None):
  "Plasmon-mediated decay rate in units of the free-space radiative rate"
  omega = np.asarray(omega, dtype=float)
  gamma_0 = emitter_radiative_decay(sys.mu_E, omega)
  return quasistatic_decay_rate(sys, omega, ladder) / gamma_0

def pseudomode_weights(ladder):
  g = ladder.g[1:]
  return g / math.sqrt(np.sum(g**2))

def aggregate_pseudomode(sys, omega_grid=None, ladder=None):
  """(g_D, omega_D, gamma_D) of the dark pseudomode.

  g_D is the quadrature sum of the n >= 2 couplings. The peak of the dark
  density is located on omega_grid, polished by golden-section search, and the
  FWHM is found by root bracketing on both flanks.
  """
  ladder = ladder if ladder is not None else mode_ladder(sys)
  g_D = math.sqrt(float(np.sum(ladder.g[1:]**2)))
  lo = ladder.omega[1] - 1.0
  hi = float(mode_frequency(sys.metal, sys.eps_b, 1e6)) + 1.0
  grid = np.linspace(*FIT_GRID) if omega_grid is None else np.asarray(omega_grid, dtype=float)
  grid = grid[(grid >= lo) & (grid <= hi)]
  if grid.size < 3:
    raise FitError(f'fit grid does not overlap the search window [{lo:.3g}, {hi:.3g}] eV')
  dark = _dark_density(ladder, grid)
  k = int(np.argmax(dark))
  if k == 0 or k == grid.size - 1:
    raise FitError(f'dark density has no interior maximum on [{grid[0]:.3g}, {grid[-1]:.3g}] eV')
  ratio = truncation_ratio(ladder, grid[k])[0]
  if ratio > TRUNCATION_TOL:
    warnings.warn(f'n_max={sys.n_max} contributes {ratio:.2g} of the dark density '
                  'at the pseudomode peak', TruncationWarning, stacklevel=2)
  f = lambda w: -_dark_density(ladder, w)[0]
  try:
    res = minimize_scalar(f, bracket=(grid[k - 1], grid[k], grid[k + 1]),
                          method='golden', tol=1e-10)
    omega_D = float(res.x)
  except ValueError:
    omega_D = float(grid[k])
  peak = -f(omega_D)
  half = lambda w: _dark_density(ladder, w)[0] - peak / 2
  if half(lo) >= 0 or half(hi) >= 0:
    raise FitError('dark density does not fall to half maximum inside the search window')
  left = brentq(half, lo, omega_D, xtol=1e-12)
  right = brentq(half, omega_D, hi, xtol=1e-12)
  gamma_D = right - left
  # a Lorentzian of area g_D^2 and width gamma_D peaks at 2 g_D^2 / (pi gamma_D)
  mismatch = peak * math.pi * gamma_D / (2 * g_D**2) - 1
  if abs(mismatch) > FIT_QUALITY_TOL:
    warnings.warn(f'dark density peak is {mismatch:+.0%} off the fitted Lorentzian '
                  f'(omega_D={omega_D:.4g} eV, gamma_D={gamma_D:.3g} eV)',
                  FitQualityWarning, stacklevel=2)
  return g_D, omega_D, gamma_D

def bright_radiative_decay(m, eps_b, R, omega_B):
  require_positive(R=R, omega_B=omega_B)
  slope = drude_epsilon_derivative(m, omega_B)
  if slope <= 0:
    raise DispersionError(f'd Re eps/d omega = {slope:.3g} <= 0 at {omega_B} eV')
  return 4 * eps_b**1.5 * (omega_B * R / HBAR_C)**3 / slope

def bright_dipole_moment(gamma_B_rad, omega_B, eps_b=1.0):
  "Dipole moment (D) radiating gamma_B_rad (eV) at omega_B (eV) in a medium eps_b"
  require_nonnegative(gamma_B_rad=gamma_B_rad)
  require_positive(omega_B=omega_B)
  mu2 = (3 * math.pi * constants.epsilon_0 * eps_b * HBAR_C_SI**3
         * gamma_B_rad / (omega_B**3 * EV**2))
  return math.sqrt(mu2) / DEBYE

def emitter_radiative_decay(mu, omega, eps_b=1.0):
  "Larmor rate (eV) of a dipole mu (D) oscillating at omega (eV)"
  omega = np.asarray(omega, dtype=float)
  require_nonnegative(mu=mu)
  require_positive(omega=omega)
  mu_si = mu * DEBYE
  gamma = (omega * EV)**3 * mu_si**2 / (3 * math.pi * constants.epsilon_0 * eps_b * HBAR_C_SI**3) / EV
  return float(gamma) if gamma.ndim == 0 else gamma

def extinction_cross_section(mu, omega_E, gamma_E):
  "Two-level extinction cross-section in nm^2"
  require_nonnegative(mu=mu)
  require_positive(omega_E=omega_E, gamma_E=gamma_E)
  mu_si = mu * DEBYE
  return omega_E * mu_si**2 / (HBAR_C_SI * constants.epsilon_0 * gamma_E) * 1e18

def dipole_from_extinction(sigma_ext, omega_E, gamma_E):
  require_nonnegative(sigma_ext=sigma_ext)
  require_positive(omega_E=omega_E, gamma_E=gamma_E)
  mu_si = math.sqrt(sigma_ext * 1e-18 * HBAR_C_SI * constants.epsilon_0 * gamma_E / omega_E)
  return mu_si / DEBYE

def effective_parameters(sys, omega_grid=None):
  ladder = mode_ladder(sys)
  bright = ladder.modes[0]
  g_D, omega_D, gamma_D = aggregate_pseudomode(sys, omega_grid, ladder)
  gamma_B_rad = bright_radiative_decay(sys.metal, sys.eps_b, sys.R, bright.omega_n)
  return EffectiveParams(g_B=bright.g_n, g_D=g_D,
                         omega_B=bright.omega_n, omega_D=omega_D,
                         gamma_B=bright.gamma_n + gamma_B_rad, gamma_D=gamma_D,
                         mu_B=bright_dipole_moment(gamma_B_rad, bright.omega_n, sys.eps_b),
                         gamma_E_rad=emitter_radiative_decay(sys.mu_E, sys.omega_E),
                         gamma_B_rad=gamma_B_rad)
