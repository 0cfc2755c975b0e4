"""Classical coupled-mode model of a bright mode, a dark mode and an emitter.

Amplitudes |a> = (c_B, c_D, c_E) obey i d|a>/dt = H|a> + s_plus |kappa>, with
kappa_j = sqrt(gamma_j^rad). Under harmonic drive the steady state is
|a> = |kappa> s_plus / (i (H - omega)) and the scattered amplitude is
s_minus = <kappa|a>. Everything is in eV with hbar = 1.
"""

import cmath
import dataclasses
from dataclasses import dataclass, field
from functools import cmp_to_key

import numpy as np
from scipy.linalg import null_space
from scipy.signal import find_peaks

from util import (ParameterError, SingularSystemError, EigenConvergenceError,
                  condition_guard, require_finite, require_nonnegative,
                  require_positive, require_increasing)

BASIS = ('B', 'D', 'E')
LABELS = ('LP', 'MP', 'UP')
RESIDUAL_TOL = 1e-9
DEGENERACY_TOL = 1e-10
PEAK_PROMINENCE = 0.01
_CUBE_ROOT_OF_UNITY = cmath.exp(2j * cmath.pi / 3)

@dataclass(frozen=True)
class CmtParams:
  omega_B: float = 3.0
  omega_D: float = 3.4
  omega_E: float = 3.4
  gamma_B_rad: float = 0.05
  gamma_B_nonrad: float = 0.0
  gamma_D_rad: float = 0.0
  gamma_D_nonrad: float = 0.05
  gamma_E_rad: float = 0.0
  gamma_E_nonrad: float = 0.1
  g_B: float = 0.05
  g_D: float = 0.4

  def __post_init__(self):
    require_positive(omega_B=self.omega_B, omega_D=self.omega_D,
                     omega_E=self.omega_E)
    require_nonnegative(gamma_B_rad=self.gamma_B_rad,
                        gamma_B_nonrad=self.gamma_B_nonrad,
                        gamma_D_rad=self.gamma_D_rad,
                        gamma_D_nonrad=self.gamma_D_nonrad,
                        gamma_E_rad=self.gamma_E_rad,
                        gamma_E_nonrad=self.gamma_E_nonrad,
                        g_B=self.g_B, g_D=self.g_D)

  @property
  def gamma_B(self):
    return self.gamma_B_rad + self.gamma_B_nonrad

  @property
  def gamma_D(self):
    return self.gamma_D_rad + self.gamma_D_nonrad

  @property
  def gamma_E(self):
    return self.gamma_E_rad + self.gamma_E_nonrad

  @property
  def delta_E(self):
    "Emitter detuning from the bright mode"
    return self.omega_E - self.omega_B

  @property
  def gamma_ind(self):
    return np.sqrt(self.gamma_B_rad * self.gamma_E_rad / 4)

  def with_(self, **changes):
    return dataclasses.replace(self, **changes)

@dataclass(frozen=True)
class EigenSet:
  values: np.ndarray
  vectors: np.ndarray  # columns are eigenvectors
  labels: tuple = LABELS

  def __getitem__(self, label):
    k = self.labels.index(label)
    return self.values[k], self.vectors[:, k]

@dataclass(frozen=True)
class Spectrum:
  grid: np.ndarray
  amplitude: np.ndarray
  intensity: np.ndarray = field(init=False)

  def __post_init__(self):
    object.__setattr__(self, 'intensity', np.abs(self.amplitude)**2)

def from_effective(eff, omega_E, gamma_E_rad=0.0, gamma_E_nonrad=0.1):
  """CmtParams for a nanosphere-derived parameter set.

  The bright mode radiates with the sphere's radiative rate and loses the rest
  to absorption; the dark pseudomode is purely non-radiative.
  """
  return CmtParams(omega_B=eff.omega_B, omega_D=eff.omega_D, omega_E=omega_E,
                   gamma_B_rad=eff.gamma_B_rad,
                   gamma_B_nonrad=eff.gamma_B - eff.gamma_B_rad,
                   gamma_D_rad=0.0, gamma_D_nonrad=eff.gamma_D,
                   gamma_E_rad=gamma_E_rad, gamma_E_nonrad=gamma_E_nonrad,
                   g_B=eff.g_B, g_D=eff.g_D)

def build_cmt_hamiltonian(p):
  be = p.g_B - 1j * p.gamma_ind
  H = np.array([
    [p.omega_B - 0.5j * p.gamma_B, 0, be],
    [0, p.omega_D - 0.5j * p.gamma_D, p.g_D],
    [be, p.g_D, p.omega_E - 0.5j * p.gamma_E],
  ], dtype=complex)
  return H

def coupling_vector(p):
  return np.sqrt(np.array([p.gamma_B_rad, p.gamma_D_rad, p.gamma_E_rad],
                          dtype=float)).astype(complex)

def _solve_response(H, kappa, omega, s_plus):
  M = 1j * (H - omega * np.eye(3))
  condition_guard(M, what=f'i(H - omega) at omega={omega:.9g} eV')
  a = np.linalg.solve(M, kappa * s_plus)
  return a, kappa @ a

def steady_state_response(p, omega, s_plus=1.0):
  """Steady-state mode amplitudes and scattered amplitude at drive omega.

  Solves i(H - omega) a = kappa s_plus, so H a + i kappa s_plus = omega a.
  """
  require_finite(omega=omega, s_plus=s_plus)
  return _solve_response(build_cmt_hamiltonian(p), coupling_vector(p),
                         omega, s_plus)

def scattering_spectrum(p, grid, s_plus=1.0):
  grid = require_increasing(grid)
  H = build_cmt_hamiltonian(p)
  kappa = coupling_vector(p)
  amplitude = np.empty(grid.size, dtype=complex)
  for k, omega in enumerate(grid):
    try:
      _, amplitude[k] = _solve_response(H, kappa, omega, s_plus)
    except SingularSystemError as e:
      e.add_note(f'grid point {k} (omega={omega:.9g} eV)')
      raise
  return Spectrum(grid=grid, amplitude=amplitude)

def find_maxima(grid, values, prominence=PEAK_PROMINENCE):
  """Local maxima of values on grid, refined by a parabola through three points.

  Maxima whose prominence is below `prominence` times the largest value are
  dropped, so Fano ripples on the tails do not count as peaks.
  """
  x = np.asarray(grid, dtype=float)
  y = np.asarray(values, dtype=float)
  idx, _ = find_peaks(y, prominence=prominence * np.max(y))
  peaks = []
  for i in idx:
    x0, x1, x2 = x[i - 1:i + 2]
    y0, y1, y2 = y[i - 1:i + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
    peaks.append(-b / (2 * a) if a < 0 else x1)
  return np.array(peaks)

def find_peaks_on_grid(spectrum, prominence=PEAK_PROMINENCE):
  "Prominent maxima of |s_minus|^2"
  return find_maxima(spectrum.grid, spectrum.intensity, prominence)

def _cubic_roots(a, b, c):
  # roots of x^3 + a x^2 + b x + c via the depressed cubic
  shift = a / 3
  p = b - a * a / 3
  q = 2 * a**3 / 27 - a * b / 3 + c
  disc = cmath.sqrt(q * q / 4 + p**3 / 27)
  w = -q / 2 + disc
  if abs(-q / 2 - disc) > abs(w):
    w = -q / 2 - disc
  if w == 0:
    return np.full(3, -shift, dtype=complex)
  u = w ** (1 / 3)
  roots = []
  for k in range(3):
    uk = u * _CUBE_ROOT_OF_UNITY**k
    roots.append(uk - p / (3 * uk) - shift)
  roots = np.array(roots, dtype=complex)
  for k in range(3):
    r = roots[k]
    f = ((r + a) * r + b) * r + c
    for _ in range(3):
      df = (3 * r + 2 * a) * r + b
      if df == 0:
        break
      r_new = r - f / df
      f_new = ((r_new + a) * r_new + b) * r_new + c
      if abs(f_new) >= abs(f):
        break
      r, f = r_new, f_new
    roots[k] = r
  return roots

def characteristic_coefficients(H):
  "(a, b, c) of det(x - H) = x^3 + a x^2 + b x + c"
  a = -np.trace(H)
  b = (H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]
       + H[0, 0] * H[2, 2] - H[0, 2] * H[2, 0]
       + H[1, 1] * H[2, 2] - H[1, 2] * H[2, 1])
  c = -np.linalg.det(H)
  return a, b, c

def _phase_fix(v):
  v = v / np.linalg.norm(v)
  k = np.argmax(np.abs(v))
  return v * (abs(v[k]) / v[k])

def _cross_vector(A):
  candidates = [np.cross(A[0], A[1]), np.cross(A[0], A[2]),
                np.cross(A[1], A[2])]
  norms = [np.linalg.norm(c) for c in candidates]
  k = int(np.argmax(norms))
  return candidates[k], norms[k]

def _refine(H, lam, v, scale):
  # one inverse-iteration step, then keep whichever of the root and the
  # Rayleigh quotient gives the smaller residual
  shift = lam + 1e-14 * scale * (1 + 1j)
  try:
    x = np.linalg.solve(H - shift * np.eye(3), v)
    if np.all(np.isfinite(x)) and np.linalg.norm(x) > 0:
      v = _phase_fix(x)
  except np.linalg.LinAlgError:
    pass
  best = (np.linalg.norm(H @ v - lam * v), lam)
  rayleigh = np.vdot(v, H @ v)
  r = np.linalg.norm(H @ v - rayleigh * v)
  if r < best[0]:
    best = (r, rayleigh)
  return best[1], v, best[0]

def _order(values, scale):
  tol = 1e-12 * max(scale, 1.0)
  def compare(i, j):
    dr = values[i].real - values[j].real
    if abs(dr) > tol:
      return -1 if dr < 0 else 1
    di = values[i].imag - values[j].imag
    return -1 if di < 0 else (1 if di > 0 else 0)
  return sorted(range(len(values)), key=cmp_to_key(compare))

def eigenmodes(H, max_iter=4):
  """Eigenpairs of a 3x3 complex matrix, labelled LP/MP/UP.

  Eigenvalues come from the characteristic cubic in closed form and each
  eigenvector from the null direction of H - lambda, refined by inverse
  iteration until ||H v - lambda v|| <= 1e-9 ||H||. Coinciding eigenvalues
  share a rank-revealing null-space basis instead.
  """
  H = np.asarray(H, dtype=complex)
  if H.shape != (3, 3):
    raise ParameterError(f'expected a 3x3 matrix, got shape {H.shape}')
  require_finite(H=H)
  scale = np.linalg.norm(H, 2)
  if scale == 0:
    return EigenSet(values=np.zeros(3, dtype=complex),
                    vectors=np.eye(3, dtype=complex))
  roots = _cubic_roots(*characteristic_coefficients(H))
  target = RESIDUAL_TOL * scale
  values = np.empty(3, dtype=complex)
  vectors = np.empty((3, 3), dtype=complex)
  done = [False] * 3
  for k in range(3):
    if done[k]:
      continue
    group = [j for j in range(3)
             if not done[j] and abs(roots[j] - roots[k]) <= DEGENERACY_TOL * scale]
    A = H - roots[k] * np.eye(3)
    v, norm = _cross_vector(A)
    if len(group) == 1 and norm > DEGENERACY_TOL * scale**2:
      basis = [_phase_fix(v)]
    else:
      lam = np.mean(roots[group])
      kernel = null_space(H - lam * np.eye(3), rcond=DEGENERACY_TOL)
      if kernel.shape[1] == 0:
        kernel = np.linalg.svd(H - lam * np.eye(3))[2].conj().T[:, -1:]
      basis = [_phase_fix(kernel[:, min(i, kernel.shape[1] - 1)])
               for i in range(len(group))]
    for j, v in zip(group, basis):
      lam = roots[j]
      for _ in range(max_iter):
        lam, v, residual = _refine(H, lam, v, scale)
        if residual <= target:
          break
      else:
        raise EigenConvergenceError(
          f'eigenpair residual {residual:.3g} above {target:.3g} for\n{H}')
      values[j] = lam
      vectors[:, j] = v
      done[j] = True
  order = _order(values, scale)
  return EigenSet(values=values[order], vectors=vectors[:, order])

def hopfield(v):
  fractions = np.abs(np.asarray(v, dtype=complex))**2
  return fractions / fractions.sum()

def polariton_branches(p, omega_E_values):
  "Eigenvalues and Hopfield fractions of LP/MP/UP as the emitter is tuned"
  omega_E_values = np.asarray(omega_E_values, dtype=float)
  values = np.empty((omega_E_values.size, 3), dtype=complex)
  fractions = np.empty((omega_E_values.size, 3, 3))
  for k, omega_E in enumerate(omega_E_values):
    eig = eigenmodes(build_cmt_hamiltonian(p.with_(omega_E=omega_E)))
    values[k] = eig.values
    for j in range(3):
      fractions[k, j] = hopfield(eig.vectors[:, j])
  return values, fractions
