"""Driven emitter + bright + dark modes in a truncated Fock basis.

Basis states |a, b, c> with a in {g, e} (0, 1), b bright quanta and c dark
quanta, flattened a-major: k = a (N_B+1)(N_D+1) + b (N_D+1) + c. Operators are
built with qutip and handed to numpy as dense matrices; the spaces involved
are at most a few dozen states.

Two steady-state paths are provided: the weak-pump pure state of the
non-Hermitian Hamiltonian, and the full Lindblad density matrix used to check
it.
"""

import dataclasses
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import qutip

import cmt
from util import (ParameterError, SingularSystemError, WeakPumpError,
                  UndefinedStatisticsError, DegenerateSteadyStateError,
                  WeakPumpResidualWarning, condition_guard, require_finite,
                  require_nonnegative, require_increasing, warn)

WEAK_PUMP_LIMIT = 1e-3
RESIDUAL_WARN = 1e-2
STATISTICS_FLOOR = 1e-30
NULL_GAP = 1e-10
LINDBLAD_MAX_DIM = 64
DRIVE_TARGET = 1e-4

@dataclass(frozen=True)
class HilbertSpace:
  N_B: int = 2
  N_D: int = 2

  @property
  def dims(self):
    return (2, self.N_B + 1, self.N_D + 1)

  @property
  def dim(self):
    return 2 * (self.N_B + 1) * (self.N_D + 1)

  def index(self, a, b, c):
    if not (0 <= a <= 1 and 0 <= b <= self.N_B and 0 <= c <= self.N_D):
      raise ParameterError(f'|{a},{b},{c}> is outside the truncated space')
    return (a * (self.N_B + 1) + b) * (self.N_D + 1) + c

  def unindex(self, k):
    if not 0 <= k < self.dim:
      raise ParameterError(f'index {k} outside [0, {self.dim})')
    a, rest = divmod(k, (self.N_B + 1) * (self.N_D + 1))
    b, c = divmod(rest, self.N_D + 1)
    return a, b, c

  def label(self, k):
    a, b, c = self.unindex(k)
    return f"{'ge'[a]}{b}{c}"

def build_space(N_B=2, N_D=2):
  if int(N_B) != N_B or int(N_D) != N_D or N_B < 1 or N_D < 1:
    raise ParameterError(f'Fock truncations must be integers >= 1, got {N_B}, {N_D}')
  return HilbertSpace(N_B=int(N_B), N_D=int(N_D))

@dataclass(frozen=True)
class QuantumParams:
  omega_E: float = 3.5
  omega_B: float = 3.0
  omega_D: float = 3.5
  gamma_E: float = 0.1
  gamma_B: float = 0.2
  gamma_D: float = 0.2
  g_B: float = 0.24
  g_D: float = 0.8
  mu_E: float = 100.0
  mu_B: float = 450.0
  omega_L: float = 3.0
  E_L: float = None  # eV/D; None picks max drive = 1e-4 eV
  drive_D: float = 0.0

  def __post_init__(self):
    require_finite(omega_E=self.omega_E, omega_B=self.omega_B,
                   omega_D=self.omega_D, omega_L=self.omega_L,
                   drive_D=self.drive_D)
    require_nonnegative(gamma_E=self.gamma_E, gamma_B=self.gamma_B,
                        gamma_D=self.gamma_D, g_B=self.g_B, g_D=self.g_D,
                        mu_E=self.mu_E, mu_B=self.mu_B)
    if self.E_L is not None:
      require_nonnegative(E_L=self.E_L)

  @property
  def field(self):
    if self.E_L is not None:
      return self.E_L
    mu = max(self.mu_E, self.mu_B)
    return DRIVE_TARGET / mu if mu > 0 else 0.0

  @property
  def drive_E(self):
    return -self.mu_E * self.field

  @property
  def drive_B(self):
    return -self.mu_B * self.field

  def with_(self, **changes):
    return dataclasses.replace(self, **changes)

@dataclass(frozen=True)
class SteadyStateVector:
  space: HilbertSpace
  coefficients: np.ndarray  # c_g00 = 1
  residual: float = 0.0
  population: float = 0.0

  def normalized(self):
    return self.coefficients / np.linalg.norm(self.coefficients)

  def amplitude(self, a, b, c):
    return self.coefficients[self.space.index(a, b, c)]

@dataclass(frozen=True)
class DensityMatrixState:
  space: HilbertSpace
  rho: np.ndarray

  def populations(self):
    return np.real(np.diag(self.rho))

@dataclass
class ScanResult:
  grid: np.ndarray
  S: np.ndarray
  g2: np.ndarray
  ok: np.ndarray
  errors: list

@lru_cache(maxsize=16)
def operators(space):
  "sigma_minus, a_B, a_D as qutip operators on the truncated space"
  nb, nd = space.N_B + 1, space.N_D + 1
  sm = qutip.tensor(qutip.destroy(2), qutip.qeye(nb), qutip.qeye(nd))
  a_B = qutip.tensor(qutip.qeye(2), qutip.destroy(nb), qutip.qeye(nd))
  a_D = qutip.tensor(qutip.qeye(2), qutip.qeye(nb), qutip.destroy(nd))
  return sm, a_B, a_D

def system_hamiltonian(qp, space):
  "Hermitian rotating-frame Hamiltonian, drive included, decay excluded"
  sm, a_B, a_D = operators(space)
  H = ((qp.omega_E - qp.omega_L) * sm.dag() * sm
       + (qp.omega_B - qp.omega_L) * a_B.dag() * a_B
       + (qp.omega_D - qp.omega_L) * a_D.dag() * a_D
       + qp.g_B * (a_B.dag() * sm + sm.dag() * a_B)
       + qp.g_D * (a_D.dag() * sm + sm.dag() * a_D)
       + qp.drive_E / 2 * (sm + sm.dag())
       + qp.drive_B / 2 * (a_B + a_B.dag()))
  if qp.drive_D:
    H = H + qp.drive_D / 2 * (a_D + a_D.dag())
  return H

def effective_hamiltonian(qp, space=None):
  space = space or build_space()
  sm, a_B, a_D = operators(space)
  H = system_hamiltonian(qp, space).full()
  decay = (qp.gamma_E * (sm.dag() * sm).full()
           + qp.gamma_B * (a_B.dag() * a_B).full()
           + qp.gamma_D * (a_D.dag() * a_D).full())
  return H - 0.5j * decay

def single_excitation_block(qp):
  "Non-Hermitian one-quantum block in the (B, D, E) order used by cmt"
  p = cmt.CmtParams(omega_B=qp.omega_B, omega_D=qp.omega_D, omega_E=qp.omega_E,
                    gamma_B_rad=0.0, gamma_B_nonrad=qp.gamma_B,
                    gamma_D_rad=0.0, gamma_D_nonrad=qp.gamma_D,
                    gamma_E_rad=0.0, gamma_E_nonrad=qp.gamma_E,
                    g_B=qp.g_B, g_D=qp.g_D)
  return cmt.build_cmt_hamiltonian(p)

def lower_polariton_drive(qp):
  "Same parameters with the drive parked on Re(lambda_LP)"
  lam, _ = cmt.eigenmodes(single_excitation_block(qp))['LP']
  return qp.with_(omega_L=float(lam.real))

def weak_pump_steady_state(qp, space=None):
  """Steady state of H_eff |psi> = 0 with c_g00 fixed to 1.

  The ground-state row is dropped from the system; its residual is kept on
  the result and raises WeakPumpResidualWarning when it is not small compared
  with the drive.
  """
  space = space or build_space()
  H = effective_hamiltonian(qp, space)
  A = H[1:, 1:]
  condition_guard(A, what='weak-pump system')
  rest = np.linalg.solve(A, -H[1:, 0])
  c = np.concatenate(([1.0 + 0j], rest))
  residual = float(abs(H[0] @ c))
  population = float(np.sum(np.abs(rest)**2))
  if population > WEAK_PUMP_LIMIT:
    raise WeakPumpError(f'excited population {population:.3g} exceeds {WEAK_PUMP_LIMIT}; '
                        f'lower E_L (now {qp.field:.3g} eV/D)')
  drive = max(abs(qp.drive_E), abs(qp.drive_B), abs(qp.drive_D))
  if drive > 0 and residual > RESIDUAL_WARN * drive:
    warnings.warn(f'ground-state row residual {residual:.3g} eV at drive {drive:.3g} eV',
                  WeakPumpResidualWarning, stacklevel=2)
  return SteadyStateVector(space=space, coefficients=c, residual=residual,
                           population=population)

def scattering_operator(space, mu_E, mu_B):
  sm, a_B, _ = operators(space)
  return (mu_E * sm + mu_B * a_B).full()

def scattering_intensity(psi, mu_E, mu_B):
  v = psi.normalized()
  return float(np.linalg.norm(scattering_operator(psi.space, mu_E, mu_B) @ v)**2)

def g2_zero(psi, mu_E, mu_B):
  if psi.space.N_B < 2 or psi.space.N_D < 2:
    raise ParameterError('g2 needs at least two quanta per mode (N_B, N_D >= 2)')
  a_s = scattering_operator(psi.space, mu_E, mu_B)
  v = psi.normalized()
  once = a_s @ v
  n1 = np.linalg.norm(once)**2
  if n1 < STATISTICS_FLOOR:
    raise UndefinedStatisticsError(f'<a_s^dag a_s> = {n1:.3g} is below {STATISTICS_FLOOR}')
  n2 = np.linalg.norm(a_s @ once)**2
  return float(n2 / n1**2)

def spectrum_scan(qp, grid, space=None):
  grid = require_increasing(grid, 'omega_L')
  space = space or build_space()
  S = np.full(grid.size, np.nan)
  g2 = np.full(grid.size, np.nan)
  ok = np.zeros(grid.size, dtype=bool)
  errors = []
  for k, omega_L in enumerate(grid):
    try:
      psi = weak_pump_steady_state(qp.with_(omega_L=omega_L), space)
      S[k] = scattering_intensity(psi, qp.mu_E, qp.mu_B)
      g2[k] = g2_zero(psi, qp.mu_E, qp.mu_B)
      ok[k] = True
    except (WeakPumpError, SingularSystemError, UndefinedStatisticsError) as e:
      errors.append((k, f'{type(e).__name__}: {e}'))
      warn(f'omega_L={omega_L:.6g} eV: {e}')
  return ScanResult(grid=grid, S=S, g2=g2, ok=ok, errors=errors)

def excitation_numbers(space):
  return np.array([sum(space.unindex(k)) for k in range(space.dim)])

def lindblad_steady_state(qp, space=None):
  """Null vector of the Liouvillian with sigma_minus, a_B and a_D dissipators.

  The space is small enough for a dense SVD; the smallest singular vector is
  the steady state once the second smallest clears the gap tolerance.

  Under weak drive rho[j, k] falls off as x^(n_j + n_k), with n the excitation
  number and x the drive over the largest decay rate. The Liouvillian is
  solved for rho[j, k] / x^(n_j + n_k), which keeps the multi-photon elements
  far above the round-off of the null vector.
  """
  space = space or build_space()
  if space.dim > LINDBLAD_MAX_DIM:
    raise ParameterError(f'dense Liouvillian limited to dimension {LINDBLAD_MAX_DIM}, got {space.dim}')
  sm, a_B, a_D = operators(space)
  c_ops = [math.sqrt(qp.gamma_E) * sm, math.sqrt(qp.gamma_B) * a_B,
           math.sqrt(qp.gamma_D) * a_D]
  L = qutip.liouvillian(system_hamiltonian(qp, space), c_ops).full()
  drive = max(abs(qp.drive_E), abs(qp.drive_B), abs(qp.drive_D))
  rate = max(qp.gamma_E, qp.gamma_B, qp.gamma_D)
  x = min(1.0, drive / rate) if drive > 0 and rate > 0 else 1.0
  n = excitation_numbers(space)
  # qutip stacks columns: entry j + k dim of vec(rho) is rho[j, k]
  m = (n[:, None] + n[None, :]).ravel(order='F')
  L = L * x**(m[None, :] - m[:, None]).astype(float)
  _, s, vh = np.linalg.svd(L)
  if s[-2] <= NULL_GAP * s[0]:
    raise DegenerateSteadyStateError(
      f'Liouvillian has more than one null direction (s[-2]/s[0] = {s[-2] / s[0]:.3g})')
  rho = (vh[-1].conj() * x**m.astype(float)).reshape(space.dim, space.dim, order='F')
  rho = rho / np.trace(rho)
  rho = (rho + rho.conj().T) / 2
  return DensityMatrixState(space=space, rho=rho)

def observables_from_rho(state, mu_E, mu_B):
  a_s = scattering_operator(state.space, mu_E, mu_B)
  n_op = a_s.conj().T @ a_s
  S = float(np.real(np.trace(state.rho @ n_op)))
  if S < STATISTICS_FLOOR:
    raise UndefinedStatisticsError(f'Tr(rho a_s^dag a_s) = {S:.3g} is below {STATISTICS_FLOOR}')
  pair = a_s @ a_s
  num = float(np.real(np.trace(state.rho @ pair.conj().T @ pair)))
  return S, num / S**2

def params_from_effective(eff, gamma_E, mu_E, omega_E=None, omega_L=None, E_L=None):
  """QuantumParams for a nanosphere, with the emitter on the dark pseudomode
  unless omega_E is given."""
  omega_E = eff.omega_D if omega_E is None else omega_E
  return QuantumParams(omega_E=omega_E, omega_B=eff.omega_B, omega_D=eff.omega_D,
                       gamma_E=gamma_E, gamma_B=eff.gamma_B, gamma_D=eff.gamma_D,
                       g_B=eff.g_B, g_D=eff.g_D, mu_E=mu_E, mu_B=eff.mu_B,
                       omega_L=eff.omega_B if omega_L is None else omega_L, E_L=E_L)
