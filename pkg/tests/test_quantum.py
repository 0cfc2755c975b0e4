import math

import numpy as np
import pytest

import analytics
import cmt
import nanosphere
import quantum
from quantum import QuantumParams
from util import (DegenerateSteadyStateError, ParameterError, UndefinedStatisticsError,
                  WeakPumpError)

def cavity(**changes):
  "Bare driven bright mode: emitter and dark mode decoupled and undriven"
  base = dict(g_B=0.0, g_D=0.0, mu_E=0.0, mu_B=100.0, E_L=1e-6, omega_L=3.0)
  base.update(changes)
  return QuantumParams(**base)

def test_space_indexing(space):
  assert space.dims == (2, 3, 3)
  assert space.dim == 18
  assert space.index(0, 1, 0) == 3
  assert space.index(0, 0, 1) == 1
  assert space.index(1, 0, 0) == 9
  assert space.unindex(14) == (1, 1, 2)
  assert space.label(9) == 'e00'
  with pytest.raises(ParameterError):
    space.index(0, 3, 0)

def test_space_rejects_empty_modes():
  with pytest.raises(ParameterError):
    quantum.build_space(0, 2)

def test_default_field_targets_small_drive(qp):
  assert max(abs(qp.drive_E), abs(qp.drive_B)) == pytest.approx(1e-4)
  assert qp.drive_B == pytest.approx(-450 * qp.field)

def test_hamiltonian_is_hermitian(qp, space):
  H = quantum.system_hamiltonian(qp, space)
  assert H.isherm
  assert H.shape == (18, 18)

def test_single_excitation_block_embeds(qp, space):
  H = quantum.effective_hamiltonian(qp, space)
  idx = [space.index(0, 1, 0), space.index(0, 0, 1), space.index(1, 0, 0)]
  block = H[np.ix_(idx, idx)]
  np.testing.assert_allclose(block, quantum.single_excitation_block(qp) - qp.omega_L * np.eye(3),
                             atol=1e-14)

def test_bright_drive_matrix_element(qp, space):
  H = quantum.effective_hamiltonian(qp, space)
  assert H[space.index(0, 2, 0), space.index(0, 1, 0)] == pytest.approx(qp.drive_B * math.sqrt(2) / 2)

def test_driven_cavity_amplitudes(space):
  qp = cavity()
  psi = quantum.weak_pump_steady_state(qp, space)
  detuning = qp.omega_B - qp.omega_L - 0.5j * qp.gamma_B
  alpha = -qp.drive_B / 2 / detuning
  assert psi.amplitude(0, 0, 0) == 1
  assert psi.amplitude(0, 1, 0) == pytest.approx(alpha, rel=1e-5)
  assert psi.amplitude(0, 2, 0) == pytest.approx(alpha**2 / math.sqrt(2), rel=1e-5)
  assert abs(psi.amplitude(1, 0, 0)) < 1e-15

def test_coherent_light_is_uncorrelated(space):
  psi = quantum.weak_pump_steady_state(cavity(E_L=1e-7), space)
  assert quantum.g2_zero(psi, 0.0, 100.0) == pytest.approx(1.0, abs=1e-6)

def test_two_level_emitter_is_antibunched(space):
  qp = QuantumParams(g_B=0.0, g_D=0.0, mu_B=0.0, E_L=1e-7, omega_L=3.5)
  psi = quantum.weak_pump_steady_state(qp, space)
  assert quantum.g2_zero(psi, qp.mu_E, qp.mu_B) < 1e-6

def test_g2_needs_two_quanta(qp):
  psi = quantum.weak_pump_steady_state(qp, quantum.build_space(1, 2))
  with pytest.raises(ParameterError):
    quantum.g2_zero(psi, qp.mu_E, qp.mu_B)

def test_strong_drive_is_rejected(qp, space):
  with pytest.raises(WeakPumpError):
    quantum.weak_pump_steady_state(qp.with_(mu_B=100.0, E_L=1e-3), space)

def test_undriven_statistics_are_undefined(qp, space):
  psi = quantum.weak_pump_steady_state(qp.with_(E_L=0.0), space)
  with pytest.raises(UndefinedStatisticsError):
    quantum.g2_zero(psi, qp.mu_E, qp.mu_B)

def test_common_frequency_shift_is_invisible(qp, space):
  shifted = qp.with_(omega_E=qp.omega_E + 0.2, omega_B=qp.omega_B + 0.2,
                     omega_D=qp.omega_D + 0.2, omega_L=3.2)
  a = quantum.weak_pump_steady_state(qp, space)
  b = quantum.weak_pump_steady_state(shifted, space)
  assert quantum.scattering_intensity(b, qp.mu_E, qp.mu_B) == pytest.approx(
    quantum.scattering_intensity(a, qp.mu_E, qp.mu_B), rel=1e-9)
  assert quantum.g2_zero(b, qp.mu_E, qp.mu_B) == pytest.approx(
    quantum.g2_zero(a, qp.mu_E, qp.mu_B), rel=1e-9)

def test_weak_pump_observables_scale_with_drive(qp, space):
  weak = quantum.weak_pump_steady_state(qp.with_(E_L=1e-7), space)
  double = quantum.weak_pump_steady_state(qp.with_(E_L=2e-7), space)
  S1 = quantum.scattering_intensity(weak, qp.mu_E, qp.mu_B)
  S2 = quantum.scattering_intensity(double, qp.mu_E, qp.mu_B)
  assert S2 / S1 == pytest.approx(4.0, rel=1e-4)
  assert quantum.g2_zero(double, qp.mu_E, qp.mu_B) == pytest.approx(
    quantum.g2_zero(weak, qp.mu_E, qp.mu_B), rel=1e-4)

def test_larger_truncation_leaves_g2_unchanged(qp):
  g2 = []
  for n in (2, 3):
    psi = quantum.weak_pump_steady_state(qp, quantum.build_space(n, n))
    g2.append(quantum.g2_zero(psi, qp.mu_E, qp.mu_B))
  assert g2[1] == pytest.approx(g2[0], rel=1e-2)

def test_lower_polariton_drive(qp):
  driven = quantum.lower_polariton_drive(qp)
  lam, _ = cmt.eigenmodes(quantum.single_excitation_block(qp))['LP']
  assert driven.omega_L == pytest.approx(lam.real)
  assert driven.omega_L < qp.omega_B

def test_spectrum_scan_collects_failures(qp, space):
  grid = np.linspace(2.8, 3.2, 5)
  result = quantum.spectrum_scan(qp.with_(E_L=0.0), grid, space)
  assert not result.ok.any()
  assert len(result.errors) == 5
  assert np.all(np.isnan(result.g2))

def test_antibunching_follows_dark_coupling(qp, space):
  grid = np.linspace(2.3, 3.0, 701)
  minima = []
  for g_D in (0.6, 1.0):
    scan = quantum.spectrum_scan(qp.with_(g_D=g_D, g_B=0.3 * g_D), grid, space)
    assert scan.ok.all()
    assert np.min(scan.g2) < 1
    minima.append(grid[np.argmin(scan.g2)])
  assert minima[1] < minima[0]

def test_undriven_lindblad_state_is_vacuum(qp, space):
  state = quantum.lindblad_steady_state(qp.with_(E_L=0.0), space)
  assert state.populations()[0] == pytest.approx(1.0, abs=1e-10)
  assert np.trace(state.rho).real == pytest.approx(1.0)

def test_lindblad_cavity_is_coherent():
  space = quantum.build_space(6, 1)
  qp = cavity(E_L=2e-4)
  state = quantum.lindblad_steady_state(qp, space)
  S, g2 = quantum.observables_from_rho(state, qp.mu_E, qp.mu_B)
  alpha = qp.drive_B / 2 / abs(qp.omega_B - qp.omega_L - 0.5j * qp.gamma_B)
  assert S == pytest.approx(qp.mu_B**2 * alpha**2, rel=1e-6)
  assert g2 == pytest.approx(1.0, abs=1e-6)

@pytest.mark.parametrize('omega_L', [2.5, 2.8, 3.3, 3.6])
def test_lindblad_agrees_with_weak_pump(qp, space, omega_L):
  qp = qp.with_(omega_L=omega_L, E_L=1e-3 / 450)
  state = quantum.lindblad_steady_state(qp, space)
  S_rho, g2_rho = quantum.observables_from_rho(state, qp.mu_E, qp.mu_B)
  psi = quantum.weak_pump_steady_state(qp, space)
  assert quantum.scattering_intensity(psi, qp.mu_E, qp.mu_B) == pytest.approx(S_rho, rel=1e-2)
  assert quantum.g2_zero(psi, qp.mu_E, qp.mu_B) == pytest.approx(g2_rho, rel=2e-2, abs=1e-3)

def test_lindblad_agrees_with_weak_pump_across_dark_coupling_map(qp, space):
  assert abs(qp.drive_B) == pytest.approx(1e-4)
  for g_D in np.linspace(0.0, 1.0, 21):
    for omega_L in np.linspace(2.0, 4.5, 51):
      point = qp.with_(g_D=g_D, g_B=0.3 * g_D, omega_L=omega_L)
      state = quantum.lindblad_steady_state(point, space)
      S_rho, g2_rho = quantum.observables_from_rho(state, point.mu_E, point.mu_B)
      psi = quantum.weak_pump_steady_state(point, space)
      assert quantum.scattering_intensity(psi, point.mu_E, point.mu_B) == pytest.approx(S_rho, rel=1e-2)
      assert quantum.g2_zero(psi, point.mu_E, point.mu_B) == pytest.approx(g2_rho, rel=1e-2, abs=1e-4)

def test_lindblad_resolves_two_photon_terms_at_weak_drive():
  space = quantum.build_space(3, 1)
  qp = cavity(E_L=1e-6, omega_L=4.0)
  state = quantum.lindblad_steady_state(qp, space)
  _, g2 = quantum.observables_from_rho(state, qp.mu_E, qp.mu_B)
  assert g2 == pytest.approx(1.0, abs=1e-6)

def test_lossless_decoupled_dark_mode_is_degenerate(qp, space):
  with pytest.raises(DegenerateSteadyStateError):
    quantum.lindblad_steady_state(qp.with_(gamma_D=0.0, g_D=0.0), space)

def test_dense_liouvillian_size_limit(qp):
  with pytest.raises(ParameterError):
    quantum.lindblad_steady_state(qp, quantum.build_space(4, 7))

def test_pure_state_density_matrix_matches(qp, space):
  psi = quantum.weak_pump_steady_state(qp, space)
  v = psi.normalized()
  state = quantum.DensityMatrixState(space=space, rho=np.outer(v, v.conj()))
  S, g2 = quantum.observables_from_rho(state, qp.mu_E, qp.mu_B)
  assert S == pytest.approx(quantum.scattering_intensity(psi, qp.mu_E, qp.mu_B), rel=1e-9)
  assert g2 == pytest.approx(quantum.g2_zero(psi, qp.mu_E, qp.mu_B), rel=1e-9)

def test_thermal_light_is_bunched():
  space = quantum.build_space(8, 1)
  x = 0.01
  rho = np.zeros((space.dim, space.dim), dtype=complex)
  for n in range(9):
    k = space.index(0, n, 0)
    rho[k, k] = x**n
  rho /= np.trace(rho)
  S, g2 = quantum.observables_from_rho(quantum.DensityMatrixState(space=space, rho=rho), 0.0, 1.0)
  assert S == pytest.approx(x / (1 - x), rel=1e-6)
  assert g2 == pytest.approx(2.0, abs=1e-6)

def test_params_from_effective():
  class Eff:
    omega_B, omega_D = 3.0, 3.36
    gamma_B, gamma_D = 0.1006, 0.18
    g_B, g_D = 0.064, 0.29
    mu_B = 447.0
  qp = quantum.params_from_effective(Eff, gamma_E=0.1, mu_E=25.0)
  assert qp.omega_E == 3.36
  assert qp.omega_L == 3.0
  assert qp.mu_B == 447.0
  assert quantum.params_from_effective(Eff, 0.1, 25.0, omega_E=3.2).omega_E == 3.2

def test_space_round_trip():
  small = quantum.build_space(1, 1)
  assert small.dim == 8
  for space in (small, quantum.build_space(2, 3)):
    for k in range(space.dim):
      assert space.index(*space.unindex(k)) == k

def test_uncoupled_undriven_hamiltonian_is_diagonal(space):
  qp = QuantumParams(g_B=0.0, g_D=0.0, mu_E=0.0, mu_B=0.0, gamma_E=0.0, gamma_B=0.0,
                     gamma_D=0.0, omega_L=3.2)
  H = quantum.effective_hamiltonian(qp, space)
  expected = [a * (qp.omega_E - 3.2) + b * (qp.omega_B - 3.2) + c * (qp.omega_D - 3.2)
              for a, b, c in map(space.unindex, range(space.dim))]
  np.testing.assert_allclose(H, np.diag(expected), atol=1e-15)

def _lp_mp_gap(qp):
  values = cmt.eigenmodes(quantum.single_excitation_block(qp)).values
  return values[1].real - values[0].real

def test_dark_coupling_map_anticrossing(qp):
  g_D = np.linspace(0.05, 1.0, 96)
  gaps = [_lp_mp_gap(qp.with_(g_D=g, g_B=0.3 * g)) for g in g_D]
  assert 0.35 <= g_D[np.argmin(gaps)] <= 0.55

def test_scattering_doublet_sits_on_lower_polaritons(qp, space):
  point = qp.with_(g_D=0.5, g_B=0.15)
  grid = np.linspace(2.5, 3.4, 901)
  scan = quantum.spectrum_scan(point, grid, space)
  assert scan.ok.all()
  maxima = cmt.find_maxima(grid, scan.S)
  values = cmt.eigenmodes(quantum.single_excitation_block(point)).values
  for branch in (0, 1):
    assert np.min(np.abs(maxima - values[branch].real)) < 0.05

def test_tracked_emitter_keeps_splitting_open(qp):
  for g_D in np.linspace(0.3, 1.0, 15):
    point = qp.with_(g_D=g_D, g_B=0.3 * g_D)
    point = point.with_(omega_E=analytics.optimal_emitter_frequency(g_D, point.omega_B, point.omega_D))
    gap = _lp_mp_gap(point)
    assert gap > 0.1
    closed = analytics.bright_rabi_splitting(point.g_B, g_D, point.omega_D, point.omega_E)
    assert gap == pytest.approx(closed, rel=0.05)

def _doublet_peaks(R, h, space):
  sys = nanosphere.SphereSystem(R=R, h=h, mu_E=55.0)
  eff = nanosphere.effective_parameters(sys)
  qp = quantum.params_from_effective(eff, gamma_E=0.1, mu_E=55.0)
  grid = np.linspace(2.5, 4.0, 601)
  scan = quantum.spectrum_scan(qp, grid, space)
  assert scan.ok.all()
  maxima = cmt.find_maxima(grid, scan.S)
  return maxima[(maxima > 2.8) & (maxima < 3.2)]

@pytest.mark.filterwarnings('ignore::util.TruncationWarning')
@pytest.mark.parametrize('R', [5.0, 7.0, 9.0])
def test_sphere_doublet_at_close_gap(R, space):
  assert len(_doublet_peaks(R, 1.5, space)) == 2

@pytest.mark.parametrize('h', [3.0, 4.0, 5.0])
def test_sphere_doublet_collapses_at_wide_gap(h, space):
  assert len(_doublet_peaks(5.0, h, space)) == 1
