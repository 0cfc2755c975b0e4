"""Parameter sweeps over the cmt, nanosphere and quantum models.

A sweep has one or two axes. An axis is either a dotted config path
(`cmt.g_D`, `sphere.h`, ...) or a frequency axis (`omega` for the cmt incident light
and the nanosphere LDOS, `omega_L` for the quantum drive), which must be the
innermost axis. Each combination of the outer axes is one task; a task
evaluates its whole frequency line, so tasks are independent and run on a
process pool. Rows come back in grid order and every failure lands in the
`error` column instead of stopping the sweep.
"""

import itertools
import json
import os
import subprocess
import time
from dataclasses import asdict, dataclass, field
from multiprocessing import Pool, cpu_count

import numpy as np
from schema import Optional, Or, Schema, SchemaError, Use
from tqdm import tqdm

import analytics
import cmt
import nanosphere
import quantum
from config import resolve_path, set_path, validate
from util import (ConfigParseError, ConfigValidationError, DarkplexError,
                  UndefinedLimitError, format_value, info, warn)

MODELS = ('cmt', 'nanosphere', 'quantum')
FREQUENCY_AXES = {'omega': ('cmt', 'nanosphere'), 'omega_L': ('quantum',)}
HOPFIELD = [f'{p}_{m}' for p in ('lp', 'mp', 'up') for m in cmt.BASIS]

COLUMNS = {
  ('cmt', True): [('delta_E', 'eV'), ('intensity', 'arb'), ('s_re', 'arb'), ('s_im', 'arb'),
                  ('lp_re', 'eV'), ('mp_re', 'eV'), ('up_re', 'eV')],
  ('cmt', False): [('delta_E', 'eV'), ('lp_re', 'eV'), ('mp_re', 'eV'), ('up_re', 'eV'),
                   ('lp_im', 'eV'), ('mp_im', 'eV'), ('up_im', 'eV'),
                   *[(name, '1') for name in HOPFIELD],
                   ('rabi_bright', 'eV'), ('delta_E_opt', 'eV')],
  ('nanosphere', True): [('J', 'eV'), ('J_dipole', 'eV'), ('J_dark', 'eV'), ('purcell', '1')],
  ('nanosphere', False): [('g_B', 'eV'), ('g_D', 'eV'), ('omega_B', 'eV'), ('omega_D', 'eV'),
                          ('gamma_B', 'eV'), ('gamma_D', 'eV'), ('gamma_B_rad', 'eV'),
                          ('mu_B', 'D'), ('gamma_E_rad', 'eV')],
  ('quantum', True): [('S', 'D^2'), ('g2', '1'), ('weak_pump_ok', '1'),
                      ('lp_re', 'eV'), ('mp_re', 'eV'), ('up_re', 'eV')],
  ('quantum', False): [('omega_L', 'eV'), ('S', 'D^2'), ('g2', '1'), ('weak_pump_ok', '1'),
                       ('lp_re', 'eV'), ('mp_re', 'eV'), ('up_re', 'eV')],
}

def unit_for(path):
  key = path.split('.')[-1]
  if key in ('R', 'h'):
    return 'nm'
  if key.startswith('mu_'):
    return 'D'
  if key == 'E_L':
    return 'eV/D'
  if key.startswith(('omega', 'gamma', 'g_', 'drive')):
    return 'eV'
  return '1'

@dataclass(frozen=True)
class Axis:
  path: str
  start: float
  stop: float
  points: int
  scale: str = 'linear'

  def __post_init__(self):
    if int(self.points) != self.points or self.points < 2:
      raise ConfigValidationError(f'axis {self.path}: points must be an integer >= 2')
    if not self.start < self.stop:
      raise ConfigValidationError(f'axis {self.path}: start must be below stop')
    if self.scale not in ('linear', 'log'):
      raise ConfigValidationError(f'axis {self.path}: scale must be linear or log')
    if self.scale == 'log' and self.start <= 0:
      raise ConfigValidationError(f'axis {self.path}: log axis needs start > 0')

  @property
  def frequency(self):
    return self.path in FREQUENCY_AXES

  def values(self):
    if self.scale == 'log':
      return np.geomspace(self.start, self.stop, int(self.points))
    return np.linspace(self.start, self.stop, int(self.points))

@dataclass(frozen=True)
class CoSweep:
  "Parameter moved linearly alongside the outer axis"
  path: str
  start: float
  stop: float

  def values(self, points):
    return np.linspace(self.start, self.stop, points)

@dataclass(frozen=True)
class SweepSpec:
  model: str
  axis: Axis
  axis2: Axis = None
  co_sweep: tuple = ()
  track_optimal_emitter: bool = False
  from_sphere: bool = False
  drive: str = None
  output: str = 'sweep.csv'
  preset: str = None
  overrides: tuple = ()

  def __post_init__(self):
    if self.model not in MODELS:
      raise ConfigValidationError(f'model must be one of {", ".join(MODELS)}, got {self.model!r}')
    if self.drive not in (None, 'fixed', 'lower'):
      raise ConfigValidationError(f'drive must be fixed or lower, got {self.drive!r}')
    if self.axis2 is not None and self.axis.frequency:
      raise ConfigValidationError('the frequency axis must be the innermost axis')
    if self.axis2 is not None and self.axis2.path == self.axis.path:
      raise ConfigValidationError('the two axes must differ')
    if self.co_sweep and self.axis.frequency:
      raise ConfigValidationError('co_sweep needs a parameter axis to follow')

  @property
  def axes(self):
    return (self.axis,) if self.axis2 is None else (self.axis, self.axis2)

  @property
  def outer(self):
    return [a for a in self.axes if not a.frequency]

  @property
  def line(self):
    inner = self.axes[-1]
    return inner if inner.frequency else None

  def columns(self):
    cols = [(a.path, unit_for(a.path)) for a in self.outer]
    cols += [(c.path, unit_for(c.path)) for c in self.co_sweep]
    if self.line is not None:
      cols.append((self.line.path, 'eV'))
    return cols + COLUMNS[(self.model, self.line is not None)] + [('error', '')]

@dataclass(frozen=True)
class Task:
  index: int
  spec: SweepSpec
  tree: dict
  assignments: tuple

@dataclass
class TaskResult:
  index: int
  rows: list
  seconds: float
  errors: list = field(default_factory=list)

@dataclass
class SweepResult:
  spec: SweepSpec
  config: object
  columns: list
  rows: list
  timings: list
  failures: int
  paths: dict = field(default_factory=dict)

def _axis_spec():
  return {'path': str, 'start': Use(float), 'stop': Use(float), 'points': int,
          Optional('scale'): Or('linear', 'log')}

SPEC_SCHEMA = Schema({
  'model': Or(*MODELS),
  'axis': _axis_spec(),
  Optional('axis2'): Or(None, _axis_spec()),
  Optional('co_sweep'): [{'path': str, 'start': Use(float), 'stop': Use(float)}],
  Optional('track_optimal_emitter'): bool,
  Optional('from_sphere'): bool,
  Optional('drive'): Or(None, 'fixed', 'lower'),
  Optional('output'): str,
  Optional('preset'): Or(None, str),
  Optional('set'): {str: object},
})

def spec_from_dict(tree):
  try:
    tree = SPEC_SCHEMA.validate(tree)
  except SchemaError as e:
    raise ConfigValidationError(f'sweep spec: {e.code}') from None
  axis2 = tree.get('axis2')
  return SweepSpec(model=tree['model'], axis=Axis(**tree['axis']),
                   axis2=Axis(**axis2) if axis2 else None,
                   co_sweep=tuple(CoSweep(**c) for c in tree.get('co_sweep', ())),
                   track_optimal_emitter=tree.get('track_optimal_emitter', False),
                   from_sphere=tree.get('from_sphere', False),
                   drive=tree.get('drive'), output=tree.get('output', 'sweep.csv'),
                   preset=tree.get('preset'),
                   overrides=tuple(sorted(tree.get('set', {}).items())))

def spec_to_dict(spec):
  tree = asdict(spec)
  tree['co_sweep'] = [asdict(c) for c in spec.co_sweep]
  tree['set'] = dict(spec.overrides)
  del tree['overrides']
  return tree

def load_sweep_spec(path):
  with open(path) as f:
    text = f.read()
  try:
    tree = json.loads(text)
  except json.JSONDecodeError as e:
    raise ConfigParseError(f'{path}:{e.lineno}:{e.colno}: {e.msg}') from None
  return spec_from_dict(tree)

def apply_spec_overrides(spec, config):
  tree = config.to_dict()
  for path, value in spec.overrides:
    tree = set_path(tree, path, value)
  return validate(tree)

def check_spec(spec, config):
  "Reject unknown or non-numeric paths before anything is computed"
  for axis in spec.axes:
    if axis.frequency:
      if spec.model not in FREQUENCY_AXES[axis.path]:
        raise ConfigValidationError(f'axis {axis.path!r} does not apply to the {spec.model} model')
      continue
    _check_numeric(config, axis.path)
  for co in spec.co_sweep:
    if co.path in FREQUENCY_AXES:
      raise ConfigValidationError(f'{co.path!r} cannot be co-swept')
    _check_numeric(config, co.path)

def _check_numeric(config, path):
  value = resolve_path(config.tree, path)
  if isinstance(value, (dict, str, bool)):
    raise ConfigValidationError(f'parameter {path!r} is not numeric')

def build_tasks(spec, config):
  outer = spec.outer
  grids = [a.values() for a in outer]
  co = [c.values(grids[0].size) for c in spec.co_sweep] if outer else []
  tasks = []
  for k, idx in enumerate(itertools.product(*[range(g.size) for g in grids])):
    assignments = [(a.path, g[i]) for a, g, i in zip(outer, grids, idx)]
    assignments += [(c.path, v[idx[0]]) for c, v in zip(spec.co_sweep, co)]
    tasks.append(Task(index=k, spec=spec, tree=config.tree, assignments=tuple(assignments)))
  return tasks

def _point_config(task):
  tree = task.tree
  for path, value in task.assignments:
    if isinstance(resolve_path(tree, path), int):
      value = int(round(value))
    tree = set_path(tree, path, float(value) if not isinstance(value, int) else value)
  return validate(tree)

def _effective(config):
  return nanosphere.effective_parameters(config.sphere_system())

# nanosphere-derived points keep the emitter on the dark pseudomode as it moves
# with R and h; sphere.omega_E only sets the emitter's free-space Larmor rate

def _cmt_params(spec, config):
  if spec.from_sphere:
    eff = _effective(config)
    s = config.tree['sphere']
    p = cmt.from_effective(eff, omega_E=eff.omega_D, gamma_E_rad=eff.gamma_E_rad,
                           gamma_E_nonrad=s['gamma_E_nonrad'])
  else:
    p = config.cmt_params()
  if spec.track_optimal_emitter:
    p = p.with_(omega_E=analytics.optimal_emitter_frequency(p.g_D, p.omega_B, p.omega_D))
  return p

def _quantum_params(spec, config):
  qp = config.quantum_params()
  if spec.from_sphere:
    eff = _effective(config)
    s = config.tree['sphere']
    qp = quantum.params_from_effective(eff, gamma_E=qp.gamma_E, mu_E=s['mu_E'],
                                       omega_L=qp.omega_L, E_L=qp.E_L)
  if spec.track_optimal_emitter:
    qp = qp.with_(omega_E=analytics.optimal_emitter_frequency(qp.g_D, qp.omega_B, qp.omega_D))
  return qp

# evaluators return full rows (without the outer-axis prefix) ending in the
# error field

def _cmt_rows(spec, config, line):
  p = _cmt_params(spec, config)
  eig = cmt.eigenmodes(cmt.build_cmt_hamiltonian(p))
  re = list(eig.values.real)
  if line is not None:
    spectrum = cmt.scattering_spectrum(p, line)
    return [[w, p.delta_E, I, s.real, s.imag, *re, '']
            for w, I, s in zip(line, spectrum.intensity, spectrum.amplitude)]
  fractions = [f for k in range(3) for f in cmt.hopfield(eig.vectors[:, k])]
  try:
    rabi = analytics.bright_rabi_splitting(p.g_B, p.g_D, p.omega_D, p.omega_E)
  except UndefinedLimitError:
    rabi = float('nan')
  try:
    opt = analytics.optimal_detuning(p.g_D, p.omega_B, p.omega_D)
  except DarkplexError:
    opt = float('nan')
  return [[p.delta_E, *re, *eig.values.imag, *fractions, rabi, opt, '']]

def _nanosphere_rows(spec, config, line):
  sys = config.sphere_system()
  if line is not None:
    ladder = nanosphere.mode_ladder(sys)
    total, dipole, dark = nanosphere.spectral_density(sys, line, ladder)
    if sys.mu_E > 0:
      purcell = nanosphere.purcell_spectrum(sys, line, ladder)
    else:
      purcell = np.full(line.size, np.nan)
    return [[*r, ''] for r in zip(line, total, dipole, dark, purcell)]
  eff = nanosphere.effective_parameters(sys)
  return [[eff.g_B, eff.g_D, eff.omega_B, eff.omega_D, eff.gamma_B, eff.gamma_D,
           eff.gamma_B_rad, eff.mu_B, eff.gamma_E_rad, '']]

def quantum_observables(qp, space, solver='weak_pump'):
  "(S, g2, weak_pump_ok) at the drive frequency in qp"
  if solver == 'lindblad':
    state = quantum.lindblad_steady_state(qp, space)
    S, g2 = quantum.observables_from_rho(state, qp.mu_E, qp.mu_B)
    return S, g2, bool(1 - state.populations()[0] <= quantum.WEAK_PUMP_LIMIT)
  psi = quantum.weak_pump_steady_state(qp, space)
  return (quantum.scattering_intensity(psi, qp.mu_E, qp.mu_B),
          quantum.g2_zero(psi, qp.mu_E, qp.mu_B), True)

def _quantum_rows(spec, config, line):
  qp = _quantum_params(spec, config)
  space = config.space()
  solver = config.tree['quantum']['solver']
  drive = spec.drive or config.tree['quantum']['drive']
  eig = cmt.eigenmodes(quantum.single_excitation_block(qp))
  re = list(eig.values.real)
  if line is None:
    if drive == 'lower':
      qp = quantum.lower_polariton_drive(qp)
    S, g2, ok = quantum_observables(qp, space, solver)
    return [[qp.omega_L, S, g2, ok, *re, '']]
  rows = []
  for w in line:
    try:
      S, g2, ok = quantum_observables(qp.with_(omega_L=w), space, solver)
      rows.append([w, S, g2, ok, *re, ''])
    except DarkplexError as e:
      rows.append([w, np.nan, np.nan, False, *re, f'{type(e).__name__}: {e}'])
  return rows

EVALUATORS = {'cmt': _cmt_rows, 'nanosphere': _nanosphere_rows, 'quantum': _quantum_rows}

def evaluate_task(task):
  spec = task.spec
  width = len(COLUMNS[(spec.model, spec.line is not None)])
  prefix = [v for _, v in task.assignments]
  line = spec.line.values() if spec.line is not None else None
  start = time.perf_counter()
  try:
    config = _point_config(task)
    rows = [prefix + r for r in EVALUATORS[spec.model](spec, config, line)]
  except DarkplexError as e:
    e.add_note(f'at {", ".join(f"{p}={v:.9g}" for p, v in task.assignments) or "base point"}')
    message = f'{type(e).__name__}: {e}'
    if line is None:
      rows = [prefix + [np.nan] * width + [message]]
    else:
      rows = [prefix + [w] + [np.nan] * width + [message] for w in line]
  return TaskResult(index=task.index, rows=rows, seconds=time.perf_counter() - start,
                    errors=[row[-1] for row in rows if row[-1]])

def git_version():
  try:
    out = subprocess.run(['git', 'describe', '--always', '--dirty', '--tags'],
                         cwd=os.path.dirname(os.path.abspath(__file__)),
                         capture_output=True, text=True, check=True)
    return out.stdout.strip() or 'unknown'
  except (OSError, subprocess.CalledProcessError):
    return 'unknown'

def write_table(path, columns, rows, fmt='csv', header=None):
  names = [name for name, _ in columns]
  if fmt == 'json':
    records = [{n: _json_value(v) for n, v in zip(names, row)} for row in rows]
    with open(path, 'w') as f:
      json.dump({'header': header or {}, 'columns': names,
                 'units': [unit for _, unit in columns], 'rows': records},
                f, indent=1, sort_keys=True)
      f.write('\n')
    return
  with open(path, 'w', newline='\n') as f:
    for key, value in (header or {}).items():
      f.write(f'# {key}: {value}\n')
    f.write('# columns: ' + ','.join(names) + '\n')
    f.write('# units: ' + ','.join(unit for _, unit in columns) + '\n')
    for row in rows:
      f.write(','.join(format_value(v) for v in row) + '\n')

def _json_value(v):
  if isinstance(v, (bool, np.bool_)):
    return bool(v)
  if isinstance(v, (int, np.integer)):
    return int(v)
  if isinstance(v, (float, np.floating)):
    return None if not np.isfinite(v) else float(v)
  return v

PLOT_TEMPLATE = '''#!/usr/bin/env python
# generated by darkplex for {data}
import os
import numpy as np
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
columns = {columns!r}
data = np.genfromtxt(os.path.join(here, {data!r}), delimiter=',', comments='#',
                     usecols=range(len(columns) - 1))
data = np.atleast_2d(data)
x, y, z = {x!r}, {y!r}, {z!r}
fig, ax = plt.subplots(figsize=(6, 4.5))
if y is None:
  for name in {lines!r}:
    ax.plot(data[:, columns.index(x)], data[:, columns.index(name)], label=name)
  ax.set_xlabel(x)
  ax.legend()
else:
  xs = np.unique(data[:, columns.index(x)])
  ys = np.unique(data[:, columns.index(y)])
  grid = data[:, columns.index(z)].reshape(xs.size, ys.size)
  if {log}:
    grid = np.log10(np.clip(grid, 1e-300, None))
  mesh = ax.pcolormesh(xs, ys, grid.T, shading='auto')
  fig.colorbar(mesh, ax=ax, label=('log10 ' if {log} else '') + z)
  for name in ('lp_re', 'mp_re', 'up_re'):
    if name in columns:
      lines = data[::ys.size, columns.index(name)]
      ax.plot(xs, lines, 'w--', lw=0.8)
  ax.set_ylim(ys[0], ys[-1])
  ax.set_xlabel(x)
  ax.set_ylabel(y)
fig.tight_layout()
fig.savefig(os.path.join(here, {image!r}), dpi=200)
'''

def write_plot_script(path, data_path, spec):
  columns = spec.columns()
  names = [name for name, _ in columns]
  axes = [a.path for a in spec.axes]
  observables = [name for name, _ in COLUMNS[(spec.model, spec.line is not None)]]
  x = axes[0]
  y = axes[-1] if len(axes) > 1 else None
  z = None
  if y is not None:
    z = next((n for n in ('intensity', 'S', 'J', 'g2') if n in observables), observables[0])
  log = z in ('intensity', 'S', 'J')
  lines = [n for n in observables if n not in ('delta_E', 's_re', 's_im', 'weak_pump_ok')][:4]
  with open(path, 'w') as f:
    f.write(PLOT_TEMPLATE.format(data=os.path.basename(data_path), columns=names, x=x, y=y,
                                 z=z, lines=lines, log=log,
                                 image=os.path.splitext(os.path.basename(data_path))[0] + '.png'))

def run_sweep(spec, config, out=None, threads=1, fmt='csv', quiet=False):
  config = apply_spec_overrides(spec, config)
  check_spec(spec, config)
  tasks = build_tasks(spec, config)
  columns = spec.columns()
  info(f'{spec.model} sweep: {len(tasks)} tasks, {len(columns)} columns, {threads} worker(s)')
  if threads > 1 and len(tasks) > 1:
    with Pool(processes=min(threads, cpu_count(), len(tasks))) as pool:
      results = list(tqdm(pool.imap(evaluate_task, tasks), total=len(tasks),
                          disable=quiet, leave=False))
  else:
    results = [evaluate_task(t) for t in tqdm(tasks, disable=quiet, leave=False)]
  rows = [row for r in results for row in r.rows]
  failures = sum(1 for row in rows if row[-1])
  for r in results:
    for message in r.errors:
      warn(f'task {r.index}: {message}')
  timings = [(r.index, r.seconds, len(r.errors), len(r.rows)) for r in results]
  result = SweepResult(spec=spec, config=config, columns=columns, rows=rows,
                       timings=timings, failures=failures)
  if out is not None:
    write_outputs(result, out, fmt)
  return result

def write_outputs(result, out, fmt='csv'):
  spec = result.spec
  header = {'darkplex': spec.preset or 'sweep', 'model': spec.model}
  directory = os.path.dirname(out)
  if directory:
    os.makedirs(directory, exist_ok=True)
  write_table(out, result.columns, result.rows, fmt, header)
  meta = out + '.meta.json'
  with open(meta, 'w') as f:
    json.dump({'version': git_version(), 'spec': spec_to_dict(spec),
               'config': result.config.tree, 'failures': result.failures,
               'points': [{'task': i, 'seconds': s, 'errors': n, 'rows': m,
                          'seconds_per_point': s / m}
                          for i, s, n, m in result.timings]},
              f, indent=2, sort_keys=True)
    f.write('\n')
  result.paths = {'data': out, 'meta': meta}
  if fmt == 'csv':
    plot = out + '.plot.py'
    write_plot_script(plot, out, spec)
    result.paths['plot'] = plot
  info(f'Saved {out!r}')
  return result.paths
