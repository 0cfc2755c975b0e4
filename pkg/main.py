#!/usr/bin/env python

import argparse
import sys

import nanosphere
import quantum
from config import apply_overrides, load_config, resolve_threads
from presets import PRESETS, run_preset
from sweep import Axis, SweepSpec, load_sweep_spec, quantum_observables, run_sweep, write_table
from util import (ConfigError, DarkplexError, format_value, info, set_verbosity)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 2, 3, 4

def output_path(args, default):
  path = args.out or default
  if args.format == 'json' and path.endswith('.csv'):
    path = path[:-4] + '.json'
  return path

def config_axis(config, name):
  g = config.tree['grid']
  return Axis(name, g['omega_min'], g['omega_max'], g['points'])

def sweep_options(args):
  return dict(from_sphere=args.from_sphere, track_optimal_emitter=args.track_optimal)

def run_spectrum(args, config, threads):
  spec = SweepSpec(model='cmt', axis=config_axis(config, 'omega'), output='spectrum.csv',
                   **sweep_options(args))
  return run_sweep(spec, config, output_path(args, spec.output), threads, args.format, args.quiet)

def run_map(args, config, threads):
  inner = 'omega_L' if args.model == 'quantum' else 'omega'
  spec = SweepSpec(model=args.model, axis=Axis(args.path, args.start, args.stop, args.points),
                   axis2=config_axis(config, inner), output='map.csv', **sweep_options(args))
  return run_sweep(spec, config, output_path(args, spec.output), threads, args.format, args.quiet)

def run_quantum(args, config, threads):
  spec = SweepSpec(model='quantum', axis=config_axis(config, 'omega_L'), output='quantum.csv',
                   **sweep_options(args))
  return run_sweep(spec, config, output_path(args, spec.output), threads, args.format, args.quiet)

def run_modes(args, config, threads):
  system = config.sphere_system()
  ladder = nanosphere.mode_ladder(system)
  eff = nanosphere.effective_parameters(system)
  header = {'darkplex': 'modes'}
  header.update({k: format_value(v) for k, v in vars(eff).items()})
  path = output_path(args, 'modes.csv')
  write_table(path, [('n', '1'), ('omega_n', 'eV'), ('gamma_n', 'eV'), ('g_n', 'eV')],
              [list(r) for r in ladder.rows()], args.format, header)
  for k, v in vars(eff).items():
    info(f'{k} = {format_value(v)}')
  info(f'Saved {path!r}')

def run_g2(args, config, threads):
  qp = config.quantum_params()
  if config.tree['quantum']['drive'] == 'lower':
    qp = quantum.lower_polariton_drive(qp)
  S, g2, ok = quantum_observables(qp, config.space(), config.tree['quantum']['solver'])
  if args.out:
    write_table(output_path(args, args.out),
                [('omega_L', 'eV'), ('S', 'D^2'), ('g2', '1'), ('weak_pump_ok', '1')],
                [[qp.omega_L, S, g2, ok]], args.format, {'darkplex': 'g2'})
  print(f'omega_L={format_value(qp.omega_L)} S={format_value(S)} g2={format_value(g2)}')

def run_named_preset(args, config, threads):
  out = output_path(args, PRESETS[args.name].output) if args.name in PRESETS else args.out
  return run_preset(args.name, config, out, threads, args.format, args.quiet)

def run_spec_file(args, config, threads):
  spec = load_sweep_spec(args.spec)
  return run_sweep(spec, config, output_path(args, spec.output), threads, args.format, args.quiet)

def report(e):
  print(f'[ERROR] {e}', file=sys.stderr)
  for note in getattr(e, '__notes__', []):
    print(f'        {note}', file=sys.stderr)

def main(argv=None):
  args = build_parser().parse_args(argv)
  set_verbosity(args.warn, args.verbose)
  try:
    config = apply_overrides(load_config(args.config), args.set)
    threads = resolve_threads(args.threads)
    result = args.func(args, config, threads)
  except (ConfigError, OSError) as e:
    report(e)
    return EXIT_CONFIG
  except DarkplexError as e:
    report(e)
    return EXIT_NUMERICAL
  if result is not None and result.failures:
    print(f'[WARN] {result.failures} of {len(result.rows)} rows failed, see the error column',
          file=sys.stderr)
    return EXIT_PARTIAL
  return EXIT_OK

def build_parser():
  parser = argparse.ArgumentParser(description='Dark-mode plexciton toolkit')
  common = argparse.ArgumentParser(add_help=False)
  common.add_argument('--config', type=str, help='Path to a JSON run configuration', default=None)
  common.add_argument('--out', '-o', type=str, help='Output file', default=None)
  common.add_argument('--set', action='append', default=[], metavar='KEY=VALUE',
                      help='Override a config value, e.g. cmt.g_D=0.2 (repeatable)')
  common.add_argument('--threads', type=int, default=None,
                      help='Worker processes (default $DARKPLEX_THREADS or 1)')
  common.add_argument('--format', choices=['csv', 'json'], default='csv')
  common.add_argument('--warn', action='store_true', help='Emit warnings')
  common.add_argument('--verbose', action='store_true', help='Set warnings and info to true')
  common.add_argument('--quiet', action='store_true', help='Hide progress bars')

  model = argparse.ArgumentParser(add_help=False)
  model.add_argument('--from-sphere', action='store_true',
                     help='Take couplings and modes from the nanosphere section')
  model.add_argument('--track-optimal', action='store_true',
                     help='Keep the emitter at its optimal frequency')

  sub = parser.add_subparsers(dest='command', required=True)
  p = sub.add_parser('spectrum', parents=[common, model], help='Classical scattering spectrum')
  p.set_defaults(func=run_spectrum)

  p = sub.add_parser('map', parents=[common, model], help='Spectrum map against one parameter')
  p.add_argument('path', type=str, help='Dotted config key, e.g. cmt.omega_E')
  p.add_argument('start', type=float)
  p.add_argument('stop', type=float)
  p.add_argument('points', type=int)
  p.add_argument('--model', choices=['cmt', 'nanosphere', 'quantum'], default='cmt')
  p.set_defaults(func=run_map)

  p = sub.add_parser('modes', parents=[common], help='Nanosphere mode ladder and pseudomode fit')
  p.set_defaults(func=run_modes)

  p = sub.add_parser('quantum', parents=[common, model], help='Scattering and g2 against drive frequency')
  p.set_defaults(func=run_quantum)

  p = sub.add_parser('g2', parents=[common], help='g2(0) at the configured drive')
  p.set_defaults(func=run_g2)

  p = sub.add_parser('preset', parents=[common], help='Regenerate a published panel')
  p.add_argument('name', type=str, help=', '.join(PRESETS))
  p.set_defaults(func=run_named_preset)

  p = sub.add_parser('sweep', parents=[common], help='Run a JSON sweep description')
  p.add_argument('spec', type=str, help='Path to the sweep file')
  p.set_defaults(func=run_spec_file)
  return parser

if __name__ == '__main__':
  sys.exit(main())
