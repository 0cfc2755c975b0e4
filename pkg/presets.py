"""Named sweeps that regenerate the published panels.

Every preset is an ordinary SweepSpec, so `sweep` with the same axes and
overrides produces the same file.
"""

import difflib

from sweep import Axis, CoSweep, SweepSpec, run_sweep
from util import DarkplexError, PresetNotFoundError

INCIDENT = Axis('omega', 2.5, 4.0, 601)
DRIVE = Axis('omega_L', 2.5, 4.0, 601)
EMITTER_DETUNING = Axis('cmt.omega_E', 2.9, 4.1, 201)
# emitter strength that puts the lower dark polariton on the bright mode at h = 1.5 nm
SPHERE_OVERRIDES = (('sphere.mu_E', 55.0),)
RADIUS = Axis('sphere.R', 5.0, 20.0, 31)
GAP = Axis('sphere.h', 0.5, 5.0, 46)
DARK_COUPLING = Axis('quantum.g_D', 0.0, 1.0, 51)
BRIGHT_COUPLING = CoSweep('quantum.g_B', 0.0, 0.3)
WIDE_DRIVE = Axis('omega_L', 2.0, 4.5, 501)

PRESETS = {
  'fig1c': SweepSpec(model='nanosphere', axis=Axis('omega', 2.5, 4.0, 1501),
                     output='fig1c.csv', preset='fig1c'),
  'fig2a': SweepSpec(model='cmt', axis=Axis('omega', 2.5, 4.0, 1501),
                     output='fig2a.csv', preset='fig2a'),
  'fig2b': SweepSpec(model='cmt', axis=EMITTER_DETUNING, axis2=INCIDENT,
                     output='fig2b.csv', preset='fig2b'),
  'fig2c': SweepSpec(model='cmt', axis=EMITTER_DETUNING, output='fig2c.csv', preset='fig2c'),
  'fig3a': SweepSpec(model='quantum', axis=RADIUS, axis2=DRIVE, from_sphere=True,
                     overrides=SPHERE_OVERRIDES + (('sphere.h', 1.5),),
                     output='fig3a.csv', preset='fig3a'),
  'fig3b': SweepSpec(model='quantum', axis=RADIUS, from_sphere=True, drive='lower',
                     overrides=SPHERE_OVERRIDES + (('sphere.h', 1.5),),
                     output='fig3b.csv', preset='fig3b'),
  'fig3c': SweepSpec(model='quantum', axis=GAP, axis2=DRIVE, from_sphere=True,
                     overrides=SPHERE_OVERRIDES, output='fig3c.csv', preset='fig3c'),
  'fig3d': SweepSpec(model='quantum', axis=GAP, from_sphere=True, drive='lower',
                     overrides=SPHERE_OVERRIDES, output='fig3d.csv', preset='fig3d'),
  'figS1': SweepSpec(model='quantum', axis=DARK_COUPLING, axis2=WIDE_DRIVE,
                     co_sweep=(BRIGHT_COUPLING,), output='figS1.csv', preset='figS1'),
  'figS2': SweepSpec(model='quantum', axis=DARK_COUPLING, axis2=WIDE_DRIVE,
                     co_sweep=(BRIGHT_COUPLING,), track_optimal_emitter=True,
                     output='figS2.csv', preset='figS2'),
}

def get_preset(name):
  try:
    return PRESETS[name]
  except KeyError:
    close = difflib.get_close_matches(name, list(PRESETS), n=1)
    hint = f" (did you mean '{close[0]}'?)" if close else ''
    raise PresetNotFoundError(f'unknown preset {name!r}{hint}') from None

def run_preset(name, config, out=None, threads=1, fmt='csv', quiet=False):
  spec = get_preset(name)
  try:
    return run_sweep(spec, config, out=out or spec.output, threads=threads, fmt=fmt,
                     quiet=quiet)
  except DarkplexError as e:
    e.add_note(f'while running preset {name}')
    raise
