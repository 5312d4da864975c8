"""
Building a bounded Fourier control
==================================

A control with K harmonics is described by 2K-1 angles, a base frequency and
two span numbers p and q.  The angles fix the *shape* of the waveform, the
normalisation rescales it to [0, 1], and (p, q) place it inside [m, M].
"""

# %%
# Angles to a unit amplitude vector

import numpy as np

from fourieropt import ControlShape, SpanParams, ControlBounds, build_control, extend_harmonics
from fourieropt.fourier_control import direction_from_angles, normalize_shape

angles = np.array([0.4, 1.2, 2.0])          # K = 2
h = direction_from_angles(angles)
print("amplitudes:", np.round(h, 4), "norm:", np.linalg.norm(h))

# %%
# Normalise over the simulation window.  After this step the waveform spans
# exactly [0, 1].

shape = ControlShape(angles, omega=0.9)
norm = normalize_shape(shape.direction(), shape.omega, shape.harmonics, 0.0, 100.0)
print(f"alpha={norm.alpha:.6f} beta={norm.beta:.6f}, raw range "
      f"[{norm.observed_min:.6f}, {norm.observed_max:.6f}]")

# %%
# p shrinks the band, q decides how much of it the waveform actually uses.

t = np.linspace(0, 100, 10001)
for p, q in [(1.0, 1.0), (0.5, 1.0), (1.0, 0.25), (1e-6, 1.0)]:
    u = build_control(shape, SpanParams(p, q), ControlBounds(-4, 4), 0.0, 100.0)(t)
    print(f"p={p:<6g} q={q:<5g} -> u in [{u.min():+.4f}, {u.max():+.4f}]")

# %%
# Adding a harmonic without changing the signal.  This is what lets the
# iterative search start K+1 exactly where K finished.

ctrl2 = build_control(shape, SpanParams(0.8, 0.9), ControlBounds(), 0.0, 100.0)
shape3 = extend_harmonics(shape)
ctrl3 = build_control(shape3, SpanParams(0.8, 0.9), ControlBounds(), 0.0, 100.0)
print("K=3 angles:", np.round(shape3.angles, 4))
print("max |u_K3 - u_K2| =", np.max(np.abs(ctrl3(t) - ctrl2(t))))
print("Fourier coefficients:", ctrl2.to_dict())
