"""
Hockey-stick inversion on a pair of pure qubits
===============================================

For two pure states the modified smooth max-relative entropy and the
hypothesis-testing divergence depend only on the overlap, so every number
below can be checked by hand.  Run with ``python3 demos/pure_qubits.py``.
"""

import math

import numpy as np

from smoothdiv import divergences as dv
from smoothdiv import matcore as mc
from smoothdiv import verify as vf

# two pure qubits with overlap |<psi|phi>|^2 = 0.9
psi = mc.pure_state([1.0, 0.0])
phi = mc.pure_state([math.sqrt(0.9), math.sqrt(0.1)])
f = float(np.trace(psi @ phi).real)
print(f"overlap f = {f:.3f}")

# E_lam = Tr(psi - lam phi)_+ falls from 1 at lam = 0 towards the leak 1 - f
for lam in (0.0, 0.5, 1.0, 2.0, 8.0):
    print(f"E_{lam:<4} = {dv.hockey_stick(psi, phi, lam):.6f}")

# D~ inverts E_lam: the least lam with E_lam <= eps, in bits.
# Below eps = 1 - f no multiple of phi covers psi well enough.
print("\n  eps   D~ (solver)   D~ (closed)   D_H (solver)   D_H (closed)")
for eps in (0.05, 0.15, 0.2, 0.5, 0.8):
    dt, d_h = dv.pure_closed_forms(f, eps)
    print(f"{eps:5.2f}  {dv.dtilde_max(psi, phi, eps):12.8f}  {dt:12.8f}"
          f"  {dv.dh(psi, phi, eps):13.8f}  {d_h:13.8f}")

# the optimal test behind D_H is a projector onto a rotated direction
test = dv.dh_test(psi, phi, 0.2)
w = mc.eigvalsh(test.test)
print(f"\noptimal test at eps = 0.2: eigenvalues {np.round(w, 12)}, "
      f"Tr M psi = {test.type1:.6f}, Tr M phi = {test.type2:.6f}")

# D~ and D_H determine each other through a one-dimensional optimisation
ctx = vf.PairContext(psi, phi)
grid = vf.GridSpec()
for eps in (0.2, 0.5):
    value, arg, _ = vf.reconstruct_dh(ctx, eps, grid)
    print(f"D_H at 1-{eps}: direct {dv.dh(psi, phi, 1 - eps):.10f}, "
          f"rebuilt from D~ {value:.10f} (inner point {arg:.4f})")
