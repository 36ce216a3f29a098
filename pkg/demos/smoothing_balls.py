"""
Four smoothing balls and the states that realise them
=====================================================

The smooth max-relative entropy depends on how "nearby" is measured:
trace or purified distance, normalised or subnormalised candidates.  This
demo solves all four programs for one qutrit pair, shows where the
normalised and subnormalised values split, and builds explicit smoothed
states.  Run with ``python3 demos/smoothing_balls.py``.
"""

import math

import numpy as np

from smoothdiv import divergences as dv
from smoothdiv import matcore as mc
from smoothdiv import sdpsolve as sp
from smoothdiv import smoothing as sm
from smoothdiv.divergences import SmoothingSpec

rho = mc.sample_state("hs_mixed", 3, 21)
sigma = mc.sample_state("hs_mixed", 3, 22)
dist = mc.distances(rho, sigma)
print(f"Dmax = {dv.dmax(rho, sigma):.4f} bits, trace distance T = {dist.trace_dist:.4f}, "
      f"purified distance P = {math.sqrt(1 - dist.fidelity):.4f}")

# the subnormalised balls sit below the normalised ones, and the hockey-stick
# inverse D~ sits below the subnormalised trace ball
print("\n  eps      D~   trace/sub  trace/norm  purif/sub  purif/norm")
for eps in (0.05, 0.1, 0.2, 0.3, 0.5):
    vals = [sp.smooth_dmax(rho, sigma, SmoothingSpec(m, n, eps))
            for m in ("trace", "purified") for n in ("subnormalised", "normalised")]
    print(f"{eps:5.2f} {dv.dtilde_max(rho, sigma, eps):7.4f}" + "".join(f"{v:11.4f}" for v in vals))

# once the radius passes the distance to sigma, sigma itself is a candidate:
# the normalised value is 0 while the subnormalised one keeps falling
eps = dist.trace_dist + 0.05
sub = sp.smooth_dmax(rho, sigma, SmoothingSpec("trace", "subnormalised", eps))
norm = sp.smooth_dmax(rho, sigma, SmoothingSpec("trace", "normalised", eps))
print(f"\nbeyond T (eps = {eps:.3f}): subnormalised {sub:.4f}, normalised {norm:.4f}")

# a constructive witness: split rho <= lam sigma + Q with Q = (rho - lam sigma)_+,
# then rho' = G rho G is dominated by lam sigma and is close to rho
lam = 2.0 ** dv.dtilde_max(rho, sigma, 0.1)
w, v = np.linalg.eigh(rho - lam * sigma)
q = (v * np.clip(w, 0, None)) @ v.conj().T
wit = sm.datta_renner(rho, lam * sigma, q)
print(f"\nsplit at lam = {lam:.4f}: Tr Q = {np.trace(q).real:.4f}")
for name, b in wit.bounds.items():
    side = ">=" if b.lower else "<="
    print(f"  {name:22s} {b.value: .6f} {side} {b.limit: .6f}")
print(f"  Dmax(rho'||sigma) = {math.log2(sm.domination_factor(wit.rho_prime, sigma)):.6f}"
      f" <= log2 lam = {math.log2(lam):.6f}")

# gentle measurement: a projector accepted with probability 1 - eps moves
# the state by at most sqrt(eps) in trace distance, and this qubit family
# meets the subnormalised bound with equality
for eps in (0.1, 0.3):
    phi = np.array([math.sqrt(1 - eps), math.sqrt(eps)])
    g = sm.gentle_measurement(np.diag([1.0, 0.0]), np.outer(phi, phi))
    print(f"\ngentle measurement eps = {eps}: trace distance {g.certified['trace_dist_sub']:.6f}"
          f", bound {sm.gentle_bounds(eps)['trace_dist_sub']:.6f}")
