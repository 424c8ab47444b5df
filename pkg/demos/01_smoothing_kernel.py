"""Tour of the smoothed absolute value kernel and its derivative stack.

The kernel (t**p + (2*eps)**p)**(1/p) majorizes |t|, is convex, and
collapses onto |t| as eps shrinks; its derivatives drive both the Newton
system and the continuation predictor.
"""
import numpy as np

from mlfg import phi_tilde, phi_tilde_d1, phi_tilde_d2, phi_tilde_deps

eps = 0.5
t = np.linspace(-3, 3, 13)

print("t, |t|, kernel(t), gap (always within [0, 2*eps]):")
for ti in t:
    v = phi_tilde(ti, eps)
    print(f"  {ti:+.2f}   {abs(ti):.4f}   {v:.4f}   {v - abs(ti):.4f}")

print("\nslope runs from -1 to +1 and is 0 at the kink:")
for ti in (-100.0, -1.0, 0.0, 1.0, 100.0):
    print(f"  d/dt at {ti:+.1f}: {phi_tilde_d1(ti, eps):+.6f}")

print("\ncurvature is positive and concentrates near the kink as eps shrinks:")
for e in (1.0, 0.1, 0.01):
    print(f"  eps={e:<5} curvature at 0: {phi_tilde_d2(0.0, e):.3f}"
          f"   at 1: {phi_tilde_d2(1.0, e):.5f}")

print("\nderivative in eps, cross-checked by central differences:")
h = 1e-6
for ti in (0.0, 0.7, 2.0):
    fd = (phi_tilde(ti, eps + h) - phi_tilde(ti, eps - h)) / (2 * h)
    print(f"  t={ti}: analytic {phi_tilde_deps(ti, eps):.8f}  fd {fd:.8f}")
