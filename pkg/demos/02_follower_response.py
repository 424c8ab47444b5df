"""Exact versus smoothed follower best response on the first bundled game.

The exact response is a componentwise max of two affine maps; smoothing
replaces the max by a convex upper approximation within eps of it.
"""
import numpy as np

from mlfg import best_response_exact, best_response_smoothed, load_bundled

game = load_bundled(1)
rng = np.random.default_rng(0)

x = np.ones(game.n)
print("joint strategy:", x)
print("exact response:", best_response_exact(game, x))
for eps in (1.0, 0.1, 0.01, 1e-4):
    y = best_response_smoothed(game, x, eps)
    gap = np.max(np.abs(y - best_response_exact(game, x)))
    print(f"  eps={eps:<7} smoothed {np.round(y, 5)}   max gap {gap:.2e} (<= eps)")

print("\nthe gap bound holds at random strategies too:")
worst = 0.0
for _ in range(1000):
    x = rng.uniform(-5, 5, game.n)
    eps = float(rng.uniform(1e-3, 2.0))
    gap = np.max(np.abs(best_response_smoothed(game, x, eps) - best_response_exact(game, x)))
    worst = max(worst, gap / eps)
print(f"  max over 1000 draws of gap/eps: {worst:.3f} (<= 1)")
