"""Critical coupling against ring size and loss, closed form next to direct evolution.

Prints g_c * sqrt(N_c) for N_c = 3..8 and a short kappa scan for N_c = 3 with
the bisection estimate obtained by integrating the equations of motion.
"""

import math

import numpy as np

from srcurrent.analytic import g_c_symmetric
from srcurrent.meanfield import integrate
from srcurrent.model import SystemParams
from srcurrent.states import MeanFieldState


def grows(p, t_end=1000.0, seed=1e-5):
    """Compare the late envelope of |alpha| with the earlier one after a tiny spin tilt."""
    start = MeanFieldState(np.zeros(p.n_cavities, complex), seed, 0.0, -math.sqrt(0.25 - seed ** 2))
    traj = integrate(start, p, t_end, tol=1e-8, atol=1e-13)
    amp = np.abs(traj.alphas).max(axis=1)
    t = traj.times
    early = amp[(t > t_end / 4) & (t <= t_end / 2)].max()
    late = amp[t > t_end / 2].max()
    return amp.max() > 1e-3 or (late > 1e-8 and late > 1.05 * early)


def bisect(p, lo=0.15, hi=0.45, width=5e-4):
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if grows(p.replace(coupling=mid)) else (mid, hi)
    return 0.5 * (lo + hi)


if __name__ == "__main__":
    print("N_c   g_c        g_c*sqrt(N_c)")
    for n in range(3, 9):
        p = SystemParams(cavity_freqs=(0.5,) * n, hopping=0.01, coupling=0.0, cavity_loss=0.01)
        gc = g_c_symmetric(p)
        print(f"{n:3d}  {gc:.6f}  {gc * math.sqrt(n):.6f}")
    print("\nkappa  closed-form  evolution")
    for kappa in (0.0, 0.1, 0.3, 0.5):
        p = SystemParams(cavity_freqs=(0.5,) * 3, hopping=0.1, coupling=0.0, cavity_loss=kappa)
        print(f"{kappa:5.2f}  {g_c_symmetric(p):.6f}     {bisect(p):.6f}")
