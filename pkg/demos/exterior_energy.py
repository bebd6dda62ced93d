"""Exterior energy outside |x| >= |t| + R: closed-form limits versus time-domain runs.

Covers an odd dimension (exact half at R = 0) and an even one (closed form at R = 0).
"""

from wavecone.energy import ext_energy, ext_energy_even_closed_form
from wavecone.evolve import time_domain_exterior
from wavecone.fields import Field, RadialGrid, WaveData, gaussian_pair, h1_norm, l2_norm


def report(d):
    u = WaveData(Field(d, (gaussian_pair(d, 0, 0.6),)), Field(d, (gaussian_pair(d, 0, 0.5, 0.4),)))
    total = h1_norm(u.u0) ** 2 + l2_norm(u.u1) ** 2
    print(f"d = {d}: total energy {total:.6f}")
    for R in (0.0, 0.5, 1.5):
        E = ext_energy(u, R).E_ext
        td = time_domain_exterior(u, R, RadialGrid(40.0, 2048), 30.0, (10.0, 20.0))
        print(f"  R = {R:3.1f}  formula {E:.6f}  time domain {td.E_ext[-1]:.6f}  extrapolated {td.limit():.6f}")
    if d % 2 == 0:
        E, _ = ext_energy_even_closed_form(u)
        print(f"  even-d closed form at R = 0: {E:.6f}")
    else:
        print(f"  half of the total: {total / 2:.6f}")


if __name__ == "__main__":
    for d in (3, 4):
        report(d)
