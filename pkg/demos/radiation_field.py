"""Radiation field of Gaussian data in d = 3 versus a time-domain solve.

Prints the error between (v_t, v_r) and the far-field profile at several
times, and the fitted decay slope.
"""

import numpy as np

from wavecone.evolve import radiation_error, solve_field
from wavecone.fields import Field, RadialGrid, WaveData, gaussian_pair
from wavecone.transform import radiation_field


def main():
    d = 3
    u = WaveData(Field(d, (gaussian_pair(d, 0, 0.6),)), Field(d, (gaussian_pair(d, 0, 0.5, 0.4),)))
    h, defect = radiation_field(u)
    print(f"route discrepancy of the radiation field: {defect:.2e}")
    times = [5.0, 10.0, 20.0, 40.0]
    snaps = solve_field(u, RadialGrid(56.0, 4096), max(times), times)["l0"]
    errs = [radiation_error(s, h["l0"]) for s in snaps if s.t in times]
    for t, e in zip(times, errs):
        print(f"t = {t:5.1f}  error = {e:.4e}")
    slope = np.polyfit(np.log(times), np.log(errs), 1)[0]
    print(f"log-log slope: {slope:.3f}")


if __name__ == "__main__":
    main()
