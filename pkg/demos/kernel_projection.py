"""Projection of compactly supported d = 5 data onto the non-radiative spaces.

For each R the projected norm plus twice the exterior energy reproduces
the full energy; the residual of that identity is printed.
"""

from wavecone.energy import ext_energy_physical
from wavecone.fields import Bump, Field, HarmonicComponent, WaveData, h1_norm, l2_norm
from wavecone.kernelspaces import admissible_exponents, channel_identity_residual, projection_norm_sq


def main():
    d = 5
    u = WaveData(
        Field(d, (HarmonicComponent(1, Bump(1, 0.0, 2.0)),)),
        Field(d, (HarmonicComponent(0, Bump(0, 0.5, 1.5, 0.3)),)),
    )
    for kind in ("L2", "H1"):
        print(f"admissible exponents l=0..2 ({kind}):", [admissible_exponents(d, l, kind).exponents for l in range(3)])
    total = h1_norm(u.u0) ** 2 + l2_norm(u.u1) ** 2
    print(f"total energy {total:.6f}")
    for R in (0.25, 0.5, 1.0, 2.0):
        P = projection_norm_sq(u, R)
        E = ext_energy_physical(u, R)
        print(f"R = {R:4.2f}  projected {P:.6f}  exterior {E:.6f}  sum {P + 2 * E:.6f}  residual {channel_identity_residual(u, R):.1e}")


if __name__ == "__main__":
    main()
