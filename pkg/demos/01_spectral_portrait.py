"""Portrait of the cosine eigenbasis behind the moving string.

Prints the eigenvalue ladder for a few widths, checks that the spectral
kernel reproduces the random-walk matrix power, and evaluates the exact
cosecant-square eigenvalue sum that normalizes everything downstream.
"""

import numpy as np

from polymerlab import (build_basis, cosecant_square_sum, green_function,
                        normalizing_constant_c0, transition_matrix_power)


def main():
    for J in (4, 8, 16):
        b = build_basis(J)
        print(f"J={J:3d}  rho_m =", " ".join(f"{r:+.4f}" for r in b.rho))
    print()

    b = build_basis(12)
    for t in (1, 4, 32):
        gap = np.max(np.abs(green_function(b, t)
                            - transition_matrix_power(12, t)))
        print(f"kernel vs P^{t:<3d} max abs gap = {gap:.2e}")
    print()

    print("sum csc^2 identity, worst error over J = 2..64:")
    worst = max(abs(cosecant_square_sum(J) - (J * J - 1) / 3.0)
                for J in range(2, 65))
    print(f"  {worst:.2e}")
    print(f"c0(8)  = {normalizing_constant_c0(8):.12g}")
    print(f"check: c0 * sum 1/(1-rho^2) over modes = "
          f"{normalizing_constant_c0(8) * np.sum(1.0 / (1.0 - build_basis(8).rho[1:] ** 2)):.12g}")


if __name__ == "__main__":
    main()
