"""Independent computations behind the frozen values in the test suite.

Each block recomputes a value from a closed form or a separate high-precision
route, without going through the package's evaluators.
"""

from __future__ import annotations

import cmath
import math

import mpmath


def fixed_points(c: complex = -6, a: complex = 0.5):
    # z = w and z^2 + c - a z = z; Df = [[2z, -a], [1, 0]] has eigenvalues z +- sqrt(z^2 - a)
    disc = cmath.sqrt((1 + a) ** 2 - 4 * c)
    for z in (((1 + a) + disc) / 2, ((1 + a) - disc) / 2):
        root = cmath.sqrt(z * z - a)
        ls, lu = sorted((abs(z - root), abs(z + root)))
        print(f"fixed point z = {z.real:.15g}: |lambda_s| = {ls:.10g}, |lambda_u| = {lu:.10g}")


def period_two(c: complex = -6, a: complex = 0.5):
    # z_0 + z_1 = -(1 + a) on the 2-cycle; z^2 + (1 + a) z + (1 + a)^2 + c = 0
    disc = cmath.sqrt((1 + a) ** 2 - 4 * ((1 + a) ** 2 + c))
    print("period-2 z-coordinates:", [f"{((-(1 + a) + s * disc) / 2).real:.12g}" for s in (1, -1)])


def filtration_radius(c: float = -6, a: float = 0.5):
    b = 2 + abs(a)
    print(f"filtration radius: {(b + math.sqrt(b * b + 4 * abs(c))) / 2:.12g}")


def green_far_point():
    # g+(x) = lim 2^-n log ||f^n(x)|| by direct deep iteration at high precision
    with mpmath.workprec(4000):
        z, w = mpmath.mpc(1e6), mpmath.mpc(0)
        for n in range(1, 10):
            z, w = z * z - 6 - w / 2, z
        print(f"g+(1e6, 0) = {float(mpmath.log(abs(z)) / 2**9):.12g}  (log 1e6 = {math.log(1e6):.12g})")


def exp_quadratic_circle(r: float = 30.0, samples: int = 4000):
    # unscaled lift (e^z, e^(iz^2), 1) in mpmath, no exponential factoring
    best = 0.0
    with mpmath.workprec(100):
        for k in range(samples):
            z = r * mpmath.expj(2 * mpmath.pi * k / samples)
            X = (mpmath.exp(z), mpmath.exp(1j * z**2), mpmath.mpc(1))
            dX = (mpmath.exp(z), 2j * z * mpmath.exp(1j * z**2), mpmath.mpc(0))
            wedge = sum(abs(X[i] * dX[j] - X[j] * dX[i]) ** 2 for i, j in ((0, 1), (0, 2), (1, 2)))
            best = max(best, float(mpmath.sqrt(wedge) / sum(abs(x) ** 2 for x in X)))
    print(f"exp-quadratic: max speed on |z| = {r:g} ({samples} angles, mpmath) ~ {best:.6g}")
    # on z = bi both exponentials have modulus 1
    for b in (5, 20):
        print(f"exp-quadratic at z = {b}i: {math.sqrt((2 * b + 1) ** 2 + 1 + 4 * b * b) / 3:.10g}")


if __name__ == "__main__":
    fixed_points()
    period_two()
    filtration_radius()
    green_far_point()
    exp_quadratic_circle()
