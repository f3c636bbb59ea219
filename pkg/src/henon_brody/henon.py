"""Generalized Hénon maps f(z, w) = (p(z) - a w, z), their inverses and
projective extensions.

All evaluation routines accept Python complex scalars, numpy complex arrays or
mpmath ``mpc`` values; binary64 inputs are guarded against leaving the safe
range (``ESCAPE_MODULUS``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EscapedRange, IndeterminatePoint
from .precision import ESCAPE_MODULUS, is_mp


@dataclass(frozen=True)
class Polynomial:
    """Monic polynomial with coefficients ``c_0 .. c_d`` (``c_d == 1``)."""

    coefficients: tuple[complex, ...]

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if len(coeffs) < 3:
            raise ValueError("degree must be at least 2")
        if coeffs[-1] != 1:
            raise ValueError(f"polynomial must be monic, leading coefficient is {coeffs[-1]}")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z):
        acc = 1
        for c in reversed(self.coefficients[:-1]):
            acc = acc * z + c
        return acc

    def derivative(self, z):
        d = self.degree
        acc = d
        for k in range(d - 1, 0, -1):
            acc = acc * z + k * self.coefficients[k]
        return acc

    def homogeneous(self, z, t):
        """t^d p(z/t), evaluated without dividing (valid at t = 0)."""
        acc = 1
        tk = t
        for c in reversed(self.coefficients[:-1]):
            acc = acc * z + c * tk
            tk = tk * t
        return acc

    def __str__(self) -> str:
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coefficients[k]
            if c == 0:
                continue
            coef = f"{c.real:g}" if c.imag == 0 else f"({c.real:g}{c.imag:+g}i)"
            if k == 0:
                terms.append(coef)
            elif c == 1:
                terms.append("z" if k == 1 else f"z^{k}")
            else:
                terms.append(f"{coef}*z" if k == 1 else f"{coef}*z^{k}")
        return " + ".join(terms).replace("+ -", "- ")


class AffinePoint(NamedTuple):
    z: complex
    w: complex

    def norm(self):
        return _hypot(self.z, self.w)

    def __sub__(self, other):  # type: ignore[override]
        return AffinePoint(self.z - other.z, self.w - other.w)


def _hypot(z, w):
    if is_mp(z) or is_mp(w):
        import mpmath

        return mpmath.sqrt(abs(z) ** 2 + abs(w) ** 2)
    return float(np.hypot(abs(z), abs(w)))


@dataclass(frozen=True)
class ProjectivePoint:
    """[z : w : t], normalized so the largest-modulus coordinate equals 1."""

    z: complex
    w: complex
    t: complex

    def __post_init__(self):
        coords = (self.z, self.w, self.t)
        k = max(range(3), key=lambda i: abs(coords[i]))
        pivot = coords[k]
        if pivot == 0:
            raise ValueError("[0:0:0] is not a projective point")
        normed = [c / pivot for c in coords]
        normed[k] = normed[k] * 0 + 1
        object.__setattr__(self, "z", normed[0])
        object.__setattr__(self, "w", normed[1])
        object.__setattr__(self, "t", normed[2])

    @classmethod
    def from_affine(cls, x: AffinePoint) -> ProjectivePoint:
        return cls(x.z, x.w, 1)

    @property
    def coords(self) -> tuple:
        return (self.z, self.w, self.t)

    @property
    def pivot(self) -> int:
        coords = self.coords
        return max(range(3), key=lambda i: abs(coords[i]))

    @property
    def chart(self) -> str:
        return "affine" if self.t != 0 else "infinity"

    def affine(self) -> AffinePoint:
        if self.t == 0:
            raise ValueError("point lies on the line at infinity")
        return AffinePoint(self.z / self.t, self.w / self.t)

    def is_close(self, other: ProjectivePoint, tol: float = 1e-12) -> bool:
        from .fubini_study import chordal_distance

        return chordal_distance(self, other) <= tol


I_PLUS = ProjectivePoint(0, 1, 0)
I_MINUS = ProjectivePoint(1, 0, 0)


class Jacobian2(NamedTuple):
    """2x2 complex matrix [[a11, a12], [a21, a22]]."""

    a11: complex
    a12: complex
    a21: complex
    a22: complex

    @classmethod
    def identity(cls) -> Jacobian2:
        return cls(1, 0, 0, 1)

    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a21

    def trace(self):
        return self.a11 + self.a22

    def __matmul__(self, other: Jacobian2) -> Jacobian2:  # type: ignore[override]
        return Jacobian2(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )

    def apply(self, v):
        return (self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1])

    def to_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]], dtype=complex)


@dataclass(frozen=True)
class HenonMap:
    p: Polynomial
    a: complex

    def __post_init__(self):
        a = complex(self.a)
        if a == 0:
            raise ValueError("a must be a non-zero constant")
        object.__setattr__(self, "a", a)

    @classmethod
    def quadratic(cls, c: complex, a: complex) -> HenonMap:
        """p(z) = z^2 + c."""
        return cls(Polynomial((c, 0, 1)), a)

    @property
    def d(self) -> int:
        return self.p.degree

    def forward(self, z, w):
        return self.p(z) - self.a * w, z

    def inverse(self, z, w):
        return w, (self.p(w) - z) / self.a

    def forward_tangent(self, z, w, dz, dw):
        return self.p(z) - self.a * w, z, self.p.derivative(z) * dz - self.a * dw, dz

    def inverse_tangent(self, z, w, dz, dw):
        return w, (self.p(w) - z) / self.a, dw, (self.p.derivative(w) * dw - dz) / self.a

    def __str__(self) -> str:
        a = self.a
        a_txt = f"{a.real:g}" if a.imag == 0 else f"{a.real:g}{a.imag:+g}i"
        return f"p = {self.p}; a = {a_txt}"


DEFAULT_MAP = HenonMap.quadratic(-6, 0.5)


def _guard(z, w, step: int | None = None):
    if is_mp(z) or isinstance(z, np.ndarray):
        return
    if not (abs(z) <= ESCAPE_MODULUS and abs(w) <= ESCAPE_MODULUS):
        raise EscapedRange("coordinates left the binary64-safe range", step=step)


def eval_forward(f: HenonMap, x: AffinePoint) -> AffinePoint:
    out = AffinePoint(*f.forward(x.z, x.w))
    _guard(*out)
    return out


def eval_inverse(f: HenonMap, x: AffinePoint) -> AffinePoint:
    out = AffinePoint(*f.inverse(x.z, x.w))
    _guard(*out)
    return out


def _proj_forward_raw(f: HenonMap, z, w, t):
    d = f.d
    td1 = t ** (d - 1)
    return f.p.homogeneous(z, t) - f.a * w * td1, z * td1, t ** d


def _proj_inverse_raw(f: HenonMap, z, w, t):
    d = f.d
    td1 = t ** (d - 1)
    return w * td1, (f.p.homogeneous(w, t) - z * td1) / f.a, t ** d


def eval_forward_proj(f: HenonMap, x: ProjectivePoint) -> ProjectivePoint:
    if x.z == 0 and x.t == 0:
        raise IndeterminatePoint("the forward extension is undefined at I+ = [0:1:0]")
    return ProjectivePoint(*_proj_forward_raw(f, *x.coords))


def eval_inverse_proj(f: HenonMap, x: ProjectivePoint) -> ProjectivePoint:
    if x.w == 0 and x.t == 0:
        raise IndeterminatePoint("the inverse extension is undefined at I- = [1:0:0]")
    return ProjectivePoint(*_proj_inverse_raw(f, *x.coords))


def jacobian(f: HenonMap, x: AffinePoint) -> Jacobian2:
    return Jacobian2(f.p.derivative(x.z), -f.a, 1, 0)


def inverse_jacobian(f: HenonMap, x: AffinePoint) -> Jacobian2:
    """Derivative of f^-1 evaluated at x (a point in the image)."""
    return Jacobian2(0, 1, -1 / f.a, f.p.derivative(x.w) / f.a)


def iterate(f: HenonMap, x: AffinePoint, n: int, with_jacobian: bool = False):
    """n-fold composition (negative n uses the inverse).

    With ``with_jacobian`` returns ``(point, J)`` where J is the product of the
    step Jacobians in orbit order.
    """
    J = Jacobian2.identity()
    step_map = eval_forward if n >= 0 else eval_inverse
    step_jac = jacobian if n >= 0 else inverse_jacobian
    for k in range(abs(n)):
        if with_jacobian and n >= 0:
            J = step_jac(f, x) @ J
        try:
            x = step_map(f, x)
        except EscapedRange as exc:
            raise EscapedRange(exc.message, step=k + 1) from None
        if with_jacobian and n < 0:
            J = step_jac(f, x) @ J
    return (x, J) if with_jacobian else x


def orbit_jacobian(f: HenonMap, points) -> Jacobian2:
    """Df^N at points[0] for the cyclic orbit ``points``."""
    J = Jacobian2.identity()
    for x in points:
        J = jacobian(f, x) @ J
    return J
