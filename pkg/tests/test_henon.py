from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given

from henon_brody.errors import EscapedRange, IndeterminatePoint
from henon_brody.henon import (
    DEFAULT_MAP,
    I_MINUS,
    I_PLUS,
    AffinePoint,
    HenonMap,
    Polynomial,
    ProjectivePoint,
    eval_forward_proj,
    eval_inverse_proj,
    inverse_jacobian,
    iterate,
    jacobian,
)

from strategies import complexes


def test_polynomial_validation():
    with pytest.raises(ValueError):
        Polynomial((1, 1))
    with pytest.raises(ValueError):
        Polynomial((0, 0, 2))
    with pytest.raises(ValueError):
        HenonMap(Polynomial((0, 0, 1)), 0)


def test_default_map_text():
    assert str(DEFAULT_MAP) == "p = z^2 - 6; a = 0.5"


@given(complexes(5))
def test_horner_matches_power_sum(z):
    p = Polynomial((1 - 2j, 0.5, -3, 1))
    direct = sum(c * z**k for k, c in enumerate(p.coefficients))
    assert abs(p(z) - direct) <= 1e-12 * (1 + abs(z) ** 3)
    h = 1e-6
    fd = (p(z + h) - p(z - h)) / (2 * h)
    assert abs(p.derivative(z) - fd) <= 1e-5 * (1 + abs(z) ** 2)


@given(complexes(5), complexes(2, 0.1))
def test_homogenization(z, t):
    p = Polynomial((1 - 2j, 0.5, -3, 1))
    assert abs(p.homogeneous(z, t) - t**3 * p(z / t)) <= 1e-10 * (1 + abs(z) + abs(t)) ** 3
    assert p.homogeneous(z, 0) == z**3


@given(complexes(10), complexes(10))
def test_round_trip(z, w):
    f = DEFAULT_MAP
    x = AffinePoint(z, w)
    y = f.inverse(*f.forward(z, w))
    assert math.hypot(abs(y[0] - z), abs(y[1] - w)) <= 1e-12 * (1 + x.norm())
    y = f.forward(*f.inverse(z, w))
    assert math.hypot(abs(y[0] - z), abs(y[1] - w)) <= 1e-11 * (1 + x.norm()) ** 2


@given(complexes(10), complexes(10))
def test_projective_extension_agrees_on_affine_points(z, w):
    f = DEFAULT_MAP
    lhs = eval_forward_proj(f, ProjectivePoint(z, w, 1))
    rhs = ProjectivePoint(*f.forward(z, w), 1)
    assert lhs.is_close(rhs, 1e-12)
    lhs = eval_inverse_proj(f, ProjectivePoint(z, w, 1))
    assert lhs.is_close(ProjectivePoint(*f.inverse(z, w), 1), 1e-12)


@given(complexes(10, 1e-6), complexes(10))
def test_line_at_infinity_collapses_to_I_minus(z, w):
    out = eval_forward_proj(DEFAULT_MAP, ProjectivePoint(z, w, 0))
    assert out.coords == I_MINUS.coords
    out = eval_inverse_proj(DEFAULT_MAP, ProjectivePoint(w, z, 0))
    assert out.coords == I_PLUS.coords


def test_indeterminacy_points():
    with pytest.raises(IndeterminatePoint):
        eval_forward_proj(DEFAULT_MAP, I_PLUS)
    with pytest.raises(IndeterminatePoint):
        eval_inverse_proj(DEFAULT_MAP, I_MINUS)
    assert eval_forward_proj(DEFAULT_MAP, I_MINUS) == I_MINUS
    assert eval_inverse_proj(DEFAULT_MAP, I_PLUS) == I_PLUS


def test_projective_point_normalization():
    q = ProjectivePoint(2, 4j, 1)
    assert q.coords == (-0.5j, 1, -0.25j)
    assert q.pivot == 1
    with pytest.raises(ValueError):
        ProjectivePoint(0, 0, 0)
    with pytest.raises(ValueError):
        ProjectivePoint(1, 0, 0).affine()


@given(complexes(10), complexes(10))
def test_jacobian_determinant_and_inverse(z, w):
    f = DEFAULT_MAP
    x = AffinePoint(z, w)
    J = jacobian(f, x)
    assert abs(J.det() - f.a) <= 1e-12 * (1 + abs(z))
    K = inverse_jacobian(f, AffinePoint(*f.forward(z, w)))
    prod = (K @ J).to_array()
    assert np.allclose(prod, np.eye(2), atol=1e-9 * (1 + abs(z)) ** 2)


def test_iterate_negative_and_jacobian():
    f = DEFAULT_MAP
    x = AffinePoint(0.3 + 0.1j, -0.2j)
    y, J = iterate(f, x, 3, with_jacobian=True)
    back = iterate(f, y, -3)
    assert abs(back.z - x.z) + abs(back.w - x.w) < 1e-10
    assert abs(J.det() - f.a**3) < 1e-9
    h = 1e-7
    yh = iterate(f, AffinePoint(x.z + h, x.w), 3)
    assert abs((yh.z - y.z) / h - J.a11) / abs(J.a11) < 1e-5


def test_escape_guard():
    with pytest.raises(EscapedRange) as info:
        iterate(DEFAULT_MAP, AffinePoint(100, 0), 20)
    assert info.value.context["step"] >= 1
