from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from henon_brody.acceptance import default_orbit
from henon_brody.errors import PrecisionExhausted, ResonanceConditioning
from henon_brody.escape import BOUNDED, classify_forward, green_plus
from henon_brody.fubini_study import TangentSample, fs_speed
from henon_brody.henon import DEFAULT_MAP, AffinePoint, ProjectivePoint
from henon_brody.manifold import (
    build_local_series,
    CONJUGACY_TOL,
    conjugacy_residual,
    eval_global,
    eval_global_array,
    leaf_membership_check,
)
from henon_brody.saddle import SaddleOrbit


def _dist(x, y) -> float:
    return math.hypot(abs(x[0] - y[0]), abs(x[1] - y[1]))


def test_chart_normalization(chart, orbit):
    c1 = chart.coeffs[1]
    assert np.linalg.norm(c1) == pytest.approx(1.0, abs=1e-15)
    # tangency: the complex cross term with eigvec_s vanishes
    vs = orbit.eigvec_s
    assert abs(c1[0] * vs[1] - c1[1] * vs[0]) <= 1e-12
    assert chart.rho == 1.0
    assert math.log2(chart.rho).is_integer()


def test_local_conjugacy_frozen(chart):
    # frozen from the build on the default map (oracle: direct substitution)
    samples = [chart.rho * np.exp(2j * np.pi * k / 100) for k in range(100)]
    res = conjugacy_residual(chart, samples)
    assert res <= CONJUGACY_TOL
    assert res < 1e-13


def test_origin_and_local_branch(chart, orbit):
    assert eval_global(chart, 0) == orbit.P
    for Z in (0.3, 0.5j, -0.99):
        assert eval_global(chart, Z) == AffinePoint(*chart.local(Z))


# hypothesis tests cannot take function-scoped fixtures; the chart is cheap to build
CHART = build_local_series(DEFAULT_MAP, default_orbit(DEFAULT_MAP), 20)


@given(st.floats(-3, 3), st.floats(0, 2 * math.pi))
def test_semigroup(log_r, arg):
    Z = 10**log_r * complex(math.cos(arg), math.sin(arg))
    x = eval_global(CHART, Z)
    fx = DEFAULT_MAP.forward(*x)
    y = eval_global(CHART, CHART.lambda_s * Z)
    assert _dist(fx, y) <= 1e-8 * (1 + x.norm())


def test_derivative_matches_finite_difference(chart):
    for Z in (0.2 + 0.1j, 7 - 3j, 150j):
        x, (dz, dw) = eval_global(chart, Z, derivative=True)
        h = 1e-6 * max(1, abs(Z))
        xp, xm = eval_global(chart, Z + h), eval_global(chart, Z - h)
        fd = ((xp.z - xm.z) / (2 * h), (xp.w - xm.w) / (2 * h))
        assert _dist(fd, (dz, dw)) <= 1e-5 * (1 + math.hypot(abs(dz), abs(dw)))


def test_nondegenerate_speed_at_origin(chart):
    x, v = eval_global(chart, 0, derivative=True)
    assert fs_speed(TangentSample.from_affine(x, v)) > 0


def test_array_matches_scalar(chart):
    Z = np.array([0, 0.5, 3 + 4j, -40j, 900, 1e4 + 1e4j])
    z, w, dz, dw, ok = eval_global_array(chart, Z)
    assert ok.all()
    for i, zz in enumerate(Z):
        x, (a, b) = eval_global(chart, complex(zz), derivative=True)
        assert _dist((z[i], w[i]), x) <= 1e-12 * (1 + x.norm())
        assert _dist((dz[i], dw[i]), (a, b)) <= 1e-12 * (1 + math.hypot(abs(a), abs(b)))


def test_overflow_switches_to_projective(chart):
    Z = 1e12
    _, _, _, _, ok = eval_global_array(chart, np.array([Z]))
    assert not ok[0]
    out = eval_global(chart, Z, fallback_bits=200)
    assert isinstance(out, ProjectivePoint)
    with mpmath.workprec(200):
        hi = eval_global(chart, Z, bits=200)
        ref = ProjectivePoint(hi.z, hi.w, mpmath.mpc(1))
    assert out.is_close(ref, 1e-20)


def test_mp_agrees_with_binary64(chart):
    Z = 250 - 40j
    lo = eval_global(chart, Z)
    with mpmath.workprec(120):
        hi = eval_global(chart, Z, bits=120)
    assert _dist(lo, (complex(hi.z), complex(hi.w))) <= 1e-9 * (1 + lo.norm())


def test_precision_exhausted(chart):
    with pytest.raises(PrecisionExhausted):
        eval_global(chart, 1e30, bits=60)


def test_resonance_guard(f, orbit):
    from dataclasses import replace

    with pytest.raises(ResonanceConditioning):
        build_local_series(f, replace(orbit, is_saddle=False))


def test_leaf_membership(f, orbit, chart):
    at_P = leaf_membership_check(f, orbit.P, orbit)
    assert at_P.distances[0] == 0
    # the orbit residual (~1e-14) is amplified by |lambda_u| per step
    assert at_P.max_distance <= orbit.residual * abs(orbit.lambda_u) ** 9
    x = eval_global(chart, 10)
    leaf = leaf_membership_check(f, x, orbit, steps=8, burn_in=2)
    assert abs(leaf.decay_ratio - abs(orbit.lambda_s)) <= 0.2 * abs(orbit.lambda_s)
    vu = orbit.eigvec_u
    off = AffinePoint(orbit.P.z + 1e-3 * vu[0], orbit.P.w + 1e-3 * vu[1])
    grow = leaf_membership_check(f, off, orbit, steps=3)
    assert grow.distances[-1] > grow.distances[0]
    assert grow.decay_ratio > 1


@pytest.mark.parametrize("Z", [1, 10j, -75 + 30j, 1e3, -1e3j])
def test_leaf_lies_in_K_plus(f, chart, Z):
    # forward orbits of far leaf points cancel digits; run them at ample precision
    with mpmath.workprec(256):
        x = eval_global(chart, Z, bits=256)
        assert classify_forward(f, x).classification == BOUNDED
        assert green_plus(f, x) == 0.0


def test_depth_is_minimal(chart):
    for Z in (0.5, 1.5, 30, 1e6):
        m = chart.depth(Z)
        assert abs(chart.lambda_s) ** m * abs(Z) <= chart.rho
        assert m == 0 or abs(chart.lambda_s) ** (m - 1) * abs(Z) > chart.rho


def test_orbit_type(orbit):
    assert isinstance(orbit, SaddleOrbit)
