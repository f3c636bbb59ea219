from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given

from henon_brody.errors import GreenUndecided
from henon_brody.escape import (
    BOUNDED,
    CLASS_CODES,
    ESCAPING,
    EscapeRecord,
    Section,
    boundary_mask,
    classify_backward,
    classify_forward,
    classify_grid,
    filtration_radius,
    green_plus,
    sample_Jplus,
)
from henon_brody.henon import DEFAULT_MAP, AffinePoint, HenonMap

from strategies import complexes


def _quadratic_radius(c: float, a: float) -> float:
    # R^2 - |c| >= (2 + |a|) R for real negative c: positive root of the quadratic
    b = 2 + abs(a)
    return (b + math.sqrt(b * b + 4 * abs(c))) / 2


@pytest.mark.parametrize("c,a", [(-6, 0.5), (0, 1), (-1, 0.3), (-2.5, 2)])
def test_filtration_radius_matches_closed_form(c, a):
    R = filtration_radius(HenonMap.quadratic(c, a)).R
    assert R == pytest.approx(_quadratic_radius(c, a), rel=1e-9)


def test_default_radius_frozen():
    assert filtration_radius(DEFAULT_MAP).R == pytest.approx(4.0, rel=1e-9)


@given(complexes(40), complexes(40))
def test_filtration_inequality(z, w):
    f = DEFAULT_MAP
    R = filtration_radius(f).R
    if abs(z) >= R and abs(w) <= abs(z):
        fz, fw = f.forward(z, w)
        assert abs(fz) >= 2 * abs(z) * (1 - 1e-12)
        assert abs(fz) >= abs(fw)


def test_record_invariants():
    with pytest.raises(ValueError):
        EscapeRecord(ESCAPING)
    with pytest.raises(ValueError):
        EscapeRecord(BOUNDED, green_plus=1.0)


def test_simple_classifications(f, orbit):
    assert classify_forward(f, AffinePoint(10, 0)).n_escape == 0
    assert classify_forward(f, orbit.P).classification == BOUNDED
    assert classify_backward(f, orbit.P).classification == BOUNDED
    assert classify_backward(f, AffinePoint(0, 1e3)).classification == ESCAPING
    assert classify_forward(f, AffinePoint(0.5, 0)).classification == ESCAPING


def test_green_values(f, orbit):
    assert green_plus(f, orbit.P) == 0.0
    g = green_plus(f, AffinePoint(1e6, 0))
    assert g == pytest.approx(math.log(1e6), abs=1e-6)
    # beyond binary64: the estimate continues in mpmath
    assert green_plus(f, AffinePoint(1e120, 0)) == pytest.approx(math.log(1e120), rel=1e-9)
    with pytest.raises(GreenUndecided):
        green_plus(f, AffinePoint(0.5, 0), n_max=1)


@given(complexes(6), complexes(6))
def test_green_functional_equation(z, w):
    f = DEFAULT_MAP
    x = AffinePoint(z, w)
    if classify_forward(f, x).classification != ESCAPING:
        return
    g = green_plus(f, x)
    assert g > 0
    assert abs(green_plus(f, AffinePoint(*f.forward(z, w))) - 2 * g) <= 1e-5


def test_grid_matches_scalar(f):
    rng = np.random.default_rng(1)
    z = rng.uniform(-4, 4, (12, 12)) + 1j * rng.uniform(-2, 2, (12, 12))
    w = rng.uniform(-4, 4, (12, 12)) + 1j * rng.uniform(-2, 2, (12, 12))
    z[0, 0], w[0, 0] = 3.3117376914898995, 3.3117376914898995
    codes, n_esc = classify_grid(f, z, w)
    for i in np.ndindex(z.shape):
        rec = classify_forward(f, AffinePoint(complex(z[i]), complex(w[i])))
        assert codes[i] == CLASS_CODES[rec.classification]
        assert n_esc[i] == (rec.n_escape if rec.n_escape is not None else -1)


def test_boundary_mask():
    codes = np.zeros((4, 4), dtype=np.int8)
    codes[:, 2:] = 1
    mask = boundary_mask(codes)
    assert mask[:, 1].all() and mask[:, 2].all()
    assert not mask[:, 0].any() and not mask[:, 3].any()


def test_sample_Jplus_through_fixed_point(f, orbit):
    # odd grid puts s = 0, the fixed point itself, on a grid node
    section = Section(base=orbit.P, direction=AffinePoint(1, 1), half_width=2, half_height=2)
    pts = sample_Jplus(f, section, (41, 41))
    assert pts
    assert any(abs(x.z - orbit.P.z) < 0.2 for x in pts)
    assert classify_forward(f, AffinePoint(orbit.P.z + 2, orbit.P.w + 2)).classification == ESCAPING


def test_sample_Jplus_empty_in_escape_region(f):
    section = Section(base=AffinePoint(100, 0), direction=AffinePoint(1, 0), half_width=1, half_height=1)
    assert sample_Jplus(f, section, (8, 8)) == []


@given(complexes(5), complexes(5))
def test_escaping_is_stable_under_larger_n_max(z, w):
    f = DEFAULT_MAP
    x = AffinePoint(z, w)
    short = classify_forward(f, x, n_max=20)
    long = classify_forward(f, x, n_max=200)
    if short.classification == ESCAPING:
        assert long.classification == ESCAPING and long.n_escape == short.n_escape
    if long.classification == BOUNDED:
        assert short.classification != ESCAPING


def test_escaping_compact_converges_to_I_minus(f):
    from henon_brody.fubini_study import chordal_distance
    from henon_brody.henon import I_MINUS, ProjectivePoint, eval_forward_proj

    rng = np.random.default_rng(3)
    for _ in range(20):
        x = ProjectivePoint(complex(*rng.uniform(5, 8, 2)), complex(*rng.uniform(-1, 1, 2)), 1)
        for _ in range(12):
            x = eval_forward_proj(f, x)
        assert chordal_distance(x, I_MINUS) <= 1e-6


def test_periodic_points_bounded_both_ways(f):
    from henon_brody.saddle import find_periodic

    for N in (1, 2, 3):
        for o in find_periodic(f, N):
            for x in o.points:
                assert classify_forward(f, x).classification == BOUNDED
                assert classify_backward(f, x).classification == BOUNDED
