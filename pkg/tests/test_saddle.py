from __future__ import annotations

import cmath

import pytest

from henon_brody.errors import NotContracting
from henon_brody.henon import DEFAULT_MAP, AffinePoint, HenonMap, iterate
from henon_brody.saddle import estimate_hyperbolicity, find_periodic, make_orbit


def test_fixed_points_quadratic_oracle(f):
    orbits = find_periodic(f, 1)
    roots = sorted((((1 + f.a) + s * cmath.sqrt((1 + f.a) ** 2 + 24)) / 2 for s in (1, -1)), key=lambda r: r.real)
    assert [round(o.P.z.real, 10) for o in orbits] == [round(r.real, 10) for r in roots]
    for o in orbits:
        assert o.is_saddle
        assert abs(o.lambda_s * o.lambda_u - f.a) < 1e-10


def test_frozen_multipliers(orbit):
    # oracle: eigenvalues of [[2 z1, -a], [1, 0]] at z1 = (1.5 + sqrt(26.25)) / 2
    z1 = (1.5 + 26.25**0.5) / 2
    disc = cmath.sqrt(z1 * z1 - 0.5)
    assert orbit.P.z == pytest.approx(3.3117376914898995, abs=1e-12)
    assert abs(orbit.lambda_s) == pytest.approx(abs(z1 - disc), rel=1e-12)
    assert abs(orbit.lambda_u) == pytest.approx(abs(z1 + disc), rel=1e-12)
    assert abs(orbit.lambda_s) == pytest.approx(0.0763696, abs=1e-7)
    assert abs(orbit.lambda_u) == pytest.approx(6.54711, abs=1e-5)


def test_period_two(f):
    # z^2 + (1 + a) z + (1 + a)^2 + c = 0 gives the 2-cycle z-coordinates
    orbits = find_periodic(f, 2)
    assert len(orbits) == 1
    zs = sorted(x.z.real for x in orbits[0].points)
    disc = (f.a + 1) ** 2 - 4 * ((1 + f.a) ** 2 + complex(f.p.coefficients[0]))
    roots = sorted((((-(1 + f.a) + s * cmath.sqrt(disc)) / 2).real for s in (1, -1)))
    assert zs == pytest.approx(roots, abs=1e-10)
    assert zs == pytest.approx([-2.82665596573, 1.32665596573], abs=1e-10)
    o = orbits[0]
    assert abs(o.lambda_s * o.lambda_u - f.a**2) < 1e-10
    assert o.residual < 1e-12


def test_newton_quadratic_convergence(f):
    for N in (1, 2, 3):
        for o in find_periodic(f, N):
            if o.newton_ratio is not None:
                assert o.newton_ratio < 1e3


def test_orbits_are_periodic_and_distinct(f):
    for N in (3, 4):
        orbits = find_periodic(f, N)
        assert orbits
        for o in orbits:
            back = iterate(f, o.P, N)
            assert abs(back.z - o.P.z) + abs(back.w - o.P.w) < 1e-9
        assert len({round(o.P.z.real, 6) + 1j * round(o.P.z.imag, 6) for o in orbits}) == len(orbits)


def test_deterministic_ordering(f):
    assert find_periodic(f, 3) == find_periodic(f, 3)


def test_period_validation(f):
    with pytest.raises(ValueError):
        find_periodic(f, 0)


def test_hyperbolicity_estimate(f, orbit):
    est = estimate_hyperbolicity(f, orbit, depth=40)
    assert est.lam == pytest.approx(abs(orbit.lambda_s))
    assert est.c < 2
    for n in range(1, 41):
        assert est.norms[n] <= est.c * est.lam**n * (1 + 1e-9)


def test_non_saddle_rejected():
    # p = z^2 + 0.1, a = 0.1: the small fixed point is attracting
    g = HenonMap.quadratic(0.1, 0.1)
    sink = [o for o in find_periodic(g, 1) if not o.is_saddle]
    assert sink
    with pytest.raises(NotContracting):
        estimate_hyperbolicity(g, sink[0], depth=5)


def test_make_orbit_recovers_orbit(f, orbit):
    again = make_orbit(f, list(orbit.points))
    assert again.lambda_s == pytest.approx(orbit.lambda_s)
    assert again.eigvec_s == pytest.approx(orbit.eigvec_s)
