"""Example entire curves in P^2 and their Fubini-Study speed profiles.

Every family is written as X_k(theta) = A_k(theta) exp(E_k(theta)) with
polynomial A_k, E_k. Speeds are computed after dividing the lift by the
dominant exponential, which leaves the projective class (and the speed)
unchanged and keeps everything inside binary64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy
from numpy.polynomial import Polynomial as NPoly

from .fubini_study import TangentSample, fs_speed_lift
from .henon import ProjectivePoint

FAMILIES = ("poly-graph", "exp-pair", "exp-quadratic", "graph-exp-power")
DEFAULT_RADII = (1, 2, 5, 10, 20, 30, 50)
DEFAULT_ANGLES = 720
PLATEAU_RADIUS = 20
PLATEAU_TOL = 0.01


@dataclass(frozen=True)
class CurveSpec:
    family: str
    p: tuple[complex, ...] = (0, 0, 1)  # ascending coefficients
    q: tuple[complex, ...] = (1,)
    alpha: complex = -1
    n: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "graph-exp-power" and self.n < 1:
            raise ValueError("graph-exp-power needs n >= 1")
        if self.family in ("poly-graph", "exp-pair") and not any(self.p):
            raise ValueError("p must be a non-zero polynomial")
        if self.family == "exp-pair" and not any(self.q):
            raise ValueError("q must be a non-zero polynomial")

    @property
    def label(self) -> str:
        if self.family == "graph-exp-power":
            return f"graph-exp-power(n={self.n})"
        return self.family

    def describe(self) -> str:
        if self.family == "poly-graph":
            return f"poly-graph p={_poly_text(self.p)}"
        if self.family == "exp-pair":
            return f"exp-pair p={_poly_text(self.p)} q={_poly_text(self.q)} alpha={_num_text(self.alpha)}"
        return self.label

    def components(self):
        """[(A_k, A_k', E_k, E_k')] as numpy polynomials, k = 0, 1, 2."""
        return _components(self)

    def _raw_components(self):
        one, zero = NPoly([1]), NPoly([0])
        z = NPoly([0, 1])
        if self.family == "poly-graph":
            return [(z, zero), (NPoly(self.p), zero), (one, zero)]
        if self.family == "exp-pair":
            return [(NPoly(self.p), z), (NPoly(self.q), self.alpha * z), (one, zero)]
        if self.family == "exp-quadratic":
            return [(one, z), (one, NPoly([0, 0, 1j])), (one, zero)]
        return [(z, zero), (one, z**self.n), (one, zero)]

    def sympy_components(self, t: sympy.Symbol):
        def poly(c):
            return sum(sympy.sympify(complex(ck)) * t**k for k, ck in enumerate(c))

        if self.family == "poly-graph":
            return [t, poly(self.p), sympy.Integer(1)]
        if self.family == "exp-pair":
            return [poly(self.p) * sympy.exp(t), poly(self.q) * sympy.exp(sympy.sympify(complex(self.alpha)) * t),
                    sympy.Integer(1)]
        if self.family == "exp-quadratic":
            return [sympy.exp(t), sympy.exp(sympy.I * t**2), sympy.Integer(1)]
        return [t, sympy.exp(t**self.n), sympy.Integer(1)]


@lru_cache(maxsize=64)
def _components(spec: CurveSpec):
    return [(A, A.deriv(), E, E.deriv()) for A, E in spec._raw_components()]


def _num_text(c) -> str:
    c = complex(c)
    if c.imag == 0:
        return f"{c.real:g}"
    if c.real == 0:
        return f"{c.imag:g}i"
    return f"({c.real:g}{c.imag:+g}i)"


def _poly_text(coeffs) -> str:
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = complex(coeffs[k])
        if c == 0:
            continue
        mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
        coef = _num_text(c)
        if mono and coef == "1":
            coef = ""
        elif mono:
            coef += "*"
        terms.append(coef + mono)
    return " + ".join(terms).replace("+ -", "- ") or "0"


def _lift_arrays(spec: CurveSpec, thetas: np.ndarray):
    """Scaled lift X and velocity dX, shape (3, k), scaled by exp(-max Re E)."""
    thetas = np.asarray(thetas, dtype=complex)
    comps = spec.components()
    E = np.stack([e(thetas) for _, _, e, _ in comps]).astype(complex)
    top = np.max(E.real, axis=0)
    X, dX = [], []
    for (A, dA, _, dE), Ek in zip(comps, E):
        factor = np.exp(Ek - top)
        a = A(thetas)
        X.append(a * factor)
        dX.append((dA(thetas) + a * dE(thetas)) * factor)
    X, dX = np.array(X, dtype=complex), np.array(dX, dtype=complex)
    s = np.max(np.abs(X), axis=0)
    s = np.where(s == 0, 1.0, s)
    return X / s, dX / s


def speeds(spec: CurveSpec, thetas) -> np.ndarray:
    X, dX = _lift_arrays(spec, np.atleast_1d(thetas))
    wedge = sum(np.abs(X[i] * dX[j] - X[j] * dX[i]) ** 2 for i, j in ((0, 1), (0, 2), (1, 2)))
    return np.sqrt(wedge) / np.sum(np.abs(X) ** 2, axis=0)


def eval_curve(spec: CurveSpec, theta: complex) -> TangentSample:
    """Point and exact velocity, in the chart of the largest coordinate."""
    X, dX = _lift_arrays(spec, np.array([theta]))
    X, dX = X[:, 0], dX[:, 0]
    return TangentSample.from_lift(tuple(complex(c) for c in X), tuple(complex(c) for c in dX))


def naive_point(spec: CurveSpec, theta: complex) -> ProjectivePoint:
    """Unscaled evaluation; overflows for large exponents."""
    X = [A(theta) * np.exp(e(theta)) for A, _, e, _ in spec.components()]
    return ProjectivePoint(*(complex(c) for c in X))


class SpecCurve:
    """Adapter exposing a CurveSpec as a vectorized curve evaluator."""

    def __init__(self, spec: CurveSpec):
        self.spec = spec

    def __call__(self, theta: complex) -> TangentSample:
        return eval_curve(self.spec, theta)

    def speeds(self, thetas) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=complex)
        return speeds(self.spec, thetas.ravel()).reshape(thetas.shape)


def circle_max(spec: CurveSpec, radius: float, grid: int = DEFAULT_ANGLES, starts: int = 8,
               min_step: float = 1e-12):
    """Max speed on |theta| = radius: angular scan plus compass refinement.

    Speed spikes sit where two lift coordinates have equal modulus and can be
    far narrower than the grid spacing, so the balance angles are located
    separately (their defining function is smooth) and searched as well.
    """
    ang = 2 * np.pi * np.arange(grid) / grid
    vals = speeds(spec, radius * np.exp(1j * ang))
    order = np.argsort(-vals, kind="stable")
    fun = lambda u: float(speeds(spec, np.array([radius * np.exp(1j * u)]))[0])
    seeds = [(float(ang[k]), float(vals[k])) for k in order[:starts]]
    seeds += [(u, fun(u)) for u in balance_angles(spec, radius, grid)]
    best, best_angle = float(vals[order[0]]), float(ang[order[0]])
    for u0, v0 in seeds:
        val, u = _compass_1d(fun, u0, v0, 2 * np.pi / grid, min_step)
        if val > best:
            best, best_angle = val, u % (2 * np.pi)
    return best, best_angle


def _log_moduli(spec: CurveSpec, thetas: np.ndarray) -> np.ndarray:
    """log |A_k| + Re E_k for each coordinate, shape (3, k)."""
    with np.errstate(divide="ignore"):
        return np.array([np.log(np.abs(A(thetas))) + E(thetas).real
                         for A, _, E, _ in spec.components()])


def balance_angles(spec: CurveSpec, radius: float, grid: int = DEFAULT_ANGLES,
                   iterations: int = 60) -> list[float]:
    """Angles on |theta| = radius where two coordinates have equal modulus."""
    ang = 2 * np.pi * np.arange(grid + 1) / grid
    L = _log_moduli(spec, radius * np.exp(1j * ang))
    out = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        g = L[i] - L[j]
        if not np.all(np.isfinite(g)) or np.all(g == 0):
            continue
        for k in np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0):
            lo, hi = ang[k], ang[k + 1]
            glo = g[k]
            for _ in range(iterations):
                mid = 0.5 * (lo + hi)
                gm = _log_moduli(spec, np.array([radius * np.exp(1j * mid)]))
                gm = gm[i, 0] - gm[j, 0]
                if np.sign(gm) == np.sign(glo):
                    lo, glo = mid, gm
                else:
                    hi = mid
            out.append(0.5 * (lo + hi))
    return out


def _compass_1d(fun, x: float, fx: float, step: float, min_step: float):
    while step >= min_step:
        left, right = fun(x - step), fun(x + step)
        if max(left, right) > fx:
            x, fx = (x - step, left) if left > right else (x + step, right)
        else:
            step /= 2
    return fx, x


def sup_speed_profile(spec: CurveSpec, radii=DEFAULT_RADII, grid: int = DEFAULT_ANGLES):
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    return [(float(r), circle_max(spec, r, grid)[0]) for r in radii]


def verdict(profile, plateau_radius: float = PLATEAU_RADIUS, tol: float = PLATEAU_TOL) -> str:
    """'Brody' if the profile does not rise by more than ``tol`` past
    ``plateau_radius``, 'non-Brody' otherwise (at the scanned resolution)."""
    ref = [s for r, s in profile if r <= plateau_radius]
    tail = [s for r, s in profile if r >= plateau_radius]
    if not ref or not tail:
        raise ValueError("profile must straddle the plateau radius")
    base = ref[-1]
    return "Brody" if max(tail) <= (1 + tol) * base else "non-Brody"


def affine_reparam_check(spec: CurveSpec, alpha: complex, beta: complex, samples: int = 100,
                         radius: float = 2.0, seed: int = 0) -> float:
    """max |speed(psi o A, z) - |alpha| speed(psi, alpha z + beta)| / (1 + |alpha| speed(...)).

    The composite's velocity comes from symbolic differentiation of
    psi(alpha z + beta); the right-hand side from the numeric evaluator.
    """
    if alpha == 0:
        raise ValueError("alpha must be non-zero")
    t, z = sympy.symbols("t z")
    comps = spec.sympy_components(t)
    A = sympy.sympify(complex(alpha)) * z + sympy.sympify(complex(beta))
    comp = [c.subs(t, A) for c in comps]
    X = sympy.lambdify(z, comp, "numpy")
    dX = sympy.lambdify(z, [sympy.diff(c, z) for c in comp], "numpy")
    rng = np.random.default_rng(seed)
    zs = radius * np.sqrt(rng.uniform(size=samples)) * np.exp(2j * np.pi * rng.uniform(size=samples))
    worst = 0.0
    for zz in zs:
        Xv = [complex(v) for v in X(zz)]
        dXv = [complex(v) for v in dX(zz)]
        lhs = fs_speed_lift(Xv, dXv)
        rhs = abs(alpha) * float(speeds(spec, np.array([alpha * zz + beta]))[0])
        worst = max(worst, abs(lhs - rhs) / (1 + rhs))
    return worst


def ray_speeds(spec: CurveSpec, direction: complex, bs) -> np.ndarray:
    """Speeds along theta = b * direction."""
    return speeds(spec, np.asarray(bs, dtype=float) * direction)


def default_gallery() -> list[CurveSpec]:
    return [
        CurveSpec("poly-graph", p=(0, 0, 1)),
        CurveSpec("poly-graph", p=(1, -2, 0, 1)),
        CurveSpec("exp-pair", p=(1,), q=(1,), alpha=-1),
        CurveSpec("exp-pair", p=(1, 1), q=(2, 0, 1), alpha=2j),
        CurveSpec("exp-quadratic"),
        CurveSpec("graph-exp-power", n=1),
        CurveSpec("graph-exp-power", n=2),
        CurveSpec("graph-exp-power", n=3),
        CurveSpec("graph-exp-power", n=4),
    ]


def profile_growth(profile) -> float:
    """Largest speed divided by the speed at the smallest radius."""
    return max(s for _, s in profile) / profile[0][1] if profile[0][1] else math.inf
