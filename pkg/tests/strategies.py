from __future__ import annotations

from hypothesis import strategies as st


def complexes(radius: float, min_radius: float = 0.0):
    part = st.floats(-radius, radius, allow_nan=False, allow_infinity=False)
    return st.builds(complex, part, part).filter(lambda c: min_radius <= abs(c) <= radius)
